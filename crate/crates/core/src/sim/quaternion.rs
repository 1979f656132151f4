//! Scalar-last attitude quaternions.
//!
//! `q = [q1, q2, q3, q4]` with `q4` the scalar part. A quaternion describes the
//! rotation from Hill-frame coordinates to body-frame coordinates; products use
//! the `q ⊗ p` convention in which `A(q ⊗ p) = A(q) A(p)`.

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Result, RtaError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion([0.0, 0.0, 0.0, 1.0]);

    pub fn new(q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        Quaternion([q1, q2, q3, q4])
    }

    /// Rotation by `angle` (rad) about the unit `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Quaternion([axis[0] * s, axis[1] * s, axis[2] * s, c])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Quaternion(self.0.map(|v| v / n))
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn scalar(&self) -> f64 {
        self.0[3]
    }

    /// `[-q_v, q4] / |q|²`
    pub fn inverse(&self) -> Self {
        let n2: f64 = self.0.iter().map(|v| v * v).sum();
        Quaternion([
            -self.0[0] / n2,
            -self.0[1] / n2,
            -self.0[2] / n2,
            self.0[3] / n2,
        ])
    }

    /// `q ⊗ p = [q4 p_v + p4 q_v - q_v × p_v ; q4 p4 - q_v·p_v]`
    pub fn compose(&self, p: &Quaternion) -> Quaternion {
        let [a1, a2, a3, a4] = self.0;
        let [b1, b2, b3, b4] = p.0;
        let cross = [a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1];
        Quaternion([
            a4 * b1 + b4 * a1 - cross[0],
            a4 * b2 + b4 * a2 - cross[1],
            a4 * b3 + b4 * a3 - cross[2],
            a4 * b4 - (a1 * b1 + a2 * b2 + a3 * b3),
        ])
    }
}

/// Kinematic matrix mapping body rates to `2 q̇`.
pub fn xi_matrix(q: &Quaternion) -> [[f64; 3]; 4] {
    let [q1, q2, q3, q4] = q.0;
    [[q4, -q3, q2], [q3, q4, -q1], [-q2, q1, q4], [-q1, -q2, -q3]]
}

/// `Aᵀ(q) v`: a body-frame vector expressed in the Hill frame. Works on
/// unnormalized `q` (the formula is the quadratic attitude-matrix form), which
/// keeps derivatives with respect to every quaternion component well defined.
pub fn body_to_hill<T: Scalar>(q: &[T], v: [f64; 3]) -> [T; 3] {
    let (q1, q2, q3, q4) = (q[0], q[1], q[2], q[3]);
    let vx = T::cst(v[0]);
    let vy = T::cst(v[1]);
    let vz = T::cst(v[2]);
    let diag = q4 * q4 - (q1 * q1 + q2 * q2 + q3 * q3);
    let qv_dot_v = (q1 * vx + q2 * vy + q3 * vz).scale(2.0);
    let two_q4 = q4.scale(2.0);
    let cross = [q2 * vz - q3 * vy, q3 * vx - q1 * vz, q1 * vy - q2 * vx];
    [
        diag * vx + q1 * qv_dot_v + two_q4 * cross[0],
        diag * vy + q2 * qv_dot_v + two_q4 * cross[1],
        diag * vz + q3 * qv_dot_v + two_q4 * cross[2],
    ]
}

/// Express a unit body-frame vector in the Hill frame.
pub fn rotate_to_hill(q: &Quaternion, body_vec: [f64; 3]) -> Result<[f64; 3]> {
    let qn = q.norm();
    if !qn.is_finite() || (qn - 1.0).abs() > 1e-6 {
        return Err(RtaError::Domain(format!(
            "quaternion norm {qn} is not unit"
        )));
    }
    let vn = body_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (vn - 1.0).abs() > 1e-9 {
        return Err(RtaError::Domain(format!(
            "body vector norm {vn} is not unit"
        )));
    }
    let out = body_to_hill(&q.normalized().0, body_vec);
    let on = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(out.map(|v| v / on))
}

/// `A(q) v`: a Hill-frame vector expressed in the body frame.
pub fn rotate_to_body(q: &Quaternion, hill_vec: [f64; 3]) -> [f64; 3] {
    let inv = Quaternion([-q.0[0], -q.0[1], -q.0[2], q.0[3]]);
    body_to_hill(&inv.0, hill_vec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.1 && n < 1.0 {
                return Quaternion(v.map(|x| x / n));
            }
        }
    }

    // Rodrigues rotation of v by angle about axis, built without quaternions.
    fn rodrigues(axis: [f64; 3], angle: f64, v: [f64; 3]) -> [f64; 3] {
        let (s, c) = angle.sin_cos();
        let dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
        let cross = [
            axis[1] * v[2] - axis[2] * v[1],
            axis[2] * v[0] - axis[0] * v[2],
            axis[0] * v[1] - axis[1] * v[0],
        ];
        std::array::from_fn(|i| c * v[i] + (1.0 - c) * axis[i] * dot + s * cross[i])
    }

    #[test]
    fn xi_of_identity_and_basis() {
        assert_eq!(
            xi_matrix(&Quaternion::IDENTITY),
            [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, 0.0]
            ]
        );
        assert_eq!(
            xi_matrix(&Quaternion::new(1.0, 0.0, 0.0, 0.0)),
            [
                [0.0, 0.0, 0.0],
                [0.0, 0.0, -1.0],
                [0.0, 1.0, 0.0],
                [-1.0, 0.0, 0.0]
            ]
        );
    }

    #[test]
    fn xi_columns_are_orthogonal_to_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = random_unit_quaternion(&mut rng);
            let xi = xi_matrix(&q);
            for col in 0..3 {
                let dot: f64 = (0..4).map(|r| xi[r][col] * q.0[r]).sum();
                assert_abs_diff_eq!(dot, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn quarter_turn_about_k_maps_body_x_to_hill_y() {
        let q = Quaternion::from_axis_angle([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let v = rotate_to_hill(&q, [1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_matches_rodrigues_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let an = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let axis = a.map(|x| x / an);
            let angle = rng.random_range(-3.0..3.0);
            let v0: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let vn = v0.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v = v0.map(|x| x / vn);
            let q = Quaternion::from_axis_angle(axis, angle);
            let got = rotate_to_hill(&q, v).unwrap();
            let want = rodrigues(axis, angle, v);
            for i in 0..3 {
                assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-12);
            }
            let n = got.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-9);
            let back = rotate_to_body(&q, got);
            for i in 0..3 {
                assert_abs_diff_eq!(back[i], v[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rotate_rejects_non_unit_inputs() {
        assert!(rotate_to_hill(&Quaternion::new(0.0, 0.0, 0.0, 2.0), [1.0, 0.0, 0.0]).is_err());
        assert!(rotate_to_hill(&Quaternion::IDENTITY, [2.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn compose_matches_attitude_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let q = random_unit_quaternion(&mut rng);
            let p = random_unit_quaternion(&mut rng);
            let v = [0.3, -0.4, 0.5];
            // A(q⊗p) v == A(q) A(p) v
            let lhs = rotate_to_body(&q.compose(&p), v);
            let rhs = rotate_to_body(&q, rotate_to_body(&p, v));
            for i in 0..3 {
                assert_abs_diff_eq!(lhs[i], rhs[i], epsilon = 1e-12);
            }
            let id = q.compose(&q.inverse());
            assert_abs_diff_eq!(id.0[3], 1.0, epsilon = 1e-12);
        }
    }
}
