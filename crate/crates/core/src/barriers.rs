//! Safety constraints, their gradients, high-order lifting and the
//! linear-in-control barrier rows handed to the filter QP.
//!
//! Every constraint is a scalar function of the packed state written once
//! against [`Scalar`]. Rows for relative-degree-one constraints (body and
//! wheel rate limits) use hand-derived gradients; the angle-based
//! relative-degree-two constraints are lifted with
//! `Ψ1 = ∇h·f + k1 h` and differentiated with nested dual numbers.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::{self, Dual, Scalar};
use crate::error::{Result, RtaError};
use crate::sim::dynamics::{
    control_matrix, dot, dot_const, drift, sun_direction, ANTENNA_AXIS, EARTH_DIRECTION,
    PANEL_NORMAL, SENSOR_AXIS, THERMAL_FACE,
};
use crate::sim::quaternion::body_to_hill;
use crate::sim::{idx, BarrierGains, FullState, SpacecraftParams, StateVector, STATE_DIM};

/// Rows whose control coefficients fall below this norm carry no authority.
pub const AUTHORITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintId {
    ExclusionZone,
    Communication,
    Temperature,
    Battery,
    OmegaLimit(usize),
    PsiLimit(usize),
}

impl ConstraintId {
    pub const ALL: [ConstraintId; 10] = [
        ConstraintId::ExclusionZone,
        ConstraintId::Communication,
        ConstraintId::Temperature,
        ConstraintId::Battery,
        ConstraintId::OmegaLimit(0),
        ConstraintId::OmegaLimit(1),
        ConstraintId::OmegaLimit(2),
        ConstraintId::PsiLimit(0),
        ConstraintId::PsiLimit(1),
        ConstraintId::PsiLimit(2),
    ];

    pub fn relative_degree(self) -> usize {
        match self {
            ConstraintId::OmegaLimit(_) | ConstraintId::PsiLimit(_) => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintId::ExclusionZone => "exclusion_zone",
            ConstraintId::Communication => "communication",
            ConstraintId::Temperature => "temperature",
            ConstraintId::Battery => "battery",
            ConstraintId::OmegaLimit(0) => "omega1",
            ConstraintId::OmegaLimit(1) => "omega2",
            ConstraintId::OmegaLimit(_) => "omega3",
            ConstraintId::PsiLimit(0) => "psi1",
            ConstraintId::PsiLimit(1) => "psi2",
            ConstraintId::PsiLimit(_) => "psi3",
        }
    }

    /// Position in [`ConstraintId::ALL`].
    pub fn index(self) -> usize {
        match self {
            ConstraintId::ExclusionZone => 0,
            ConstraintId::Communication => 1,
            ConstraintId::Temperature => 2,
            ConstraintId::Battery => 3,
            ConstraintId::OmegaLimit(a) => 4 + a,
            ConstraintId::PsiLimit(a) => 7 + a,
        }
    }

    fn gains(self, p: &SpacecraftParams) -> BarrierGains {
        let t = &p.tuning;
        match self {
            ConstraintId::ExclusionZone => t.exclusion,
            ConstraintId::Communication => t.communication,
            ConstraintId::Temperature => t.temperature,
            ConstraintId::Battery => t.battery,
            ConstraintId::OmegaLimit(_) => t.omega,
            ConstraintId::PsiLimit(_) => t.psi,
        }
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintId {
    type Err = RtaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = match key.as_str() {
            "ez" | "exclusion" => "exclusion_zone",
            "comm" => "communication",
            "temp" => "temperature",
            "batt" | "energy" => "battery",
            other => other,
        };
        ConstraintId::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| RtaError::Domain(format!("unknown constraint `{s}`")))
    }
}

impl Serialize for ConstraintId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ConstraintId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn angle_between<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    dot(a, b).clamp_unit().acos()
}

fn angle_to_const<T: Scalar>(a: &[T; 3], b: [f64; 3]) -> T {
    dot_const(a, b).clamp_unit().acos()
}

/// Angle between the sensor boresight and the sun (rad).
pub fn sensor_sun_angle<T: Scalar>(x: &[T; STATE_DIM]) -> T {
    let boresight = body_to_hill(&x[idx::Q..idx::Q + 4], SENSOR_AXIS);
    angle_between(&boresight, &sun_direction(x[idx::SUN]))
}

/// Angle between the antenna boresight and the ground station (rad).
pub fn antenna_earth_angle<T: Scalar>(x: &[T; STATE_DIM]) -> T {
    let boresight = body_to_hill(&x[idx::Q..idx::Q + 4], ANTENNA_AXIS);
    angle_to_const(&boresight, EARTH_DIRECTION)
}

/// Sun and Earth incidence angles of the thermally tracked face.
pub fn thermal_face_angles<T: Scalar>(x: &[T; STATE_DIM]) -> (T, T) {
    let normal = body_to_hill(&x[idx::Q..idx::Q + 4], THERMAL_FACE);
    (
        angle_between(&normal, &sun_direction(x[idx::SUN])),
        angle_to_const(&normal, EARTH_DIRECTION),
    )
}

/// Sun incidence angle of the solar panel.
pub fn panel_sun_angle<T: Scalar>(x: &[T; STATE_DIM]) -> T {
    let normal = body_to_hill(&x[idx::Q..idx::Q + 4], PANEL_NORMAL);
    angle_between(&normal, &sun_direction(x[idx::SUN]))
}

pub fn h_exclusion<T: Scalar>(x: &[T; STATE_DIM], p: &SpacecraftParams) -> T {
    let c = &p.constraints;
    sensor_sun_angle(x) - T::cst(0.5 * c.fov_exclusion + c.buffer_exclusion)
}

pub fn h_comm<T: Scalar>(x: &[T; STATE_DIM], p: &SpacecraftParams) -> T {
    T::cst(0.5 * p.constraints.fov_comm) - antenna_earth_angle(x)
}

/// Temperature constraint augmented with incidence-angle terms (K).
pub fn psi_temp<T: Scalar>(x: &[T; STATE_DIM], p: &SpacecraftParams) -> T {
    let (sun_angle, earth_angle) = thermal_face_angles(x);
    let t = &p.tuning;
    T::cst(p.t_max_k())
        - x[idx::TEMP]
        - (T::cst(FRAC_PI_2) - sun_angle).scale(t.delta0)
        - (T::cst(FRAC_PI_2) - earth_angle).scale(t.delta1)
}

/// Battery constraint augmented with the panel incidence angle (J).
pub fn psi_batt<T: Scalar>(x: &[T; STATE_DIM], p: &SpacecraftParams) -> T {
    x[idx::ENERGY] - T::cst(p.constraints.e_min) - panel_sun_angle(x).scale(p.tuning.delta2)
}

pub fn h_omega<T: Scalar>(x: &[T; STATE_DIM], axis: usize, p: &SpacecraftParams) -> T {
    let w = x[idx::OMEGA + axis];
    T::cst(p.limits.omega_max.powi(2)) - w * w
}

pub fn h_psi<T: Scalar>(x: &[T; STATE_DIM], axis: usize, p: &SpacecraftParams) -> T {
    let w = x[idx::PSI + axis];
    T::cst(p.limits.psi_max.powi(2)) - w * w
}

/// The barrier function the filter enforces for `id` (augmented forms for
/// temperature and battery).
pub fn barrier_value<T: Scalar>(id: ConstraintId, x: &[T; STATE_DIM], p: &SpacecraftParams) -> T {
    match id {
        ConstraintId::ExclusionZone => h_exclusion(x, p),
        ConstraintId::Communication => h_comm(x, p),
        ConstraintId::Temperature => psi_temp(x, p),
        ConstraintId::Battery => psi_batt(x, p),
        ConstraintId::OmegaLimit(a) => h_omega(x, a, p),
        ConstraintId::PsiLimit(a) => h_psi(x, a, p),
    }
}

/// The physical safety margin of `id`: `T_max - T` and `E - E_min` for the
/// thermal and battery constraints, identical to [`barrier_value`] otherwise.
pub fn physical_margin(id: ConstraintId, state: &FullState, p: &SpacecraftParams) -> f64 {
    let x = state.to_vector();
    match id {
        ConstraintId::Temperature => p.t_max_k() - state.temperature,
        ConstraintId::Battery => state.energy - p.constraints.e_min,
        other => barrier_value(other, &x, p),
    }
}

/// First lifting `Ψ1 = ∇h·f + k1 h` of a relative-degree-two constraint.
pub fn lifted_value<T: Scalar>(id: ConstraintId, x: &[T; STATE_DIM], p: &SpacecraftParams) -> T {
    let f = drift(x, p);
    let (h, lie) = dual::directional(|xd: &[Dual<T>; STATE_DIM]| barrier_value(id, xd, p), x, &f);
    lie + h.scale(id.gains(p).k1)
}

/// Exact gradient of [`barrier_value`] with respect to the packed state.
pub fn gradient(id: ConstraintId, state: &FullState, p: &SpacecraftParams) -> StateVector {
    let x = state.to_vector();
    let mut g = [0.0; STATE_DIM];
    match id {
        ConstraintId::OmegaLimit(a) => g[idx::OMEGA + a] = -2.0 * x[idx::OMEGA + a],
        ConstraintId::PsiLimit(a) => g[idx::PSI + a] = -2.0 * x[idx::PSI + a],
        ConstraintId::Battery => {
            let delta2 = p.tuning.delta2;
            g = dual::gradient(
                |xd: &[Dual<f64>; STATE_DIM]| panel_sun_angle(xd).scale(-delta2),
                &x,
            );
            g[idx::ENERGY] += 1.0;
        }
        other => {
            g = dual::gradient(
                |xd: &[Dual<f64>; STATE_DIM]| barrier_value(other, xd, p),
                &x,
            )
        }
    }
    g
}

/// Gradient of the lifted function `Ψ1` (relative-degree-two constraints).
pub fn lifted_gradient(id: ConstraintId, state: &FullState, p: &SpacecraftParams) -> StateVector {
    let x = state.to_vector();
    dual::gradient(|xd: &[Dual<f64>; STATE_DIM]| lifted_value(id, xd, p), &x)
}

/// One barrier condition `a·u + b ≥ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierRow {
    pub constraint: ConstraintId,
    pub a: [f64; 3],
    pub b: f64,
}

impl BarrierRow {
    pub fn eval(&self, u: &[f64; 3]) -> f64 {
        self.a[0] * u[0] + self.a[1] * u[1] + self.a[2] * u[2] + self.b
    }

    pub fn has_authority(&self) -> bool {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt() >= AUTHORITY_EPS
    }
}

/// Build the barrier row of `id` at `state`.
///
/// Degree one: `BC = ∇h·(f + g u) + k1 h + σ`.
/// Degree two: `BC = ∇Ψ1·(f + g u) + k2 Ψ1 + σ`.
pub fn lift_and_rowify(id: ConstraintId, state: &FullState, p: &SpacecraftParams) -> BarrierRow {
    let x = state.to_vector();
    let f = drift(&x, p);
    let g = control_matrix(p);
    let gains = id.gains(p);

    let column = |c: usize| -> StateVector { std::array::from_fn(|k| g[k][c]) };

    match id.relative_degree() {
        1 => {
            let grad = gradient(id, state, p);
            let h = barrier_value(id, &x, p);
            let a = std::array::from_fn(|c| dot_n(&grad, &column(c)));
            BarrierRow {
                constraint: id,
                a,
                b: dot_n(&grad, &f) + gains.k1 * h + gains.bias,
            }
        }
        _ => {
            let lifted = |xd: &[Dual<f64>; STATE_DIM]| lifted_value(id, xd, p);
            let (psi1, lf) = dual::directional(lifted, &x, &f);
            let a = std::array::from_fn(|c| dual::directional(lifted, &x, &column(c)).1);
            BarrierRow {
                constraint: id,
                a,
                b: lf + gains.k2 * psi1 + gains.bias,
            }
        }
    }
}

fn dot_n(a: &StateVector, b: &StateVector) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Admissible wheel-acceleration box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl ControlBounds {
    pub fn symmetric(limit: [f64; 3]) -> Self {
        ControlBounds {
            lower: limit.map(|v| -v),
            upper: limit,
        }
    }

    pub fn contains(&self, u: &[f64; 3]) -> bool {
        (0..3).all(|i| u[i] >= self.lower[i] && u[i] <= self.upper[i])
    }

    pub fn clamp(&self, u: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| u[i].clamp(self.lower[i], self.upper[i]))
    }
}

/// Per-axis wheel-acceleration limits that keep `|ω̇_i| ≤ ω̇_max` whenever
/// every `|ω_j| ≤ ω_max`, intersected with the saturation limit.
pub fn control_bounds(
    omega_max: f64,
    omegadot_max: f64,
    psidot_max: f64,
    p: &SpacecraftParams,
) -> Result<ControlBounds> {
    let j = p.inertia;
    let mut limit = [0.0; 3];
    for axis in 0..3 {
        let (jj, jk) = (j[(axis + 1) % 3], j[(axis + 2) % 3]);
        let numerator = j[axis] * omegadot_max - (jj - jk).abs() * omega_max * omega_max;
        if !(numerator > 0.0) {
            return Err(RtaError::config(
                format!("spacecraft.limits (axis {})", axis + 1),
                format!("aggressive-maneuvering bound numerator {numerator} is not positive"),
            ));
        }
        limit[axis] = (numerator / p.wheel_inertia).min(psidot_max);
    }
    Ok(ControlBounds::symmetric(limit))
}

/// [`control_bounds`] from the parameter set's own limits.
pub fn default_bounds(p: &SpacecraftParams) -> Result<ControlBounds> {
    let l = &p.limits;
    control_bounds(l.omega_max, l.omegadot_max, l.psidot_max, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::dynamics::affine_derivative;
    use crate::sim::{ControlInput, Quaternion};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn state_with_sensor_angle(theta: f64) -> FullState {
        // Sun at +x (θ_S = 0); rotate about k so the sensor sits `theta` off the sun.
        FullState {
            q: Quaternion::from_axis_angle([0.0, 0.0, 1.0], theta),
            omega: [0.0; 3],
            psi: [0.0; 3],
            temperature: 280.0,
            energy: 5000.0,
            sun_angle: 0.0,
        }
    }

    #[test]
    fn exclusion_values() {
        let p = SpacecraftParams::default();
        let x = state_with_sensor_angle(PI).to_vector();
        assert_relative_eq!(
            h_exclusion(&x, &p),
            PI - 40f64.to_radians(),
            max_relative = 1e-12
        );
        let x = state_with_sensor_angle(0.0).to_vector();
        assert_relative_eq!(
            h_exclusion(&x, &p),
            -40f64.to_radians(),
            max_relative = 1e-12
        );
        let x = state_with_sensor_angle(40f64.to_radians()).to_vector();
        assert_abs_diff_eq!(h_exclusion(&x, &p), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn comm_values() {
        let p = SpacecraftParams::default();
        // Identity: antenna +j_B along Hill +y, orthogonal to Earth.
        let mut s = state_with_sensor_angle(0.0);
        assert_abs_diff_eq!(h_comm(&s.to_vector(), &p), 0.0, epsilon = 1e-12);
        // +90° about k sends body +j to Hill -x (Earth).
        s.q = Quaternion::from_axis_angle([0.0, 0.0, 1.0], FRAC_PI_2);
        assert_relative_eq!(h_comm(&s.to_vector(), &p), FRAC_PI_2, max_relative = 1e-12);
        s.q = Quaternion::from_axis_angle([0.0, 0.0, 1.0], -FRAC_PI_2);
        assert_relative_eq!(h_comm(&s.to_vector(), &p), -FRAC_PI_2, max_relative = 1e-12);
    }

    #[test]
    fn temperature_values() {
        let mut p = SpacecraftParams::default();
        // Rotate 90° about x: body -j → Hill -z, orthogonal to both sun (x-y plane) and Earth.
        let mut s = state_with_sensor_angle(0.0);
        s.q = Quaternion::from_axis_angle([1.0, 0.0, 0.0], FRAC_PI_2);
        s.temperature = p.t_max_k();
        let (a, b) = thermal_face_angles(&s.to_vector());
        assert_abs_diff_eq!(a, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(b, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(psi_temp(&s.to_vector(), &p), 0.0, epsilon = 1e-9);
        s.temperature = 281.15;
        assert_abs_diff_eq!(psi_temp(&s.to_vector(), &p), 2.0, epsilon = 1e-9);

        p.tuning.delta0 = 0.0;
        p.tuning.delta1 = 0.0;
        let s2 = state_with_sensor_angle(1.0);
        assert_relative_eq!(
            psi_temp(&s2.to_vector(), &p),
            p.t_max_k() - s2.temperature,
            max_relative = 1e-14
        );
    }

    #[test]
    fn battery_values() {
        let mut p = SpacecraftParams::default();
        // 90° about y: panel +k → Hill +x, the sun at θ_S = 0.
        let mut s = state_with_sensor_angle(0.0);
        s.q = Quaternion::from_axis_angle([0.0, 1.0, 0.0], FRAC_PI_2);
        s.energy = 1000.0;
        assert_abs_diff_eq!(psi_batt(&s.to_vector(), &p), 0.0, epsilon = 1e-6);

        // Dual evaluation path: from the angle between rotated vectors built by hand.
        p.tuning.delta2 = 300.0;
        s.energy = 3400.0;
        s.q = Quaternion::IDENTITY; // panel along +z, sun along +x: θ_SI = π/2
        let direct = psi_batt(&s.to_vector(), &p);
        let independent = 3400.0 - 1000.0 - 300.0 * FRAC_PI_2;
        assert_relative_eq!(direct, independent, max_relative = 1e-12);

        p.tuning.delta2 = 0.0;
        assert_relative_eq!(psi_batt(&s.to_vector(), &p), 2400.0);
    }

    #[test]
    fn rate_limit_values() {
        let p = SpacecraftParams::default();
        let mut s = state_with_sensor_angle(0.0);
        assert_relative_eq!(h_omega(&s.to_vector(), 0, &p), (PI / 180.0).powi(2));
        assert_relative_eq!(
            h_omega(&s.to_vector(), 0, &p),
            3.046e-4,
            max_relative = 1e-3
        );
        s.psi = [576.0, -576.0, 0.0];
        assert_eq!(h_psi(&s.to_vector(), 0, &p), 0.0);
        assert_eq!(h_psi(&s.to_vector(), 1, &p), 0.0);
    }

    #[test]
    fn simple_gradients() {
        let p = SpacecraftParams::default();
        let mut s = state_with_sensor_angle(0.3);
        s.omega = [0.004, -0.002, 0.001];
        let g = gradient(ConstraintId::OmegaLimit(0), &s, &p);
        assert_eq!(g[idx::OMEGA], -0.008);
        assert_eq!(g.iter().filter(|v| **v != 0.0).count(), 1);
        let g = gradient(ConstraintId::Battery, &s, &p);
        assert_eq!(g[idx::ENERGY], 1.0);
    }

    #[test]
    fn omega_row_coefficients() {
        let p = SpacecraftParams::default();
        let mut s = state_with_sensor_angle(0.3);
        s.omega = [0.01, 0.002, -0.003];
        let row = lift_and_rowify(ConstraintId::OmegaLimit(0), &s, &p);
        assert_relative_eq!(row.a[0], -2.0 * 0.01 * 4.1e-5 / 0.022, max_relative = 1e-14);
        assert_eq!(row.a[1], 0.0);
        assert_eq!(row.a[2], 0.0);

        // Finite differences of ḣ in u reproduce the coefficient.
        let x = s.to_vector();
        let hdot = |u: [f64; 3]| {
            let d = affine_derivative(&x, &ControlInput(u), &p);
            -2.0 * x[idx::OMEGA] * d[idx::OMEGA]
        };
        let fd = (hdot([1e-3, 0.0, 0.0]) - hdot([-1e-3, 0.0, 0.0])) / 2e-3;
        assert_relative_eq!(row.a[0], fd, max_relative = 1e-8);
    }

    #[test]
    fn degree_one_row_on_boundary_is_nagumo() {
        let mut p = SpacecraftParams::default();
        p.tuning.psi.bias = 0.0;
        let mut s = state_with_sensor_angle(0.3);
        s.psi = [576.0, 0.0, 0.0];
        let row = lift_and_rowify(ConstraintId::PsiLimit(0), &s, &p);
        // h = 0: BC = ḣ = -2ψ u
        assert_eq!(row.b, 0.0);
        assert_eq!(row.a, [-1152.0, 0.0, 0.0]);
    }

    #[test]
    fn rows_are_affine_in_control() {
        let p = SpacecraftParams::default();
        let mut s = state_with_sensor_angle(0.7);
        s.omega = [0.003, -0.006, 0.002];
        s.psi = [100.0, -40.0, 300.0];
        let (u1, u2) = ([1.5, -2.0, 0.3], [-0.7, 4.0, 2.2]);
        for id in ConstraintId::ALL {
            let r = lift_and_rowify(id, &s, &p);
            let sum = [u1[0] + u2[0], u1[1] + u2[1], u1[2] + u2[2]];
            let second = r.eval(&sum) - r.eval(&u2) - r.eval(&u1) + r.eval(&[0.0; 3]);
            assert_abs_diff_eq!(second, 0.0, epsilon = 1e-9 * (1.0 + r.b.abs()));
        }
    }

    #[test]
    fn aggressive_maneuver_bounds() {
        let p = SpacecraftParams::default();
        let b = default_bounds(&p).unwrap();
        let expected = (0.022 * 2f64.to_radians() - 0.012 * 1f64.to_radians().powi(2)) / 4.1e-5;
        assert_relative_eq!(b.upper[0], expected, max_relative = 1e-12);
        assert_abs_diff_eq!(b.upper[0], 18.64, epsilon = 0.01);
        assert!(b.upper.iter().all(|v| *v <= 181.3));
        assert_eq!(b.lower, b.upper.map(|v| -v));

        let no_rate = control_bounds(0.0, 2f64.to_radians(), 181.3, &p).unwrap();
        assert_relative_eq!(no_rate.upper[0], 0.022 * 2f64.to_radians() / 4.1e-5);

        assert!(control_bounds(1.0, 1e-6, 181.3, &p).is_err());
    }

    #[test]
    fn constraint_names_round_trip() {
        for id in ConstraintId::ALL {
            assert_eq!(id.name().parse::<ConstraintId>().unwrap(), id);
            assert_eq!(ConstraintId::ALL[id.index()], id);
        }
        assert_eq!(
            "comm".parse::<ConstraintId>().unwrap(),
            ConstraintId::Communication
        );
        assert!("nope".parse::<ConstraintId>().is_err());
    }
}
