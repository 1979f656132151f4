use super::dynamics::affine_derivative;
use super::params::SpacecraftParams;
use super::quaternion::Quaternion;
use super::state::{idx, wrap_angle, ControlInput, FullState, StateVector, STATE_DIM};
use crate::error::{Result, RtaError};

const COMPONENT_NAMES: [&str; STATE_DIM] = [
    "q1",
    "q2",
    "q3",
    "q4",
    "omega1",
    "omega2",
    "omega3",
    "psi1",
    "psi2",
    "psi3",
    "temperature",
    "energy",
    "sun_angle",
];

/// One classical RK4 stage sweep with `u` held constant. No renormalization.
pub fn rk4_raw(x: &StateVector, u: &ControlInput, dt: f64, p: &SpacecraftParams) -> StateVector {
    let axpy = |a: &StateVector, k: &StateVector, h: f64| -> StateVector {
        std::array::from_fn(|i| a[i] + h * k[i])
    };
    let k1 = affine_derivative(x, u, p);
    let k2 = affine_derivative(&axpy(x, &k1, 0.5 * dt), u, p);
    let k3 = affine_derivative(&axpy(x, &k2, 0.5 * dt), u, p);
    let k4 = affine_derivative(&axpy(x, &k3, dt), u, p);
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Advance `state` by `dt` in `substeps` equal RK4 steps, renormalizing the
/// quaternion and wrapping the sun angle after each.
pub fn step_with_substeps(
    state: &FullState,
    u: &ControlInput,
    dt: f64,
    substeps: usize,
    p: &SpacecraftParams,
) -> Result<FullState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(RtaError::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let substeps = substeps.max(1);
    let h = dt / substeps as f64;
    let mut x = state.to_vector();
    for _ in 0..substeps {
        x = rk4_raw(&x, u, h, p);
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(RtaError::Integration {
                component: COMPONENT_NAMES[bad],
                dt: h,
            });
        }
        let q = Quaternion([x[0], x[1], x[2], x[3]]).normalized();
        x[idx::Q..idx::Q + 4].copy_from_slice(&q.0);
        x[idx::SUN] = wrap_angle(x[idx::SUN]);
    }
    Ok(FullState::from_vector(&x))
}

pub fn step(
    state: &FullState,
    u: &ControlInput,
    dt: f64,
    p: &SpacecraftParams,
) -> Result<FullState> {
    step_with_substeps(state, u, dt, 1, p)
}
