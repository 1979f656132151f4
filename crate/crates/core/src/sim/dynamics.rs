//! Control-affine dynamics `ẋ = f(x) + g u` for attitude, wheels, surface
//! temperature, battery energy and sun angle.

use nalgebra::{Matrix3, Vector3};

use super::params::SpacecraftParams;
use super::quaternion::{body_to_hill, xi_matrix};
use super::state::{idx, ControlInput, FullState, StateVector, STATE_DIM};
use crate::dual::Scalar;

/// Sensor boresight, body frame.
pub const SENSOR_AXIS: [f64; 3] = [1.0, 0.0, 0.0];
/// Antenna boresight, body frame.
pub const ANTENNA_AXIS: [f64; 3] = [0.0, 1.0, 0.0];
/// Outward normal of the thermally tracked face, body frame.
pub const THERMAL_FACE: [f64; 3] = [0.0, -1.0, 0.0];
/// Solar panel normal, body frame.
pub const PANEL_NORMAL: [f64; 3] = [0.0, 0.0, 1.0];
/// Direction to Earth in the Hill frame.
pub const EARTH_DIRECTION: [f64; 3] = [-1.0, 0.0, 0.0];

/// Unit vector to the sun, rotating in the Hill x–y plane.
pub fn sun_direction<T: Scalar>(sun_angle: T) -> [T; 3] {
    [sun_angle.cos(), sun_angle.sin(), T::cst(0.0)]
}

pub(crate) fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn dot_const<T: Scalar>(a: &[T; 3], b: [f64; 3]) -> T {
    a[0].scale(b[0]) + a[1].scale(b[1]) + a[2].scale(b[2])
}

/// Heat flows (W) into the tracked face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalFluxes<T> {
    pub solar: T,
    pub albedo: T,
    pub ir: T,
    pub rejected: T,
    pub total: T,
}

pub(crate) fn thermal_fluxes_of<T: Scalar>(
    q: &[T],
    temperature: T,
    sun_hat: &[T; 3],
    p: &SpacecraftParams,
) -> ThermalFluxes<T> {
    let normal = body_to_hill(q, THERMAL_FACE);
    let sun_cos = dot(&normal, sun_hat).relu();
    let earth_cos = dot_const(&normal, EARTH_DIRECTION).relu();
    let view_factor = earth_cos.scale(p.view_factor_scale);

    let absorbed = p.absorptivity * p.node_area * p.solar_constant;
    let solar = sun_cos.scale(absorbed);
    let albedo = view_factor.scale(absorbed * p.albedo_factor);
    let ir =
        view_factor.scale(p.stefan_boltzmann * p.emissivity * p.node_area * p.earth_temp_k.powi(4));
    let rejected = temperature
        .powi4()
        .scale(p.stefan_boltzmann * p.emissivity * p.node_area);
    ThermalFluxes {
        solar,
        albedo,
        ir,
        rejected,
        total: solar + albedo + ir - rejected,
    }
}

/// Solar, albedo, Earth-IR and rejected heat for the tracked face.
pub fn thermal_fluxes(
    state: &FullState,
    sun_hat: &[f64; 3],
    p: &SpacecraftParams,
) -> ThermalFluxes<f64> {
    thermal_fluxes_of(&state.q.0, state.temperature, sun_hat, p)
}

pub fn temperature_derivative(q_total: f64, p: &SpacecraftParams) -> f64 {
    q_total / (p.node_mass * p.specific_heat)
}

pub(crate) fn panel_power_of<T: Scalar>(q: &[T], sun_hat: &[T; 3], p: &SpacecraftParams) -> T {
    let normal = body_to_hill(q, PANEL_NORMAL);
    dot(&normal, sun_hat)
        .relu()
        .scale(p.panel_ideal_performance * p.panel_degradation * p.panel_area)
}

/// Net battery power `P_in - P_out` (W).
pub fn energy_derivative(state: &FullState, sun_hat: &[f64; 3], p: &SpacecraftParams) -> f64 {
    panel_power_of(&state.q.0, sun_hat, p) - p.power_out
}

/// Drift field `f(x)`, generic so it can be differentiated.
pub fn drift<T: Scalar>(x: &[T; STATE_DIM], p: &SpacecraftParams) -> [T; STATE_DIM] {
    let zero = T::cst(0.0);
    let mut out = [zero; STATE_DIM];
    let q = &x[idx::Q..idx::Q + 4];
    let (q1, q2, q3, q4) = (q[0], q[1], q[2], q[3]);
    let (w1, w2, w3) = (x[idx::OMEGA], x[idx::OMEGA + 1], x[idx::OMEGA + 2]);

    out[0] = (q4 * w1 - q3 * w2 + q2 * w3).scale(0.5);
    out[1] = (q3 * w1 + q4 * w2 - q1 * w3).scale(0.5);
    out[2] = (q1 * w2 - q2 * w1 + q4 * w3).scale(0.5);
    out[3] = -(q1 * w1 + q2 * w2 + q3 * w3).scale(0.5);

    let [j1, j2, j3] = p.inertia;
    out[4] = (w2 * w3).scale((j2 - j3) / j1);
    out[5] = (w3 * w1).scale((j3 - j1) / j2);
    out[6] = (w1 * w2).scale((j1 - j2) / j3);

    let sun = sun_direction(x[idx::SUN]);
    let fluxes = thermal_fluxes_of(q, x[idx::TEMP], &sun, p);
    out[idx::TEMP] = fluxes.total.scale(1.0 / (p.node_mass * p.specific_heat));
    out[idx::ENERGY] = panel_power_of(q, &sun, p) - T::cst(p.power_out);
    out[idx::SUN] = T::cst(-p.mean_motion);
    out
}

/// Input matrix `g`; constant in the state.
pub fn control_matrix(p: &SpacecraftParams) -> [[f64; 3]; STATE_DIM] {
    let mut g = [[0.0; 3]; STATE_DIM];
    for axis in 0..3 {
        g[idx::OMEGA + axis][axis] = p.control_gain(axis);
        g[idx::PSI + axis][axis] = 1.0;
    }
    g
}

pub fn full_f_g(state: &FullState, p: &SpacecraftParams) -> (StateVector, [[f64; 3]; STATE_DIM]) {
    (drift(&state.to_vector(), p), control_matrix(p))
}

/// `f(x) + g u` on a packed state.
pub fn affine_derivative(x: &StateVector, u: &ControlInput, p: &SpacecraftParams) -> StateVector {
    let mut d = drift(x, p);
    for axis in 0..3 {
        d[idx::OMEGA + axis] += p.control_gain(axis) * u.0[axis];
        d[idx::PSI + axis] += u.0[axis];
    }
    d
}

/// Attitude-subsystem rates: `q̇ = ½ Ξ(q) ω`, `J ω̇ + ω × J ω = ±D ψ̇`, `ψ̇ = u`.
pub fn attitude_derivative(
    state: &FullState,
    u: &ControlInput,
    p: &SpacecraftParams,
) -> ([f64; 4], [f64; 3], [f64; 3]) {
    let xi = xi_matrix(&state.q);
    let w = state.omega;
    let qdot: [f64; 4] =
        std::array::from_fn(|r| 0.5 * (xi[r][0] * w[0] + xi[r][1] * w[1] + xi[r][2] * w[2]));

    let j = Matrix3::from_diagonal(&Vector3::from(p.inertia));
    let omega = Vector3::from(w);
    let torque = Vector3::from(u.0) * (p.wheel_torque_sign * p.wheel_inertia);
    let omegadot =
        j.try_inverse().expect("positive inertia") * (torque - omega.cross(&(j * omega)));
    (qdot, omegadot.into(), u.0)
}

/// Full derivative assembled subsystem by subsystem.
pub fn full_derivative(state: &FullState, u: &ControlInput, p: &SpacecraftParams) -> StateVector {
    let (qdot, omegadot, psidot) = attitude_derivative(state, u, p);
    let sun = sun_direction(state.sun_angle);
    let fluxes = thermal_fluxes(state, &sun, p);
    let mut d = [0.0; STATE_DIM];
    d[idx::Q..idx::Q + 4].copy_from_slice(&qdot);
    d[idx::OMEGA..idx::OMEGA + 3].copy_from_slice(&omegadot);
    d[idx::PSI..idx::PSI + 3].copy_from_slice(&psidot);
    d[idx::TEMP] = temperature_derivative(fluxes.total, p);
    d[idx::ENERGY] = energy_derivative(state, &sun, p);
    d[idx::SUN] = -p.mean_motion;
    d
}
