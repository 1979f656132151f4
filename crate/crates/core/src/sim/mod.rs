//! State model, parameters and integrator.

pub mod dynamics;
pub mod integrator;
pub mod params;
pub mod quaternion;
pub mod state;

pub use dynamics::{
    attitude_derivative, energy_derivative, full_derivative, full_f_g, sun_direction,
    temperature_derivative, thermal_fluxes, ThermalFluxes,
};
pub use integrator::{step, step_with_substeps};
pub use params::{
    celsius_to_kelvin, kelvin_to_celsius, BarrierGains, ConstraintParams, Limits, SpacecraftParams,
    Tuning,
};
pub use quaternion::{rotate_to_hill, xi_matrix, Quaternion};
pub use state::{idx, ControlInput, FullState, StateDerivative, StateVector, STATE_DIM};
