//! Run-time assurance for spacecraft attitude maneuvering.
//!
//! An active-set invariance filter sits between a primary controller and a
//! reaction-wheel spacecraft. Each step it turns six safety constraints
//! (sensor exclusion zone, ground-station pointing, surface temperature,
//! battery charge, body-rate and wheel-speed limits) into control barrier
//! conditions and solves a small QP for the admissible control closest to the
//! one requested.
//!
//! * [`sim`]: state, parameters, control-affine dynamics, RK4 integrator
//! * [`barriers`]: constraint functions, gradients, high-order lifting, rows
//! * [`qp`]: dense dual active-set QP solver
//! * [`filter`]: the safety filter itself
//! * [`controllers`]: PD quaternion tracker and the zero controller
//! * [`harness`]: episodes, Latin-hypercube campaigns, tuning calibration
//! * [`io`]: configuration, CSV/JSON writers, plot data

pub mod barriers;
pub mod controllers;
pub mod dual;
pub mod error;
pub mod filter;
pub mod harness;
pub mod io;
pub mod qp;
pub mod sim;

pub use error::{Result, RtaError};
