use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::quaternion::Quaternion;

/// Number of scalar entries in the packed state.
pub const STATE_DIM: usize = 13;

/// Offsets into the packed state `[q1..q4, ω1..ω3, ψ1..ψ3, T, E, θ_S]`.
pub mod idx {
    pub const Q: usize = 0;
    pub const OMEGA: usize = 4;
    pub const PSI: usize = 7;
    pub const TEMP: usize = 10;
    pub const ENERGY: usize = 11;
    pub const SUN: usize = 12;
}

pub type StateVector = [f64; STATE_DIM];
/// Component-wise time derivative of a packed state.
pub type StateDerivative = [f64; STATE_DIM];

/// Attitude, wheel, thermal, power and sun-angle state. Temperature is
/// Kelvin, energy Joules, angles radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub q: Quaternion,
    pub omega: [f64; 3],
    pub psi: [f64; 3],
    pub temperature: f64,
    pub energy: f64,
    pub sun_angle: f64,
}

impl FullState {
    pub fn to_vector(&self) -> StateVector {
        let mut x = [0.0; STATE_DIM];
        x[idx::Q..idx::Q + 4].copy_from_slice(&self.q.0);
        x[idx::OMEGA..idx::OMEGA + 3].copy_from_slice(&self.omega);
        x[idx::PSI..idx::PSI + 3].copy_from_slice(&self.psi);
        x[idx::TEMP] = self.temperature;
        x[idx::ENERGY] = self.energy;
        x[idx::SUN] = self.sun_angle;
        x
    }

    pub fn from_vector(x: &StateVector) -> Self {
        FullState {
            q: Quaternion([x[0], x[1], x[2], x[3]]),
            omega: [x[4], x[5], x[6]],
            psi: [x[7], x[8], x[9]],
            temperature: x[idx::TEMP],
            energy: x[idx::ENERGY],
            sun_angle: x[idx::SUN],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Reaction-wheel accelerations ψ̇ (rad/s²).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput(pub [f64; 3]);

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput([0.0; 3]);

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Wrap an angle into [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}
