//! Primary controllers.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RtaError};
use crate::sim::{ControlInput, FullState, Quaternion};

pub trait Controller: Send + Sync {
    fn control(&self, state: &FullState, t: f64) -> ControlInput;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    /// Time (s) from which `q` is commanded.
    pub start: f64,
    pub q: Quaternion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdConfig {
    pub kp: f64,
    /// Derivative gain (s).
    pub kd: f64,
    pub schedule: Vec<ScheduleEntry>,
}

impl Default for PdConfig {
    /// Identity for the first 1000 s, then a half turn about body y.
    fn default() -> Self {
        PdConfig {
            kp: 0.2,
            kd: 1.5,
            schedule: vec![
                ScheduleEntry {
                    start: 0.0,
                    q: Quaternion::IDENTITY,
                },
                ScheduleEntry {
                    start: 1000.0,
                    q: Quaternion::new(0.0, 1.0, 0.0, 0.0),
                },
            ],
        }
    }
}

impl PdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(RtaError::config("controller.schedule", "must not be empty"));
        }
        for (i, e) in self.schedule.iter().enumerate() {
            if (e.q.norm() - 1.0).abs() > 1e-6 {
                return Err(RtaError::config(
                    format!("controller.schedule[{i}].q"),
                    "commanded quaternion must have unit norm",
                ));
            }
            if i > 0 && !(e.start > self.schedule[i - 1].start) {
                return Err(RtaError::config(
                    format!("controller.schedule[{i}].start"),
                    "schedule times must be strictly increasing",
                ));
            }
        }
        for (name, v) in [("kp", self.kp), ("kd", self.kd)] {
            if !v.is_finite() {
                return Err(RtaError::config(
                    format!("controller.{name}"),
                    "must be finite",
                ));
            }
        }
        Ok(())
    }

    /// Latest entry with `start ≤ t`; the first entry before the schedule begins.
    pub fn commanded(&self, t: f64) -> Quaternion {
        self.schedule
            .iter()
            .rev()
            .find(|e| e.start <= t)
            .unwrap_or(&self.schedule[0])
            .q
    }
}

/// Vector part of `q ⊗ q_c⁻¹`.
pub fn error_quaternion(q: &Quaternion, qc: &Quaternion) -> [f64; 3] {
    q.compose(&qc.inverse()).vector()
}

/// `u = ψ̇_max tanh(−k_p δq − k_d ω)` per axis.
pub fn pd_control(state: &FullState, cfg: &PdConfig, t: f64, psidot_max: f64) -> ControlInput {
    let dq = error_quaternion(&state.q, &cfg.commanded(t));
    ControlInput(std::array::from_fn(|i| {
        psidot_max * (-cfg.kp * dq[i] - cfg.kd * state.omega[i]).tanh()
    }))
}

pub fn zero_control() -> ControlInput {
    ControlInput::ZERO
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroController;

impl Controller for ZeroController {
    fn control(&self, _state: &FullState, _t: f64) -> ControlInput {
        zero_control()
    }
}

#[derive(Debug, Clone)]
pub struct PdController {
    pub config: PdConfig,
    pub psidot_max: f64,
}

impl Controller for PdController {
    fn control(&self, state: &FullState, t: f64) -> ControlInput {
        pd_control(state, &self.config, t, self.psidot_max)
    }
}

/// Controller selection as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControllerSpec {
    Zero,
    Pd(PdConfig),
}

impl ControllerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ControllerSpec::Zero => Ok(()),
            ControllerSpec::Pd(cfg) => cfg.validate(),
        }
    }

    pub fn build(&self, psidot_max: f64) -> Box<dyn Controller> {
        match self {
            ControllerSpec::Zero => Box::new(ZeroController),
            ControllerSpec::Pd(cfg) => Box::new(PdController {
                config: cfg.clone(),
                psidot_max,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{step, SpacecraftParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn state_at(q: Quaternion, omega: [f64; 3]) -> FullState {
        FullState {
            q,
            omega,
            psi: [0.0; 3],
            temperature: 280.0,
            energy: 5000.0,
            sun_angle: 0.0,
        }
    }

    fn unit(v: [f64; 4]) -> Quaternion {
        Quaternion(v).normalized()
    }

    #[test]
    fn zero_error_at_target() {
        let q = unit([0.3, -0.2, 0.5, 0.7]);
        let e = error_quaternion(&q, &q);
        for v in e {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_command_returns_vector_part() {
        let q = unit([0.3, -0.2, 0.5, 0.7]);
        assert_eq!(error_quaternion(&q, &Quaternion::IDENTITY), q.vector());
    }

    #[test]
    fn error_sign_golden() {
        // Body rotated +0.2 rad about k from the target: δq ≈ +0.1 on axis 3.
        let q = Quaternion::from_axis_angle([0.0, 0.0, 1.0], 0.2);
        let e = error_quaternion(&q, &Quaternion::IDENTITY);
        assert_abs_diff_eq!(e[2], (0.1f64).sin(), epsilon = 1e-15);
        let qc = Quaternion::from_axis_angle([0.0, 0.0, 1.0], 0.5);
        let q = Quaternion::from_axis_angle([0.0, 0.0, 1.0], 0.7);
        let e = error_quaternion(&q, &qc);
        assert_abs_diff_eq!(e[2], (0.1f64).sin(), epsilon = 1e-15);
    }

    #[test]
    fn pd_at_target_is_zero() {
        let cfg = PdConfig::default();
        let u = pd_control(&state_at(Quaternion::IDENTITY, [0.0; 3]), &cfg, 0.0, 181.3);
        assert_eq!(u, ControlInput::ZERO);
    }

    #[test]
    fn schedule_switches_at_1000_s() {
        let cfg = PdConfig::default();
        assert_eq!(cfg.commanded(999.0), Quaternion::IDENTITY);
        assert_eq!(cfg.commanded(1000.0), Quaternion::new(0.0, 1.0, 0.0, 0.0));
        assert!(cfg.validate().is_ok());
        let mut bad = cfg.clone();
        bad.schedule[1].start = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn nominal_initial_command_is_inside_saturation() {
        let q = unit([0.680, -0.151, 0.630, 0.343]);
        let u = pd_control(&state_at(q, [0.0; 3]), &PdConfig::default(), 0.0, 181.3);
        assert!(u.0.iter().all(|v| v.abs() < 181.3));
    }

    #[test]
    fn unfiltered_pd_settles_from_ten_degrees() {
        let p = SpacecraftParams::default();
        let cfg = PdConfig {
            schedule: vec![ScheduleEntry {
                start: 0.0,
                q: Quaternion::IDENTITY,
            }],
            ..PdConfig::default()
        };
        let mut s = state_at(
            Quaternion::from_axis_angle([0.0, 1.0, 0.0], 10f64.to_radians()),
            [0.0; 3],
        );
        let angle = |s: &FullState| 2.0 * s.q.scalar().abs().min(1.0).acos();
        for k in 0..500 {
            let u = pd_control(&s, &cfg, k as f64, p.limits.psidot_max);
            s = step(&s, &u, 1.0, &p).unwrap();
        }
        assert!(
            angle(&s) < 0.5f64.to_radians(),
            "final error {} deg",
            angle(&s).to_degrees()
        );
    }

    proptest! {
        #[test]
        fn pd_output_is_bounded(
            q in prop::array::uniform4(-1.0f64..1.0),
            w in prop::array::uniform3(-10.0f64..10.0),
            t in 0.0f64..2000.0,
        ) {
            prop_assume!(q.iter().map(|v| v * v).sum::<f64>() > 1e-3);
            let u = pd_control(&state_at(unit(q), w), &PdConfig::default(), t, 181.3);
            prop_assert!(u.0.iter().all(|v| v.abs() <= 181.3));
        }

        #[test]
        fn full_error_quaternion_has_unit_norm(
            a in prop::array::uniform4(-1.0f64..1.0),
            b in prop::array::uniform4(-1.0f64..1.0),
        ) {
            prop_assume!(a.iter().map(|v| v * v).sum::<f64>() > 1e-3);
            prop_assume!(b.iter().map(|v| v * v).sum::<f64>() > 1e-3);
            let full = unit(a).compose(&unit(b).inverse());
            prop_assert!((full.norm() - 1.0).abs() < 1e-12);
        }
    }
}
