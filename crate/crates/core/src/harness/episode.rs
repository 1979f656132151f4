use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::barriers::ConstraintId;
use crate::controllers::{ControllerSpec, PdConfig};
use crate::error::{Result, RtaError};
use crate::filter::{evaluate_safety, FilterConfig, SafetyFilter, N_CONSTRAINTS};
use crate::qp::QpStatus;
use crate::sim::{celsius_to_kelvin, step, ControlInput, FullState, Quaternion, SpacecraftParams};

use super::sampling::{sample_safe_initial, SampleRanges, DEFAULT_BUFFER};

pub const DEFAULT_FILTER_SUBSTEPS: usize = 10;

/// Margins below this count as violations.
pub const VIOLATION_TOL: f64 = 1e-6;

/// Initial state of the controlled example: T = 8.5 °C, E = 7.3 kJ, θ_S = 525°.
pub fn nominal_initial_state() -> FullState {
    FullState {
        q: Quaternion::new(0.680, -0.151, 0.630, 0.343).normalized(),
        omega: [0.0; 3],
        psi: [0.0; 3],
        temperature: celsius_to_kelvin(8.5),
        energy: 7300.0,
        sun_angle: crate::sim::state::wrap_angle(525f64.to_radians()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Explicit {
        state: FullState,
    },
    Sampled {
        seed: u64,
        #[serde(default)]
        ranges: SampleRanges,
        #[serde(default = "default_buffer")]
        buffer: f64,
    },
}

fn default_buffer() -> f64 {
    DEFAULT_BUFFER
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Explicit {
            state: nominal_initial_state(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Simulated time (s).
    pub duration: f64,
    /// Control and logging interval (s).
    pub dt: f64,
    pub controller: ControllerSpec,
    pub rta_enabled: bool,
    /// Filter evaluations per control interval. The desired control is held
    /// over the interval; the filter and integrator run on `dt / filter_substeps`.
    pub filter_substeps: usize,
    pub filter: FilterConfig,
    pub initial_state: InitialState,
}

impl Default for EpisodeConfig {
    /// The controlled example: PD tracking with the filter on.
    fn default() -> Self {
        EpisodeConfig {
            duration: 2000.0,
            dt: 1.0,
            controller: ControllerSpec::Pd(PdConfig::default()),
            rta_enabled: true,
            filter_substeps: DEFAULT_FILTER_SUBSTEPS,
            filter: FilterConfig::default(),
            initial_state: InitialState::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(RtaError::config("episode.dt", "must be finite and > 0"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(RtaError::config(
                "episode.duration",
                "must be finite and > 0",
            ));
        }
        let ratio = self.duration / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(RtaError::config(
                "episode.duration",
                format!("must be an integer multiple of dt ({})", self.dt),
            ));
        }
        if self.filter_substeps == 0 {
            return Err(RtaError::config("episode.filter_substeps", "must be >= 1"));
        }
        self.controller.validate()?;
        self.filter.validate()?;
        match &self.initial_state {
            InitialState::Explicit { state } => {
                if !state.is_finite() || (state.q.norm() - 1.0).abs() > 1e-6 {
                    return Err(RtaError::config(
                        "episode.initial_state.state",
                        "must be finite with a unit quaternion",
                    ));
                }
            }
            InitialState::Sampled { ranges, .. } => ranges.validate()?,
        }
        Ok(())
    }

    pub fn initial(&self, p: &SpacecraftParams) -> Result<FullState> {
        match &self.initial_state {
            InitialState::Explicit { state } => Ok(*state),
            InitialState::Sampled {
                seed,
                ranges,
                buffer,
            } => sample_safe_initial(ranges, *buffer, *seed, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    /// State at the start of the step.
    pub state: FullState,
    pub u_des: ControlInput,
    pub u_act: ControlInput,
    /// Physical constraint margins of `state`.
    pub margins: [f64; N_CONSTRAINTS],
    pub slack: [f64; N_CONSTRAINTS],
    /// `None` with the filter disabled.
    pub qp_status: Option<QpStatus>,
    pub intervened: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub trajectory: Vec<StepRecord>,
    pub final_state: FullState,
    /// No non-slacked margin below `-VIOLATION_TOL` and no integration failure.
    pub passed: bool,
    /// Every constraint violated at some step, slacked ones included.
    pub violated: Vec<ConstraintId>,
    pub slacked: Vec<ConstraintId>,
    /// Smallest margin seen per constraint over all recorded states.
    pub min_margins: [f64; N_CONSTRAINTS],
    /// Fraction of steps in which the filter changed the control.
    pub intervention_rate: f64,
    /// Integration failure diagnostic.
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl EpisodeResult {
    /// Violated constraints that count toward failure.
    pub fn failing(&self) -> impl Iterator<Item = ConstraintId> + '_ {
        self.violated
            .iter()
            .copied()
            .filter(|c| !self.slacked.contains(c))
    }

    pub fn min_margin(&self, id: ConstraintId) -> f64 {
        self.min_margins[id.index()]
    }
}

/// Run one episode: controller, then the filter when enabled, then RK4.
pub fn run_episode(cfg: &EpisodeConfig, p: &SpacecraftParams) -> Result<EpisodeResult> {
    cfg.validate()?;
    let start = cfg.initial(p)?;
    Ok(run_from(cfg, p, start))
}

/// [`run_episode`] with the initial state already resolved.
pub fn run_from(cfg: &EpisodeConfig, p: &SpacecraftParams, start: FullState) -> EpisodeResult {
    let clock = Instant::now();
    let n = cfg.n_steps();
    let slacked = cfg.filter.slack.clone();
    let controller = cfg.controller.build(p.limits.psidot_max);
    let mut filter = if cfg.rta_enabled {
        Some(SafetyFilter::new(p.clone(), cfg.filter.clone()).expect("validated filter config"))
    } else {
        None
    };

    let mut trajectory = Vec::with_capacity(n);
    let mut min_margins = [f64::INFINITY; N_CONSTRAINTS];
    let mut state = start;
    let mut error = None;
    let mut interventions = 0usize;

    let mut track = |s: &FullState| -> [f64; N_CONSTRAINTS] {
        let m = evaluate_safety(s, p, &slacked).margins;
        for (lo, v) in min_margins.iter_mut().zip(m) {
            *lo = lo.min(v);
        }
        m
    };

    let substeps = cfg.filter_substeps.max(1);
    let h = cfg.dt / substeps as f64;
    'outer: for k in 0..n {
        let t = k as f64 * cfg.dt;
        let margins = track(&state);
        let u_des = controller.control(&state, t);
        let mut record = StepRecord {
            t,
            state,
            u_des,
            u_act: u_des,
            margins,
            slack: [0.0; N_CONSTRAINTS],
            qp_status: None,
            intervened: false,
        };
        for j in 0..substeps {
            if j > 0 {
                track(&state);
            }
            let u_act = match filter.as_mut() {
                Some(f) => {
                    let out = f.filter(&state, &u_des);
                    if j == 0 {
                        record.u_act = out.u_act;
                        record.slack = out.slack_used;
                        record.qp_status = Some(out.qp_status);
                    }
                    record.intervened |= out.intervened;
                    out.u_act
                }
                None => u_des,
            };
            match step(&state, &u_act, h, p) {
                Ok(next) => state = next,
                Err(e) => {
                    let at = t + j as f64 * h;
                    log::warn!("episode aborted at t = {at}: {e}");
                    error = Some(format!("t = {at} s: {e}"));
                    interventions += record.intervened as usize;
                    trajectory.push(record);
                    break 'outer;
                }
            }
        }
        interventions += record.intervened as usize;
        trajectory.push(record);
    }
    if error.is_none() {
        track(&state);
    }

    let violated: Vec<ConstraintId> = ConstraintId::ALL
        .into_iter()
        .filter(|id| min_margins[id.index()] < -VIOLATION_TOL)
        .collect();
    let passed = error.is_none() && violated.iter().all(|c| slacked.contains(c));
    let steps = trajectory.len().max(1);
    EpisodeResult {
        trajectory,
        final_state: state,
        passed,
        violated,
        slacked,
        min_margins,
        intervention_rate: interventions as f64 / steps as f64,
        error,
        wall_time: clock.elapsed().as_secs_f64(),
    }
}
