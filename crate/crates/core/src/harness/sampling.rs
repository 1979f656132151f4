//! Safe initial-condition sampling.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barriers::{barrier_value, lifted_value, physical_margin, ConstraintId};
use crate::error::{Result, RtaError};
use crate::sim::{celsius_to_kelvin, FullState, Quaternion, SpacecraftParams};

use super::lhs::latin_hypercube;

pub const DEFAULT_BUFFER: f64 = 0.05;
pub const MAX_ATTEMPTS: usize = 10_000;
const BATCH: usize = 64;
const SCALE_SAMPLES: usize = 4096;
const SCALE_SEED: u64 = 0x5ca1e;
const DIMS: usize = 9;

/// Closed interval `[lo, hi]`.
pub type Range = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleRanges {
    /// Body rates (rad/s), shared by all three axes.
    pub omega: Range,
    /// Wheel speeds (rad/s), shared by all three axes.
    pub psi: Range,
    pub temperature_c: Range,
    /// Stored energy (J).
    pub energy: Range,
    /// Sun angle θ_S (rad).
    pub sun_angle: Range,
    /// Fixed attitude; uniform on S³ when absent.
    pub quaternion: Option<Quaternion>,
}

impl SampleRanges {
    pub fn for_params(p: &SpacecraftParams) -> Self {
        let l = &p.limits;
        SampleRanges {
            omega: [-l.omega_max, l.omega_max],
            psi: [-l.psi_max, l.psi_max],
            temperature_c: [0.0, p.constraints.t_max_c],
            energy: [p.constraints.e_min, 10_000.0],
            sun_angle: [0.0, TAU],
            quaternion: None,
        }
    }

    /// Ranges that admit exactly one state.
    pub fn point(s: &FullState) -> Self {
        let t = crate::sim::kelvin_to_celsius(s.temperature);
        assert!(
            s.omega.iter().all(|w| *w == s.omega[0]) && s.psi.iter().all(|w| *w == s.psi[0]),
            "point ranges share one interval per vector quantity"
        );
        SampleRanges {
            omega: [s.omega[0]; 2],
            psi: [s.psi[0]; 2],
            temperature_c: [t; 2],
            energy: [s.energy; 2],
            sun_angle: [s.sun_angle; 2],
            quaternion: Some(s.q),
        }
    }

    fn all(&self) -> [(&'static str, Range); 5] {
        [
            ("omega", self.omega),
            ("psi", self.psi),
            ("temperature_c", self.temperature_c),
            ("energy", self.energy),
            ("sun_angle", self.sun_angle),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in self.all() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(RtaError::config(
                    format!("campaign.ranges.{name}"),
                    format!("need finite bounds with lower <= upper, got [{lo}, {hi}]"),
                ));
            }
        }
        if let Some(q) = self.quaternion {
            if (q.norm() - 1.0).abs() > 1e-6 {
                return Err(RtaError::config(
                    "campaign.ranges.quaternion",
                    "must have unit norm",
                ));
            }
        }
        Ok(())
    }
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self::for_params(&SpacecraftParams::default())
    }
}

/// Uniform rotation from three uniforms (Shoemake).
pub fn uniform_quaternion(u: [f64; 3]) -> Quaternion {
    let (a, b) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
    let (s2, c2) = (TAU * u[1]).sin_cos();
    let (s3, c3) = (TAU * u[2]).sin_cos();
    Quaternion([a * s2, a * c2, b * s3, b * c3])
}

/// One quantity checked by the rejection test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    Margin(ConstraintId),
    Barrier(ConstraintId),
    Lifted(ConstraintId),
}

impl Check {
    fn all() -> Vec<Check> {
        let mut v = Vec::new();
        for id in ConstraintId::ALL {
            v.push(Check::Margin(id));
            if matches!(id, ConstraintId::Temperature | ConstraintId::Battery) {
                v.push(Check::Barrier(id));
            }
            if id.relative_degree() == 2 {
                v.push(Check::Lifted(id));
            }
        }
        v
    }

    fn eval(self, s: &FullState, p: &SpacecraftParams) -> f64 {
        match self {
            Check::Margin(id) => physical_margin(id, s, p),
            Check::Barrier(id) => barrier_value(id, &s.to_vector(), p),
            Check::Lifted(id) => lifted_value(id, &s.to_vector(), p),
        }
    }

    fn label(self) -> String {
        match self {
            Check::Margin(id) => id.name().to_string(),
            Check::Barrier(id) => format!("{id} (augmented)"),
            Check::Lifted(id) => format!("{id} (lifted)"),
        }
    }
}

/// Rejection sampler with per-quantity constraint scales estimated once.
#[derive(Debug, Clone)]
pub struct SafeSampler {
    ranges: SampleRanges,
    buffer: f64,
    params: SpacecraftParams,
    checks: Vec<(Check, f64)>,
}

impl SafeSampler {
    pub fn new(ranges: SampleRanges, buffer: f64, p: &SpacecraftParams) -> Result<Self> {
        ranges.validate()?;
        if !(0.0..0.5).contains(&buffer) {
            return Err(RtaError::config("campaign.buffer", "must lie in [0, 0.5)"));
        }
        let mut sampler = SafeSampler {
            ranges,
            buffer,
            params: p.clone(),
            checks: Check::all().into_iter().map(|c| (c, 0.0)).collect(),
        };
        // Natural scale: largest value seen over the unbuffered box.
        let mut rng = ChaCha8Rng::seed_from_u64(SCALE_SEED);
        let lhs = latin_hypercube(SCALE_SAMPLES, DIMS, rng.next_u64());
        for row in &lhs {
            let s = sampler.map(row, &mut rng, 0.0);
            for (check, scale) in &mut sampler.checks {
                *scale = scale.max(check.eval(&s, p));
            }
        }
        Ok(sampler)
    }

    pub fn scales(&self) -> Vec<(String, f64)> {
        self.checks.iter().map(|(c, s)| (c.label(), *s)).collect()
    }

    fn map(&self, row: &[f64], rng: &mut ChaCha8Rng, buffer: f64) -> FullState {
        let lerp = |r: Range, u: f64| {
            let pad = 0.5 * buffer * (r[1] - r[0]);
            let (lo, hi) = (r[0] + pad, r[1] - pad);
            lo + u * (hi - lo)
        };
        let r = &self.ranges;
        let q = match r.quaternion {
            Some(q) => q,
            None => uniform_quaternion([rng.random(), rng.random(), rng.random()]),
        };
        FullState {
            q,
            omega: [
                lerp(r.omega, row[0]),
                lerp(r.omega, row[1]),
                lerp(r.omega, row[2]),
            ],
            psi: [
                lerp(r.psi, row[3]),
                lerp(r.psi, row[4]),
                lerp(r.psi, row[5]),
            ],
            temperature: celsius_to_kelvin(lerp(r.temperature_c, row[6])),
            energy: lerp(r.energy, row[7]),
            sun_angle: lerp(r.sun_angle, row[8]),
        }
    }

    /// Indices of the failing checks.
    fn failing(&self, s: &FullState) -> Vec<usize> {
        (0..self.checks.len())
            .filter(|&i| {
                let (c, scale) = self.checks[i];
                c.eval(s, &self.params) < self.buffer * scale
            })
            .collect()
    }

    pub fn sample(&self, seed: u64) -> Result<FullState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; self.checks.len()];
        let mut attempts = 0;
        while attempts < MAX_ATTEMPTS {
            let lhs = latin_hypercube(BATCH, DIMS, rng.next_u64());
            for row in &lhs {
                attempts += 1;
                let s = self.map(row, &mut rng, self.buffer);
                let failing = self.failing(&s);
                if failing.is_empty() {
                    return Ok(s);
                }
                for i in failing {
                    counts[i] += 1;
                }
                if attempts == MAX_ATTEMPTS {
                    break;
                }
            }
        }
        let worst = (0..counts.len())
            .max_by_key(|&i| (counts[i], usize::MAX - i))
            .unwrap_or(0);
        Err(RtaError::Sampling {
            attempts,
            binding: self.checks[worst].0.label(),
        })
    }
}

/// Draw a state from `ranges` (shrunk by `buffer`) whose constraint values
/// all clear `buffer` times their natural scale.
pub fn sample_safe_initial(
    ranges: &SampleRanges,
    buffer: f64,
    seed: u64,
    p: &SpacecraftParams,
) -> Result<FullState> {
    SafeSampler::new(ranges.clone(), buffer, p)?.sample(seed)
}
