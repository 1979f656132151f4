//! Coordinate search for class-κ gains and incidence weights.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::{BarrierGains, SpacecraftParams, Tuning};

use super::campaign::{episode_seeds, run_campaign_episode, CampaignConfig};
use super::sampling::SafeSampler;

/// Tuning produced by [`calibrate_tuning`] with the default parameters and
/// [`CALIBRATION_SEED`] (1 of 50 calibration episodes fails).
pub const CALIBRATED: Tuning = Tuning {
    exclusion: BarrierGains {
        k1: 0.025,
        k2: 0.05,
        bias: 0.0,
    },
    communication: BarrierGains {
        k1: 0.025,
        k2: 0.05,
        bias: 0.0,
    },
    temperature: BarrierGains {
        k1: 0.1,
        k2: 0.05,
        bias: 0.0,
    },
    battery: BarrierGains {
        k1: 0.025,
        k2: 0.025,
        bias: 0.0,
    },
    omega: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    psi: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    delta0: 2.0,
    delta1: 1.0,
    delta2: 500.0,
};

/// Where the search starts.
pub const SEARCH_START: Tuning = Tuning {
    exclusion: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    communication: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    temperature: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    battery: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    omega: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    psi: BarrierGains {
        k1: 0.05,
        k2: 0.05,
        bias: 0.0,
    },
    delta0: 1.0,
    delta1: 1.0,
    delta2: 500.0,
};

pub const CALIBRATION_EPISODES: usize = 50;
pub const CALIBRATION_SEED: u64 = 0xCA11B;
const MAX_PASSES: usize = 6;
const FACTORS: [f64; 2] = [0.5, 2.0];

const COORDINATES: [&str; 13] = [
    "exclusion.k1",
    "exclusion.k2",
    "communication.k1",
    "communication.k2",
    "temperature.k1",
    "temperature.k2",
    "battery.k1",
    "battery.k2",
    "omega.k1",
    "psi.k1",
    "delta0",
    "delta1",
    "delta2",
];

fn coordinate<'a>(t: &'a mut Tuning, name: &str) -> &'a mut f64 {
    match name {
        "exclusion.k1" => &mut t.exclusion.k1,
        "exclusion.k2" => &mut t.exclusion.k2,
        "communication.k1" => &mut t.communication.k1,
        "communication.k2" => &mut t.communication.k2,
        "temperature.k1" => &mut t.temperature.k1,
        "temperature.k2" => &mut t.temperature.k2,
        "battery.k1" => &mut t.battery.k1,
        "battery.k2" => &mut t.battery.k2,
        "omega.k1" => &mut t.omega.k1,
        "psi.k1" => &mut t.psi.k1,
        "delta0" => &mut t.delta0,
        "delta1" => &mut t.delta1,
        "delta2" => &mut t.delta2,
        _ => unreachable!("unknown coordinate {name}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub tuning: Tuning,
    /// Failed episodes of the selected tuning on the calibration seeds.
    pub failures: usize,
    pub episodes: usize,
    pub evaluations: usize,
    pub seed: u64,
}

/// Failed episodes among `seeds`, stopping once `limit` is exceeded.
pub fn count_failures(
    tuning: &Tuning,
    p: &SpacecraftParams,
    template: &CampaignConfig,
    seeds: &[u64],
    limit: usize,
) -> Result<usize> {
    let mut p = p.clone();
    p.tuning = tuning.clone();
    let sampler = SafeSampler::new(template.ranges.clone(), template.buffer, &p)?;
    let mut failures = 0;
    for (i, &seed) in seeds.iter().enumerate() {
        if !run_campaign_episode(&sampler, &template.episode, &p, i, seed).passed {
            failures += 1;
            if failures > limit {
                break;
            }
        }
    }
    Ok(failures)
}

// Geometric size used to break ties toward smaller gains.
fn magnitude(t: &Tuning) -> f64 {
    let mut t = t.clone();
    COORDINATES.iter().map(|c| coordinate(&mut t, c).ln()).sum()
}

/// Coordinate search from `start`: each pass halves and doubles every
/// coordinate in turn and keeps a move if it lowers the failure count, or
/// shrinks the tuning while the count is already zero. Stops after a pass
/// without moves.
pub fn calibrate_from(
    start: &Tuning,
    p: &SpacecraftParams,
    template: &CampaignConfig,
    seed: u64,
    episodes: usize,
) -> Result<CalibrationReport> {
    let seeds = episode_seeds(seed, episodes);
    let mut best = start.clone();
    let mut best_failures = count_failures(&best, p, template, &seeds, usize::MAX)?;
    let mut evaluations = 1;
    log::info!("calibration start: {best_failures}/{episodes} failures");

    for pass in 0..MAX_PASSES {
        let mut moved = false;
        for name in COORDINATES {
            for factor in FACTORS {
                let mut trial = best.clone();
                *coordinate(&mut trial, name) *= factor;
                let failures = count_failures(&trial, p, template, &seeds, best_failures)?;
                evaluations += 1;
                // Shrinking at equal cost only once the target is met.
                let better = failures < best_failures
                    || (failures == 0
                        && best_failures == 0
                        && magnitude(&trial) < magnitude(&best));
                if better {
                    log::info!("pass {pass}: {name} x{factor} -> {failures} failures");
                    best = trial;
                    best_failures = failures;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            break;
        }
    }
    if best_failures > 0 {
        log::warn!("calibration left {best_failures} failing episodes");
    }
    Ok(CalibrationReport {
        tuning: best,
        failures: best_failures,
        episodes,
        evaluations,
        seed,
    })
}

/// [`calibrate_from`] with the default start, seed count and zero-controller
/// campaign template.
pub fn calibrate_tuning(p: &SpacecraftParams, seed: u64) -> Result<CalibrationReport> {
    calibrate_from(
        &SEARCH_START,
        p,
        &CampaignConfig::default(),
        seed,
        CALIBRATION_EPISODES,
    )
}
