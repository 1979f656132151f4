use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barriers::ConstraintId;
use crate::controllers::ControllerSpec;
use crate::error::{Result, RtaError};
use crate::filter::N_CONSTRAINTS;
use crate::sim::{SpacecraftParams, Tuning};

use super::episode::{run_from, EpisodeConfig, EpisodeResult};
use super::sampling::{SafeSampler, SampleRanges, DEFAULT_BUFFER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub n: usize,
    pub seed: u64,
    pub workers: usize,
    pub ranges: SampleRanges,
    pub buffer: f64,
    /// Template for every episode; its initial state is replaced by a sample.
    pub episode: EpisodeConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            n: 200,
            seed: 0,
            workers: 1,
            ranges: SampleRanges::default(),
            buffer: DEFAULT_BUFFER,
            episode: EpisodeConfig {
                controller: ControllerSpec::Zero,
                ..EpisodeConfig::default()
            },
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(RtaError::config("campaign.n", "must be >= 1"));
        }
        if self.workers == 0 {
            return Err(RtaError::config("campaign.workers", "must be >= 1"));
        }
        self.ranges.validate()?;
        self.episode.validate()
    }
}

/// Outcome of one campaign episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub index: usize,
    pub seed: u64,
    pub passed: bool,
    /// Violated constraints that count toward failure.
    pub violated: Vec<ConstraintId>,
    pub intervention_rate: f64,
    pub min_margins: [f64; N_CONSTRAINTS],
    pub error: Option<String>,
}

impl EpisodeSummary {
    pub fn from_result(index: usize, seed: u64, r: &EpisodeResult) -> Self {
        EpisodeSummary {
            index,
            seed,
            passed: r.passed,
            violated: r.failing().collect(),
            intervention_rate: r.intervention_rate,
            min_margins: r.min_margins,
            error: r.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub n_episodes: usize,
    pub n_passed: usize,
    pub success_rate: f64,
    /// Share of failed episodes (%) in which each constraint was violated.
    pub per_constraint_pct: BTreeMap<String, f64>,
    /// Share of failed episodes (%) by number of violated constraints.
    pub per_count_pct: BTreeMap<String, f64>,
    pub seeds: Vec<u64>,
    pub tuning: Tuning,
    pub episodes: Vec<EpisodeSummary>,
}

impl CampaignSummary {
    pub fn from_episodes(episodes: Vec<EpisodeSummary>, tuning: Tuning) -> Self {
        let n = episodes.len();
        let failed: Vec<&EpisodeSummary> = episodes.iter().filter(|e| !e.passed).collect();
        let mut per_constraint_pct = BTreeMap::new();
        let mut per_count_pct = BTreeMap::new();
        if !failed.is_empty() {
            let nf = failed.len() as f64;
            for id in ConstraintId::ALL {
                let k = failed.iter().filter(|e| e.violated.contains(&id)).count();
                if k > 0 {
                    per_constraint_pct.insert(id.name().to_string(), 100.0 * k as f64 / nf);
                }
            }
            for (label, lo, hi) in [("1", 0, 1), ("2", 2, 2), ("3", 3, 3), ("4+", 4, usize::MAX)] {
                // episodes failed without a named constraint (integration errors) count as 1
                let k = failed
                    .iter()
                    .filter(|e| (lo..=hi).contains(&e.violated.len()))
                    .count();
                per_count_pct.insert(label.to_string(), 100.0 * k as f64 / nf);
            }
        }
        CampaignSummary {
            n_episodes: n,
            n_passed: n - failed.len(),
            success_rate: (n - failed.len()) as f64 / n.max(1) as f64,
            per_constraint_pct,
            per_count_pct,
            seeds: episodes.iter().map(|e| e.seed).collect(),
            tuning,
            episodes,
        }
    }
}

/// Per-episode seeds: output `i` of an independent ChaCha stream per index.
pub fn episode_seeds(root: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(root);
            rng.set_stream(i as u64);
            rng.next_u64()
        })
        .collect()
}

/// Run one episode of a campaign; sampling failures become failed episodes.
pub fn run_campaign_episode(
    sampler: &SafeSampler,
    template: &EpisodeConfig,
    p: &SpacecraftParams,
    index: usize,
    seed: u64,
) -> EpisodeSummary {
    match sampler.sample(seed) {
        Ok(start) => EpisodeSummary::from_result(index, seed, &run_from(template, p, start)),
        Err(e) => EpisodeSummary {
            index,
            seed,
            passed: false,
            violated: Vec::new(),
            intervention_rate: 0.0,
            min_margins: [f64::NAN; N_CONSTRAINTS],
            error: Some(e.to_string()),
        },
    }
}

/// Run `cfg.n` independent episodes on `cfg.workers` threads. The summary
/// does not depend on the worker count.
pub fn run_campaign(cfg: &CampaignConfig, p: &SpacecraftParams) -> Result<CampaignSummary> {
    cfg.validate()?;
    p.validate()?;
    let sampler = SafeSampler::new(cfg.ranges.clone(), cfg.buffer, p)?;
    let seeds = episode_seeds(cfg.seed, cfg.n);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RtaError::Domain(format!("thread pool: {e}")))?;
    let episodes: Vec<EpisodeSummary> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| run_campaign_episode(&sampler, &cfg.episode, p, i, seed))
            .collect()
    });
    let summary = CampaignSummary::from_episodes(episodes, p.tuning.clone());
    log::info!(
        "campaign: {}/{} episodes passed ({:.2}%)",
        summary.n_passed,
        summary.n_episodes,
        100.0 * summary.success_rate
    );
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(index: usize, passed: bool, violated: Vec<ConstraintId>) -> EpisodeSummary {
        EpisodeSummary {
            index,
            seed: index as u64,
            passed,
            violated,
            intervention_rate: 0.0,
            min_margins: [0.0; N_CONSTRAINTS],
            error: None,
        }
    }

    #[test]
    fn all_pass_has_empty_breakdowns() {
        let s = CampaignSummary::from_episodes(
            (0..5).map(|i| fake(i, true, vec![])).collect(),
            Tuning::default(),
        );
        assert_eq!(s.success_rate, 1.0);
        assert!(s.per_constraint_pct.is_empty() && s.per_count_pct.is_empty());
    }

    #[test]
    fn two_fails_of_ten() {
        let mut eps: Vec<_> = (0..10).map(|i| fake(i, true, vec![])).collect();
        eps[2] = fake(2, false, vec![ConstraintId::Battery]);
        eps[7] = fake(
            7,
            false,
            vec![
                ConstraintId::Battery,
                ConstraintId::ExclusionZone,
                ConstraintId::OmegaLimit(1),
            ],
        );
        let s = CampaignSummary::from_episodes(eps, Tuning::default());
        assert_eq!(s.success_rate, 0.8);
        assert_eq!(s.per_constraint_pct["battery"], 100.0);
        assert_eq!(s.per_constraint_pct["exclusion_zone"], 50.0);
        assert_eq!(s.per_count_pct["1"], 50.0);
        assert_eq!(s.per_count_pct["3"], 50.0);
        assert_eq!(s.per_count_pct.values().sum::<f64>(), 100.0);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = episode_seeds(9, 100);
        assert_eq!(a, episode_seeds(9, 100));
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(episode_seeds(9, 10), a[..10]);
    }
}
