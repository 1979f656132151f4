use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, RtaError};
use crate::harness::CampaignSummary;
use crate::sim::Tuning;

/// Campaign report as written to disk.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport<'a> {
    pub n_episodes: usize,
    pub n_passed: usize,
    pub success_rate: f64,
    pub per_constraint_pct: &'a std::collections::BTreeMap<String, f64>,
    pub per_count_pct: &'a std::collections::BTreeMap<String, f64>,
    pub seeds: &'a [u64],
    pub tuning: &'a Tuning,
    pub episodes: &'a [crate::harness::EpisodeSummary],
}

impl<'a> From<&'a CampaignSummary> for CampaignReport<'a> {
    fn from(s: &'a CampaignSummary) -> Self {
        CampaignReport {
            n_episodes: s.n_episodes,
            n_passed: s.n_passed,
            success_rate: s.success_rate,
            per_constraint_pct: &s.per_constraint_pct,
            per_count_pct: &s.per_count_pct,
            seeds: &s.seeds,
            tuning: &s.tuning,
            episodes: &s.episodes,
        }
    }
}

pub fn campaign_json(summary: &CampaignSummary) -> String {
    serde_json::to_string_pretty(&CampaignReport::from(summary)).expect("summary serializes") + "\n"
}

pub fn write_campaign_json(summary: &CampaignSummary, path: &Path) -> Result<()> {
    fs::write(path, campaign_json(summary)).map_err(|e| RtaError::io(path, e))
}
