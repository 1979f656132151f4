//! Episodes, safe initial-condition sampling, Monte-Carlo campaigns and
//! tuning calibration.

pub mod calibrate;
pub mod campaign;
pub mod episode;
pub mod lhs;
pub mod sampling;

pub use campaign::{episode_seeds, run_campaign, CampaignConfig, CampaignSummary, EpisodeSummary};
pub use episode::{
    nominal_initial_state, run_episode, run_from, EpisodeConfig, EpisodeResult, InitialState,
    StepRecord, VIOLATION_TOL,
};
pub use lhs::latin_hypercube;
pub use sampling::{sample_safe_initial, SafeSampler, SampleRanges, DEFAULT_BUFFER};
