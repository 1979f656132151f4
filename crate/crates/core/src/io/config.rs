//! JSON configuration files.
//!
//! Every key is optional; omitted keys take the defaults of the controlled
//! example. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RtaError};
use crate::harness::{CampaignConfig, EpisodeConfig};
use crate::sim::{SpacecraftParams, Tuning};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub spacecraft: SpacecraftParams,
    pub episode: EpisodeConfig,
    pub campaign: CampaignConfig,
    /// Tuning file (as written by `calibrate`), relative to the config file.
    /// Replaces `spacecraft.tuning` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning_file: Option<PathBuf>,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.spacecraft.validate()?;
        self.episode.validate()?;
        self.campaign.validate()
    }
}

/// Parse and validate `text`; relative paths resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        RtaError::config(
            if path == "." {
                "<root>".to_string()
            } else {
                path
            },
            e.into_inner().to_string(),
        )
    })?;
    if let Some(file) = &cfg.tuning_file {
        cfg.spacecraft.tuning = read_tuning(&base_dir.join(file))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| RtaError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

pub fn config_to_string(cfg: &Config) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes") + "\n"
}

pub fn read_tuning(path: &Path) -> Result<Tuning> {
    let text = fs::read_to_string(path).map_err(|e| RtaError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        RtaError::config(
            format!("tuning_file:{}", e.path()),
            e.into_inner().to_string(),
        )
    })
}

pub fn write_tuning(tuning: &Tuning, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(tuning).expect("tuning serializes") + "\n";
    fs::write(path, text).map_err(|e| RtaError::io(path, e))
}
