//! Configuration files and output writers.

pub mod campaign;
pub mod config;
pub mod plot;
pub mod trajectory;

pub use campaign::{campaign_json, write_campaign_json};
pub use config::{
    config_to_string, parse_config, parse_config_str, read_tuning, write_tuning, Config,
};
pub use plot::{emit_plot_data, Panel};
pub use trajectory::{trajectory_header, write_trajectory, write_trajectory_csv};
