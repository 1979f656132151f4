//! Plot-ready panel data: one CSV per panel with the traced values and the
//! constant safe-set boundaries, plus a `panels.json` index.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::barriers::{antenna_earth_angle, sensor_sun_angle};
use crate::error::{Result, RtaError};
use crate::harness::EpisodeResult;
use crate::sim::dynamics::{ANTENNA_AXIS, EARTH_DIRECTION, PANEL_NORMAL, SENSOR_AXIS};
use crate::sim::quaternion::body_to_hill;
use crate::sim::{full_derivative, idx, kelvin_to_celsius, sun_direction, SpacecraftParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub name: String,
    pub file: String,
    pub unit: String,
    pub series: Vec<String>,
    /// Constant boundary lines of the safe set.
    pub boundaries: Vec<f64>,
}

struct Builder {
    panel: Panel,
    rows: Vec<Vec<f64>>,
}

impl Builder {
    fn new(name: &str, unit: &str, series: &[&str], boundaries: Vec<f64>) -> Self {
        Builder {
            panel: Panel {
                name: name.into(),
                file: format!("{name}.csv"),
                unit: unit.into(),
                series: series.iter().map(|s| s.to_string()).collect(),
                boundaries,
            },
            rows: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, values: &[f64]) {
        let mut r = vec![t];
        r.extend_from_slice(values);
        r.extend_from_slice(&self.panel.boundaries);
        self.rows.push(r);
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let mut text = String::from("t");
        for s in &self.panel.series {
            text.push(',');
            text.push_str(s);
        }
        for i in 0..self.panel.boundaries.len() {
            text.push_str(&format!(",boundary{}", i + 1));
        }
        text.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let path = dir.join(&self.panel.file);
        fs::write(&path, text).map_err(|e| RtaError::io(&path, e))
    }
}

/// Write every panel of `result` into `dir` and return the index.
pub fn emit_plot_data(
    result: &EpisodeResult,
    p: &SpacecraftParams,
    dir: &Path,
) -> Result<Vec<Panel>> {
    fs::create_dir_all(dir).map_err(|e| RtaError::io(dir, e))?;
    let l = &p.limits;
    let c = &p.constraints;
    let deg = f64::to_degrees;
    let ez = deg(0.5 * c.fov_exclusion + c.buffer_exclusion);
    let comm = deg(0.5 * c.fov_comm);

    let mut vectors = Builder::new(
        "attitude_vectors",
        "unit vector (Hill frame)",
        &[
            "sun_x",
            "sun_y",
            "sun_z",
            "sensor_x",
            "sensor_y",
            "sensor_z",
            "antenna_x",
            "antenna_y",
            "antenna_z",
            "panel_x",
            "panel_y",
            "panel_z",
            "earth_x",
            "earth_y",
            "earth_z",
        ],
        vec![],
    );
    let mut sun_angle = Builder::new("sensor_sun_angle", "deg", &["theta"], vec![ez]);
    let mut earth_angle = Builder::new("antenna_earth_angle", "deg", &["theta"], vec![comm]);
    let mut temp = Builder::new("temperature", "degC", &["T"], vec![c.t_max_c]);
    let mut energy = Builder::new("energy", "J", &["E"], vec![c.e_min]);
    let mut omega = Builder::new(
        "omega",
        "deg/s",
        &["omega1", "omega2", "omega3"],
        vec![deg(l.omega_max), -deg(l.omega_max)],
    );
    let mut omegadot = Builder::new(
        "omegadot",
        "deg/s^2",
        &["omegadot1", "omegadot2", "omegadot3"],
        vec![deg(l.omegadot_max), -deg(l.omegadot_max)],
    );
    let mut psi = Builder::new(
        "psi",
        "rad/s",
        &["psi1", "psi2", "psi3"],
        vec![l.psi_max, -l.psi_max],
    );
    let mut psidot = Builder::new(
        "psidot",
        "rad/s^2",
        &["psidot1", "psidot2", "psidot3"],
        vec![l.psidot_max, -l.psidot_max],
    );

    for r in &result.trajectory {
        let s = &r.state;
        let x = s.to_vector();
        let q = &x[idx::Q..idx::Q + 4];
        let mut v: Vec<f64> = sun_direction(s.sun_angle).to_vec();
        for axis in [SENSOR_AXIS, ANTENNA_AXIS, PANEL_NORMAL] {
            v.extend(body_to_hill(q, axis));
        }
        v.extend(EARTH_DIRECTION);
        vectors.push(r.t, &v);
        sun_angle.push(r.t, &[deg(sensor_sun_angle(&x))]);
        earth_angle.push(r.t, &[deg(antenna_earth_angle(&x))]);
        temp.push(r.t, &[kelvin_to_celsius(s.temperature)]);
        energy.push(r.t, &[s.energy]);
        omega.push(r.t, &s.omega.map(deg));
        let xdot = full_derivative(s, &r.u_act, p);
        omegadot.push(
            r.t,
            &[
                deg(xdot[idx::OMEGA]),
                deg(xdot[idx::OMEGA + 1]),
                deg(xdot[idx::OMEGA + 2]),
            ],
        );
        psi.push(r.t, &s.psi);
        psidot.push(r.t, &r.u_act.0);
    }

    let builders = [
        vectors,
        sun_angle,
        earth_angle,
        temp,
        energy,
        omega,
        omegadot,
        psi,
        psidot,
    ];
    for b in &builders {
        b.write(dir)?;
    }
    let panels: Vec<Panel> = builders.into_iter().map(|b| b.panel).collect();
    let index = dir.join("panels.json");
    let text = serde_json::to_string_pretty(&panels).expect("panels serialize") + "\n";
    fs::write(&index, text).map_err(|e| RtaError::io(&index, e))?;
    Ok(panels)
}
