//! Per-step trajectory CSV.
//!
//! Comma separated, '.' decimal point, LF line endings. Floats use the
//! shortest representation that parses back to the same bits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::barriers::{antenna_earth_angle, sensor_sun_angle, ConstraintId};
use crate::error::{Result, RtaError};
use crate::harness::{EpisodeResult, StepRecord};
use crate::sim::kelvin_to_celsius;

pub fn trajectory_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "t",
        "q1",
        "q2",
        "q3",
        "q4",
        "omega1",
        "omega2",
        "omega3",
        "psi1",
        "psi2",
        "psi3",
        "T_C",
        "E_J",
        "theta_S",
        "theta_sun_sensor",
        "theta_earth_antenna",
        "u_des1",
        "u_des2",
        "u_des3",
        "u_act1",
        "u_act2",
        "u_act3",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(ConstraintId::ALL.iter().map(|c| format!("margin_{c}")));
    h.push("qp_status".into());
    h
}

fn row(r: &StepRecord) -> Vec<String> {
    let s = &r.state;
    let x = s.to_vector();
    let mut v: Vec<f64> = vec![r.t];
    v.extend(s.q.0);
    v.extend(s.omega);
    v.extend(s.psi);
    v.extend([
        kelvin_to_celsius(s.temperature),
        s.energy,
        s.sun_angle,
        sensor_sun_angle(&x),
        antenna_earth_angle(&x),
    ]);
    v.extend(r.u_des.0);
    v.extend(r.u_act.0);
    v.extend(r.margins);
    let mut out: Vec<String> = v.iter().map(|f| f.to_string()).collect();
    out.push(r.qp_status.map_or("disabled", |s| s.as_str()).to_string());
    out
}

pub fn write_trajectory<W: Write>(result: &EpisodeResult, w: W) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let err = |e: csv::Error| RtaError::Domain(format!("CSV: {e}"));
    csv.write_record(trajectory_header()).map_err(err)?;
    for r in &result.trajectory {
        csv.write_record(row(r)).map_err(err)?;
    }
    csv.flush()
        .map_err(|e| RtaError::Domain(format!("CSV: {e}")))?;
    Ok(())
}

pub fn write_trajectory_csv(result: &EpisodeResult, path: &Path) -> Result<()> {
    if result.trajectory.is_empty() {
        return Err(RtaError::Domain("empty trajectory".into()));
    }
    let file = File::create(path).map_err(|e| RtaError::io(path, e))?;
    write_trajectory(result, std::io::BufWriter::new(file)).map_err(|e| match e {
        RtaError::Domain(m) => RtaError::io(path, std::io::Error::other(m)),
        other => other,
    })
}
