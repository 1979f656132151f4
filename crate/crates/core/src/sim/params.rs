use serde::{Deserialize, Serialize};

use crate::error::{Result, RtaError};

pub const KELVIN_OFFSET: f64 = 273.15;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - KELVIN_OFFSET
}

/// Physical constants, actuator limits and constraint parameters of the
/// 6U spacecraft. Angles are radians, temperatures at this boundary are
/// Celsius except the Earth's effective temperature (Kelvin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacecraftParams {
    /// Principal moments of inertia (kg·m²).
    pub inertia: [f64; 3],
    /// Reaction wheel spin-axis inertia (kg·m²).
    pub wheel_inertia: f64,
    /// +1 applies `τ = +D ψ̇`; -1 the reaction convention `τ = -D ψ̇`.
    pub wheel_torque_sign: f64,

    pub node_mass: f64,
    pub node_area: f64,
    pub specific_heat: f64,
    pub absorptivity: f64,
    pub emissivity: f64,
    pub solar_constant: f64,
    pub albedo_factor: f64,
    /// F_E = view_factor_scale · max(0, cos θ_EI)
    pub view_factor_scale: f64,
    pub earth_temp_k: f64,
    pub stefan_boltzmann: f64,

    pub panel_area: f64,
    /// Ideal panel performance (W/m²).
    pub panel_ideal_performance: f64,
    pub panel_degradation: f64,
    pub power_out: f64,

    /// Mean motion (rad/s); the sun angle decreases at this rate.
    pub mean_motion: f64,

    pub limits: Limits,
    pub constraints: ConstraintParams,
    pub tuning: Tuning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub omega_max: f64,
    pub omegadot_max: f64,
    pub psi_max: f64,
    pub psidot_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintParams {
    /// Sensor field of view (rad).
    pub fov_exclusion: f64,
    /// Extra exclusion-zone buffer β (rad).
    pub buffer_exclusion: f64,
    /// Antenna field of view (rad).
    pub fov_comm: f64,
    pub t_max_c: f64,
    pub e_min: f64,
}

/// Linear class-κ gains `α_j(h) = k_j h` for each lifting level plus the
/// additive bias σ of the barrier condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierGains {
    pub k1: f64,
    pub k2: f64,
    pub bias: f64,
}

impl Default for BarrierGains {
    fn default() -> Self {
        BarrierGains {
            k1: 0.05,
            k2: 0.05,
            bias: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tuning {
    pub exclusion: BarrierGains,
    pub communication: BarrierGains,
    pub temperature: BarrierGains,
    pub battery: BarrierGains,
    pub omega: BarrierGains,
    pub psi: BarrierGains,
    /// Sun-incidence weight on the temperature constraint (K/rad).
    pub delta0: f64,
    /// Earth-incidence weight on the temperature constraint (K/rad).
    pub delta1: f64,
    /// Sun-incidence weight on the battery constraint (J/rad).
    pub delta2: f64,
}

impl Default for Tuning {
    fn default() -> Self {
        crate::harness::calibrate::CALIBRATED.clone()
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            omega_max: 1f64.to_radians(),
            omegadot_max: 2f64.to_radians(),
            psi_max: 576.0,
            psidot_max: 181.3,
        }
    }
}

impl Default for ConstraintParams {
    fn default() -> Self {
        ConstraintParams {
            fov_exclusion: 60f64.to_radians(),
            buffer_exclusion: 10f64.to_radians(),
            fov_comm: 180f64.to_radians(),
            t_max_c: 10.0,
            e_min: 1000.0,
        }
    }
}

impl Default for SpacecraftParams {
    fn default() -> Self {
        SpacecraftParams {
            inertia: [0.022, 0.044, 0.056],
            wheel_inertia: 4.1e-5,
            wheel_torque_sign: 1.0,
            node_mass: 2.0,
            node_area: 0.03,
            specific_heat: 900.0,
            absorptivity: 0.13,
            emissivity: 0.06,
            solar_constant: 1367.0,
            albedo_factor: 0.27,
            view_factor_scale: 0.8,
            earth_temp_k: 255.0,
            stefan_boltzmann: 5.67051e-8,
            panel_area: 0.03,
            panel_ideal_performance: 983.3,
            panel_degradation: 0.77,
            power_out: 15.0,
            mean_motion: 0.001027,
            limits: Limits::default(),
            constraints: ConstraintParams::default(),
            tuning: Tuning::default(),
        }
    }
}

impl SpacecraftParams {
    pub fn t_max_k(&self) -> f64 {
        celsius_to_kelvin(self.constraints.t_max_c)
    }

    /// `sign · D / J_i`: body acceleration per unit wheel acceleration.
    pub fn control_gain(&self, axis: usize) -> f64 {
        self.wheel_torque_sign * self.wheel_inertia / self.inertia[axis]
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(path: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(RtaError::config(
                    path,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        }
        fn finite(path: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(RtaError::config(path, format!("must be finite, got {v}")))
            }
        }
        fn non_negative(path: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(RtaError::config(
                    path,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        }

        for (i, j) in self.inertia.iter().enumerate() {
            positive(&format!("spacecraft.inertia[{i}]"), *j)?;
        }
        positive("spacecraft.wheel_inertia", self.wheel_inertia)?;
        if self.wheel_torque_sign != 1.0 && self.wheel_torque_sign != -1.0 {
            return Err(RtaError::config(
                "spacecraft.wheel_torque_sign",
                "must be 1 or -1",
            ));
        }
        positive("spacecraft.node_mass", self.node_mass)?;
        positive("spacecraft.node_area", self.node_area)?;
        positive("spacecraft.specific_heat", self.specific_heat)?;
        non_negative("spacecraft.absorptivity", self.absorptivity)?;
        non_negative("spacecraft.emissivity", self.emissivity)?;
        non_negative("spacecraft.solar_constant", self.solar_constant)?;
        non_negative("spacecraft.albedo_factor", self.albedo_factor)?;
        non_negative("spacecraft.view_factor_scale", self.view_factor_scale)?;
        positive("spacecraft.earth_temp_k", self.earth_temp_k)?;
        positive("spacecraft.stefan_boltzmann", self.stefan_boltzmann)?;
        positive("spacecraft.panel_area", self.panel_area)?;
        non_negative(
            "spacecraft.panel_ideal_performance",
            self.panel_ideal_performance,
        )?;
        non_negative("spacecraft.panel_degradation", self.panel_degradation)?;
        non_negative("spacecraft.power_out", self.power_out)?;
        finite("spacecraft.mean_motion", self.mean_motion)?;

        let l = &self.limits;
        positive("spacecraft.limits.omega_max", l.omega_max)?;
        positive("spacecraft.limits.omegadot_max", l.omegadot_max)?;
        positive("spacecraft.limits.psi_max", l.psi_max)?;
        positive("spacecraft.limits.psidot_max", l.psidot_max)?;

        let c = &self.constraints;
        positive("spacecraft.constraints.fov_exclusion", c.fov_exclusion)?;
        non_negative(
            "spacecraft.constraints.buffer_exclusion",
            c.buffer_exclusion,
        )?;
        positive("spacecraft.constraints.fov_comm", c.fov_comm)?;
        if !(c.t_max_c.is_finite() && c.t_max_c > -KELVIN_OFFSET) {
            return Err(RtaError::config(
                "spacecraft.constraints.t_max_c",
                "must be above absolute zero",
            ));
        }
        non_negative("spacecraft.constraints.e_min", c.e_min)?;

        let t = &self.tuning;
        for (name, g) in [
            ("exclusion", &t.exclusion),
            ("communication", &t.communication),
            ("temperature", &t.temperature),
            ("battery", &t.battery),
            ("omega", &t.omega),
            ("psi", &t.psi),
        ] {
            positive(&format!("spacecraft.tuning.{name}.k1"), g.k1)?;
            positive(&format!("spacecraft.tuning.{name}.k2"), g.k2)?;
            finite(&format!("spacecraft.tuning.{name}.bias"), g.bias)?;
        }
        non_negative("spacecraft.tuning.delta0", t.delta0)?;
        non_negative("spacecraft.tuning.delta1", t.delta1)?;
        non_negative("spacecraft.tuning.delta2", t.delta2)?;
        Ok(())
    }
}
