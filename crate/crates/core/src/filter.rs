//! Active set invariance filter.
//!
//! Each call assembles one barrier row per enabled constraint, adds slack
//! columns for the constraints allowed to yield, and projects the desired
//! control onto the resulting polyhedron. If the QP fails the desired control
//! (clamped into the admissible box) is passed through.

use serde::{Deserialize, Serialize};

use crate::barriers::{
    barrier_value, default_bounds, lift_and_rowify, physical_margin, ConstraintId, ControlBounds,
};
use crate::error::{Result, RtaError};
use crate::qp::{QpProblem, QpSolver, QpStatus};
use crate::sim::{ControlInput, FullState, SpacecraftParams};

pub const N_CONSTRAINTS: usize = ConstraintId::ALL.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    #[default]
    PassThrough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub enabled: Vec<ConstraintId>,
    /// Constraints that receive a slack column.
    pub slack: Vec<ConstraintId>,
    /// Slack penalty `p`, shared by every slacked constraint.
    pub penalty: f64,
    pub fallback: FallbackPolicy,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            enabled: ConstraintId::ALL.to_vec(),
            slack: vec![ConstraintId::Communication],
            penalty: 1e12,
            fallback: FallbackPolicy::PassThrough,
        }
    }
}

impl FilterConfig {
    pub fn with_slack(mut self, slack: Vec<ConstraintId>) -> Self {
        self.slack = slack;
        self
    }

    pub fn is_slacked(&self, id: ConstraintId) -> bool {
        self.slack.contains(&id)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penalty.is_finite() && self.penalty > 0.0) {
            return Err(RtaError::config("filter.penalty", "must be finite and > 0"));
        }
        for s in &self.slack {
            if !self.enabled.contains(s) {
                return Err(RtaError::config(
                    "filter.slack",
                    format!("`{s}` is slacked but not enabled"),
                ));
            }
        }
        if !self.enabled.is_empty() && self.enabled.iter().all(|c| self.slack.contains(c)) {
            return Err(RtaError::config(
                "filter.slack",
                "slack assignment must leave at least one enabled constraint without a slack",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub u_act: ControlInput,
    /// Desired control after clamping into the admissible box.
    pub u_des_clamped: ControlInput,
    pub intervened: bool,
    /// Slack value per constraint (indexed like [`ConstraintId::ALL`]).
    pub slack_used: [f64; N_CONSTRAINTS],
    pub qp_status: QpStatus,
    /// Barrier-condition value at `u_act`, `None` when the row was not in the QP.
    pub row_margins: [Option<f64>; N_CONSTRAINTS],
    /// Constraints whose row had no control authority while demanding some.
    pub authority_loss: Vec<ConstraintId>,
}

pub struct SafetyFilter {
    params: SpacecraftParams,
    config: FilterConfig,
    bounds: ControlBounds,
    solver: QpSolver,
}

impl SafetyFilter {
    pub fn new(params: SpacecraftParams, config: FilterConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        let bounds = default_bounds(&params)?;
        Ok(SafetyFilter {
            params,
            config,
            bounds,
            solver: QpSolver::new(),
        })
    }

    pub fn bounds(&self) -> &ControlBounds {
        &self.bounds
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn params(&self) -> &SpacecraftParams {
        &self.params
    }

    /// Build the QP for `state` and `u_des` (already clamped).
    pub fn build_problem(
        &self,
        state: &FullState,
        u_des: &[f64; 3],
    ) -> (QpProblem, Vec<ConstraintId>) {
        let mut problem = QpProblem::new(*u_des, self.bounds);
        let mut lost = Vec::new();
        for &id in &self.config.enabled {
            let row = lift_and_rowify(id, state, &self.params);
            if !row.has_authority() {
                if row.b < 0.0 {
                    lost.push(id);
                }
                continue;
            }
            let penalty = self.config.is_slacked(id).then_some(self.config.penalty);
            problem.push_row(row, penalty);
        }
        (problem, lost)
    }

    pub fn filter(&mut self, state: &FullState, u_des: &ControlInput) -> FilterOutcome {
        let clamped = self.bounds.clamp(&u_des.0);
        let (problem, authority_loss) = self.build_problem(state, &clamped);
        for id in &authority_loss {
            log::debug!("authority loss on {id}: barrier row has no control coefficients");
        }
        let solution = self.solver.solve(&problem);

        let u_act = match solution.status {
            QpStatus::Optimal => solution.u,
            status => {
                log::debug!("QP {}: passing desired control through", status.as_str());
                clamped
            }
        };

        let mut slack_used = [0.0; N_CONSTRAINTS];
        let mut row_margins = [None; N_CONSTRAINTS];
        let mut k = 0;
        for (row, pen) in problem.rows.iter().zip(&problem.slack) {
            let i = row.constraint.index();
            row_margins[i] = Some(row.eval(&u_act));
            if pen.is_some() {
                if solution.status == QpStatus::Optimal {
                    slack_used[i] = solution.slacks[k];
                }
                k += 1;
            }
        }

        let moved = (0..3)
            .map(|i| (u_act[i] - u_des.0[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        FilterOutcome {
            u_act: ControlInput(u_act),
            u_des_clamped: ControlInput(clamped),
            intervened: moved > 1e-9,
            slack_used,
            qp_status: solution.status,
            row_margins,
            authority_loss,
        }
    }
}

/// Constraint margins of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    /// Physical margins `h_i` (rad, rad, K, J, (rad/s)², (rad/s)²).
    pub margins: [f64; N_CONSTRAINTS],
    /// Values of the enforced barrier functions (augmented temperature and
    /// battery forms).
    pub barrier_values: [f64; N_CONSTRAINTS],
    pub flags: [bool; N_CONSTRAINTS],
    pub safe: bool,
}

impl SafetyReport {
    pub fn margin(&self, id: ConstraintId) -> f64 {
        self.margins[id.index()]
    }

    pub fn is_safe(&self, id: ConstraintId) -> bool {
        self.flags[id.index()]
    }
}

/// Evaluate every constraint; the state is safe iff every non-slacked margin
/// is non-negative.
pub fn evaluate_safety(
    state: &FullState,
    p: &SpacecraftParams,
    slacked: &[ConstraintId],
) -> SafetyReport {
    let x = state.to_vector();
    let margins = ConstraintId::ALL.map(|id| physical_margin(id, state, p));
    let barrier_values = ConstraintId::ALL.map(|id| barrier_value(id, &x, p));
    let flags = margins.map(|m| m >= 0.0);
    let safe = ConstraintId::ALL
        .iter()
        .all(|id| slacked.contains(id) || flags[id.index()]);
    SafetyReport {
        margins,
        barrier_values,
        flags,
        safe,
    }
}
