//! Dense active-set solver for the filtering QP
//!
//! ```text
//!     minimize    ‖u_des − u‖² + Σ p_i δ_i²
//!     subject to  a_i·u + b_i ≥ δ_i     (δ_i ≡ 0 for unslacked rows)
//!                 lower ≤ u ≤ upper
//! ```
//!
//! Substituting `s_i = √p_i δ_i` turns the objective into `‖z − z0‖²` with
//! `z = (u, s)`, i.e. a Euclidean projection onto a polyhedron. That problem is
//! solved with the dual active-set method of Goldfarb and Idnani, which starts
//! from the unconstrained minimizer, adds the most violated constraint each
//! outer iteration and reports infeasibility when a violated constraint is
//! linearly dependent on an active set whose multipliers cannot be reduced.
//! Equality subproblems are solved through a Cholesky factorization of the
//! active-set Gram matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::barriers::{BarrierRow, ControlBounds};
use crate::error::{Result, RtaError};

pub const MAX_ITERATIONS: usize = 200;
/// Primal feasibility tolerance (row units).
pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const KKT_TOL: f64 = 1e-8;
/// A unit normal whose component outside the active span is shorter than
/// this is treated as linearly dependent on the active set.
const DEPENDENCE_TOL: f64 = 1e-7;
/// Exit check on the unit-normal rows, relative to the right-hand side.
const VERIFY_TOL: f64 = 1e-6;
/// Constraints are added while their normalized violation exceeds this.
const ADD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpProblem {
    pub u_des: [f64; 3],
    pub rows: Vec<BarrierRow>,
    /// Slack penalty `p_i` for each row, `None` for hard rows.
    pub slack: Vec<Option<f64>>,
    pub bounds: ControlBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

impl QpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            QpStatus::Optimal => "optimal",
            QpStatus::Infeasible => "infeasible",
            QpStatus::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub u: [f64; 3],
    /// One value per slacked row, in row order.
    pub slacks: Vec<f64>,
    pub status: QpStatus,
    pub iterations: usize,
    pub kkt_residual: f64,
}

impl QpProblem {
    pub fn new(u_des: [f64; 3], bounds: ControlBounds) -> Self {
        QpProblem {
            u_des,
            rows: Vec::new(),
            slack: Vec::new(),
            bounds,
        }
    }

    pub fn push_row(&mut self, row: BarrierRow, penalty: Option<f64>) {
        self.rows.push(row);
        self.slack.push(penalty);
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.slack.len() {
            return Err(RtaError::Domain(
                "slack map length differs from row count".into(),
            ));
        }
        if !self.u_des.iter().all(|v| v.is_finite()) {
            return Err(RtaError::Domain("non-finite desired control".into()));
        }
        for (i, p) in self.slack.iter().enumerate() {
            if let Some(p) = p {
                if !(p.is_finite() && *p > 0.0) {
                    return Err(RtaError::Domain(format!(
                        "row {i}: slack penalty must be > 0"
                    )));
                }
            }
        }
        if !self.rows.is_empty() && self.slack.iter().all(|s| s.is_some()) {
            return Err(RtaError::Domain(
                "at least one barrier row must be left without a slack".into(),
            ));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !(r.b.is_finite() && r.a.iter().all(|v| v.is_finite())) {
                return Err(RtaError::Domain(format!("row {i} is not finite")));
            }
        }
        for i in 0..3 {
            if !(self.bounds.lower[i] <= self.bounds.upper[i]) {
                return Err(RtaError::Domain(format!("box bound {i} is empty")));
            }
        }
        Ok(())
    }

    fn slack_count(&self) -> usize {
        self.slack.iter().filter(|s| s.is_some()).count()
    }

    /// Constraints `cᵀz ≥ d` in the scaled variables, rows first then the box.
    fn scaled_constraints(&self) -> (Vec<DVector<f64>>, Vec<f64>) {
        let n = 3 + self.slack_count();
        let mut normals = Vec::with_capacity(self.rows.len() + 6);
        let mut rhs = Vec::with_capacity(self.rows.len() + 6);
        let mut slack_col = 3;
        for (row, pen) in self.rows.iter().zip(&self.slack) {
            let mut c = DVector::zeros(n);
            c.fixed_rows_mut::<3>(0).copy_from_slice(&row.a);
            if let Some(p) = pen {
                c[slack_col] = -1.0 / p.sqrt();
                slack_col += 1;
            }
            normals.push(c);
            rhs.push(-row.b);
        }
        for i in 0..3 {
            let mut lo = DVector::zeros(n);
            lo[i] = 1.0;
            normals.push(lo);
            rhs.push(self.bounds.lower[i]);
            let mut hi = DVector::zeros(n);
            hi[i] = -1.0;
            normals.push(hi);
            rhs.push(-self.bounds.upper[i]);
        }
        (normals, rhs)
    }

    fn scaled_point(&self, u: &[f64; 3], slacks: &[f64]) -> DVector<f64> {
        let mut z = DVector::zeros(3 + self.slack_count());
        z.fixed_rows_mut::<3>(0).copy_from_slice(u);
        for (k, (s, p)) in slacks.iter().zip(self.slack.iter().flatten()).enumerate() {
            z[3 + k] = s * p.sqrt();
        }
        z
    }

    fn scaled_target(&self) -> DVector<f64> {
        self.scaled_point(&self.u_des, &vec![0.0; self.slack_count()])
    }
}

/// Reusable solver. Holds scratch space only; every solve starts cold, so a
/// given problem always produces the same bits.
#[derive(Debug, Default)]
pub struct QpSolver {
    active: Vec<usize>,
    multipliers: Vec<f64>,
}

impl QpSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, problem: &QpProblem) -> QpSolution {
        if let Err(e) = problem.validate() {
            log::warn!("rejecting malformed QP: {e}");
            return QpSolution {
                u: problem.u_des,
                slacks: vec![0.0; problem.slack_count()],
                status: QpStatus::Infeasible,
                iterations: 0,
                kkt_residual: f64::INFINITY,
            };
        }
        let (mut normals, mut rhs) = problem.scaled_constraints();
        // Unit normals keep the Gram matrix well conditioned when row scales
        // differ by many orders of magnitude.
        let norms: Vec<f64> = normals.iter().map(|c| c.norm()).collect();
        for ((c, d), &nrm) in normals.iter_mut().zip(rhs.iter_mut()).zip(&norms) {
            if nrm > 0.0 {
                *c /= nrm;
                *d /= nrm;
            }
        }
        let norms: Vec<f64> = norms
            .iter()
            .map(|&nrm| if nrm > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let target = problem.scaled_target();
        let mut z = target.clone();
        self.active.clear();
        self.multipliers.clear();

        let mut iterations = 0;
        let status = 'outer: loop {
            // Most violated inactive constraint; ties go to the lowest index.
            let mut entering = None;
            let mut worst = ADD_TOL;
            for (j, (c, d)) in normals.iter().zip(&rhs).enumerate() {
                if self.active.contains(&j) {
                    continue;
                }
                let residual = c.dot(&z) - d;
                if norms[j] == 0.0 {
                    if residual < -FEASIBILITY_TOL {
                        break 'outer QpStatus::Infeasible;
                    }
                    continue;
                }
                let violation = -residual / norms[j];
                if violation > worst {
                    worst = violation;
                    entering = Some(j);
                }
            }
            let Some(p) = entering else {
                break QpStatus::Optimal;
            };
            let np = &normals[p];
            let mut lambda_p = 0.0;

            loop {
                iterations += 1;
                if iterations > MAX_ITERATIONS {
                    break 'outer QpStatus::MaxIterations;
                }
                let (step, dual_dir) = self.directions(&normals, np);
                let mut partial = f64::INFINITY;
                let mut leaving = None;
                for (k, r) in dual_dir.iter().enumerate() {
                    if *r > 1e-14 {
                        let t = self.multipliers[k] / r;
                        if t < partial {
                            partial = t;
                            leaving = Some(k);
                        }
                    }
                }

                if !(step.iter().all(|v| v.is_finite()) && dual_dir.iter().all(|v| v.is_finite())) {
                    break 'outer QpStatus::Infeasible;
                }
                if step.norm() <= DEPENDENCE_TOL {
                    // Dependent on the active set: pure dual step or infeasible.
                    let Some(l) = leaving else {
                        break 'outer QpStatus::Infeasible;
                    };
                    for (k, r) in dual_dir.iter().enumerate() {
                        self.multipliers[k] -= partial * r;
                    }
                    lambda_p += partial;
                    self.drop_active(l);
                    continue;
                }

                let slack_p = np.dot(&z) - rhs[p];
                let full = -slack_p / step.dot(np);
                let t = full.min(partial);
                z.axpy(t, &step, 1.0);
                for (k, r) in dual_dir.iter().enumerate() {
                    self.multipliers[k] -= t * r;
                }
                lambda_p += t;
                if full <= partial {
                    self.active.push(p);
                    self.multipliers.push(lambda_p);
                    break;
                }
                self.drop_active(leaving.expect("partial step has a blocking constraint"));
            }
        };

        let status = if status == QpStatus::Optimal && !z.iter().all(|v| v.is_finite()) {
            log::debug!("QP iterate became non-finite; treating as infeasible");
            QpStatus::Infeasible
        } else if status == QpStatus::Optimal
            && normals
                .iter()
                .zip(&rhs)
                .any(|(c, d)| c.dot(&z) - d < -VERIFY_TOL * (1.0 + d.abs()))
        {
            // Near-parallel active normals can leave the iterate outside an
            // active row; such problems are numerically infeasible.
            log::debug!("QP iterate violates a constraint on exit; treating as infeasible");
            QpStatus::Infeasible
        } else {
            status
        };
        let n_slack = problem.slack_count();
        let mut u = [z[0], z[1], z[2]];
        let slacks: Vec<f64> = problem
            .slack
            .iter()
            .flatten()
            .enumerate()
            .map(|(k, p)| z[3 + k] / p.sqrt())
            .collect();
        debug_assert_eq!(slacks.len(), n_slack);

        if status != QpStatus::Optimal {
            return QpSolution {
                u: problem.u_des,
                slacks: vec![0.0; n_slack],
                status,
                iterations,
                kkt_residual: f64::INFINITY,
            };
        }

        // Remove last-bit excursions so the box holds exactly.
        u = problem.bounds.clamp(&u);
        let kkt = self.certificate(problem, &normals, &rhs, &target, &u, &slacks);
        QpSolution {
            u,
            slacks,
            status,
            iterations,
            kkt_residual: kkt,
        }
    }

    /// Primal direction `(I − N N⁺) c` and dual direction `N⁺ c` for the
    /// current active set.
    fn directions(&self, normals: &[DVector<f64>], c: &DVector<f64>) -> (DVector<f64>, Vec<f64>) {
        if self.active.is_empty() {
            return (c.clone(), Vec::new());
        }
        let n = c.len();
        let k = self.active.len();
        let mut active = DMatrix::zeros(n, k);
        for (col, &j) in self.active.iter().enumerate() {
            active.set_column(col, &normals[j]);
        }
        let gram = active.transpose() * &active;
        let rhs = active.transpose() * c;
        let r = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k)),
        };
        let step = c - &active * &r;
        (step, r.iter().copied().collect())
    }

    fn drop_active(&mut self, k: usize) {
        self.active.remove(k);
        self.multipliers.remove(k);
    }

    /// KKT residual using the solver's own multipliers.
    fn certificate(
        &self,
        problem: &QpProblem,
        normals: &[DVector<f64>],
        rhs: &[f64],
        target: &DVector<f64>,
        u: &[f64; 3],
        slacks: &[f64],
    ) -> f64 {
        let z = problem.scaled_point(u, slacks);
        // Objective ‖z − z0‖² has gradient 2(z − z0); GI multipliers are for ½‖·‖².
        let mut stationarity = (&z - target) * 2.0;
        let mut complementarity: f64 = 0.0;
        for (&j, &lam) in self.active.iter().zip(&self.multipliers) {
            stationarity.axpy(-2.0 * lam, &normals[j], 1.0);
            complementarity =
                complementarity.max((2.0 * lam * (normals[j].dot(&z) - rhs[j])).abs());
            if lam < 0.0 {
                complementarity = complementarity.max(-lam);
            }
        }
        let primal = normals
            .iter()
            .zip(rhs)
            .map(|(c, d)| (d - c.dot(&z)).max(0.0))
            .fold(0.0, f64::max);
        stationarity.norm().max(primal).max(complementarity)
    }
}

/// Solve with a fresh solver.
pub fn solve(problem: &QpProblem) -> QpSolution {
    QpSolver::new().solve(problem)
}

/// KKT residual of a candidate `(u, δ)` without access to multipliers: the
/// largest of the stationarity error (after fitting non-negative multipliers
/// on the near-active set), the worst primal violation and the worst
/// complementarity product. Stationarity is measured for the objective
/// `‖u − u_des‖² + Σ (√p δ)²`.
pub fn kkt_residual(problem: &QpProblem, u: &[f64; 3], slacks: &[f64]) -> f64 {
    let (normals, rhs) = problem.scaled_constraints();
    let z = problem.scaled_point(u, slacks);
    let grad = (&z - problem.scaled_target()) * 2.0;
    let residuals: Vec<f64> = normals
        .iter()
        .zip(&rhs)
        .map(|(c, d)| c.dot(&z) - d)
        .collect();
    let primal = residuals.iter().map(|r| (-r).max(0.0)).fold(0.0, f64::max);

    let near: Vec<usize> = (0..normals.len())
        .filter(|&j| residuals[j] <= 1e-9 * normals[j].norm().max(1.0))
        .collect();
    let (stationarity, lambdas) = nonnegative_fit(&normals, &near, &grad);
    let complementarity = near
        .iter()
        .zip(&lambdas)
        .map(|(&j, l)| (l * residuals[j]).abs())
        .fold(0.0, f64::max);
    stationarity.max(primal).max(complementarity)
}

/// min ‖g − Σ λ_j c_j‖ over λ ≥ 0 by enumerating supports.
fn nonnegative_fit(normals: &[DVector<f64>], cand: &[usize], g: &DVector<f64>) -> (f64, Vec<f64>) {
    let n = g.len();
    let mut best = (g.norm(), vec![0.0; cand.len()]);
    let m = cand.len().min(16);
    for mask in 1u32..(1u32 << m) {
        let support: Vec<usize> = (0..m).filter(|b| mask & (1 << b) != 0).collect();
        if support.len() > n {
            continue;
        }
        let mut mat = DMatrix::zeros(n, support.len());
        for (col, &b) in support.iter().enumerate() {
            mat.set_column(col, &normals[cand[b]]);
        }
        let gram = mat.transpose() * &mat;
        let Some(ch) = gram.cholesky() else { continue };
        let lam = ch.solve(&(mat.transpose() * g));
        if lam.iter().any(|v| *v < 0.0) {
            continue;
        }
        let res = (g - &mat * &lam).norm();
        if res < best.0 {
            let mut full = vec![0.0; cand.len()];
            for (col, &b) in support.iter().enumerate() {
                full[b] = lam[col];
            }
            best = (res, full);
        }
    }
    best
}
