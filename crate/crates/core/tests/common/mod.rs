#![allow(dead_code)]

use attitude_rta::barriers::{BarrierRow, ConstraintId, ControlBounds};
use attitude_rta::harness::{SafeSampler, SampleRanges, DEFAULT_BUFFER};
use attitude_rta::qp::QpProblem;
use attitude_rta::sim::{celsius_to_kelvin, FullState, Quaternion, SpacecraftParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-normal halfspaces `n·u ≥ d` of a hard-row problem, box included.
fn halfspaces(p: &QpProblem) -> Vec<([f64; 3], f64)> {
    let mut out: Vec<([f64; 3], f64)> = p
        .rows
        .iter()
        .map(|r| {
            let n = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
            (r.a.map(|v| v / n), -r.b / n)
        })
        .collect();
    for i in 0..3 {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        out.push((e, p.bounds.lower[i]));
        out.push((e.map(|v: f64| -v), -p.bounds.upper[i]));
    }
    out
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 {
        return None;
    }
    let col = |k: usize| -> f64 {
        let mut a = m;
        for i in 0..3 {
            a[i][k] = r[i];
        }
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    Some([col(0) / det, col(1) / det, col(2) / det])
}

/// Projection of `u0` onto `{u : n_k·u = d_k}` for up to three normals.
fn project(u0: &[f64; 3], eqs: &[([f64; 3], f64)]) -> Option<[f64; 3]> {
    let k = eqs.len();
    if k == 0 {
        return Some(*u0);
    }
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    // Gram system padded to 3x3 with identity.
    let mut g = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for i in 0..3 {
        g[i][i] = 1.0;
    }
    for i in 0..k {
        for j in 0..k {
            g[i][j] = dot(&eqs[i].0, &eqs[j].0);
        }
        r[i] = eqs[i].1 - dot(&eqs[i].0, u0);
    }
    let lam = solve3(g, r)?;
    let mut u = *u0;
    for i in 0..k {
        for c in 0..3 {
            u[c] += lam[i] * eqs[i].0[c];
        }
    }
    Some(u)
}

/// Brute-force minimizer of `½‖u − u_des‖²` over a hard-row problem: the
/// best feasible projection of `u_des` onto every face spanned by at most
/// three constraints.
pub fn enumerate_qp(p: &QpProblem) -> Option<([f64; 3], f64)> {
    let hs = halfspaces(p);
    let n = hs.len();
    let feasible = |u: &[f64; 3]| {
        hs.iter()
            .all(|(c, d)| c[0] * u[0] + c[1] * u[1] + c[2] * u[2] - d >= -1e-9 * (1.0 + d.abs()))
    };
    let mut best: Option<([f64; 3], f64)> = None;
    let mut consider = |eqs: Vec<([f64; 3], f64)>| {
        if let Some(u) = project(&p.u_des, &eqs) {
            if feasible(&u) {
                let f = objective(&p.u_des, &u);
                if best.is_none_or(|(_, bf)| f < bf) {
                    best = Some((u, f));
                }
            }
        }
    };
    consider(vec![]);
    for i in 0..n {
        consider(vec![hs[i]]);
        for j in i + 1..n {
            consider(vec![hs[i], hs[j]]);
            for k in j + 1..n {
                consider(vec![hs[i], hs[j], hs[k]]);
            }
        }
    }
    best
}

pub fn objective(u_des: &[f64; 3], u: &[f64; 3]) -> f64 {
    0.5 * (0..3).map(|i| (u[i] - u_des[i]).powi(2)).sum::<f64>()
}

/// Worst violation (positive) of the hard rows and the box.
pub fn max_violation(p: &QpProblem, u: &[f64; 3]) -> f64 {
    halfspaces(p)
        .iter()
        .map(|(c, d)| d - (c[0] * u[0] + c[1] * u[1] + c[2] * u[2]))
        .fold(0.0, f64::max)
}

/// Random feasible problem: rows pass strictly through an interior point of
/// a random box, with row scales spread over several decades.
pub fn random_feasible_qp(rng: &mut ChaCha8Rng) -> QpProblem {
    let limit: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.5..20.0));
    let bounds = ControlBounds::symmetric(limit);
    let u_des: [f64; 3] =
        std::array::from_fn(|i| rng.random_range(-2.0 * limit[i]..2.0 * limit[i]));
    let interior: [f64; 3] =
        std::array::from_fn(|i| rng.random_range(-0.9 * limit[i]..0.9 * limit[i]));
    let mut p = QpProblem::new(u_des, bounds);
    let rows = rng.random_range(0..=9);
    for k in 0..rows {
        let scale = 10f64.powf(rng.random_range(-2.0..3.0));
        let a: [f64; 3] = std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0));
        let margin = scale * rng.random_range(0.0..2.0);
        let b = margin - (a[0] * interior[0] + a[1] * interior[1] + a[2] * interior[2]);
        let id = ConstraintId::ALL[k % ConstraintId::ALL.len()];
        p.push_row(
            BarrierRow {
                constraint: id,
                a,
                b,
            },
            None,
        );
    }
    p
}

/// Buffered safe state from the default sampling box.
pub fn safe_states(n: usize, seed: u64, p: &SpacecraftParams) -> Vec<FullState> {
    let sampler = SafeSampler::new(SampleRanges::for_params(p), DEFAULT_BUFFER, p).unwrap();
    (0..n as u64)
        .map(|i| sampler.sample(seed.wrapping_add(i)).unwrap())
        .collect()
}

/// Unconstrained random state, including unsafe ones.
pub fn random_state(rng: &mut ChaCha8Rng) -> FullState {
    let q = Quaternion(std::array::from_fn(|_| rng.random_range(-1.0..1.0))).normalized();
    FullState {
        q,
        omega: std::array::from_fn(|_| rng.random_range(-0.05..0.05)),
        psi: std::array::from_fn(|_| rng.random_range(-600.0..600.0)),
        temperature: celsius_to_kelvin(rng.random_range(-40.0..40.0)),
        energy: rng.random_range(0.0..12_000.0),
        sun_angle: rng.random_range(0.0..std::f64::consts::TAU),
    }
}
