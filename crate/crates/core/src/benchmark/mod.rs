//! The best-fixed-distribution benchmark `OPT_FD`, its stochastic form, the
//! per-round scaled benchmark, a brute-force oracle and the Lagrangian
//! minmax check.

pub mod simplex;

use crate::env::{validate_distribution, EnvironmentTrace};
use crate::error::{BwkError, Result};

/// Optimal `(T*, A*)` pair and the value it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct OptSolution {
    /// Stopping round, `0` when nothing is worth playing.
    pub t_star: usize,
    /// Distribution over all `K` actions, null included.
    pub dist: Vec<f64>,
    pub value: f64,
    /// `t_star / T`.
    pub x: f64,
}

/// Best fixed distribution of a prefix LP: `max p.s_r  s.t.  p.s_c[i] <= budget`.
///
/// `s_r[a]` and `s_c[i][a]` are over all `K` actions; the null column is
/// ignored (it is zero by construction).
fn solve_prefix(s_r: &[f64], s_c: &[Vec<f64>], budget: f64) -> (f64, Vec<f64>) {
    let k = s_r.len();
    let mut dist = vec![0.0; k];
    dist[0] = 1.0;
    let top = s_r[1..].iter().cloned().fold(0.0_f64, f64::max);
    if k == 1 || top <= 0.0 {
        return (0.0, dist);
    }
    if s_c.len() == 1 {
        return solve_single_resource(s_r, &s_c[0], budget);
    }
    // Row-normalise so every coefficient is O(1) and the pivot tolerance is scale-free.
    let n = k - 1;
    let c: Vec<f64> = s_r[1..].iter().map(|v| v / top).collect();
    let mut rows = Vec::with_capacity(s_c.len() + 1);
    let mut rhs = Vec::with_capacity(s_c.len() + 1);
    for row in s_c {
        let scale = row[1..].iter().cloned().fold(budget, f64::max).max(f64::MIN_POSITIVE);
        rows.push(row[1..].iter().map(|v| v / scale).collect::<Vec<_>>());
        rhs.push(budget / scale);
    }
    rows.push(vec![1.0; n]);
    rhs.push(1.0);
    let sol = simplex::maximize(&c, &rows, &rhs).expect("simplex row bounds the feasible set");
    let mass: f64 = sol.x.iter().sum();
    let scale = if mass > 1.0 { 1.0 / mass } else { 1.0 };
    for (a, p) in sol.x.iter().enumerate() {
        dist[a + 1] = p * scale;
    }
    dist[0] = (1.0 - dist[1..].iter().sum::<f64>()).max(0.0);
    let value = dist.iter().zip(s_r).map(|(p, r)| p * r).sum();
    (value, dist)
}

/// Exact vertex enumeration for one resource.
///
/// Vertices of `{p >= 0, sum p <= 1, p.c <= B}` have at most two positive
/// coordinates: one arm capped by whichever constraint binds first, or two
/// arms with both constraints tight.
fn solve_single_resource(s_r: &[f64], s_c: &[f64], budget: f64) -> (f64, Vec<f64>) {
    let k = s_r.len();
    let mut best_value = 0.0;
    let mut best: Vec<(usize, f64)> = Vec::new();
    let consider = |value: f64, support: Vec<(usize, f64)>, best_value: &mut f64, best: &mut Vec<(usize, f64)>| {
        if value > *best_value * (1.0 + 1e-13) {
            *best_value = value;
            *best = support;
        }
    };
    for a in 1..k {
        let p = if s_c[a] <= budget { 1.0 } else { budget / s_c[a] };
        consider(p * s_r[a], vec![(a, p)], &mut best_value, &mut best);
    }
    for a in 1..k {
        for b in a + 1..k {
            let (ca, cb) = (s_c[a], s_c[b]);
            if ca == cb || budget < ca.min(cb) || budget > ca.max(cb) {
                continue;
            }
            let pa = (budget - cb) / (ca - cb);
            let pb = 1.0 - pa;
            let value = pa * s_r[a] + pb * s_r[b];
            consider(value, vec![(a, pa), (b, pb)], &mut best_value, &mut best);
        }
    }
    let mut dist = vec![0.0; k];
    for (a, p) in best {
        dist[a] = p.clamp(0.0, 1.0);
    }
    dist[0] = (1.0 - dist[1..].iter().sum::<f64>()).max(0.0);
    let value = dist.iter().zip(s_r).map(|(p, r)| p * r).sum();
    (value, dist)
}

/// Simplex-only variant of the prefix solve, kept for cross-checking the
/// single-resource fast path.
pub fn solve_prefix_simplex(s_r: &[f64], s_c: &[Vec<f64>], budget: f64) -> (f64, Vec<f64>) {
    let k = s_r.len();
    let mut dist = vec![0.0; k];
    dist[0] = 1.0;
    let top = s_r[1..].iter().cloned().fold(0.0_f64, f64::max);
    if k == 1 || top <= 0.0 {
        return (0.0, dist);
    }
    let mut rows: Vec<Vec<f64>> = s_c.iter().map(|row| row[1..].to_vec()).collect();
    let mut rhs = vec![budget; s_c.len()];
    rows.push(vec![1.0; k - 1]);
    rhs.push(1.0);
    let c: Vec<f64> = s_r[1..].iter().map(|v| v / top).collect();
    let sol = simplex::maximize(&c, &rows, &rhs).expect("simplex row bounds the feasible set");
    dist[1..].copy_from_slice(&sol.x);
    dist[0] = (1.0 - sol.x.iter().sum::<f64>()).max(0.0);
    (sol.value * top, dist)
}

fn ensure_materialized(trace: &EnvironmentTrace) -> Result<()> {
    if !trace.is_materialized() {
        return Err(BwkError::validation(format!(
            "benchmark needs a fully materialized trace ({} of {} rounds)",
            trace.materialized_rounds(),
            trace.dims().horizon
        )));
    }
    Ok(())
}

fn ensure_budget(budget: f64) -> Result<()> {
    if !budget.is_finite() || budget < 0.0 {
        return Err(BwkError::validation(format!("budget must be non-negative, got {budget}")));
    }
    Ok(())
}

/// `OPT_FD`: the best pair of stopping round and fixed action distribution
/// whose expected consumption up to the stopping round fits in `budget`.
///
/// Ties go to the smallest stopping round.
pub fn opt_fd(trace: &EnvironmentTrace, budget: f64) -> Result<OptSolution> {
    ensure_materialized(trace)?;
    ensure_budget(budget)?;
    let dims = *trace.dims();
    let (k, d, horizon) = (dims.actions, dims.resources, dims.horizon);
    let mut s_r = vec![0.0; k];
    let mut s_c = vec![vec![0.0; k]; d];
    let mut best = OptSolution {
        t_star: 0,
        dist: {
            let mut p = vec![0.0; k];
            p[0] = 1.0;
            p
        },
        value: 0.0,
        x: 0.0,
    };
    for t in 1..=horizon {
        for a in 0..k {
            s_r[a] += trace.reward(t, a);
            for (i, row) in s_c.iter_mut().enumerate() {
                row[a] += trace.consumption(t, i, a);
            }
        }
        let (value, dist) = solve_prefix(&s_r, &s_c, budget);
        if value > best.value * (1.0 + 1e-12) {
            best = OptSolution {
                t_star: t,
                dist,
                value,
                x: t as f64 / horizon as f64,
            };
        }
    }
    Ok(best)
}

fn check_means(r: &[f64], c: &[Vec<f64>]) -> Result<()> {
    if r.is_empty() {
        return Err(BwkError::validation("need at least the null action"));
    }
    if c.is_empty() {
        return Err(BwkError::validation("need at least one resource"));
    }
    let in_unit = |v: &f64| (0.0..=1.0).contains(v);
    if !r.iter().all(in_unit) || !c.iter().flatten().all(in_unit) {
        return Err(BwkError::validation("expected rewards and consumptions must lie in [0, 1]"));
    }
    if c.iter().any(|row| row.len() != r.len()) {
        return Err(BwkError::validation("consumption rows must have one entry per action"));
    }
    Ok(())
}

/// `OPT_FD` for time-constant expectations: `T max <p, r>` subject to
/// `<p, c_i> <= rho`. Returns the value and the optimal distribution.
pub fn opt_fd_stochastic(r: &[f64], c: &[Vec<f64>], rho: f64, horizon: usize) -> Result<(f64, Vec<f64>)> {
    check_means(r, c)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(BwkError::validation(format!("rho must lie in [0, 1], got {rho}")));
    }
    let mut zeroed_r = r.to_vec();
    zeroed_r[0] = 0.0;
    let zeroed_c: Vec<Vec<f64>> = c
        .iter()
        .map(|row| {
            let mut row = row.clone();
            row[0] = 0.0;
            row
        })
        .collect();
    let (value, dist) = solve_prefix(&zeroed_r, &zeroed_c, rho);
    Ok((value * horizon as f64, dist))
}

/// `sum_t E_A[r_t] * min{1, rho / max_i E_A[c_{t,i}]}` with `min{1, rho/0} = 1`.
pub fn scaled_benchmark(trace: &EnvironmentTrace, dist: &[f64], rho: f64) -> Result<f64> {
    ensure_materialized(trace)?;
    let dims = trace.dims();
    validate_distribution(dist, dims.actions)?;
    let mut total = 0.0;
    for t in 1..=dims.horizon {
        let reward = trace.mixed_reward(t, dist);
        let peak = (0..dims.resources)
            .map(|i| trace.mixed_consumption(t, i, dist))
            .fold(0.0_f64, f64::max);
        let factor = if peak > 0.0 { (rho / peak).min(1.0) } else { 1.0 };
        total += reward * factor;
    }
    Ok(total)
}

/// Compositions of `n` into `parts` non-negative integers, in lexicographic order.
pub(crate) fn for_each_composition(n: usize, parts: usize, mut f: impl FnMut(&[usize])) {
    let mut counts = vec![0usize; parts];
    fn rec(idx: usize, left: usize, counts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if idx + 1 == counts.len() {
            counts[idx] = left;
            f(counts);
            return;
        }
        for v in 0..=left {
            counts[idx] = v;
            rec(idx + 1, left - v, counts, f);
        }
    }
    if parts == 0 {
        return;
    }
    rec(0, n, &mut counts, &mut f);
}

fn grid_divisions(resolution: f64) -> Result<usize> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(BwkError::validation(format!("grid resolution must lie in (0, 1], got {resolution}")));
    }
    Ok((1.0 / resolution).round().max(1.0) as usize)
}

/// Exhaustive oracle for [`opt_fd`]: every simplex grid point at the given
/// resolution, each paired with the longest prefix it can afford.
pub fn brute_force_opt(trace: &EnvironmentTrace, budget: f64, resolution: f64) -> Result<f64> {
    ensure_materialized(trace)?;
    ensure_budget(budget)?;
    let dims = *trace.dims();
    let (k, d, horizon) = (dims.actions, dims.resources, dims.horizon);
    if k > 4 && resolution < 0.05 {
        return Err(BwkError::validation(format!(
            "brute force over {k} actions at resolution {resolution} is intractable (K > 4 needs resolution >= 0.05)"
        )));
    }
    let n = grid_divisions(resolution)?;
    // prefix[t][a] over t = 0..=T; consumption prefixes per resource.
    let mut pr = vec![vec![0.0; k]; horizon + 1];
    let mut pc = vec![vec![vec![0.0; k]; horizon + 1]; d];
    for t in 1..=horizon {
        for a in 0..k {
            pr[t][a] = pr[t - 1][a] + trace.reward(t, a);
            for i in 0..d {
                pc[i][t][a] = pc[i][t - 1][a] + trace.consumption(t, i, a);
            }
        }
    }
    let mut best = 0.0_f64;
    let mut p = vec![0.0; k];
    for_each_composition(n, k, |counts| {
        for (pa, ca) in p.iter_mut().zip(counts) {
            *pa = *ca as f64 / n as f64;
        }
        let affordable = |t: usize| (0..d).all(|i| pc[i][t].iter().zip(&p).map(|(c, q)| c * q).sum::<f64>() <= budget);
        // Mixed consumption prefixes are non-decreasing in t, so the feasible set is a prefix.
        let (mut lo, mut hi) = (0usize, horizon);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if affordable(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let value: f64 = pr[lo].iter().zip(&p).map(|(r, q)| r * q).sum();
        best = best.max(value);
    });
    Ok(best)
}

/// Both sides of the stochastic Lagrangian minmax identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinmaxCheck {
    /// `OPT_FD / T` from the LP.
    pub lhs: f64,
    /// Grid estimate of `max_p min_{lambda in D} E_p[L]`.
    pub rhs: f64,
    pub gap: f64,
}

/// Divisions of the multiplier grid. The inner objective is linear in
/// `lambda`, so any grid containing the vertices of `D` is exact.
const LAMBDA_DIVISIONS: usize = 4;

/// Compares `OPT_FD/T` with the max-min of the expected Lagrangian
/// `<p,r> + sum_i lambda_i (rho - <p,c_i>)` over `lambda >= 0, sum lambda <= 1/rho`,
/// maximising over a simplex grid of the given resolution.
pub fn minmax_identity_check(r: &[f64], c: &[Vec<f64>], rho: f64, resolution: f64) -> Result<MinmaxCheck> {
    check_means(r, c)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BwkError::validation(format!("rho must lie in (0, 1], got {rho}")));
    }
    let (lhs, _) = opt_fd_stochastic(r, c, rho, 1)?;
    let k = r.len();
    let d = c.len();
    let n = grid_divisions(resolution)?;
    let mut lambdas: Vec<Vec<f64>> = Vec::new();
    for_each_composition(LAMBDA_DIVISIONS, d + 1, |counts| {
        lambdas.push(
            counts[..d]
                .iter()
                .map(|v| *v as f64 / LAMBDA_DIVISIONS as f64 / rho)
                .collect(),
        );
    });
    let mut rhs = f64::NEG_INFINITY;
    let mut slack = vec![0.0; d];
    for_each_composition(n, k, |counts| {
        let mut reward = 0.0;
        for (i, s) in slack.iter_mut().enumerate() {
            *s = rho;
            for a in 1..k {
                *s -= counts[a] as f64 / n as f64 * c[i][a];
            }
        }
        for a in 1..k {
            reward += counts[a] as f64 / n as f64 * r[a];
        }
        let inner = lambdas
            .iter()
            .map(|lam| reward + lam.iter().zip(&slack).map(|(l, s)| l * s).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        rhs = rhs.max(inner);
    });
    Ok(MinmaxCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}
