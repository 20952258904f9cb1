//! Guarantee curves: the fraction of `OPT_FD` each result promises as
//! `T -> infinity`, as a function of `(rho, sigma_r, sigma_c)`.

use std::io::Write;

use crate::error::{BwkError, Result};

/// Fraction guaranteed by Algorithm 1: `rho + sigma_r (sigma_c - rho)^+`.
///
/// Evaluated as `rho (1 - sigma_r) + sigma_r sigma_c` above the kink so the
/// corners `(1, 1)` and `(0, 0)` come out exact.
pub fn thm2_alpha(rho: f64, sigma_r: f64, sigma_c: f64) -> f64 {
    if sigma_c <= rho {
        rho
    } else {
        rho * (1.0 - sigma_r) + sigma_r * sigma_c
    }
}

/// Upper bound on the fraction any `(sigma_r, sigma_c)`-oblivious algorithm can guarantee.
///
/// With `sigma_c = 0` the middle branch covers every `sigma_r > rho`.
pub fn thm4_upper(rho: f64, sigma_r: f64, sigma_c: f64) -> f64 {
    if sigma_r <= rho {
        sigma_r + rho * (1.0 - sigma_r)
    } else if sigma_c == 0.0 || sigma_r <= rho / (sigma_c * sigma_c) {
        2.0 * (sigma_r * rho).sqrt() - sigma_r * rho
    } else {
        sigma_r * sigma_c + rho * (1.0 / sigma_c - sigma_r)
    }
}

/// Objective minimised over `x in [rho, 1]` by [`thm5_alpha`].
pub fn thm5_objective(x: f64, rho: f64, sigma_r: f64, sigma_c: f64, d: usize) -> f64 {
    let d = d as f64;
    let head = rho.max(x * sigma_c).max(sigma_r * x / (d + x));
    let tail = (rho * sigma_r * (1.0 - x) / x).max(sigma_r * sigma_c * (1.0 - x));
    head + tail
}

const THM5_GRID: usize = 100_000;

/// Fraction guaranteed by Algorithm 2 with `d` resources, and the minimising `x`.
pub fn thm5_alpha(rho: f64, sigma_r: f64, sigma_c: f64, d: usize) -> (f64, f64) {
    thm5_alpha_with_grid(rho, sigma_r, sigma_c, d, THM5_GRID)
}

/// [`thm5_alpha`] on a grid of `points` nodes, refined by golden-section
/// search over the two cells around the best node.
pub fn thm5_alpha_with_grid(rho: f64, sigma_r: f64, sigma_c: f64, d: usize, points: usize) -> (f64, f64) {
    let f = |x: f64| thm5_objective(x, rho, sigma_r, sigma_c, d);
    let points = points.max(2);
    let span = 1.0 - rho;
    if span <= 0.0 {
        return (f(1.0), 1.0);
    }
    let node = |j: usize| {
        if j + 1 == points {
            1.0
        } else {
            rho + span * j as f64 / (points - 1) as f64
        }
    };
    let (mut best_j, mut best) = (0, f(rho));
    for j in 1..points {
        let v = f(node(j));
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let lo = node(best_j.saturating_sub(1));
    let hi = node((best_j + 1).min(points - 1));
    let (x, v) = golden_section(f, lo, hi);
    if v < best {
        (v, x)
    } else {
        (best, node(best_j))
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..200 {
        if b - a <= 1e-15 {
            break;
        }
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = f(e);
        }
    }
    if fc <= fe {
        (c, fc)
    } else {
        (e, fe)
    }
}

/// Closed form of [`thm5_alpha`] for one resource when `sigma_c <= rho << sigma_r`:
/// `2 sigma_r (sqrt(rho) - rho)` if `sigma_r^2 >= rho`, else `sigma_r^2 + rho - 2 rho sigma_r`.
pub fn thm5_alpha_closed_remark(rho: f64, sigma_r: f64) -> f64 {
    if sigma_r * sigma_r >= rho {
        2.0 * sigma_r * (rho.sqrt() - rho)
    } else {
        sigma_r * sigma_r + rho - 2.0 * rho * sigma_r
    }
}

/// One point of the guarantee-curve comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteePoint {
    pub rho: f64,
    pub sigma_r: f64,
    pub sigma_c: f64,
    pub d: usize,
    pub thm2: f64,
    pub thm5: f64,
    pub thm4_upper: f64,
    pub x_argmin: f64,
}

impl GuaranteePoint {
    pub fn evaluate(rho: f64, sigma_r: f64, sigma_c: f64, d: usize) -> Self {
        let (thm5, x_argmin) = thm5_alpha(rho, sigma_r, sigma_c, d);
        Self {
            rho,
            sigma_r,
            sigma_c,
            d,
            thm2: thm2_alpha(rho, sigma_r, sigma_c),
            thm5,
            thm4_upper: thm4_upper(rho, sigma_r, sigma_c),
            x_argmin,
        }
    }
}

/// `points` values evenly spaced over `[0, 1]`; a single point is `0`.
pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|j| j as f64 / (n - 1) as f64).collect(),
    }
}

/// The three curves over the given `sigma_r` values, sorted by `sigma_r`.
pub fn curve_sweep(rho: f64, sigma_c: f64, d: usize, sigma_r_grid: &[f64]) -> Result<Vec<GuaranteePoint>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BwkError::validation(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(0.0..=1.0).contains(&sigma_c) {
        return Err(BwkError::validation(format!("sigma_c must lie in [0, 1], got {sigma_c}")));
    }
    if d == 0 {
        return Err(BwkError::validation("d must be at least 1"));
    }
    if let Some(bad) = sigma_r_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(BwkError::validation(format!("sigma_r must lie in [0, 1], got {bad}")));
    }
    let mut grid = sigma_r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid
        .into_iter()
        .map(|sr| GuaranteePoint::evaluate(rho, sr, sigma_c, d))
        .collect())
}

pub fn write_bounds_csv<W: Write>(points: &[GuaranteePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho", "sigma_r", "sigma_c", "d", "thm2", "thm5", "thm4_upper", "x_argmin"])?;
    for p in points {
        w.write_record([
            p.rho.to_string(),
            p.sigma_r.to_string(),
            p.sigma_c.to_string(),
            p.d.to_string(),
            p.thm2.to_string(),
            p.thm5.to_string(),
            p.thm4_upper.to_string(),
            p.x_argmin.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
