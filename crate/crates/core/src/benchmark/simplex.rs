//! Dense tableau simplex for `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible because `b >= 0`, so no phase one is needed.
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable among ratio ties), which cannot cycle.

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Solves the LP. Returns `None` if it is unbounded.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<LpSolution> {
    let n = c.len();
    let m = b.len();
    debug_assert_eq!(a.len(), m);
    debug_assert!(b.iter().all(|v| *v >= 0.0));
    let width = n + m + 1;
    let mut tab = vec![0.0; (m + 1) * width];
    for (row, (coeffs, rhs)) in a.iter().zip(b).enumerate() {
        let base = row * width;
        tab[base..base + n].copy_from_slice(coeffs);
        tab[base + n + row] = 1.0;
        tab[base + width - 1] = *rhs;
    }
    // Objective row holds reduced costs as -c.
    let obj = m * width;
    for (j, cj) in c.iter().enumerate() {
        tab[obj + j] = -cj;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..n + m).find(|&j| tab[obj + j] < -EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for row in 0..m {
            let coef = tab[row * width + enter];
            if coef > EPS {
                let ratio = tab[row * width + width - 1] / coef;
                leave = match leave {
                    None => Some((row, ratio)),
                    Some((best, best_ratio)) => {
                        if ratio < best_ratio - EPS
                            || (ratio <= best_ratio + EPS && basis[row] < basis[best])
                        {
                            Some((row, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
        }
        let (pivot_row, _) = leave?;
        pivot(&mut tab, width, m + 1, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let mut x = vec![0.0; n];
    for (row, var) in basis.iter().enumerate() {
        if *var < n {
            x[*var] = tab[row * width + width - 1].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Some(LpSolution { value, x })
}

fn pivot(tab: &mut [f64], width: usize, rows: usize, pr: usize, pc: usize) {
    let inv = 1.0 / tab[pr * width + pc];
    for j in 0..width {
        tab[pr * width + j] *= inv;
    }
    tab[pr * width + pc] = 1.0;
    for r in 0..rows {
        if r == pr {
            continue;
        }
        let factor = tab[r * width + pc];
        if factor == 0.0 {
            continue;
        }
        for j in 0..width {
            tab[r * width + j] -= factor * tab[pr * width + j];
        }
        tab[r * width + pc] = 0.0;
    }
}
