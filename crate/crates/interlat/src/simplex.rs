//! A small dense simplex solver for `max c·y subject to A y <= b, y >= 0`
//! with `b >= 0`, which is the only LP shape the crate needs (gauge and
//! support computations over generated unit balls). The slack basis is
//! feasible, so no phase-one step is required. Bland's rule keeps pivoting
//! deterministic and cycle-free.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal objective value.
    pub value: f64,
    /// Optimal primal point `y`.
    pub point: Vec<f64>,
    /// Multipliers of the row constraints at the optimum.
    pub row_duals: Vec<f64>,
}

const EPS: f64 = 1e-11;

/// Solve `max c·y : A y <= b, y >= 0`. Rows of `a` must match `b`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let nvar = c.len();
    let nrow = a.len();
    if b.len() != nrow {
        return Err(Error::InvalidParam("rhs length != row count".into()));
    }
    for (i, &bi) in b.iter().enumerate() {
        if bi < -EPS {
            return Err(Error::InvalidParam(format!("rhs[{i}] must be nonnegative")));
        }
    }

    // Tableau columns: nvar structural, nrow slacks, then the rhs.
    let width = nvar + nrow + 1;
    let mut t = vec![vec![0.0; width]; nrow + 1];
    for (i, row) in a.iter().enumerate() {
        if row.len() != nvar {
            return Err(Error::InvalidParam("ragged constraint matrix".into()));
        }
        t[i][..nvar].copy_from_slice(row);
        t[i][nvar + i] = 1.0;
        t[i][width - 1] = b[i].max(0.0);
    }
    for j in 0..nvar {
        t[nrow][j] = -c[j];
    }

    let mut basis: Vec<usize> = (nvar..nvar + nrow).collect();
    let max_iters = 200 * (nvar + nrow + 1);
    for _ in 0..max_iters {
        // Bland: entering column = lowest index with negative reduced cost.
        let mut enter = None;
        for j in 0..nvar + nrow {
            if t[nrow][j] < -EPS {
                enter = Some(j);
                break;
            }
        }
        let Some(enter) = enter else {
            // Optimal.
            let mut point = vec![0.0; nvar];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < nvar {
                    point[bv] = t[i][width - 1];
                }
            }
            let row_duals: Vec<f64> = (0..nrow).map(|i| t[nrow][nvar + i]).collect();
            return Ok(LpSolution {
                value: t[nrow][width - 1],
                point,
                row_duals,
            });
        };
        // Ratio test; Bland tie-break on the basis index.
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..nrow {
            if t[i][enter] > EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = ratio < best - EPS
                    || (ratio < best + EPS && leave.map_or(true, |l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(Error::Infeasible("unbounded linear program".into()));
        };
        // Pivot.
        let piv = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= piv;
        }
        for i in 0..=nrow {
            if i != leave {
                let factor = t[i][enter];
                if factor != 0.0 {
                    let src = t[leave].clone();
                    for (v, s) in t[i].iter_mut().zip(src.iter()) {
                        *v -= factor * s;
                    }
                }
            }
        }
        basis[leave] = enter;
    }
    Err(Error::Infeasible("simplex iteration limit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_instance() {
        // max 3x + 2y : x + y <= 4, x + 3y <= 6
        let sol = maximize(
            &[3.0, 2.0],
            &[vec![1.0, 1.0], vec![1.0, 3.0]],
            &[4.0, 6.0],
        )
        .unwrap();
        assert!((sol.value - 12.0).abs() < 1e-9);
        assert!((sol.point[0] - 4.0).abs() < 1e-9);
        assert!(sol.point[1].abs() < 1e-9);
    }

    #[test]
    fn duals_reproduce_value() {
        let a = vec![vec![2.0, 1.0, 0.5], vec![0.3, 2.0, 1.0], vec![1.0, 1.0, 1.0]];
        let b = [1.0, 2.0, 1.5];
        let c = [1.0, 0.7, 0.4];
        let sol = maximize(&c, &a, &b).unwrap();
        let dual_value: f64 = sol.row_duals.iter().zip(b.iter()).map(|(d, bi)| d * bi).sum();
        assert!((sol.value - dual_value).abs() < 1e-8);
        for (i, row) in a.iter().enumerate() {
            let lhs: f64 = row.iter().zip(sol.point.iter()).map(|(aij, y)| aij * y).sum();
            assert!(lhs <= b[i] + 1e-8);
        }
    }

    #[test]
    fn unbounded_detected() {
        let res = maximize(&[1.0], &[vec![-1.0]], &[1.0]);
        assert!(res.is_err());
    }

    #[test]
    fn degenerate_rhs_ok() {
        let sol = maximize(&[1.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], &[1.0, 1.0, 1.0]).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
    }
}
