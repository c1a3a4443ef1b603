//! Zero-sum matrix games solved exactly by linear programming.

use serde::Serialize;

use crate::error::{Error, Result};

/// Solution of `max_α min_j Σ_a α_a A[j][a]` over the simplex.
#[derive(Clone, Debug, Serialize)]
pub struct GameSolution {
    /// Guaranteed value of `allocation`: `min_j (A α)_j`.
    pub lower: f64,
    /// Best response value against `adversary`: `max_a (wᵀ A)_a`.
    pub upper: f64,
    /// Maximizing mixed strategy over columns.
    pub allocation: Vec<f64>,
    /// Minimizing mixed strategy over rows.
    pub adversary: Vec<f64>,
}

impl GameSolution {
    pub fn value(&self) -> f64 {
        self.lower
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Solves the game with payoff `a[j][col]` to the column player.
///
/// Shifts the matrix to be positive and runs a dense simplex with Bland's
/// rule on `max Σ y  s.t.  Aᵀ y ≤ 1, y ≥ 0`; the row strategy is `y / Σ y`
/// and the column strategy is read from the final slack prices. With no
/// rows the value is `+inf`.
pub fn solve_matrix_game(a: &[Vec<f64>], n_cols: usize) -> Result<GameSolution> {
    if n_cols == 0 {
        return Err(Error::InvalidArgument(
            "game needs at least one column".into(),
        ));
    }
    if a.iter().any(|r| r.len() != n_cols) {
        return Err(Error::InvalidArgument("ragged payoff matrix".into()));
    }
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "payoff matrix has non-finite entries".into(),
        ));
    }
    if a.is_empty() {
        return Ok(GameSolution {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            allocation: vec![1.0 / n_cols as f64; n_cols],
            adversary: Vec::new(),
        });
    }
    let rows = a.len();
    let min = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let max = a
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = (max - min).max(1e-300);
    // Normalized positive payoffs in [1, 2].
    let p = |j: usize, c: usize| 1.0 + (a[j][c] - min) / scale;

    // Tableau: one constraint per column, variables y_0..y_rows then slacks.
    let m = n_cols;
    let width = rows + m + 1;
    let mut tab = vec![vec![0.0; width]; m + 1];
    for c in 0..m {
        for j in 0..rows {
            tab[c][j] = p(j, c);
        }
        tab[c][rows + c] = 1.0;
        tab[c][width - 1] = 1.0;
    }
    for j in 0..rows {
        tab[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (rows..rows + m).collect();
    let eps = 1e-12;
    for _ in 0..100_000 {
        let Some(enter) = (0..width - 1).find(|&k| tab[m][k] < -eps) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = tab[r][enter];
            if coef > eps {
                let ratio = tab[r][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            return Err(Error::InvalidArgument("unbounded game program".into()));
        };
        let pivot = tab[pr][enter];
        tab[pr].iter_mut().for_each(|x| *x /= pivot);
        let prow = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r != pr {
                let f = row[enter];
                if f != 0.0 {
                    row.iter_mut().zip(&prow).for_each(|(x, &y)| *x -= f * y);
                }
            }
        }
        basis[pr] = enter;
    }

    let mut y = vec![0.0; rows];
    for (r, &b) in basis.iter().enumerate() {
        if b < rows {
            y[b] = tab[r][width - 1].max(0.0);
        }
    }
    let ysum: f64 = y.iter().sum();
    let adversary: Vec<f64> = y.iter().map(|v| v / ysum).collect();
    let mut x: Vec<f64> = (0..m).map(|c| tab[m][rows + c].max(0.0)).collect();
    let xsum: f64 = x.iter().sum();
    if xsum > 0.0 {
        x.iter_mut().for_each(|v| *v /= xsum);
    } else {
        x = vec![1.0 / m as f64; m];
    }
    let lower = (0..rows)
        .map(|j| (0..m).map(|c| x[c] * a[j][c]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let upper = (0..m)
        .map(|c| (0..rows).map(|j| adversary[j] * a[j][c]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GameSolution {
        lower,
        upper,
        allocation: x,
        adversary,
    })
}
