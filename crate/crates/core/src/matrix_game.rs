//! Finite two-player zero-sum matrix games.
//!
//! [`solve_matrix_game`] computes the minimax value and a pair of optimal
//! mixed strategies for a payoff matrix `m[i][j]`, read as: the row player
//! picks `i` to maximize, the column player picks `j` to minimize, and the
//! row player receives `m[i][j]`.
//!
//! Single-row, single-column, and pure saddle point games are resolved
//! directly. Everything else goes through a dense simplex on the standard
//! linear-programming reduction, with Bland's rule against cycling on
//! degenerate games.

use thiserror::Error;

/// Minimax solution of a zero-sum matrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    /// Expected payoff under optimal play by both sides.
    pub value: f64,
    /// Optimal mixed strategy for the maximizing row player.
    pub row_strategy: Vec<f64>,
    /// Optimal mixed strategy for the minimizing column player.
    pub col_strategy: Vec<f64>,
}

impl MatrixGameSolution {
    /// Worst-case shortfall of either strategy from securing `value`.
    ///
    /// Returns the largest of: how far the row strategy's guaranteed payoff
    /// falls below `value` against any column, and how far the column
    /// strategy's ceiling rises above `value` against any row. A solution is
    /// optimal within `tol` exactly when this gap is at most `tol`.
    pub fn security_gap(&self, matrix: &[Vec<f64>]) -> f64 {
        let rows = matrix.len();
        let cols = matrix[0].len();
        let mut gap = 0.0f64;
        for j in 0..cols {
            let got: f64 = (0..rows).map(|i| self.row_strategy[i] * matrix[i][j]).sum();
            gap = gap.max(self.value - got);
        }
        for row in matrix {
            let got: f64 = (0..cols).map(|j| row[j] * self.col_strategy[j]).sum();
            gap = gap.max(got - self.value);
        }
        gap
    }
}

/// Default acceptance tolerance for [`MatrixGameSolution::security_gap`],
/// scaled to the magnitude of the payoffs.
pub fn security_tolerance(matrix: &[Vec<f64>]) -> f64 {
    let mut max_abs = 0.0f64;
    for row in matrix {
        for &x in row {
            max_abs = max_abs.max(x.abs());
        }
    }
    1e-9 * (1.0 + max_abs)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixGameError {
    #[error("payoff matrix has no rows or no columns")]
    Empty,
    #[error("payoff matrix is ragged: row {row} has {got} columns, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("payoff matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("simplex did not reach an optimal basis")]
    SimplexStalled,
}

/// Computes the value and optimal mixed strategies of a zero-sum game.
pub fn solve_matrix_game(matrix: &[Vec<f64>]) -> Result<MatrixGameSolution, MatrixGameError> {
    let rows = matrix.len();
    if rows == 0 || matrix[0].is_empty() {
        return Err(MatrixGameError::Empty);
    }
    let cols = matrix[0].len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != cols {
            return Err(MatrixGameError::Ragged { row: i, got: row.len(), expected: cols });
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(MatrixGameError::NonFinite { row: i, col: j });
            }
        }
    }

    // Single-row: the column player takes the smallest entry.
    if rows == 1 {
        let j = argmin(&matrix[0]);
        return Ok(pure_solution(matrix[0][j], rows, 0, cols, j));
    }
    // Single-column: the row player takes the largest entry.
    if cols == 1 {
        let column: Vec<f64> = matrix.iter().map(|r| r[0]).collect();
        let i = argmax(&column);
        return Ok(pure_solution(column[i], rows, i, cols, 0));
    }

    // Pure saddle point: the floor of the best row meets the ceiling of the
    // best column. Exact equality only; near-misses go to the simplex.
    let row_floors: Vec<f64> = matrix
        .iter()
        .map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let col_ceils: Vec<f64> = (0..cols)
        .map(|j| matrix.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let i = argmax(&row_floors);
    let j = argmin(&col_ceils);
    if row_floors[i] == col_ceils[j] {
        return Ok(pure_solution(row_floors[i], rows, i, cols, j));
    }

    // General case. Map the payoffs into (0, 1] so the reduced game has a
    // strictly positive value and the feasible region below is bounded.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in matrix {
        for &x in row {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let shift = 1.0 - lo;
    let scale = hi + shift;
    let reduced: Vec<Vec<f64>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| (x + shift) / scale).collect())
        .collect();

    let (y, u) = simplex(&reduced)?;
    let sum_y: f64 = y.iter().sum();
    let sum_u: f64 = u.iter().sum();
    debug_assert!(sum_y > 0.0 && sum_u > 0.0);
    Ok(MatrixGameSolution {
        value: scale / sum_y - shift,
        row_strategy: u.iter().map(|&x| x / sum_u).collect(),
        col_strategy: y.iter().map(|&x| x / sum_y).collect(),
    })
}

fn pure_solution(
    value: f64,
    rows: usize,
    row: usize,
    cols: usize,
    col: usize,
) -> MatrixGameSolution {
    let mut row_strategy = vec![0.0; rows];
    row_strategy[row] = 1.0;
    let mut col_strategy = vec![0.0; cols];
    col_strategy[col] = 1.0;
    MatrixGameSolution { value, row_strategy, col_strategy }
}

/// First index of the largest entry.
fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// First index of the smallest entry.
fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

/// Solves `max Σy` subject to `m·y ≤ 1`, `y ≥ 0`, for a matrix with all
/// entries in (0, 1]. Returns the optimal `y` together with the dual vector
/// `u`, which solves the paired problem `min Σu`, `mᵀ·u ≥ 1`, `u ≥ 0`.
///
/// The game value of `m` is `1/Σy`; `y/Σy` and `u/Σu` are optimal column
/// and row strategies.
fn simplex(m: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), MatrixGameError> {
    const EPS: f64 = 1e-12;
    let rows = m.len();
    let cols = m[0].len();
    let width = cols + rows + 1;
    let rhs = width - 1;

    // Constraint rows with slack columns appended; the objective row holds
    // reduced costs and accumulates the objective value in its rhs cell.
    let mut tab: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..cols].copy_from_slice(&m[i]);
            row[cols + i] = 1.0;
            row[rhs] = 1.0;
            row
        })
        .collect();
    let mut obj = vec![0.0; width];
    for x in obj.iter_mut().take(cols) {
        *x = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Bland's rule rules out cycling, so the cap is a safety net only.
    let cap = 1000 + 50 * (rows + cols) * (rows + cols);
    for _ in 0..cap {
        let Some(enter) = (0..cols + rows).find(|&j| obj[j] < -EPS) else {
            let mut y = vec![0.0; cols];
            for (i, &b) in basis.iter().enumerate() {
                if b < cols {
                    y[b] = tab[i][rhs];
                }
            }
            let u: Vec<f64> = (0..rows).map(|i| obj[cols + i].max(0.0)).collect();
            return Ok((y, u));
        };

        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            let a = tab[i][enter];
            if a > EPS {
                let ratio = tab[i][rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - EPS || (ratio < best + EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                    best = ratio;
                }
            }
        }
        // Every column of `m` is strictly positive, so some row always
        // limits the entering variable.
        let Some(leave) = leave else {
            return Err(MatrixGameError::SimplexStalled);
        };

        let pivot = tab[leave][enter];
        for x in tab[leave].iter_mut() {
            *x /= pivot;
        }
        let pivot_row = tab[leave].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == leave {
                continue;
            }
            let f = row[enter];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        let f = obj[enter];
        if f != 0.0 {
            for (x, &p) in obj.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
        basis[leave] = enter;
    }
    Err(MatrixGameError::SimplexStalled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent solution of a 2x2 game with no pure saddle point, from
    /// the indifference conditions. Returns `None` when a saddle exists.
    fn closed_form_2x2(m: &[Vec<f64>]) -> Option<(f64, [f64; 2], [f64; 2])> {
        let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        let row_floor = a.min(b).max(c.min(d));
        let col_ceil = a.max(c).min(b.max(d));
        if row_floor == col_ceil {
            return None;
        }
        let denom = a - b - c + d;
        let p = (d - c) / denom;
        let q = (d - b) / denom;
        Some(((a * d - b * c) / denom, [p, 1.0 - p], [q, 1.0 - q]))
    }

    fn assert_distribution(xs: &[f64]) {
        for &x in xs {
            assert!((-1e-12..=1.0 + 1e-12).contains(&x), "weight {x} outside [0, 1]");
        }
        let sum: f64 = xs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "weights sum to {sum}");
    }

    fn check(matrix: &[Vec<f64>]) -> MatrixGameSolution {
        let s = solve_matrix_game(matrix).unwrap();
        assert_distribution(&s.row_strategy);
        assert_distribution(&s.col_strategy);
        let gap = s.security_gap(matrix);
        let tol = security_tolerance(matrix);
        assert!(gap <= tol, "security gap {gap:.3e} exceeds {tol:.3e} for {matrix:?}");
        s
    }

    #[test]
    fn singleton() {
        let s = check(&[vec![5.0]]);
        assert_eq!(s.value, 5.0);
        assert_eq!(s.row_strategy, vec![1.0]);
        assert_eq!(s.col_strategy, vec![1.0]);
    }

    #[test]
    fn single_row_takes_column_minimum() {
        let s = check(&[vec![4.0, -2.0, 7.0]]);
        assert_eq!(s.value, -2.0);
        assert_eq!(s.col_strategy, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn single_column_takes_row_maximum() {
        let s = check(&[vec![1.0], vec![9.0], vec![3.0]]);
        assert_eq!(s.value, 9.0);
        assert_eq!(s.row_strategy, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn pure_saddle_point() {
        let s = check(&[vec![2.0, 3.0], vec![0.0, 1.0]]);
        assert_eq!(s.value, 2.0);
        assert_eq!(s.row_strategy, vec![1.0, 0.0]);
        assert_eq!(s.col_strategy, vec![1.0, 0.0]);
    }

    #[test]
    fn mixed_2x2() {
        let s = check(&[vec![3.0, 1.0], vec![0.0, 2.0]]);
        assert!((s.value - 1.5).abs() < 1e-12);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-9);
        assert!((s.col_strategy[0] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn matching_pennies() {
        let s = check(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert!(s.value.abs() < 1e-12);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-9);
        assert!((s.col_strategy[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn constant_matrix() {
        let s = check(&[vec![4.0, 4.0], vec![4.0, 4.0]]);
        assert!((s.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_rows_and_columns() {
        // Degenerate copies of the mixed 2x2 game above.
        let s = check(&[
            vec![3.0, 1.0, 3.0],
            vec![0.0, 2.0, 0.0],
            vec![3.0, 1.0, 3.0],
        ]);
        assert!((s.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn rock_paper_scissors() {
        let s = check(&[
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ]);
        assert!(s.value.abs() < 1e-9);
        for &w in &s.row_strategy {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(solve_matrix_game(&[]), Err(MatrixGameError::Empty));
        assert_eq!(solve_matrix_game(&[vec![]]), Err(MatrixGameError::Empty));
        assert_eq!(
            solve_matrix_game(&[vec![1.0, 2.0], vec![3.0]]),
            Err(MatrixGameError::Ragged { row: 1, got: 1, expected: 2 })
        );
        assert_eq!(
            solve_matrix_game(&[vec![1.0, f64::NAN]]),
            Err(MatrixGameError::NonFinite { row: 0, col: 1 })
        );
    }

    #[test]
    fn agrees_with_2x2_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x2b2b);
        let mut mixed = 0;
        for _ in 0..2000 {
            let m: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-10.0..10.0)).collect())
                .collect();
            let s = check(&m);
            if let Some((value, rowm, colm)) = closed_form_2x2(&m) {
                mixed += 1;
                assert!((s.value - value).abs() < 1e-9, "value {} vs {value}", s.value);
                for k in 0..2 {
                    assert!((s.row_strategy[k] - rowm[k]).abs() < 1e-8);
                    assert!((s.col_strategy[k] - colm[k]).abs() < 1e-8);
                }
            }
        }
        assert!(mixed > 500, "only {mixed} sampled games lacked a saddle point");
    }

    #[test]
    fn random_matrices_pass_security_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for round in 0..500 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let m: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-25.0..25.0)).collect())
                .collect();
            // Integer-valued payoffs exercise ties and degenerate bases.
            let m = if round % 3 == 0 {
                m.iter().map(|r| r.iter().map(|x| x.round()).collect()).collect()
            } else {
                m
            };
            check(&m);
        }
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(rows, cols)| {
            proptest::collection::vec(-100.0f64..100.0, rows * cols).prop_map(move |flat| {
                flat.chunks(cols).map(|c| c.to_vec()).collect()
            })
        })
    }

    proptest! {
        #[test]
        fn value_between_floor_and_ceiling(m in matrix_strategy()) {
            let s = solve_matrix_game(&m).unwrap();
            let floor = m
                .iter()
                .map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            let ceil = (0..m[0].len())
                .map(|j| m.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min);
            let tol = security_tolerance(&m);
            prop_assert!(s.value >= floor - tol);
            prop_assert!(s.value <= ceil + tol);
        }

        #[test]
        fn shift_and_scale_equivariance(m in matrix_strategy(), a in 0.1f64..10.0, b in -50.0f64..50.0) {
            let transformed: Vec<Vec<f64>> = m
                .iter()
                .map(|r| r.iter().map(|&x| a * x + b).collect())
                .collect();
            let s = solve_matrix_game(&m).unwrap();
            let t = solve_matrix_game(&transformed).unwrap();
            let tol = 1e-7 * (1.0 + a * (1.0 + s.value.abs()) + b.abs());
            prop_assert!((t.value - (a * s.value + b)).abs() < tol,
                "value {} vs transformed {}", a * s.value + b, t.value);
        }

        #[test]
        fn negated_transpose_swaps_roles(m in matrix_strategy()) {
            let flipped: Vec<Vec<f64>> = (0..m[0].len())
                .map(|j| m.iter().map(|r| -r[j]).collect())
                .collect();
            let s = solve_matrix_game(&m).unwrap();
            let t = solve_matrix_game(&flipped).unwrap();
            prop_assert!((t.value + s.value).abs() < 1e-7,
                "value {} vs negated transpose {}", s.value, t.value);
            // The swapped strategies must secure the flipped game's value.
            let swapped = MatrixGameSolution {
                value: t.value,
                row_strategy: s.col_strategy.clone(),
                col_strategy: s.row_strategy.clone(),
            };
            prop_assert!(swapped.security_gap(&flipped) <= 1e-7 * (1.0 + s.value.abs()));
        }

        #[test]
        fn strategies_pass_security_certificate(m in matrix_strategy()) {
            let s = solve_matrix_game(&m).unwrap();
            prop_assert!(s.security_gap(&m) <= security_tolerance(&m));
        }
    }
}
