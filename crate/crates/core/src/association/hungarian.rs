//! Rectangular assignment with forbidden entries.
//!
//! The matrix is padded to square with zero-cost dummy rows/columns and every
//! forbidden (`+inf`) entry is replaced by a penalty larger than any sum of
//! permitted costs. The optimum therefore maximizes the number of permitted
//! pairs first and minimizes their total cost second. Among equal optima the
//! lexicographically smallest column vector is returned (dummy columns sort
//! after real ones).

use nalgebra::DMatrix;

/// Optimal pairs `(row, col)` over permitted entries, sorted by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
}

/// Solves the assignment problem for `cost` (rows = detections, columns =
/// tracks by convention). Entries may be finite or `+inf`; NaN is treated as
/// forbidden.
pub fn hungarian(cost: &DMatrix<f64>) -> Assignment {
    let (m, n) = cost.shape();
    if m == 0 || n == 0 {
        return Assignment {
            pairs: vec![],
            total: 0.0,
        };
    }
    let size = m.max(n);
    let finite_sum: f64 = cost.iter().filter(|c| c.is_finite()).map(|c| c.abs()).sum();
    let big = 2.0 * finite_sum + 1.0;
    let mut square = DMatrix::zeros(size, size);
    for i in 0..m {
        for j in 0..n {
            let c = cost[(i, j)];
            square[(i, j)] = if c.is_finite() { c } else { big };
        }
    }
    let cols = lexicographic_optimum(&square);
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for (i, &j) in cols.iter().enumerate().take(m) {
        if j < n && cost[(i, j)].is_finite() {
            pairs.push((i, j));
            total += cost[(i, j)];
        }
    }
    Assignment { pairs, total }
}

/// Greedy refinement: fix each row to the smallest column that keeps the
/// remaining subproblem optimal.
fn lexicographic_optimum(a: &DMatrix<f64>) -> Vec<usize> {
    let size = a.nrows();
    let (best, first) = solve(a);
    let tol = 1e-9 * (1.0 + best.abs());
    let mut fixed: Vec<usize> = Vec::with_capacity(size);
    let mut used = vec![false; size];
    let mut acc = 0.0;
    for row in 0..size {
        let rest_rows: Vec<usize> = (row + 1..size).collect();
        let mut chosen = None;
        for col in 0..size {
            if used[col] {
                continue;
            }
            let rest_cols: Vec<usize> = (0..size).filter(|&c| !used[c] && c != col).collect();
            let sub = a.select_rows(&rest_rows).select_columns(&rest_cols);
            let sub_cost = if rest_rows.is_empty() {
                0.0
            } else {
                solve(&sub).0
            };
            if acc + a[(row, col)] + sub_cost <= best + tol {
                chosen = Some(col);
                break;
            }
        }
        // Rounding could in principle reject every column; fall back to the
        // plain optimum for the remaining rows.
        let Some(col) = chosen else {
            return first;
        };
        acc += a[(row, col)];
        used[col] = true;
        fixed.push(col);
    }
    fixed
}

/// Shortest augmenting path with potentials, O(n³). Returns the optimal cost
/// and the column assigned to each row.
fn solve(a: &DMatrix<f64>) -> (f64, Vec<usize>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    // 1-based arrays with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut cols = vec![0; n];
    for j in 1..=n {
        cols[p[j] - 1] = j - 1;
    }
    let total = cols.iter().enumerate().map(|(i, &j)| a[(i, j)]).sum();
    (total, cols)
}
