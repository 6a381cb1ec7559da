//! Rectangular linear sum assignment.
//!
//! The optimum comes from the shortest-augmenting-path Hungarian method with
//! row/column potentials, O(n²m). Among several optimal matchings the one
//! whose row-sorted pair list is lexicographically smallest is returned, found
//! by fixing pairs row by row and re-solving the remainder.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

const REL_TOL: f64 = 1e-9;

/// Minimum-cost matching of size `min(rows, cols)`.
pub fn linear_sum_assignment(cost: &[Vec<f64>]) -> Result<Assignment> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    if cost
        .iter()
        .any(|r| r.len() != cols || r.iter().any(|c| !c.is_finite()))
    {
        return Err(Error::MalformedMatrix);
    }

    let all_rows: Vec<usize> = (0..rows).collect();
    let all_cols: Vec<usize> = (0..cols).collect();
    let optimum = sub_optimum(cost, &all_rows, &all_cols);
    let tol = REL_TOL * optimum.abs().max(1.0);
    let size = rows.min(cols);

    let mut pairs = Vec::with_capacity(size);
    let mut fixed_cost = 0.0;
    let mut free_cols = all_cols;
    for r in 0..rows {
        let needed = size - pairs.len();
        if needed == 0 {
            break;
        }
        let rest: Vec<usize> = (r + 1..rows).collect();
        let mut chosen = None;
        for (k, &c) in free_cols.iter().enumerate() {
            if rest.len().min(free_cols.len() - 1) < needed - 1 {
                break;
            }
            let mut cols_left = free_cols.clone();
            cols_left.remove(k);
            let total = fixed_cost + cost[r][c] + sub_optimum(cost, &rest, &cols_left);
            if (total - optimum).abs() <= tol {
                chosen = Some(k);
                break;
            }
        }
        match chosen {
            Some(k) => {
                let c = free_cols.remove(k);
                fixed_cost += cost[r][c];
                pairs.push((r, c));
            }
            // Leaving this row unmatched must be the optimal (and feasible) choice.
            None => debug_assert!(rest.len() >= needed),
        }
    }
    let total_cost = pairs.iter().map(|&(r, c)| cost[r][c]).sum();
    Ok(Assignment { pairs, total_cost })
}

/// Optimal total over the submatrix `rows × cols` (matching of size
/// `min(|rows|, |cols|)`).
fn sub_optimum(cost: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let matrix: Vec<Vec<f64>> = if rows.len() <= cols.len() {
        rows.iter()
            .map(|&r| cols.iter().map(|&c| cost[r][c]).collect())
            .collect()
    } else {
        cols.iter()
            .map(|&c| rows.iter().map(|&r| cost[r][c]).collect())
            .collect()
    };
    hungarian(&matrix)
        .iter()
        .enumerate()
        .map(|(i, &j)| matrix[i][j])
        .sum()
}

/// Hungarian method for `n ≤ m`. Returns the column matched to each row.
fn hungarian(a: &[Vec<f64>]) -> Vec<usize> {
    let n = a.len();
    let m = a[0].len();
    debug_assert!(n <= m);
    // 1-based potentials; column 0 is a virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = a[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=m {
        if matched_row[j] != 0 {
            col_of_row[matched_row[j] - 1] = j - 1;
        }
    }
    col_of_row
}
