//! Gated optimal one-to-one assignment.
//!
//! Rows and columns may both stay unassigned. Each unassigned row or column
//! costs half the gate, so a pair is matched only when its cost is below the
//! gate and the total cost over the matching plus non-assignments is minimal.
//! Pairs whose cost exceeds the gate are never matched.

const FORBIDDEN: f64 = 1e12;

/// Solves the gated assignment problem for a `rows × cols` cost matrix.
///
/// Returns `(row, col)` pairs sorted by row. Non-finite costs are forbidden.
pub fn assign(costs: &[Vec<f64>], gate: f64) -> Vec<(usize, usize)> {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    debug_assert!(costs.iter().all(|r| r.len() == cols));
    let n = rows + cols;
    let skip = gate / 2.0;
    let mut m = vec![vec![FORBIDDEN; n]; n];
    for i in 0..rows {
        for j in 0..cols {
            let c = costs[i][j];
            if c.is_finite() && c <= gate {
                m[i][j] = c;
            }
        }
        m[i][cols + i] = skip;
    }
    for j in 0..cols {
        m[rows + j][j] = skip;
        for i in 0..rows {
            m[rows + j][cols + i] = 0.0;
        }
    }
    let col_of_row = hungarian(&m);
    let mut pairs: Vec<(usize, usize)> = (0..rows)
        .filter_map(|i| {
            let j = col_of_row[i];
            (j < cols && m[i][j] < FORBIDDEN).then_some((i, j))
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Minimum-cost perfect matching on a square matrix. Returns the column
/// assigned to each row.
fn hungarian(a: &[Vec<f64>]) -> Vec<usize> {
    let n = a.len();
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
                if !used[j] {
                    let cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
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
    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            col_of_row[p[j] - 1] = j - 1;
        }
    }
    col_of_row
}
