//! Dense linear assignment by shortest augmenting paths with dual updates,
//! plus a brute-force oracle and an optimality certificate from the duals.

use alloc::vec;
use alloc::vec::Vec;

/// Dense square cost matrix, row-major.
#[derive(Clone, Debug)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize) -> Self {
        CostMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = CostMatrix::new(n);
        for r in 0..n {
            for c in 0..n {
                m.data[r * n + c] = f(r, c);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }
}

#[derive(Clone, Debug)]
pub struct Assignment {
    /// `row_to_col[r]` = column matched to row r.
    pub row_to_col: Vec<usize>,
    pub cost: f64,
    /// Row and column potentials; the optimality certificate checks
    /// `cost[r][c] - u[r] - v[c] >= -tol` everywhere with equality on edges.
    pub dual_row: Vec<f64>,
    pub dual_col: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateError {
    pub row: usize,
    pub col: usize,
    pub reduced_cost: f64,
}

impl core::fmt::Display for CertificateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "optimality certificate failed at ({}, {}): reduced cost {}",
            self.row, self.col, self.reduced_cost
        )
    }
}

impl core::error::Error for CertificateError {}

/// Solve the square assignment problem exactly. Deterministic; O(n^3).
pub fn solve(cost: &CostMatrix) -> Assignment {
    let n = cost.n;
    // 1-based sentinel formulation: col_match[n] is the virtual free column
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n + 1];
    let mut col_match: Vec<usize> = vec![usize::MAX; n + 1];

    for row in 0..n {
        let mut cur_col = n;
        col_match[n] = row;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut prev = vec![n; n + 1];
        let mut used = vec![false; n + 1];

        while col_match[cur_col] != usize::MAX {
            used[cur_col] = true;
            let r = col_match[cur_col];
            let mut delta = f64::INFINITY;
            let mut next_col = n;
            for c in 0..n {
                if used[c] {
                    continue;
                }
                let red = cost.at(r, c) - u[r] - v[c];
                if red < min_to[c] {
                    min_to[c] = red;
                    prev[c] = cur_col;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    next_col = c;
                }
            }
            debug_assert!(delta.is_finite(), "free column must remain reachable");
            for c in 0..=n {
                if used[c] {
                    u[col_match[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            cur_col = next_col;
        }

        while cur_col != n {
            let p = prev[cur_col];
            col_match[cur_col] = col_match[p];
            cur_col = p;
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for c in 0..n {
        if col_match[c] != usize::MAX {
            row_to_col[col_match[c]] = c;
        }
    }
    let total: f64 = row_to_col.iter().enumerate().map(|(r, &c)| cost.at(r, c)).sum();
    Assignment { row_to_col, cost: total, dual_row: u, dual_col: v[..n].to_vec(), }
}

/// Check complementary slackness of a solved assignment.
pub fn certify(cost: &CostMatrix, a: &Assignment, tol: f64) -> Result<(), CertificateError> {
    let n = cost.n;
    for r in 0..n {
        for c in 0..n {
            let red = cost.at(r, c) - a.dual_row[r] - a.dual_col[c];
            if red < -tol {
                return Err(CertificateError { row: r, col: c, reduced_cost: red });
            }
            if c == a.row_to_col[r] && red.abs() > tol {
                return Err(CertificateError { row: r, col: c, reduced_cost: red });
            }
        }
    }
    Ok(())
}

/// Exhaustive minimum over all permutations; oracle for small instances.
pub fn brute_force(cost: &CostMatrix) -> (Vec<usize>, f64) {
    let n = cost.n;
    assert!(n <= 10, "brute force limited to n <= 10");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    permute(&mut perm, 0, cost, &mut best);
    let (c, p) = best.expect("non-empty");
    (p, c)
}

fn permute(perm: &mut Vec<usize>, k: usize, cost: &CostMatrix, best: &mut Option<(f64, Vec<usize>)>) {
    let n = perm.len();
    if k == n {
        let c: f64 = perm.iter().enumerate().map(|(r, &col)| cost.at(r, col)).sum();
        if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
            *best = Some((c, perm.clone()));
        }
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, cost, best);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Stream, StreamKind};

    #[test]
    fn small_known_instance() {
        let cost = CostMatrix::from_fn(3, |r, c| {
            [[8.0, 5.0, 9.0], [4.0, 2.0, 4.0], [7.0, 3.0, 8.0]][r][c]
        });
        let a = solve(&cost);
        assert_eq!(a.row_to_col, vec![0, 2, 1]);
        assert!((a.cost - 15.0).abs() < 1e-12);
        certify(&cost, &a, 1e-9).unwrap();
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut s = Stream::new(21, StreamKind::Oracle, 0);
        for n in 2..=8usize {
            for _ in 0..40 {
                let cost = CostMatrix::from_fn(n, |_, _| s.uniform() * 10.0);
                let a = solve(&cost);
                let (_, bc) = brute_force(&cost);
                assert!((a.cost - bc).abs() < 1e-9, "n={n}: {} vs {bc}", a.cost);
                certify(&cost, &a, 1e-9).unwrap();
            }
        }
    }

    #[test]
    fn certificate_rejects_bad_duals() {
        let cost = CostMatrix::from_fn(2, |r, c| if r == c { 0.0 } else { 1.0 });
        let mut a = solve(&cost);
        a.dual_row[0] += 10.0;
        assert!(certify(&cost, &a, 1e-9).is_err());
    }

    #[test]
    fn moderate_geometric_instance() {
        // clustered costs resembling quantizer geometry
        let mut s = Stream::new(22, StreamKind::Oracle, 1);
        let n = 300;
        let xs: Vec<f64> = (0..n).map(|_| s.uniform() * 100.0).collect();
        let ys: Vec<f64> = (0..n).map(|_| s.uniform() * 100.0).collect();
        let cost = CostMatrix::from_fn(n, |r, c| (xs[r] - ys[c]) * (xs[r] - ys[c]));
        let a = solve(&cost);
        certify(&cost, &a, 1e-7).unwrap();
    }
}
