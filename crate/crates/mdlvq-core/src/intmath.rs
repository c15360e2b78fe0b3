//! Exact integer matrix arithmetic for lattice bases and coset reduction.
//!
//! Matrices are small (L <= 4) row-major `Vec<Vec<i64>>`. Determinants and
//! adjugates run in i128 so coset reduction stays exact.

use alloc::vec;
use alloc::vec::Vec;

pub type IMat = Vec<Vec<i64>>;

pub fn identity(n: usize) -> IMat {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s: i128 = 0;
            for k in 0..n {
                s += a[i][k] as i128 * b[k][j] as i128;
            }
            out[i][j] = i64::try_from(s).expect("matrix entry overflow");
        }
    }
    out
}

pub fn mat_vec(a: &IMat, v: &[i64]) -> Vec<i64> {
    a.iter()
        .map(|row| {
            let mut s: i128 = 0;
            for (x, y) in row.iter().zip(v) {
                s += *x as i128 * *y as i128;
            }
            i64::try_from(s).expect("matrix-vector overflow")
        })
        .collect()
}

pub fn det(m: &IMat) -> i128 {
    let n = m.len();
    match n {
        1 => m[0][0] as i128,
        2 => m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128,
        _ => {
            // cofactor expansion along the first row; fine for L <= 4
            let mut s: i128 = 0;
            for j in 0..n {
                if m[0][j] == 0 {
                    continue;
                }
                let minor = minor(m, 0, j);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                s += sign * m[0][j] as i128 * det(&minor);
            }
            s
        }
    }
}

fn minor(m: &IMat, row: usize, col: usize) -> IMat {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

/// Adjugate: `adj(m) * m = det(m) * I`.
pub fn adjugate(m: &IMat) -> Vec<Vec<i128>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1i128]];
    }
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            // transposed cofactor
            adj[j][i] = sign * det(&minor(m, i, j));
        }
    }
    adj
}

pub fn adj_vec(adj: &[Vec<i128>], v: &[i64]) -> Vec<i128> {
    adj.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * *b as i128).sum())
        .collect()
}

/// Floor division with positive divisor.
pub fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// True iff every column of `b` is an integer combination of columns of `a`,
/// i.e. the lattice generated by `b` is a sublattice of the one by `a`.
pub fn divides(a: &IMat, b: &IMat) -> bool {
    let d = det(a);
    if d == 0 {
        return false;
    }
    let adj = adjugate(a);
    let n = a.len();
    for i in 0..n {
        for j in 0..n {
            let mut s: i128 = 0;
            for k in 0..n {
                s += adj[i][k] * b[k][j] as i128;
            }
            if s % d != 0 {
                return false;
            }
        }
    }
    true
}

pub fn mat_to_f64(m: &IMat) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_adjugate_agree() {
        let m: IMat = vec![vec![2, -1, 0], vec![1, 2, 3], vec![0, 4, 1]];
        let d = det(&m);
        let adj = adjugate(&m);
        // adj * m == det * I
        for i in 0..3 {
            for j in 0..3 {
                let mut s: i128 = 0;
                for k in 0..3 {
                    s += adj[i][k] * m[k][j] as i128;
                }
                assert_eq!(s, if i == j { d } else { 0 });
            }
        }
    }

    #[test]
    fn divides_detects_nesting() {
        // 4Z^2 inside 2Z^2 but not the reverse
        let two: IMat = vec![vec![2, 0], vec![0, 2]];
        let four: IMat = vec![vec![4, 0], vec![0, 4]];
        assert!(divides(&two, &four));
        assert!(!divides(&four, &two));
    }

    #[test]
    fn floor_div_negative() {
        assert_eq!(floor_div(-7, 4), -2);
        assert_eq!(floor_div(7, 4), 1);
        assert_eq!(floor_div(-8, 4), -2);
    }
}
