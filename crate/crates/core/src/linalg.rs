//! Small dense helpers for p-dimensional systems (p is tiny here).
//!
//! Solves go through fraction-free (Bareiss) determinants and Cramer's rule, so
//! integer or dyadic inputs with an exactly representable solution come back
//! exact. That matters for elemental fits, where a hyperplane through p data
//! points must reproduce zero residuals bit for bit.

use crate::error::{DepthError, Result};

/// Determinant by Bareiss elimination with row swaps on zero pivots.
pub fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut sign = 1.0;
    let mut prev = 1.0;
    for k in 0..n - 1 {
        if a[k][k] == 0.0 {
            match (k + 1..n).find(|&r| a[r][k] != 0.0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0.0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Solves `m z = rhs` by Cramer's rule.
pub fn solve(m: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.len();
    if rhs.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(DepthError::DimensionMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return Err(DepthError::SingularTransform);
    }
    let mut out = Vec::with_capacity(n);
    for col in 0..n {
        let replaced: Vec<Vec<f64>> = m
            .iter()
            .zip(rhs)
            .map(|(row, &b)| {
                let mut r = row.clone();
                r[col] = b;
                r
            })
            .collect();
        out.push(det(&replaced) / d);
    }
    Ok(out)
}

/// Ordinary least squares on rows `w_i` (already including the leading 1).
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let p = rows.first().map(|r| r.len()).ok_or(DepthError::Empty)?;
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (w, &yi) in rows.iter().zip(y) {
        for a in 0..p {
            xty[a] += w[a] * yi;
            for b in 0..p {
                xtx[a][b] += w[a] * w[b];
            }
        }
    }
    solve(&xtx, &xty).map_err(|_| DepthError::Degenerate("design matrix is rank deficient".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_permutation_needs_swap() {
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(det(&m), -1.0);
    }

    #[test]
    fn integer_system_solved_exactly() {
        // plane y = 1 + 2 x1 - x2 through three integer points
        let pts = [(0.0, 0.0), (3.0, 1.0), (-2.0, 5.0)];
        let m: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![1.0, a, b]).collect();
        let rhs: Vec<f64> = pts.iter().map(|&(a, b)| 1.0 + 2.0 * a - b).collect();
        assert_eq!(solve(&m, &rhs).unwrap(), vec![1.0, 2.0, -1.0]);
    }

    #[test]
    fn singular_is_rejected() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve(&m, &[1.0, 1.0]), Err(DepthError::SingularTransform));
    }
}
