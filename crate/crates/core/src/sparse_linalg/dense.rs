use crate::error::{Error, Result};

/// Largest system the dense oracle accepts.
pub const DENSE_SOLVE_MAX_DIM: usize = 500;

/// LU factorization with partial pivoting; solves `A x = b`.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if n > DENSE_SOLVE_MAX_DIM {
        return Err(Error::config(format!(
            "dense_solve limited to n <= {DENSE_SOLVE_MAX_DIM}, got {n}"
        )));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "dense_solve right side",
            expected: n,
            actual: b.len(),
        });
    }
    if let Some(bad) = a.iter().position(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "dense_solve matrix row",
            expected: n,
            actual: a[bad].len(),
        });
    }

    let mut lu: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    let scale = lu.iter().flat_map(|r| r.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
    let tiny = scale * n as f64 * f64::EPSILON;

    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[i][k].abs()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if !(pmax > tiny) {
            return Err(Error::Singular { column: k, pivot: pmax });
        }
        if piv != k {
            lu.swap(piv, k);
            x.swap(piv, k);
        }
        let (top, bottom) = lu.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for (off, row) in bottom.iter_mut().enumerate() {
            let f = row[k] / pivot_row[k];
            if f != 0.0 {
                row[k] = f;
                for j in k + 1..n {
                    row[j] -= f * pivot_row[j];
                }
                x[k + 1 + off] -= f * x[k];
            } else {
                row[k] = 0.0;
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= lu[k][j] * x[j];
        }
        x[k] = s / lu[k][k];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericBreakdown("dense_solve produced non-finite values".into()));
    }
    Ok(x)
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(dense_solve(&a, &[3.0, -1.0, 2.0]).unwrap(), vec![3.0, -1.0, 2.0]);
    }

    #[test]
    fn needs_pivoting() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 1.0]];
        let x = dense_solve(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_an_error() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(dense_solve(&a, &[1.0, 2.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn residual_is_small_for_well_conditioned_input() {
        let n = 30;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            4.0 + i as f64
                        } else {
                            1.0 / (1.0 + (i + 2 * j) as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = dense_solve(&a, &b).unwrap();
        let r: f64 = dense_matvec(&a, &x)
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r <= 1e-10 * bn);
    }
}
