//! Dense square-matrix routines over any [`Scalar`], so that jets carry
//! exact derivatives through inverses and products.

use thiserror::Error;

use crate::expr::Scalar;

/// Matrices whose 1-norm condition estimate exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("matrix is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
}

/// Gauss-Jordan inverse with partial pivoting on the value part.
/// `m` is row-major `n × n`.
pub fn invert_generic<S: Scalar>(n: usize, m: &[S]) -> Result<Vec<S>, LinalgError> {
    assert_eq!(m.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let one = m[0].constant_like(1.0);
    let zero = m[0].constant_like(0.0);
    let mut a = m.to_vec();
    let mut inv: Vec<S> = (0..n * n)
        .map(|k| if k / n == k % n { one.clone() } else { zero.clone() })
        .collect();
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.value().abs()));
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].value().abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= f64::EPSILON * scale * n as f64 || piv_abs == 0.0 {
            return Err(LinalgError::Singular {
                column: col,
                pivot: piv_abs,
            });
        }
        if piv_row != col {
            for c in 0..n {
                a.swap(piv_row * n + c, col * n + c);
                inv.swap(piv_row * n + c, col * n + c);
            }
        }
        let r = a[col * n + col].recip().map_err(|_| LinalgError::Singular {
            column: col,
            pivot: 0.0,
        })?;
        for c in 0..n {
            a[col * n + c] = a[col * n + c].times(&r);
            inv[col * n + c] = inv[col * n + c].times(&r);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col].clone();
            for c in 0..n {
                let da = f.times(&a[col * n + c]);
                a[row * n + c] = a[row * n + c].minus(&da);
                let di = f.times(&inv[col * n + c]);
                inv[row * n + c] = inv[row * n + c].minus(&di);
            }
        }
    }
    Ok(inv)
}

/// `f64` inverse with a condition guard.
pub fn invert_rows(n: usize, m: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let inv = invert_generic(n, m)?;
    let condition = norm1(n, m) * norm1(n, &inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(LinalgError::IllConditioned { condition });
    }
    Ok(inv)
}

/// `‖m‖₁ ‖m⁻¹‖₁`, or infinity when singular.
pub fn condition_estimate(n: usize, m: &[f64]) -> f64 {
    match invert_generic(n, m) {
        Ok(inv) => norm1(n, m) * norm1(n, &inv),
        Err(_) => f64::INFINITY,
    }
}

fn norm1(n: usize, m: &[f64]) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| m[r * n + c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn mat_mul_generic<S: Scalar>(n: usize, a: &[S], b: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = a[r * n].times(&b[c]);
            for s in 1..n {
                acc = acc.plus(&a[r * n + s].times(&b[s * n + c]));
            }
            out.push(acc);
        }
    }
    out
}

/// Determinant by LU with partial pivoting.
pub fn determinant(n: usize, m: &[f64]) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .unwrap_or(col);
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
        }
    }
    det
}
