//! Small dense symmetric eigenproblems by cyclic Jacobi rotations.

use super::StructureError;

const MAX_SWEEPS: usize = 64;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Mat {
        Mat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Mat {
        Mat {
            n,
            data: (0..n * n).map(|k| f(k / n, k % n)).collect(),
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        Mat::from_fn(n, |r, c| (0..n).map(|s| self.at(r, s) * o.at(s, c)).sum())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n, |r, c| self.at(c, r))
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.at(r, c) * v[c]).sum())
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.at(r, c)).collect()
    }
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as columns. Equal eigenvalues keep the order of the diagonal they came
/// from, so diagonal input returns the identity basis.
pub fn jacobi_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.n;
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    let scale = a.data.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.at(i, j).powi(2))
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum().max(0.0) * 2.0 - 1.0;
                let t = t / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a.at(k, p), a.at(k, q));
                    a.data[k * n + p] = c * akp - s * akq;
                    a.data[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a.at(p, k), a.at(q, k));
                    a.data[p * n + k] = c * apk - s * aqk;
                    a.data[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.at(k, p), v.at(k, q));
                    v.data[k * n + p] = c * vkp - s * vkq;
                    v.data[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(i, i).total_cmp(&a.at(j, j)).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a.at(i, i)).collect();
    let vectors = Mat::from_fn(n, |r, c| v.at(r, order[c]));
    (values, vectors)
}

/// Lower-triangular `L` with `g = L Lᵀ`.
pub fn cholesky(g: &Mat) -> Result<Mat, StructureError> {
    let n = g.n;
    let mut l = Mat::zeros(n);
    for j in 0..n {
        let d = g.at(j, j) - (0..j).map(|k| l.at(j, k).powi(2)).sum::<f64>();
        if !(d > 0.0) {
            return Err(StructureError::NotPositive { pivot: d });
        }
        let d = d.sqrt();
        l.data[j * n + j] = d;
        for i in j + 1..n {
            let s = g.at(i, j) - (0..j).map(|k| l.at(i, k) * l.at(j, k)).sum::<f64>();
            l.data[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &Mat) -> Mat {
    let n = l.n;
    let mut inv = Mat::zeros(n);
    for c in 0..n {
        for r in c..n {
            let rhs = if r == c { 1.0 } else { 0.0 };
            let s: f64 = (c..r).map(|k| l.at(r, k) * inv.at(k, c)).sum();
            inv.data[r * n + c] = (rhs - s) / l.at(r, r);
        }
    }
    inv
}

/// A `g`-orthonormal frame: columns of `L⁻ᵀ`, so `Lᵀ` maps chart components
/// to orthonormal components.
#[derive(Debug, Clone)]
pub struct OrthonormalFrame {
    /// `Lᵀ`
    pub to_frame: Mat,
    /// `L⁻ᵀ`
    pub from_frame: Mat,
}

impl OrthonormalFrame {
    pub fn new(g: &Mat) -> Result<OrthonormalFrame, StructureError> {
        let l = cholesky(g)?;
        Ok(OrthonormalFrame {
            to_frame: l.transpose(),
            from_frame: lower_inverse(&l).transpose(),
        })
    }

    /// `Lᵀ P L⁻ᵀ`: an endomorphism in orthonormal components. Symmetric when
    /// `P` is `g`-self-adjoint, skew when `P` is `g`-skew.
    pub fn endo(&self, p: &Mat) -> Mat {
        self.to_frame.mul(p).mul(&self.from_frame)
    }
}

/// Eigenvalues of a `g`-self-adjoint endomorphism, ascending.
pub fn self_adjoint_eigenvalues(g: &Mat, p: &Mat) -> Result<Vec<f64>, StructureError> {
    let frame = OrthonormalFrame::new(g)?;
    let s = frame.endo(p);
    let sym = Mat::from_fn(s.n, |r, c| 0.5 * (s.at(r, c) + s.at(c, r)));
    Ok(jacobi_eigen(&sym).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes() {
        let m = Mat::from_fn(4, |r, c| match (r, c) {
            (r, c) if r == c => [4.0, 1.0, 3.0, 2.0][r],
            (0, 1) | (1, 0) => 0.5,
            (2, 3) | (3, 2) => -0.25,
            _ => 0.1,
        });
        let (vals, vecs) = jacobi_eigen(&m);
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let d = vecs.transpose().mul(&m).mul(&vecs);
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { vals[r] } else { 0.0 };
                assert!((d.at(r, c) - want).abs() < 1e-12);
            }
        }
        let trace: f64 = vals.iter().sum();
        assert!((trace - 10.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_input_keeps_identity_basis() {
        let m = Mat::identity(3);
        let (vals, vecs) = jacobi_eigen(&m);
        assert_eq!(vals, vec![1.0; 3]);
        assert_eq!(vecs, Mat::identity(3));
    }

    #[test]
    fn cholesky_reconstructs() {
        let g = Mat::from_fn(3, |r, c| if r == c { 2.0 } else { 0.3 });
        let l = cholesky(&g).unwrap();
        let back = l.mul(&l.transpose());
        for k in 0..9 {
            assert!((back.data[k] - g.data[k]).abs() < 1e-14);
        }
        let inv = lower_inverse(&l);
        let id = l.mul(&inv);
        assert!((0..9).all(|k| (id.data[k] - Mat::identity(3).data[k]).abs() < 1e-14));
    }

    #[test]
    fn indefinite_metric_is_refused() {
        let g = Mat::from_fn(2, |r, c| if r == c { 0.0 } else { 1.0 });
        assert!(matches!(cholesky(&g), Err(StructureError::NotPositive { .. })));
    }
}
