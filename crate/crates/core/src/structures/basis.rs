use crate::fields::FieldProvider;
use crate::tensor::{relative_residual, TensorValue, Valence};

use super::eigen::{jacobi_eigen, Mat, OrthonormalFrame};
use super::{StructureError, CLUSTER_TOL, COMMUTATOR_TOL};

/// A pointwise `g`-orthonormal basis `(e₁, Ae₁/‖Ae₁‖, …, e_m, Ae_m/‖Ae_m‖,
/// ξ₁, …, ξ_s)` in which `Q` is diagonal and `A` is block-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AQBasis {
    pub point: Vec<f64>,
    /// Chart components of each basis vector, in order.
    pub vectors: Vec<Vec<f64>>,
    /// Number of `(e, Ae)` pairs.
    pub pairs: usize,
    /// Eigenvalue of `Q` on each pair.
    pub pair_eigenvalues: Vec<f64>,
    /// `‖Ae‖` for each pair.
    pub pair_scales: Vec<f64>,
    /// Eigenvalue of `Q` on each kernel vector of `A`.
    pub kernel_eigenvalues: Vec<f64>,
    /// Distinct eigenvalues of `Q` with multiplicities, ascending.
    pub eigenvalues: Vec<(f64, usize)>,
}

impl AQBasis {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_eigenvalues.len()
    }

    fn matrix(&self) -> TensorValue {
        let n = self.vectors.len();
        TensorValue::from_fn(n, Valence::new(1, 1), |ix| self.vectors[ix[1]][ix[0]])
    }

    /// Expected `Q` and `A` in this basis: `diag(λ, λ, …, ν)` and
    /// `block-diag(√λ J, …, 0)` with `J e = f`, `J f = −e`.
    pub fn expected_blocks(&self) -> (TensorValue, TensorValue) {
        let n = self.vectors.len();
        let mut q = TensorValue::zeros(n, Valence::new(1, 1));
        let mut a = TensorValue::zeros(n, Valence::new(1, 1));
        for (p, &lam) in self.pair_eigenvalues.iter().enumerate() {
            let (e, f) = (2 * p, 2 * p + 1);
            q.set(&[e, e], lam);
            q.set(&[f, f], lam);
            a.set(&[f, e], lam.sqrt());
            a.set(&[e, f], -lam.sqrt());
        }
        for (s, &nu) in self.kernel_eigenvalues.iter().enumerate() {
            let k = 2 * self.pairs + s;
            q.set(&[k, k], nu);
        }
        (q, a)
    }

    /// Largest deviation from orthonormality and from the block forms.
    pub fn residual(&self, g: &TensorValue, a: &TensorValue, q: &TensorValue) -> f64 {
        let b = self.matrix();
        let n = b.dim();
        let gram = TensorValue::from_fn(n, Valence::new(1, 1), |ix| {
            g.pair(&self.vectors[ix[0]], &self.vectors[ix[1]])
        });
        let ortho = relative_residual(&gram, &TensorValue::identity(n));
        // B⁻¹ = Bᵀ g for a g-orthonormal basis
        let bt_g = TensorValue::from_fn(n, Valence::new(1, 1), |ix| {
            (0..n).map(|k| self.vectors[ix[0]][k] * g.at(k, ix[1])).sum()
        });
        let (q_want, a_want) = self.expected_blocks();
        let q_in = bt_g.matmul(q).matmul(&b);
        let a_in = bt_g.matmul(a).matmul(&b);
        ortho
            .max(relative_residual(&q_in, &q_want))
            .max(relative_residual(&a_in, &a_want))
    }
}

fn clusters(values: &[f64]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match out.last_mut() {
            Some((_, end)) if (v - values[*end - 1]).abs() <= CLUSTER_TOL * (1.0 + v.abs()) => *end = i + 1,
            _ => out.push((i, i + 1)),
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Remove the span of `against` from each vector and re-orthonormalize.
fn deflate(work: Vec<Vec<f64>>, against: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in work {
        for u in against
            .iter()
            .copied()
            .chain(out.iter().map(|w| w.as_slice()).collect::<Vec<_>>())
        {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

pub fn aq_basis(provider: &FieldProvider, point: &[f64]) -> Result<AQBasis, StructureError> {
    let g = provider.value("g", point)?;
    let a = provider.value("A", point)?;
    let q = provider.value("Q", point).map_err(|_| StructureError::MissingField {
        field: "Q",
        what: "A-Q-basis",
    })?;
    aq_basis_from(point, &g, &a, &q)
}

/// The constructive step: orthonormal eigenvectors of `Q` by Jacobi
/// rotations; inside each eigenspace, the kernel of `A` yields the `ξ`s and
/// the rest is split greedily into planes `(e, Ae/‖Ae‖)`, seeding each plane
/// with the lowest-index candidate maximizing `‖Ae‖`.
pub fn aq_basis_from(
    point: &[f64],
    g: &TensorValue,
    a: &TensorValue,
    q: &TensorValue,
) -> Result<AQBasis, StructureError> {
    let n = g.dim();
    let commutator = relative_residual(&a.matmul(q), &q.matmul(a));
    if commutator > COMMUTATOR_TOL {
        return Err(StructureError::NotCommuting { residual: commutator });
    }
    let to_mat = |t: &TensorValue| Mat {
        n,
        data: t.comps().to_vec(),
    };
    let frame = OrthonormalFrame::new(&to_mat(g))?;
    let qh = frame.endo(&to_mat(q));
    let qh = Mat::from_fn(n, |r, c| 0.5 * (qh.at(r, c) + qh.at(c, r)));
    let ah = frame.endo(&to_mat(a));
    let ah = Mat::from_fn(n, |r, c| 0.5 * (ah.at(r, c) - ah.at(c, r)));
    let a2 = ah.mul(&ah);
    let minus_a2 = Mat::from_fn(n, |r, c| -0.5 * (a2.at(r, c) + a2.at(c, r)));
    let a_scale = ah.data.iter().fold(0.0f64, |s, x| s.max(x.abs()));

    let (lams, vecs) = jacobi_eigen(&qh);
    let mut eigenvalues = Vec::new();
    let mut pairs_out: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = Vec::new();
    let mut kernel_out: Vec<(Vec<f64>, f64)> = Vec::new();
    for (start, end) in clusters(&lams) {
        let d = end - start;
        let lam = lams[start..end].iter().sum::<f64>() / d as f64;
        eigenvalues.push((lam, d));
        let cols: Vec<Vec<f64>> = (start..end).map(|c| vecs.column(c)).collect();
        // −A² restricted to the eigenspace
        let m = Mat::from_fn(d, |r, c| dot(&cols[r], &minus_a2.apply(&cols[c])));
        let (mus, w) = jacobi_eigen(&m);
        let sub: Vec<Vec<f64>> = (0..d)
            .map(|k| (0..n).map(|r| (0..d).map(|j| cols[j][r] * w.at(j, k)).sum()).collect())
            .collect();
        let kernel_tol = 1e-9 * (1.0 + a_scale * a_scale);
        for (s0, s1) in clusters(&mus) {
            let mu = mus[s0..s1].iter().sum::<f64>() / (s1 - s0) as f64;
            if mu.abs() <= kernel_tol {
                kernel_out.extend(sub[s0..s1].iter().map(|v| (v.clone(), lam)));
                continue;
            }
            if (s1 - s0) % 2 != 0 {
                return Err(StructureError::Multiplicity {
                    eigenvalue: lam,
                    message: format!("A-invariant part of dimension {} is odd", s1 - s0),
                });
            }
            let mut work: Vec<Vec<f64>> = sub[s0..s1].to_vec();
            while !work.is_empty() {
                let norms: Vec<f64> = work.iter().map(|v| norm(&ah.apply(v))).collect();
                let best = norms.iter().fold(0.0f64, |m, &x| m.max(x));
                let pick = norms
                    .iter()
                    .position(|&x| x >= best * (1.0 - 1e-12))
                    .expect("non-empty");
                let e = work.remove(pick);
                let ae = ah.apply(&e);
                let scale = norm(&ae);
                let f: Vec<f64> = ae.iter().map(|x| x / scale).collect();
                let before = work.len();
                work = deflate(work, &[&e, &f]);
                if work.len() + 1 != before {
                    return Err(StructureError::Multiplicity {
                        eigenvalue: lam,
                        message: "plane (e, Ae) is not A-invariant inside the eigenspace".into(),
                    });
                }
                pairs_out.push((e, f, lam, scale));
            }
        }
    }
    let chart = |w: &[f64]| frame.from_frame.apply(w);
    let mut vectors = Vec::with_capacity(n);
    for (e, f, _, _) in &pairs_out {
        vectors.push(chart(e));
        vectors.push(chart(f));
    }
    vectors.extend(kernel_out.iter().map(|(v, _)| chart(v)));
    Ok(AQBasis {
        point: point.to_vec(),
        vectors,
        pairs: pairs_out.len(),
        pair_eigenvalues: pairs_out.iter().map(|p| p.2).collect(),
        pair_scales: pairs_out.iter().map(|p| p.3).collect(),
        kernel_eigenvalues: kernel_out.iter().map(|k| k.1).collect(),
        eigenvalues,
    })
}
