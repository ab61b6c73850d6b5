//! Levi-Civita connection, exterior derivative of `F`, covariant
//! derivatives, torsion, Lie brackets, Nijenhuis tensors and curvature.
//!
//! Connection coefficients use `∇_{∂_i}∂_j = Γ^k_{ij} ∂_k`, stored at
//! `[k, i, j]`: the first lower index is the direction of differentiation.
//! Covariant derivatives append the direction as the last covariant slot,
//! so `(∇_m A)^k_i` is stored at `[k, i, m]`.

mod jets;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fields::{FieldError, FieldJets, FieldProvider, TensorJet};
use crate::tensor::{invert_matrix, TensorError, TensorValue, Valence};

pub use jets::{christoffel, exterior_derivative, lower_first, raise_last, scale_jet};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("unsupported valence {0}")]
    UnsupportedValence(Valence),
    #[error("torsion is not antisymmetric in its first two slots (residual {0:e})")]
    NotAntisymmetric(f64),
}

type Formula = dyn Fn(&FieldJets) -> Result<TensorJet, GeometryError> + Send + Sync;

/// Connection coefficients `Γ^k_{ij}` as a closure over a provider,
/// evaluable with first partials anywhere in the chart.
#[derive(Clone)]
pub struct ConnectionField {
    provider: Arc<FieldProvider>,
    name: String,
    symmetric: bool,
    formula: Arc<Formula>,
}

impl fmt::Debug for ConnectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionField")
            .field("name", &self.name)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl ConnectionField {
    /// `formula` maps field jets of order `r` to `Γ` jets of order `r − 1`.
    pub fn new(
        provider: Arc<FieldProvider>,
        name: impl Into<String>,
        symmetric: bool,
        formula: impl Fn(&FieldJets) -> Result<TensorJet, GeometryError> + Send + Sync + 'static,
    ) -> ConnectionField {
        ConnectionField {
            provider,
            name: name.into(),
            symmetric,
            formula: Arc::new(formula),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn provider(&self) -> &Arc<FieldProvider> {
        &self.provider
    }

    pub fn from_jets(&self, fj: &FieldJets) -> Result<TensorJet, GeometryError> {
        (self.formula)(fj)
    }

    pub fn coefficients(&self, point: &[f64]) -> Result<TensorValue, GeometryError> {
        Ok(self.from_jets(&self.provider.jets(point, 1)?)?.value())
    }

    /// `Γ` with exact first partials.
    pub fn jet(&self, point: &[f64]) -> Result<TensorJet, GeometryError> {
        self.from_jets(&self.provider.jets(point, 2)?)
    }
}

pub fn levi_civita(provider: Arc<FieldProvider>) -> ConnectionField {
    ConnectionField::new(provider, "levi-civita", true, |fj| Ok(christoffel(&fj.g, &fj.g_inv)))
}

/// `(g, F)` with `g = ½(G + Gᵀ)` and `F = ½(G − Gᵀ)`.
pub fn split_metric(provider: &FieldProvider, point: &[f64]) -> Result<(TensorValue, TensorValue), GeometryError> {
    let big = provider.value("G", point)?;
    let t = big.transpose();
    Ok((big.add(&t).scale(0.5), big.sub(&t).scale(0.5)))
}

/// `A^k_i = F_ij g^{jk}`, the endomorphism with `g(AX, Y) = F(X, Y)`.
pub fn adjoint_a(g: &TensorValue, f: &TensorValue) -> Result<TensorValue, GeometryError> {
    let ginv = invert_matrix(g)?;
    Ok(f.matmul(&ginv).transpose())
}

/// `dF_{ijk} = ∂_i F_jk + ∂_j F_ki + ∂_k F_ij` (no normalizing factor).
pub fn exterior_derivative_f(provider: &FieldProvider, point: &[f64]) -> Result<TensorValue, GeometryError> {
    Ok(exterior_derivative(&provider.jet("F", point, 1)?).value())
}

fn covariant_impl(gamma: &TensorValue, value: &TensorValue, grad: &TensorValue, direction_last: bool) -> TensorValue {
    let n = value.dim();
    let val = value.valence();
    let (p, q) = (val.up, val.down);
    let out_val = Valence::new(p, q + 1);
    let g = |k: usize, m: usize, s: usize| {
        if direction_last {
            gamma.get(&[k, s, m])
        } else {
            gamma.get(&[k, m, s])
        }
    };
    let mut src = vec![0usize; p + q];
    TensorValue::from_fn(n, out_val, |ix| {
        let m = ix[p + q];
        let mut acc = grad.get(ix);
        src.copy_from_slice(&ix[..p + q]);
        for a in 0..p {
            let orig = src[a];
            for s in 0..n {
                src[a] = s;
                acc += g(orig, m, s) * value.get(&src);
            }
            src[a] = orig;
        }
        for b in p..p + q {
            let orig = src[b];
            for s in 0..n {
                src[b] = s;
                // lower slot: Γ^s_{m b} (direction first) or Γ^s_{b m}
                let c = if direction_last {
                    gamma.get(&[s, orig, m])
                } else {
                    gamma.get(&[s, m, orig])
                };
                acc -= c * value.get(&src);
            }
            src[b] = orig;
        }
        acc
    })
}

/// `∇_m t` for a tensor of any valence given its value and partials
/// (partials in an extra last covariant slot). The direction is appended
/// as the last covariant slot of the result.
pub fn covariant_derivative(gamma: &TensorValue, value: &TensorValue, grad: &TensorValue) -> TensorValue {
    covariant_impl(gamma, value, grad, false)
}

/// Both historical conventions for a `(1,1)` field:
/// plus uses `Γ^i_{pm} a^p_j − Γ^p_{jm} a^i_p`, minus uses
/// `Γ^i_{mp} a^p_j − Γ^p_{mj} a^i_p`. Minus coincides with
/// [`covariant_derivative`].
pub fn covariant_derivative_pm(
    gamma: &TensorValue,
    value: &TensorValue,
    grad: &TensorValue,
) -> Result<(TensorValue, TensorValue), GeometryError> {
    if value.valence() != Valence::new(1, 1) {
        return Err(GeometryError::UnsupportedValence(value.valence()));
    }
    Ok((
        covariant_impl(gamma, value, grad, true),
        covariant_impl(gamma, value, grad, false),
    ))
}

/// Covariant derivative of a named provider field under `conn`.
pub fn covariant_derivative_of(
    conn: &ConnectionField,
    field: &str,
    point: &[f64],
) -> Result<TensorValue, GeometryError> {
    let fj = conn.provider().jets(point, 1)?;
    let gamma = conn.from_jets(&fj)?.value();
    let t = conn.provider().jet(field, point, 1)?;
    Ok(covariant_derivative(&gamma, &t.value(), &t.gradient()))
}

/// `T^k_{ij} = Γ^k_{ij} − Γ^k_{ji}` and `T_{ijk} = g_{ks} T^s_{ij}`.
pub fn torsion_of(gamma: &TensorValue, g: &TensorValue) -> (TensorValue, TensorValue) {
    let n = gamma.dim();
    let t = TensorValue::from_fn(n, Valence::new(1, 2), |ix| {
        gamma.get(&[ix[0], ix[1], ix[2]]) - gamma.get(&[ix[0], ix[2], ix[1]])
    });
    let cov = t.lower_last(0, g);
    (t, cov)
}

/// `[X, Y]^k = X^s ∂_s Y^k − Y^s ∂_s X^k` for vector fields given as jets.
pub fn lie_bracket(x: &TensorJet, y: &TensorJet) -> TensorValue {
    let (xv, xg) = (x.value(), x.gradient());
    let (yv, yg) = (y.value(), y.gradient());
    let n = xv.dim();
    TensorValue::vector(
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|s| xv.comps()[s] * yg.get(&[k, s]) - yv.comps()[s] * xg.get(&[k, s]))
                    .sum()
            })
            .collect(),
    )
}

/// `N_P(e_i, e_j)^k` on the coordinate frame, from `P` and its partials.
pub fn nijenhuis_vector(p: &TensorValue, dp: &TensorValue) -> TensorValue {
    let n = p.dim();
    TensorValue::from_fn(n, Valence::new(1, 2), |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        let mut acc = 0.0;
        for s in 0..n {
            acc += p.at(s, i) * dp.get(&[k, j, s]) - p.at(s, j) * dp.get(&[k, i, s]);
            acc -= p.at(k, s) * (dp.get(&[s, j, i]) - dp.get(&[s, i, j]));
        }
        acc
    })
}

/// `N_P(X, Y, Z) = g(N_P(X, Y), Z)` on the coordinate frame, stored `[i, j, k]`.
pub fn nijenhuis(p: &TensorValue, dp: &TensorValue, g: &TensorValue) -> TensorValue {
    nijenhuis_vector(p, dp).lower_last(0, g)
}

/// `R^i_{klm} = ∂_m Γ^i_{kl} − ∂_l Γ^i_{km} − Γ^i_{sl}Γ^s_{km} + Γ^i_{sm}Γ^s_{kl}`,
/// stored `[i, k, l, m]`, from a `Γ` jet of order at least 1.
pub fn curvature(gamma: &TensorJet) -> TensorValue {
    let gv = gamma.value();
    let dg = gamma.gradient();
    let n = gv.dim();
    TensorValue::from_fn(n, Valence::new(1, 3), |ix| {
        let (i, k, l, m) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = dg.get(&[i, k, l, m]) - dg.get(&[i, k, m, l]);
        for s in 0..n {
            acc -= gv.get(&[i, s, l]) * gv.get(&[s, k, m]);
            acc += gv.get(&[i, s, m]) * gv.get(&[s, k, l]);
        }
        acc
    })
}

/// Sectional curvature of the plane `(∂_a, ∂_b)` from `R` and `g`.
pub fn sectional_curvature(r: &TensorValue, g: &TensorValue, a: usize, b: usize) -> f64 {
    let n = g.dim();
    // g(R(∂_a, ∂_b)∂_b, ∂_a) with R(∂_m, ∂_l)∂_k = R^i_{klm} ∂_i
    let num: f64 = (0..n).map(|i| g.at(i, a) * r.get(&[i, b, b, a])).sum();
    num / (g.at(a, a) * g.at(b, b) - g.at(a, b).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin, sample_points};

    fn provider(d: &str) -> Arc<FieldProvider> {
        Arc::new(FieldProvider::new(builtin(d).unwrap()))
    }

    #[test]
    fn flat_metric_has_vanishing_christoffels() {
        let lc = levi_civita(provider("flat_kahler(4)"));
        assert_eq!(lc.coefficients(&[0.1, 0.2, 0.3, 0.4]).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn round_sphere_christoffels_match_closed_form() {
        let lc = levi_civita(provider("round_s2(1)"));
        for p in sample_points(&[(0.4, 2.7), (-0.8, 0.8)], 16, 7) {
            let gm = lc.coefficients(&p).unwrap();
            let (s, c) = p[0].sin_cos();
            let mut want = TensorValue::zeros(2, Valence::new(1, 2));
            want.set(&[0, 1, 1], -s * c);
            want.set(&[1, 0, 1], c / s);
            want.set(&[1, 1, 0], c / s);
            assert!(gm.sub(&want).sup_norm() < 1e-13);
        }
    }

    #[test]
    fn round_sphere_sectional_curvature() {
        for (r, k) in [(1.0, 1.0), (2.0, 0.25)] {
            let lc = levi_civita(provider(&format!("round_s2({r})")));
            let domain = lc.provider().spec().domain.clone();
            for p in sample_points(&domain, 8, 1) {
                let rt = curvature(&lc.jet(&p).unwrap());
                let g = lc.provider().value("g", &p).unwrap();
                assert!((sectional_curvature(&rt, &g, 0, 1) - k).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn levi_civita_is_metric_and_torsion_free_on_s6() {
        let p = provider("s6");
        let lc = levi_civita(p.clone());
        for pt in sample_points(&p.spec().domain, 16, 42) {
            let fj = p.jets(&pt, 1).unwrap();
            let gamma = lc.from_jets(&fj).unwrap().value();
            let ng = covariant_derivative(&gamma, &fj.g.value(), &fj.g.gradient());
            assert!(ng.sup_norm() < 1e-10);
            let (t, _) = torsion_of(&gamma, &fj.g.value());
            assert_eq!(t.sup_norm(), 0.0);
        }
    }

    #[test]
    fn first_bianchi_on_s6() {
        let p = provider("s6");
        let lc = levi_civita(p.clone());
        let pt = [0.1, -0.2, 0.05, 0.3, 0.0, -0.1];
        let r = curvature(&lc.jet(&pt).unwrap());
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for k in 0..6 {
                for l in 0..6 {
                    for m in 0..6 {
                        let s = r.get(&[i, k, l, m]) + r.get(&[i, l, m, k]) + r.get(&[i, m, k, l]);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        assert!(worst < 1e-10, "{worst}");
        // the round unit sphere has constant curvature 1
        let g = p.value("g", &pt).unwrap();
        assert!((sectional_curvature(&r, &g, 2, 4) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exterior_derivative_of_single_term() {
        let doc = r#"{"dim": 3, "backend": "chart", "fields": {
            "g": [["1","0","0"],["0","1","0"],["0","0","1"]],
            "F": [["0","x2","0"],["-x2","0","0"],["0","0","0"]]}}"#;
        let p = FieldProvider::new(crate::fields::ManifoldSpec::from_json(doc).unwrap());
        let df = exterior_derivative_f(&p, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(df.get(&[2, 0, 1]), 1.0);
        assert_eq!(df.get(&[0, 1, 2]), 1.0);
        assert_eq!(df.get(&[1, 0, 2]), -1.0);
        assert_eq!(df.antisymmetrize(&[0, 1, 2]).unwrap(), df);
    }

    #[test]
    fn lie_bracket_of_linear_field() {
        // [x0 ∂_1, ∂_0] = −∂_1
        let vars = crate::expr::Jet::variables(&[0.4, 0.7], 1);
        let zero = crate::expr::Scalar::constant_like(&vars[0], 0.0);
        let one = crate::expr::Scalar::constant_like(&vars[0], 1.0);
        let x = TensorJet::new(2, Valence::new(1, 0), vec![zero.clone(), vars[0].clone()]);
        let y = TensorJet::new(2, Valence::new(1, 0), vec![one, zero]);
        assert_eq!(lie_bracket(&x, &y).comps(), &[0.0, -1.0]);
    }

    #[test]
    fn plus_minus_agree_for_symmetric_connection() {
        let p = provider("s6");
        let lc = levi_civita(p.clone());
        let pt = [0.1, 0.0, 0.2, -0.1, 0.05, 0.1];
        let fj = p.jets(&pt, 1).unwrap();
        let gamma = lc.from_jets(&fj).unwrap().value();
        let (plus, minus) = covariant_derivative_pm(&gamma, &fj.a.value(), &fj.a.gradient()).unwrap();
        assert!(plus.sub(&minus).sup_norm() < 1e-15);
        assert!(covariant_derivative_pm(&gamma, &fj.g.value(), &fj.g.gradient()).is_err());
    }

    #[test]
    fn nijenhuis_of_flat_complex_structure_vanishes() {
        let p = provider("flat_kahler(4)");
        let a = p.jet("A", &[0.0; 4], 1).unwrap();
        let n = nijenhuis(&a.value(), &a.gradient(), &TensorValue::euclidean(4));
        assert_eq!(n.sup_norm(), 0.0);
    }

    #[test]
    fn nijenhuis_matches_bracket_definition() {
        // N(X,Y) = [PX,PY] + P²[X,Y] − P[PX,Y] − P[X,PY] with X, Y coordinate fields.
        let p = provider("s6");
        let pt = [0.2, -0.1, 0.1, 0.0, 0.15, -0.2];
        let a = p.jet("A", &pt, 1).unwrap();
        let (av, ag) = (a.value(), a.gradient());
        let nv = nijenhuis_vector(&av, &ag);
        let n = 6;
        let column = |i: usize| {
            let comps = (0..n).map(|k| a.comps()[k * n + i].clone()).collect();
            TensorJet::new(n, Valence::new(1, 0), comps)
        };
        let vars = crate::expr::Jet::variables(&pt, 1);
        let coord = |i: usize| {
            let comps = (0..n)
                .map(|k| crate::expr::Scalar::constant_like(&vars[0], (k == i) as u8 as f64))
                .collect();
            TensorJet::new(n, Valence::new(1, 0), comps)
        };
        for i in 0..n {
            for j in 0..n {
                let b1 = lie_bracket(&column(i), &column(j));
                let b2 = av.apply(lie_bracket(&column(i), &coord(j)).comps());
                let b3 = av.apply(lie_bracket(&coord(i), &column(j)).comps());
                for k in 0..n {
                    let want = b1.comps()[k] - b2[k] - b3[k];
                    assert!((nv.get(&[k, i, j]) - want).abs() < 1e-13);
                }
            }
        }
    }
}
