//! Connections satisfying the Einstein metricity condition
//! `∂_m G_ij − Γ^p_{im} G_pj − Γ^p_{mj} G_ip = 0`.
//!
//! [`einstein_connection`] is the skew-torsion candidate
//! `g(∇_XY, Z) = g(∇ᵍ_XY, Z) + ⅙[dF(AX,Y,Z) − dF(X,Y,Z) − dF(X,AY,Z)]`;
//! it is always built, and satisfies the metricity condition exactly when
//! the existence criterion relating `N_A`, `A` and `dF` holds.

use std::sync::Arc;

use crate::expr::{Jet, Scalar};
use crate::fields::{FieldJets, FieldProvider, TensorJet};
use crate::geometry::{christoffel, exterior_derivative, raise_last, ConnectionField, GeometryError};
use crate::tensor::{TensorValue, Valence};

/// Antisymmetry tolerance for prescribed torsion, relative to its size.
const ANTISYMMETRY_TOL: f64 = 1e-12;

/// `t(.., A e_i, ..)` in covariant slot `slot` of a `(0,3)` jet.
fn compose_slot(t: &TensorJet, slot: usize, a: &TensorJet) -> TensorJet {
    let n = t.dim();
    let a = a.truncate(t.order());
    let (tc, ac) = (t.comps(), a.comps());
    let comps = (0..n * n * n)
        .map(|ix| {
            let mut idx = [ix / (n * n), (ix / n) % n, ix % n];
            let i = idx[slot];
            (0..n)
                .map(|s| {
                    idx[slot] = s;
                    ac[s * n + i].times(&tc[(idx[0] * n + idx[1]) * n + idx[2]])
                })
                .reduce(|x, y| x.plus(&y))
                .expect("n >= 1")
        })
        .collect();
    TensorJet::new(n, Valence::new(0, 3), comps)
}

fn combine(terms: &[(f64, &TensorJet)]) -> TensorJet {
    let (c0, t0) = terms[0];
    let comps = (0..t0.comps().len())
        .map(|k| {
            terms[1..].iter().fold(t0.comps()[k].scaled(c0), |acc: Jet, (c, t)| {
                acc.plus(&t.comps()[k].scaled(*c))
            })
        })
        .collect();
    TensorJet::new(t0.dim(), t0.valence(), comps)
}

fn add_gamma(base: &TensorJet, delta: &TensorJet) -> TensorJet {
    combine(&[(1.0, base), (1.0, delta)])
}

/// `K(X,Y,Z) = ⅙[dF(AX,Y,Z) − dF(X,AY,Z) − dF(X,Y,Z)]` as a jet.
pub fn einstein_contorsion_jet(fj: &FieldJets) -> TensorJet {
    let df = exterior_derivative(&fj.f);
    let a_df = compose_slot(&df, 0, &fj.a);
    let df_a = compose_slot(&df, 1, &fj.a);
    combine(&[(1.0 / 6.0, &a_df), (-1.0 / 6.0, &df_a), (-1.0 / 6.0, &df)])
}

/// `2K(X,Y,Z) = T(X,Y,Z) − T(X,Z,AY) − T(Y,Z,AX)` as a jet.
pub fn emc_contorsion_jet(t: &TensorJet, a: &TensorJet) -> TensorJet {
    let ta = compose_slot(t, 2, a);
    // T(X,Z,AY) at [i,j,k] is ta[i,k,j]; T(Y,Z,AX) is ta[j,k,i]
    let n = t.dim();
    let tc = ta.comps();
    let comps = (0..n * n * n)
        .map(|ix| {
            let (i, j, k) = (ix / (n * n), (ix / n) % n, ix % n);
            t.comps()[ix]
                .minus(&tc[(i * n + k) * n + j])
                .minus(&tc[(j * n + k) * n + i])
                .scaled(0.5)
        })
        .collect();
    TensorJet::new(n, Valence::new(0, 3), comps)
}

/// The skew-torsion Einstein connection with its torsion accessor.
#[derive(Debug, Clone)]
pub struct EinsteinConnection {
    conn: ConnectionField,
}

impl EinsteinConnection {
    pub fn connection(&self) -> &ConnectionField {
        &self.conn
    }

    pub fn coefficients(&self, point: &[f64]) -> Result<TensorValue, GeometryError> {
        self.conn.coefficients(point)
    }

    /// `T_{ijk}`; equals `−⅓ dF` by construction.
    pub fn torsion(&self, point: &[f64]) -> Result<TensorValue, GeometryError> {
        let fj = self.conn.provider().jets(point, 1)?;
        let gamma = self.conn.from_jets(&fj)?.value();
        Ok(crate::geometry::torsion_of(&gamma, &fj.g.value()).1)
    }
}

pub fn einstein_gamma(fj: &FieldJets) -> TensorJet {
    let base = christoffel(&fj.g, &fj.g_inv);
    let k = einstein_contorsion_jet(fj);
    add_gamma(&base, &raise_last(&k, &fj.g_inv))
}

pub fn einstein_connection(provider: Arc<FieldProvider>) -> EinsteinConnection {
    EinsteinConnection {
        conn: ConnectionField::new(provider, "einstein", false, |fj| Ok(einstein_gamma(fj))),
    }
}

fn check_antisymmetric(t: &TensorJet) -> Result<(), GeometryError> {
    let v = t.value();
    let sym = v.add(&v.permute(&[1, 0, 2]));
    let residual = sym.sup_norm() / (1.0 + v.sup_norm());
    if residual > ANTISYMMETRY_TOL {
        return Err(GeometryError::NotAntisymmetric(residual));
    }
    Ok(())
}

/// Connection with prescribed torsion `T_{ijk}` (antisymmetric in `i, j`):
/// `g(∇_XY, Z) = g(∇ᵍ_XY, Z) + ½[T(X,Y,Z) − T(X,Z,AY) − T(Y,Z,AX)]`.
///
/// `torsion` maps field jets of order `r` to a `(0,3)` jet of order `r − 1`.
pub fn general_emc_connection(
    provider: Arc<FieldProvider>,
    torsion: impl Fn(&FieldJets) -> Result<TensorJet, GeometryError> + Send + Sync + 'static,
) -> ConnectionField {
    ConnectionField::new(provider, "general-emc", false, move |fj| {
        let t = torsion(fj)?;
        check_antisymmetric(&t)?;
        let base = christoffel(&fj.g, &fj.g_inv);
        let k = emc_contorsion_jet(&t, &fj.a);
        Ok(add_gamma(&base, &raise_last(&k, &fj.g_inv)))
    })
}

/// Torsion `−⅓ dF`, the input that reproduces [`einstein_connection`].
pub fn torsion_from_df(fj: &FieldJets) -> Result<TensorJet, GeometryError> {
    let df = exterior_derivative(&fj.f);
    Ok(combine(&[(-1.0 / 3.0, &df)]))
}

/// `K(X,Y,Z) = g(∇_XY − ∇ᵍ_XY, Z)` at a point, stored `[i, j, k]`.
pub fn contorsion(conn: &ConnectionField, point: &[f64]) -> Result<TensorValue, GeometryError> {
    let fj = conn.provider().jets(point, 1)?;
    let gamma = conn.from_jets(&fj)?.value();
    let base = christoffel(&fj.g, &fj.g_inv).value();
    Ok(gamma.sub(&base).lower_last(0, &fj.g.value()))
}
