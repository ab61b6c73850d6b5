//! Weak metric structures: axiom checks, the nearly Kähler and
//! almost-nearly cosymplectic conditions, the tensors `N⁽⁵⁾` and
//! `N_A^wac`, A-Q-bases and spectral splittings by the eigenvalues of `Q`.

mod basis;
pub mod eigen;
mod local;
mod split;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::fields::FieldProvider;
use crate::geometry::GeometryError;
use crate::tensor::{relative_residual, TensorValue, Valence};

pub use basis::{aq_basis, AQBasis};
pub use local::PointGeometry;
pub use split::{involutivity_residual, spectral_split, InvolutivityResidual, SpectralSplit};

/// Eigenvalues closer than this (absolute) belong to one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Distinct clusters must be at least this far apart.
pub const MIN_GAP: f64 = 1e-4;
/// Largest `[A, Q]` residual accepted by [`aq_basis`].
pub const COMMUTATOR_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{what} needs field `{field}`")]
    MissingField { field: &'static str, what: &'static str },
    #[error("metric is not positive definite (pivot {pivot:e})")]
    NotPositive { pivot: f64 },
    #[error("A and Q do not commute (residual {residual:e})")]
    NotCommuting { residual: f64 },
    #[error("eigenvalue {eigenvalue}: {message}")]
    Multiplicity { eigenvalue: f64, message: String },
    #[error("eigenvalues {a} and {b} are too close to separate (gap {gap:e})")]
    NearDegenerate { a: f64, b: f64, gap: f64 },
    #[error("eigenvalue {eigenvalue} is not constant over the samples (spread {spread:e})")]
    NonConstant { eigenvalue: f64, spread: f64 },
    #[error("eigenvalue multiplicities change from {expected:?} to {found:?} at sample {sample}")]
    ClusterMismatch {
        sample: usize,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("no sample points")]
    NoSamples,
}

impl From<crate::fields::FieldError> for StructureError {
    fn from(e: crate::fields::FieldError) -> Self {
        StructureError::Geometry(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomKind {
    WeakHermitian,
    WeakAcm,
    WeakParaHermitian,
    WeakParaContact,
}

impl AxiomKind {
    pub const ALL: [AxiomKind; 4] = [
        AxiomKind::WeakHermitian,
        AxiomKind::WeakAcm,
        AxiomKind::WeakParaHermitian,
        AxiomKind::WeakParaContact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomKind::WeakHermitian => "weak_hermitian",
            AxiomKind::WeakAcm => "weak_acm",
            AxiomKind::WeakParaHermitian => "weak_para_hermitian",
            AxiomKind::WeakParaContact => "weak_para_contact",
        }
    }

    pub fn is_contact(self) -> bool {
        matches!(self, AxiomKind::WeakAcm | AxiomKind::WeakParaContact)
    }

    fn is_para(self) -> bool {
        matches!(self, AxiomKind::WeakParaHermitian | AxiomKind::WeakParaContact)
    }
}

impl fmt::Display for AxiomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown structure kind `{s}`"))
    }
}

/// Residual of each axiom at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub kind: AxiomKind,
    pub residuals: Vec<(&'static str, f64)>,
    /// Smallest real part among the eigenvalues of `Q`.
    pub q_min_eigenvalue: f64,
    /// Largest imaginary part among the eigenvalues of `Q`.
    pub q_max_imaginary: f64,
}

impl AxiomReport {
    /// Largest residual; positivity of `Q` counts as `1` when violated.
    pub fn max_residual(&self) -> f64 {
        let positive =
            self.q_min_eigenvalue > 0.0 && self.q_max_imaginary <= 1e-9 * (1.0 + self.q_min_eigenvalue.abs());
        let pos = if positive { 0.0 } else { 1.0 };
        self.residuals.iter().map(|r| r.1).fold(pos, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.0 == name).map(|r| r.1)
    }
}

fn form(n: usize, f: impl Fn(usize, usize) -> f64) -> TensorValue {
    TensorValue::from_fn(n, Valence::new(0, 2), |ix| f(ix[0], ix[1]))
}

fn require<'a, T>(v: &'a Option<T>, field: &'static str, what: &'static str) -> Result<&'a T, StructureError> {
    v.as_ref().ok_or(StructureError::MissingField { field, what })
}

/// Eigenvalues of a real matrix as `(min real part, max |imaginary part|)`.
fn spectrum_bounds(p: &TensorValue) -> (f64, f64) {
    let n = p.dim();
    let m = DMatrix::from_row_slice(n, n, p.comps());
    m.complex_eigenvalues()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(re, im), z| {
            (re.min(z.re), im.max(z.im.abs()))
        })
}

pub fn check_axioms(provider: &FieldProvider, kind: AxiomKind, point: &[f64]) -> Result<AxiomReport, StructureError> {
    check_axioms_at(&PointGeometry::new(provider, point)?, kind)
}

/// Axiom residuals for `kind`; `σ = +1` for the Hermitian and a.c.m.
/// kinds and `σ = −1` for their para analogues:
/// `A² = −σQ + σ η⊗ξ`, `g(AX, AY) = σ[g(QX, Y) − η(X)η(Y)]`.
pub fn check_axioms_at(pg: &PointGeometry, kind: AxiomKind) -> Result<AxiomReport, StructureError> {
    let what = "structure axioms";
    let n = pg.dim();
    let q = require(&pg.q, "Q", what)?;
    let sigma = if kind.is_para() { -1.0 } else { 1.0 };
    let (g, a) = (&pg.g, &pg.a);
    let mut residuals = Vec::new();

    let a2 = pg.a_squared();
    let gaa = form(n, |i, j| {
        (0..n)
            .flat_map(|k| (0..n).map(move |l| (k, l)))
            .map(|(k, l)| a.at(k, i) * g.at(k, l) * a.at(l, j))
            .sum()
    });
    let gq = form(n, |i, j| (0..n).map(|k| q.at(k, i) * g.at(k, j)).sum());
    let (mut a2_rhs, mut gaa_rhs) = (q.scale(-sigma), gq.scale(sigma));
    if kind.is_contact() {
        let xi = require(&pg.xi, "xi", what)?;
        let eta = require(&pg.eta, "eta", what)?;
        let ex = pg.eta_xi().expect("contact fields");
        a2_rhs = a2_rhs.add(&ex.scale(sigma));
        gaa_rhs = gaa_rhs.sub(&form(n, |i, j| eta.comps()[i] * eta.comps()[j]).scale(sigma));
        let a_xi = TensorValue::vector(a.apply(xi.comps()));
        residuals.push(("a_xi", relative_residual(&a_xi, &TensorValue::vector(vec![0.0; n]))));
        let q_xi = TensorValue::vector(q.apply(xi.comps()));
        residuals.push(("q_xi", relative_residual(&q_xi, xi)));
        let eta_xi: f64 = (0..n).map(|i| eta.comps()[i] * xi.comps()[i]).sum();
        residuals.push(("eta_xi", (eta_xi - 1.0).abs() / 2.0));
        let lowered = TensorValue::covector(
            (0..n)
                .map(|i| (0..n).map(|j| g.at(i, j) * xi.comps()[j]).sum())
                .collect(),
        );
        residuals.push(("eta_dual", relative_residual(&lowered, eta)));
    }
    residuals.insert(0, ("a_squared", relative_residual(&a2, &a2_rhs)));
    residuals.insert(1, ("g_aa", relative_residual(&gaa, &gaa_rhs)));
    let fa = form(n, |i, j| (0..n).map(|k| a.at(k, i) * g.at(k, j)).sum());
    residuals.insert(2, ("f_is_g_a", relative_residual(&pg.f, &fa)));
    residuals.push(("q_self_adjoint", relative_residual(&gq, &gq.transpose())));
    residuals.push(("a_q_commute", relative_residual(&a.matmul(q), &q.matmul(a))));
    let (min_re, max_im) = spectrum_bounds(q);
    Ok(AxiomReport {
        kind,
        residuals,
        q_min_eigenvalue: min_re,
        q_max_imaginary: max_im,
    })
}

pub fn nearly_kahler_residual(provider: &FieldProvider, point: &[f64]) -> Result<f64, StructureError> {
    Ok(nearly_kahler_residual_at(&PointGeometry::new(provider, point)?))
}

/// Symmetric part of `(X, Y) ↦ g((∇ᵍ_X A)Y, ·)`, measured against the
/// skew part it should equal.
pub fn nearly_kahler_residual_at(pg: &PointGeometry) -> f64 {
    let d = pg.lc_nabla_a_form();
    relative_residual(&d, &d.permute(&[1, 0, 2]).scale(-1.0))
}

pub fn anc_residual(provider: &FieldProvider, point: &[f64]) -> Result<f64, StructureError> {
    anc_residual_at(&PointGeometry::new(provider, point)?)
}

/// `g((∇ᵍ_X A)Y, Z) = −⅓dF(AX, AY, Z) + ⅙η(Z)dη(Y, AX) − ½η(Y)dη(AZ, X)`.
pub fn anc_residual_at(pg: &PointGeometry) -> Result<f64, StructureError> {
    let what = "almost-nearly cosymplectic condition";
    let eta = require(&pg.eta, "eta", what)?;
    require(&pg.xi, "xi", what)?;
    let deta = pg.deta().ok_or(StructureError::MissingField { field: "eta", what })?;
    let n = pg.dim();
    let a = &pg.a;
    let lhs = pg.lc_nabla_a_form();
    let dfa = pg.df_with([Some(a), Some(a), None]);
    let rhs = TensorValue::from_fn(n, Valence::new(0, 3), |ix| {
        let (x, y, z) = (ix[0], ix[1], ix[2]);
        let d_y_ax: f64 = (0..n).map(|s| deta.at(y, s) * a.at(s, x)).sum();
        let d_az_x: f64 = (0..n).map(|s| a.at(s, z) * deta.at(s, x)).sum();
        -dfa.get(ix) / 3.0 + eta.comps()[z] * d_y_ax / 6.0 - 0.5 * eta.comps()[y] * d_az_x
    });
    Ok(relative_residual(&lhs, &rhs))
}

/// `N⁽⁵⁾`, `N_A^wac` and `dη` at a point.
#[derive(Debug, Clone)]
pub struct SpecialTensors {
    pub n5: TensorValue,
    pub nwac: TensorValue,
    pub deta: TensorValue,
}

pub fn special_tensors(provider: &FieldProvider, point: &[f64]) -> Result<SpecialTensors, StructureError> {
    special_tensors_at(&PointGeometry::new(provider, point)?)
}

pub fn special_tensors_at(pg: &PointGeometry) -> Result<SpecialTensors, StructureError> {
    let what = "special tensors";
    require(&pg.q, "Q", what)?;
    require(&pg.xi, "xi", what)?;
    require(&pg.eta, "eta", what)?;
    Ok(SpecialTensors {
        n5: pg.n5().expect("Q present"),
        nwac: pg.nwac().expect("eta present"),
        deta: pg.deta().expect("eta present"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin, sample_points};

    fn provider(d: &str) -> FieldProvider {
        FieldProvider::new(builtin(d).unwrap())
    }

    #[test]
    fn flat_kahler_is_weak_hermitian() {
        let p = provider("flat_kahler(4)");
        let r = check_axioms(&p, AxiomKind::WeakHermitian, &[0.1, 0.2, -0.3, 0.0]).unwrap();
        assert_eq!(r.max_residual(), 0.0);
        assert_eq!(r.q_min_eigenvalue, 1.0);
    }

    #[test]
    fn line_product_s6_is_weak_acm() {
        let p = provider("line_product(s6)");
        for pt in sample_points(&p.spec().domain, 8, 7) {
            let r = check_axioms(&p, AxiomKind::WeakAcm, &pt).unwrap();
            assert!(r.max_residual() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn contact_kind_needs_xi() {
        let p = provider("flat_kahler(4)");
        assert!(matches!(
            check_axioms(&p, AxiomKind::WeakAcm, &[0.0; 4]),
            Err(StructureError::MissingField { field: "xi", .. })
        ));
    }

    #[test]
    fn hermitian_spec_is_not_para() {
        let p = provider("flat_kahler(4)");
        let r = check_axioms(&p, AxiomKind::WeakParaHermitian, &[0.0; 4]).unwrap();
        assert!(r.get("a_squared").unwrap() > 0.5);
    }

    #[test]
    fn weighted_product_axioms_hold() {
        let p = provider("weighted_product([t2,t2],[1,4])");
        let r = check_axioms(&p, AxiomKind::WeakHermitian, &[0.5, 1.0, 2.0, 3.0]).unwrap();
        assert!(r.max_residual() < 1e-14);
        assert!((r.q_min_eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearly_kahler_on_models() {
        let flat = provider("flat_kahler(4)");
        assert_eq!(nearly_kahler_residual(&flat, &[0.1, 0.2, 0.3, 0.4]).unwrap(), 0.0);
        let s6 = provider("s6");
        let mut strength = 0.0f64;
        for pt in sample_points(&s6.spec().domain, 16, 42) {
            assert!(nearly_kahler_residual(&s6, &pt).unwrap() < 1e-9);
            let pg = PointGeometry::new(&s6, &pt).unwrap();
            strength = strength.max(pg.lc_nabla_a_form().sup_norm());
        }
        assert!(strength > 0.1);
    }

    #[test]
    fn anc_on_line_products() {
        let flat = provider("line_product(flat_kahler(4))");
        assert_eq!(anc_residual(&flat, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap(), 0.0);
        let s6 = provider("line_product(s6)");
        for pt in sample_points(&s6.spec().domain, 8, 42) {
            assert!(anc_residual(&s6, &pt).unwrap() < 1e-8);
        }
        let herm = provider("flat_kahler(4)");
        assert!(anc_residual(&herm, &[0.0; 4]).is_err());
    }

    #[test]
    fn special_tensors_vanish_on_flat_line_product() {
        let p = provider("line_product(flat_kahler(4))");
        let s = special_tensors(&p, &[0.3, 0.1, -0.2, 0.4, 0.0]).unwrap();
        assert_eq!(s.n5.sup_norm(), 0.0);
        assert_eq!(s.nwac.sup_norm(), 0.0);
        assert_eq!(s.deta.sup_norm(), 0.0);
    }

    #[test]
    fn n5_vanishes_when_q_is_identity() {
        let p = provider("line_product(s6)");
        let s = special_tensors(&p, &[0.2, 0.1, -0.1, 0.05, 0.2, 0.0, -0.15]).unwrap();
        assert_eq!(s.n5.sup_norm(), 0.0);
        assert!(s.nwac.sup_norm() > 0.1);
    }
}
