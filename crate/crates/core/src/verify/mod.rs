//! Identity catalog and suite runner.
//!
//! Every identity is a residual evaluated on the coordinate frame at sampled
//! chart points; a suite aggregates max and mean residuals into a
//! [`VerificationReport`].

pub(crate) mod catalog;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{sample_points, FieldError, FieldProvider, ManifoldSpec};
use crate::geometry::GeometryError;
use crate::structures::{
    aq_basis, involutivity_residual, spectral_split, PointGeometry, SpectralSplit, StructureError,
};
use catalog::Residual;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_POINTS: usize = 64;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("identity `{0}` is not evaluated pointwise")]
    NotPointwise(&'static str),
    #[error("identity `{id}` is not applicable: {reason}")]
    NotApplicable { id: &'static str, reason: &'static str },
    #[error("at least one sample point is required")]
    NoPoints,
}

/// Fields an identity needs beyond `g`, `F` and `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Nothing,
    Q,
    Contact,
    ContactQ,
    /// `Q` on a spec without `ξ`, `η`.
    NonContactQ,
}

impl Needs {
    /// `None` when applicable, otherwise why not.
    pub fn skip_reason(self, spec: &ManifoldSpec) -> Option<&'static str> {
        let q = spec.structure.q.is_some();
        let contact = spec.has_contact();
        match self {
            Needs::Nothing => None,
            Needs::Q if !q => Some("spec has no Q"),
            Needs::Contact if !contact => Some("spec has no xi/eta"),
            Needs::ContactQ if !contact => Some("spec has no xi/eta"),
            Needs::ContactQ if !q => Some("spec has no Q"),
            Needs::NonContactQ if contact => Some("spec carries a Reeb field"),
            Needs::NonContactQ if !q => Some("spec has no Q"),
            _ => None,
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Eval {
    Point(fn(&PointGeometry) -> Residual),
    /// Cross-point constancy of the spectrum of `Q`.
    Spectral,
    Involutivity,
    Basis,
}

/// One catalog row.
#[derive(Clone, Copy)]
pub struct Identity {
    pub id: &'static str,
    pub label: &'static str,
    pub needs: Needs,
    pub(crate) eval: Eval,
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Identity")
            .field("id", &self.id)
            .field("needs", &self.needs)
            .finish()
    }
}

impl Identity {
    pub fn is_pointwise(&self) -> bool {
        matches!(self.eval, Eval::Point(_))
    }
}

macro_rules! row {
    ($id:literal, $needs:ident, $eval:expr, $label:literal) => {
        Identity {
            id: $id,
            label: $label,
            needs: Needs::$needs,
            eval: $eval,
        }
    };
}

use catalog as c;
use Eval::Point as P;

/// Every identity the engine checks, in report order.
pub static CATALOG: &[Identity] = &[
    row!(
        "emc",
        Nothing,
        P(c::emc),
        "Einstein metricity condition, coordinate form"
    ),
    row!(
        "emc_t",
        Nothing,
        P(c::emc_t),
        "metricity condition rewritten through the torsion"
    ),
    row!(
        "ein_g",
        Nothing,
        P(c::ein_g),
        "covariant derivative of g from the torsion"
    ),
    row!(
        "ein_f",
        Nothing,
        P(c::ein_f),
        "covariant derivative of F from the torsion, both displays"
    ),
    row!(
        "a_torsion",
        Nothing,
        P(c::a_torsion),
        "A-torsion condition T(AX,Y,Z) = T(X,AY,Z) = T(X,Y,AZ)"
    ),
    row!(
        "q_torsion",
        Q,
        P(c::q_torsion),
        "Q-torsion condition T(QX,Y,Z) = T(X,QY,Z) = T(X,Y,QZ)"
    ),
    row!(
        "skew1",
        Nothing,
        P(c::skew1),
        "existence criterion for the skew-torsion Einstein connection"
    ),
    row!(
        "ff2",
        Nothing,
        P(c::ff2),
        "Levi-Civita derivatives of F and A in terms of dF"
    ),
    row!(
        "tordf",
        Nothing,
        P(c::tordf),
        "skew torsion determined by dF: T = -dF/3"
    ),
    row!(
        "skew0_g",
        Nothing,
        P(c::skew0_g),
        "covariant derivative of g in terms of dF"
    ),
    row!(
        "skew0_f",
        Nothing,
        P(c::skew0_f),
        "covariant derivative of F in terms of dF"
    ),
    row!(
        "p27_nablaA",
        Nothing,
        P(c::p27_nabla_a),
        "Levi-Civita derivative of A equals minus the torsion; g parallel"
    ),
    row!(
        "p27_NA",
        Nothing,
        P(c::p27_na),
        "Nijenhuis tensor N_A(X,Y,Z) = 4/3 dF(X,Y,AZ)"
    ),
    row!(
        "nuj1_xcheck",
        Nothing,
        P(c::nuj1_xcheck),
        "Nijenhuis tensor through a torsionful connection"
    ),
    row!(
        "nujq_xcheck",
        Q,
        P(c::nujq_xcheck),
        "Nijenhuis tensor of Q through the connection"
    ),
    row!(
        "genconein_xcheck",
        Nothing,
        P(c::genconein_xcheck),
        "Einstein connection rebuilt from its torsion"
    ),
    row!(
        "contorsion_xcheck",
        Nothing,
        P(c::contorsion_xcheck),
        "contorsion of the Einstein connection in terms of dF"
    ),
    row!("wah", NonContactQ, P(c::wah), "weak almost Hermitian axioms"),
    row!("acm", ContactQ, P(c::acm), "weak almost contact metric axioms"),
    row!("para_h", NonContactQ, P(c::para_h), "weak almost para-Hermitian axioms"),
    row!(
        "para_c",
        ContactQ,
        P(c::para_c),
        "weak almost para-contact metric axioms"
    ),
    row!(
        "nk",
        Nothing,
        P(c::nk),
        "weak nearly Kaehler condition (Levi-Civita A-derivative skew)"
    ),
    row!("anc", Contact, P(c::anc), "almost nearly cosymplectic condition"),
    row!("reeb_geo", Contact, P(c::reeb_geo), "Reeb field is a geodesic field"),
    row!("reeb_kill", Contact, P(c::reeb_kill), "Reeb field is a Killing field"),
    row!(
        "deta_xi",
        Contact,
        P(c::deta_xi),
        "contact form derivative annihilates the Reeb field"
    ),
    row!(
        "reeb_parallel",
        Contact,
        P(c::reeb_parallel),
        "Reeb field parallel, d(eta) = 0, torsion kills the Reeb field"
    ),
    row!(
        "nablaQ_g",
        Q,
        P(c::nabla_q_lc),
        "Q parallel for the Levi-Civita connection"
    ),
    row!("nablaQ", Q, P(c::nabla_q), "Q parallel for the Einstein connection"),
    row!(
        "eq32",
        Nothing,
        P(c::eq32),
        "torsion against dF and the Nijenhuis tensor, ratio -1/4"
    ),
    row!(
        "mainw",
        ContactQ,
        P(c::mainw),
        "expansion of the Levi-Civita derivative of A for weak a.c.m. structures"
    ),
    row!("n51", ContactQ, P(c::n51), "tensor N5 in terms of dF, totally skew"),
    row!(
        "nwac_skew",
        Contact,
        P(c::nwac_skew),
        "tensor N_wac totally skew and vanishing on the Reeb field"
    ),
    row!(
        "skewacB1",
        Contact,
        P(c::skewac_b1),
        "tensor N_wac equals 4/3 dF(AX,Y,Z)"
    ),
    row!(
        "t38",
        Contact,
        P(c::t38),
        "nearly cosymplectic torsion and connection displays"
    ),
    row!(
        "spectral",
        Q,
        Eval::Spectral,
        "eigenvalues of Q constant with constant multiplicities"
    ),
    row!(
        "invol",
        Q,
        Eval::Involutivity,
        "eigen-distributions of Q involutive and totally geodesic"
    ),
    row!("aq_basis", Q, Eval::Basis, "adapted basis block-diagonalizing A and Q"),
];

pub fn lookup(id: &str) -> Option<&'static Identity> {
    CATALOG.iter().find(|e| e.id == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Emc,
    Hermitian,
    Acm,
    Para,
    Splitting,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Emc,
        Suite::Hermitian,
        Suite::Acm,
        Suite::Para,
        Suite::Splitting,
        Suite::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Emc => "emc",
            Suite::Hermitian => "hermitian",
            Suite::Acm => "acm",
            Suite::Para => "para",
            Suite::Splitting => "splitting",
            Suite::All => "all",
        }
    }

    /// Member ids in catalog order.
    pub fn ids(self) -> Vec<&'static str> {
        let members: &[&str] = match self {
            Suite::Emc => &[
                "emc",
                "emc_t",
                "ein_g",
                "ein_f",
                "skew1",
                "ff2",
                "tordf",
                "skew0_g",
                "skew0_f",
                "nuj1_xcheck",
                "genconein_xcheck",
                "contorsion_xcheck",
            ],
            Suite::Hermitian => &[
                "emc",
                "emc_t",
                "ein_g",
                "ein_f",
                "a_torsion",
                "q_torsion",
                "skew1",
                "ff2",
                "tordf",
                "skew0_g",
                "skew0_f",
                "p27_nablaA",
                "p27_NA",
                "nuj1_xcheck",
                "nujq_xcheck",
                "wah",
                "nk",
                "nablaQ_g",
                "nablaQ",
                "eq32",
            ],
            Suite::Acm => &[
                "emc",
                "a_torsion",
                "tordf",
                "acm",
                "anc",
                "reeb_geo",
                "reeb_kill",
                "deta_xi",
                "reeb_parallel",
                "nablaQ_g",
                "nablaQ",
                "mainw",
                "n51",
                "nwac_skew",
                "skewacB1",
                "t38",
            ],
            Suite::Para => &["para_h", "para_c"],
            Suite::Splitting => &["spectral", "invol", "aq_basis"],
            Suite::All => {
                let para = Suite::Para.ids();
                return CATALOG.iter().map(|e| e.id).filter(|id| !para.contains(id)).collect();
            }
        };
        CATALOG.iter().map(|e| e.id).filter(|id| members.contains(id)).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected emc, hermitian, acm, para, splitting or all)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skip => "skip",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub id: String,
    /// Human-readable statement of the identity.
    #[serde(rename = "paper_ref")]
    pub reference: String,
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub points: usize,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec: String,
    pub engine: String,
    pub suite: String,
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
    pub results: Vec<IdentityResult>,
}

impl VerificationReport {
    pub fn get(&self, id: &str) -> Option<&IdentityResult> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.results.iter().filter(|r| r.verdict == verdict).count()
    }

    /// No identity failed; skips do not count as failures.
    pub fn passed(&self) -> bool {
        self.count(Verdict::Fail) == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "spec   {}\nsuite  {}\npoints {}  seed {}  tol {:e}\n\n",
            self.spec, self.suite, self.points, self.seed, self.tol
        );
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        for r in &self.results {
            out.push_str(&format!(
                "{:<18} {:<4}  max {:>9}  mean {:>9}  {}\n",
                r.id,
                r.verdict,
                fmt_opt(r.max_residual),
                fmt_opt(r.mean_residual),
                r.reference
            ));
            if let Some(note) = &r.note {
                out.push_str(&format!("{:<18} note: {note}\n", ""));
            }
        }
        out.push_str(&format!(
            "\n{} passed, {} failed, {} skipped\n",
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Skip)
        ));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            points: DEFAULT_POINTS,
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
        }
    }
}

/// Residual of a pointwise identity at one chart point.
pub fn identity_residual(id: &str, provider: &FieldProvider, point: &[f64]) -> Result<f64, VerifyError> {
    let entry = lookup(id).ok_or_else(|| VerifyError::UnknownIdentity(id.to_string()))?;
    if let Some(reason) = entry.needs.skip_reason(provider.spec()) {
        return Err(VerifyError::NotApplicable { id: entry.id, reason });
    }
    let Eval::Point(f) = entry.eval else {
        return Err(VerifyError::NotPointwise(entry.id));
    };
    let pg = PointGeometry::new(provider, point)?;
    Ok(f(&pg)?)
}

/// Errors that describe the structure rather than a broken evaluation; they
/// turn into a failed verdict.
fn is_structural(e: &StructureError) -> bool {
    matches!(
        e,
        StructureError::NotPositive { .. }
            | StructureError::NotCommuting { .. }
            | StructureError::Multiplicity { .. }
            | StructureError::NearDegenerate { .. }
            | StructureError::NonConstant { .. }
            | StructureError::ClusterMismatch { .. }
    )
}

struct Outcome {
    residuals: Vec<f64>,
    note: Option<String>,
}

impl Outcome {
    fn of(residuals: Vec<f64>) -> Outcome {
        Outcome { residuals, note: None }
    }

    fn broken(residuals: Vec<f64>, e: &StructureError) -> Outcome {
        Outcome {
            residuals,
            note: Some(e.to_string()),
        }
    }
}

fn finish(entry: &Identity, outcome: Outcome, tol: f64) -> IdentityResult {
    let Outcome { residuals, mut note } = outcome;
    let finite = residuals.iter().all(|r| r.is_finite());
    let (max, mean) = if residuals.is_empty() || !finite {
        (None, None)
    } else {
        let max = residuals.iter().copied().fold(0.0f64, f64::max);
        let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        (Some(max), Some(mean))
    };
    if !finite {
        note.get_or_insert_with(|| "non-finite residual".to_string());
    }
    let verdict = match max {
        Some(m) if note.is_none() && m <= tol => Verdict::Pass,
        _ => Verdict::Fail,
    };
    IdentityResult {
        id: entry.id.to_string(),
        reference: entry.label.to_string(),
        max_residual: max,
        mean_residual: mean,
        points: residuals.len(),
        tolerance: tol,
        verdict,
        note,
    }
}

fn skipped(entry: &Identity, reason: &str, tol: f64) -> IdentityResult {
    IdentityResult {
        id: entry.id.to_string(),
        reference: entry.label.to_string(),
        max_residual: None,
        mean_residual: None,
        points: 0,
        tolerance: tol,
        verdict: Verdict::Skip,
        note: Some(reason.to_string()),
    }
}

/// Evaluate every id of `suite` at `opts.points` sampled points.
///
/// Ids whose fields are missing are skipped. Evaluation errors abort the
/// run; structural failures (non-constant spectrum, `[A, Q] ≠ 0`, ...) are
/// reported as failed verdicts with a note.
pub fn run_suite(spec: &ManifoldSpec, suite: Suite, opts: &RunOptions) -> Result<VerificationReport, VerifyError> {
    run_ids(spec, suite.name(), &suite.ids(), opts)
}

/// As [`run_suite`] for an explicit list of catalog ids.
pub fn run_ids(
    spec: &ManifoldSpec,
    suite: &str,
    ids: &[&str],
    opts: &RunOptions,
) -> Result<VerificationReport, VerifyError> {
    if opts.points == 0 {
        return Err(VerifyError::NoPoints);
    }
    let entries = ids
        .iter()
        .map(|id| lookup(id).ok_or_else(|| VerifyError::UnknownIdentity(id.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let provider = FieldProvider::new(spec.clone());
    let points = sample_points(&spec.domain, opts.points, opts.seed);
    let active: Vec<&Identity> = entries
        .iter()
        .copied()
        .filter(|e| e.needs.skip_reason(spec).is_none())
        .collect();

    let pointwise: Vec<(&str, fn(&PointGeometry) -> Residual)> = active
        .iter()
        .filter_map(|e| match e.eval {
            Eval::Point(f) => Some((e.id, f)),
            _ => None,
        })
        .collect();
    let per_point: Vec<Vec<f64>> = if pointwise.is_empty() {
        Vec::new()
    } else {
        points
            .par_iter()
            .map(|pt| -> Result<Vec<f64>, VerifyError> {
                let pg = PointGeometry::new(&provider, pt)?;
                pointwise
                    .iter()
                    .map(|(_, f)| f(&pg).map_err(VerifyError::from))
                    .collect()
            })
            .collect::<Result<_, _>>()?
    };

    let needs_split = active
        .iter()
        .any(|e| matches!(e.eval, Eval::Spectral | Eval::Involutivity));
    let split: Option<Result<SpectralSplit, StructureError>> = if needs_split {
        match spectral_split(&provider, &points) {
            Err(e) if !is_structural(&e) => return Err(e.into()),
            r => Some(r),
        }
    } else {
        None
    };

    let mut results = Vec::with_capacity(entries.len());
    for entry in &entries {
        if let Some(reason) = entry.needs.skip_reason(spec) {
            results.push(skipped(entry, reason, opts.tol));
            continue;
        }
        let outcome = match entry.eval {
            Eval::Point(_) => {
                let col = pointwise
                    .iter()
                    .position(|(id, _)| *id == entry.id)
                    .expect("pointwise id");
                Outcome::of(per_point.iter().map(|r| r[col]).collect())
            }
            Eval::Spectral => match split.as_ref().expect("split computed") {
                Ok(s) => Outcome::of(vec![s.spread]),
                Err(e) => {
                    let spread = match e {
                        StructureError::NonConstant { spread, .. } => vec![*spread],
                        _ => Vec::new(),
                    };
                    Outcome::broken(spread, e)
                }
            },
            Eval::Involutivity => match split.as_ref().expect("split computed") {
                Ok(s) => {
                    let rows = points
                        .par_iter()
                        .map(|pt| {
                            let r = involutivity_residual(s, &provider, pt)?;
                            Ok(r.iter().fold(0.0f64, |m, x| m.max(x.bracket).max(x.geodesic)))
                        })
                        .collect::<Result<Vec<f64>, StructureError>>()?;
                    Outcome::of(rows)
                }
                Err(e) => Outcome::broken(Vec::new(), e),
            },
            Eval::Basis => {
                let rows: Vec<Result<f64, StructureError>> = points
                    .par_iter()
                    .map(|pt| {
                        let b = aq_basis(&provider, pt)?;
                        let (g, a, q) = (
                            provider.value("g", pt)?,
                            provider.value("A", pt)?,
                            provider.value("Q", pt)?,
                        );
                        Ok(b.residual(&g, &a, &q))
                    })
                    .collect();
                let mut ok = Vec::with_capacity(rows.len());
                let mut first_err = None;
                for r in rows {
                    match r {
                        Ok(v) => ok.push(v),
                        Err(e) if is_structural(&e) => {
                            first_err.get_or_insert(e);
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                match first_err {
                    None => Outcome::of(ok),
                    Some(e) => Outcome::broken(ok, &e),
                }
            }
        };
        results.push(finish(entry, outcome, opts.tol));
    }

    Ok(VerificationReport {
        spec: spec.identity(),
        engine: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        suite: suite.to_string(),
        seed: opts.seed,
        points: opts.points,
        tol: opts.tol,
        results,
    })
}
