//! Manifold specifications, their JSON form, and field providers that
//! evaluate every named field (with exact partials) at chart points.

mod builtins;
mod provider;
mod sample;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::{parse_expr, EvalError, Expr, ParseError};

pub use builtins::{builtin, Builtin, BuiltinParseError};
pub use provider::{FieldJets, FieldProvider, TensorJet};
pub use sample::sample_points;

/// Default half-width of the chart domain box.
pub const DEFAULT_DOMAIN: (f64, f64) = (-0.8, 0.8);

/// Seed of the 8 spot-check points run by [`ManifoldSpec::validate`].
const SPOT_CHECK_SEED: u64 = 0x5eed;
const SPOT_CHECK_POINTS: usize = 8;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("field {field}[{index}]: {source}")]
    Parse {
        field: String,
        index: String,
        source: ParseError,
    },
    #[error("evaluating {field}: {source}")]
    Eval { field: String, source: EvalError },
    #[error("metric g is degenerate at {point:?} (condition estimate {condition:e})")]
    DegenerateMetric { point: Vec<f64>, condition: f64 },
    #[error("embedding is rank deficient at {point:?} (Gram determinant {gram_det:e})")]
    RankDeficient { point: Vec<f64>, gram_det: f64 },
    #[error("ambient endomorphism does not preserve tangent spaces at {point:?} (normal residual {residual:e})")]
    NotTangent { point: Vec<f64>, residual: f64 },
    #[error("eta(xi) = {value} at {point:?}, expected 1")]
    EtaXi { point: Vec<f64>, value: f64 },
    #[error("point {point:?} lies outside the domain box")]
    OutsideDomain { point: Vec<f64> },
    #[error("field `{0}` is not available")]
    MissingField(String),
    #[error("builtin: {0}")]
    Builtin(String),
    #[error(transparent)]
    BuiltinSyntax(#[from] BuiltinParseError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Chart,
    Embedded,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Chart => "chart",
            Backend::Embedded => "embedded",
        })
    }
}

/// Row-major square matrix of expressions; `rows[r][c]`.
pub type ExprMatrix = Vec<Vec<Expr>>;

/// How the chart backend receives the metric.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// Full `G`; `g` and `F` are its symmetric and skew parts.
    Full(ExprMatrix),
    Split {
        g: ExprMatrix,
        f: ExprMatrix,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub ambient_dim: usize,
    /// `φ`: chart variables to ambient coordinates.
    pub map: Vec<Expr>,
    /// `A_amb` over ambient coordinates, row `k` column `j` = `A^k_j`.
    pub a_ambient: ExprMatrix,
}

/// Optional structure fields, all given in chart coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Structure {
    pub a: Option<ExprMatrix>,
    pub q: Option<ExprMatrix>,
    pub xi: Option<Vec<Expr>>,
    pub eta: Option<Vec<Expr>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub name: String,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    /// `Some` for the chart backend.
    pub metric: Option<Metric>,
    /// `Some` for the embedded backend.
    pub embedding: Option<Embedding>,
    pub structure: Structure,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dim: usize,
    backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    fields: FieldsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<EmbeddingDoc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldsDoc {
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    big_g: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<Vec<Vec<String>>>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    f: Option<Vec<Vec<String>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<String>>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingDoc {
    ambient_dim: usize,
    map: Vec<String>,
    #[serde(rename = "A_ambient")]
    a_ambient: Vec<Vec<String>>,
}

fn parse_matrix(field: &str, rows: &[Vec<String>], n: usize, vars: usize) -> Result<ExprMatrix, FieldError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(FieldError::Schema(format!("{field} must be a {n}x{n} matrix")));
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, s)| {
                    parse_expr(s, vars).map_err(|source| FieldError::Parse {
                        field: field.to_string(),
                        index: format!("{r}][{c}"),
                        source,
                    })
                })
                .collect()
        })
        .collect()
}

fn parse_vector(field: &str, items: &[String], n: usize, vars: usize) -> Result<Vec<Expr>, FieldError> {
    if items.len() != n {
        return Err(FieldError::Schema(format!("{field} must have {n} entries")));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, s)| {
            parse_expr(s, vars).map_err(|source| FieldError::Parse {
                field: field.to_string(),
                index: i.to_string(),
                source,
            })
        })
        .collect()
}

fn print_matrix(m: &ExprMatrix) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
}

fn print_vector(v: &[Expr]) -> Vec<String> {
    v.iter().map(|e| e.to_string()).collect()
}

impl ManifoldSpec {
    /// Parse and validate a JSON spec document.
    pub fn from_json(text: &str) -> Result<ManifoldSpec, FieldError> {
        let doc: SpecDoc = serde_json::from_str(text)?;
        let spec = ManifoldSpec::from_doc(doc)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<ManifoldSpec, FieldError> {
        ManifoldSpec::from_json(&std::fs::read_to_string(path)?)
    }

    fn from_doc(doc: SpecDoc) -> Result<ManifoldSpec, FieldError> {
        let n = doc.dim;
        if n == 0 {
            return Err(FieldError::Schema("dim must be at least 1".into()));
        }
        let domain = match doc.domain {
            Some(d) => {
                if d.len() != n {
                    return Err(FieldError::Schema(format!("domain must have {n} intervals")));
                }
                d.into_iter().map(|[lo, hi]| (lo, hi)).collect()
            }
            None => vec![DEFAULT_DOMAIN; n],
        };
        let fd = doc.fields;
        let structure = Structure {
            a: fd.a.as_deref().map(|m| parse_matrix("A", m, n, n)).transpose()?,
            q: fd.q.as_deref().map(|m| parse_matrix("Q", m, n, n)).transpose()?,
            xi: fd.xi.as_deref().map(|v| parse_vector("xi", v, n, n)).transpose()?,
            eta: fd.eta.as_deref().map(|v| parse_vector("eta", v, n, n)).transpose()?,
        };
        let (metric, embedding) = match doc.backend.as_str() {
            "chart" => {
                if doc.embedding.is_some() {
                    return Err(FieldError::Schema("chart backend takes no embedding".into()));
                }
                let metric = match (fd.big_g, fd.g, fd.f) {
                    (Some(big), None, None) => Metric::Full(parse_matrix("G", &big, n, n)?),
                    (None, Some(g), Some(f)) => Metric::Split {
                        g: parse_matrix("g", &g, n, n)?,
                        f: parse_matrix("F", &f, n, n)?,
                    },
                    (Some(_), _, _) => return Err(FieldError::Schema("give either G or (g, F), not both".into())),
                    _ => return Err(FieldError::Schema("chart backend needs G or both g and F".into())),
                };
                (Some(metric), None)
            }
            "embedded" => {
                if fd.big_g.is_some() || fd.g.is_some() || fd.f.is_some() {
                    return Err(FieldError::Schema(
                        "embedded backend induces g and F; do not give them".into(),
                    ));
                }
                let e = doc
                    .embedding
                    .ok_or_else(|| FieldError::Schema("embedded backend needs an embedding".into()))?;
                let m = e.ambient_dim;
                if m < n {
                    return Err(FieldError::Schema("ambient_dim must be at least dim".into()));
                }
                let emb = Embedding {
                    ambient_dim: m,
                    map: parse_vector("embedding.map", &e.map, m, n)?,
                    a_ambient: parse_matrix("embedding.A_ambient", &e.a_ambient, m, m)?,
                };
                (None, Some(emb))
            }
            other => return Err(FieldError::Schema(format!("unknown backend `{other}`"))),
        };
        Ok(ManifoldSpec {
            name: doc.name.unwrap_or_else(|| "spec".to_string()),
            dim: n,
            domain,
            metric,
            embedding,
            structure,
        })
    }

    fn to_doc(&self) -> SpecDoc {
        let mut fields = FieldsDoc {
            a: self.structure.a.as_ref().map(print_matrix),
            q: self.structure.q.as_ref().map(print_matrix),
            xi: self.structure.xi.as_deref().map(print_vector),
            eta: self.structure.eta.as_deref().map(print_vector),
            ..FieldsDoc::default()
        };
        match &self.metric {
            Some(Metric::Full(g)) => fields.big_g = Some(print_matrix(g)),
            Some(Metric::Split { g, f }) => {
                fields.g = Some(print_matrix(g));
                fields.f = Some(print_matrix(f));
            }
            None => {}
        }
        SpecDoc {
            name: Some(self.name.clone()),
            dim: self.dim,
            backend: self.backend().to_string(),
            domain: Some(self.domain.iter().map(|&(lo, hi)| [lo, hi]).collect()),
            fields,
            embedding: self.embedding.as_ref().map(|e| EmbeddingDoc {
                ambient_dim: e.ambient_dim,
                map: print_vector(&e.map),
                a_ambient: print_matrix(&e.a_ambient),
            }),
        }
    }

    /// Self-contained, deterministic JSON document.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_doc()).expect("spec serializes");
        s.push('\n');
        s
    }

    /// `name@sha256[..16]` of the canonical document.
    pub fn identity(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        format!("{}@{}", self.name, &hex::encode(digest)[..16])
    }

    pub fn backend(&self) -> Backend {
        if self.embedding.is_some() {
            Backend::Embedded
        } else {
            Backend::Chart
        }
    }

    pub fn has_contact(&self) -> bool {
        self.structure.xi.is_some() && self.structure.eta.is_some()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim && point.iter().zip(&self.domain).all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }

    /// Structural checks plus invariant spot checks at 8 seeded points.
    pub fn validate(&self) -> Result<(), FieldError> {
        let n = self.dim;
        if self.domain.len() != n {
            return Err(FieldError::Schema(format!("domain must have {n} intervals")));
        }
        for &(lo, hi) in &self.domain {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(FieldError::Schema(format!("bad domain interval [{lo}, {hi}]")));
            }
        }
        match (&self.metric, &self.embedding) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(FieldError::Schema("exactly one of metric or embedding".into())),
        }
        if self.structure.xi.is_some() != self.structure.eta.is_some() {
            return Err(FieldError::Schema("xi and eta must be given together".into()));
        }
        let provider = FieldProvider::new(self.clone());
        for p in sample_points(&self.domain, SPOT_CHECK_POINTS, SPOT_CHECK_SEED) {
            provider.spot_check(&p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"{
        "dim": 4, "backend": "chart",
        "fields": {
            "g": [["1","0","0","0"],["0","1","0","0"],["0","0","1","0"],["0","0","0","1"]],
            "F": [["0","1","0","0"],["-1","0","0","0"],["0","0","0","1"],["0","0","-1","0"]]
        }
    }"#;

    #[test]
    fn loads_flat_document() {
        let s = ManifoldSpec::from_json(FLAT).unwrap();
        assert_eq!(s.dim, 4);
        assert_eq!(s.backend(), Backend::Chart);
        assert_eq!(s.domain, vec![DEFAULT_DOMAIN; 4]);
    }

    #[test]
    fn missing_metric_is_schema_error() {
        let doc = r#"{"dim": 2, "backend": "chart", "fields": {}}"#;
        assert!(matches!(ManifoldSpec::from_json(doc), Err(FieldError::Schema(_))));
        let doc = r#"{"dim": 2, "backend": "chart", "fields": {"g": [["1","0"],["0","1"]]}}"#;
        assert!(matches!(ManifoldSpec::from_json(doc), Err(FieldError::Schema(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = r#"{"dim": 1, "backend": "chart", "fields": {"G": [["1"]]}, "extra": 1}"#;
        assert!(matches!(ManifoldSpec::from_json(doc), Err(FieldError::Json(_))));
    }

    #[test]
    fn parse_errors_name_the_entry() {
        let doc = r#"{"dim": 1, "backend": "chart", "fields": {"G": [["1 + x1"]]}}"#;
        match ManifoldSpec::from_json(doc) {
            Err(FieldError::Parse { field, index, .. }) => {
                assert_eq!(field, "G");
                assert_eq!(index, "0][0");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let doc = r#"{"dim": 2, "backend": "chart", "fields": {"G": [["1","1"],["1","1"]]}}"#;
        assert!(matches!(
            ManifoldSpec::from_json(doc),
            Err(FieldError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn eta_xi_normalization_is_checked() {
        let doc = r#"{"dim": 1, "backend": "chart", "fields": {"G": [["1"]], "xi": ["2"], "eta": ["1"]}}"#;
        assert!(matches!(ManifoldSpec::from_json(doc), Err(FieldError::EtaXi { .. })));
    }

    #[test]
    fn rank_deficient_embedding_is_rejected() {
        let doc = r#"{"dim": 2, "backend": "embedded",
            "embedding": {"ambient_dim": 2, "map": ["x0 + x1", "2*x0 + 2*x1"],
                          "A_ambient": [["0","0"],["0","0"]]}}"#;
        assert!(matches!(
            ManifoldSpec::from_json(doc),
            Err(FieldError::RankDeficient { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let s = ManifoldSpec::from_json(FLAT).unwrap();
        let text = s.to_json();
        let back = ManifoldSpec::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.identity(), s.identity());
    }
}
