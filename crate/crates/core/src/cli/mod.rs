//! Command-line front end. Every subcommand is a thin shell over library
//! calls; [`run`] returns the process exit code.
//!
//! Exit codes: `0` pass, `1` an identity or structural check failed, `2` error.

mod tables;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::fields::{builtin, FieldError, FieldProvider, ManifoldSpec};
use crate::geometry::GeometryError;
use crate::structures::{aq_basis, involutivity_residual, spectral_split, StructureError};
use crate::verify::{run_suite, RunOptions, Suite, VerifyError, DEFAULT_POINTS, DEFAULT_SEED, DEFAULT_TOL};

pub use tables::{connection_table, BasisReport, ConnectionTable, SplitReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0}")]
    Usage(String),
    #[error("loading {path}: {source}")]
    Load { path: String, source: FieldError },
    #[error("writing {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

#[derive(Debug, Parser)]
#[command(
    name = "genriem",
    version,
    about = "Einstein connections and weak structures on generalized Riemannian manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a builtin manifold spec as JSON.
    Generate(GenerateArgs),
    /// Run an identity suite over sampled points.
    Verify(VerifyArgs),
    /// Connection coefficients, torsion, contorsion and dF at a point.
    Connection(PointArgs),
    /// Adapted basis diagonalizing Q and block-diagonalizing A at a point.
    Basis(PointArgs),
    /// Eigen-distributions of Q and their involutivity.
    Split(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Spec document (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Builtin descriptor, e.g. `s6` or `line_product(s6)`.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Builtin name or full descriptor.
    name: String,
    /// Real dimension for `flat_kahler` / `flat_torus_kahler`.
    #[arg(long)]
    dim: Option<usize>,
    /// Radius for `round_s2`.
    #[arg(long)]
    radius: Option<f64>,
    /// Factors for `weighted_product`, comma separated.
    #[arg(long)]
    factors: Option<String>,
    /// Weights for `weighted_product`, comma separated.
    #[arg(long)]
    weights: Option<String>,
    /// Base for `line_product`.
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "all")]
    suite: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    source: Source,
    /// Chart point, comma separated; the domain centre when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Generate(a) => {
            let spec = builtin(&generate_descriptor(&a)?)?;
            emit(stdout, a.out.as_ref(), &spec.to_json())?;
            Ok(EXIT_PASS)
        }
        Command::Verify(a) => {
            let spec = load(&a.source)?;
            let suite: Suite = a.suite.parse().map_err(CliError::Usage)?;
            let opts = RunOptions {
                points: a.common.points,
                seed: a.common.seed,
                tol: a.common.tol,
            };
            let report = run_suite(&spec, suite, &opts)?;
            let body = match a.common.format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            emit(stdout, a.common.out.as_ref(), &body)?;
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Connection(a) => {
            let spec = load(&a.source)?;
            let point = resolve_point(&spec, a.point)?;
            let provider = FieldProvider::new(spec);
            let table = connection_table(&provider, &point)?;
            let body = match a.common.format {
                Format::Json => json(&table),
                Format::Text => table.to_text(),
            };
            emit(stdout, a.common.out.as_ref(), &body)?;
            Ok(EXIT_PASS)
        }
        Command::Basis(a) => {
            let spec = load(&a.source)?;
            let point = resolve_point(&spec, a.point)?;
            let provider = FieldProvider::new(spec);
            let report = match aq_basis(&provider, &point) {
                Ok(b) => BasisReport::from_basis(&provider, b, a.common.tol)?,
                Err(e) if is_structural(&e) => BasisReport::failed(&provider, &point, a.common.tol, &e),
                Err(e) => return Err(e.into()),
            };
            let body = match a.common.format {
                Format::Json => json(&report),
                Format::Text => report.to_text(),
            };
            emit(stdout, a.common.out.as_ref(), &body)?;
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Split(a) => {
            let spec = load(&a.source)?;
            if a.common.points == 0 {
                return Err(CliError::Usage("--points must be positive".into()));
            }
            let provider = FieldProvider::new(spec);
            let points = crate::fields::sample_points(&provider.spec().domain, a.common.points, a.common.seed);
            let report = match spectral_split(&provider, &points) {
                Ok(split) => {
                    let mut rows = Vec::with_capacity(points.len());
                    for p in &points {
                        rows.push(involutivity_residual(&split, &provider, p)?);
                    }
                    SplitReport::from_split(&provider, &split, &rows, a.common.seed, a.common.tol)
                }
                Err(e) if is_structural(&e) => {
                    SplitReport::failed(&provider, points.len(), a.common.seed, a.common.tol, &e)
                }
                Err(e) => return Err(e.into()),
            };
            let body = match a.common.format {
                Format::Json => json(&report),
                Format::Text => report.to_text(),
            };
            emit(stdout, a.common.out.as_ref(), &body)?;
            Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn is_structural(e: &StructureError) -> bool {
    !matches!(
        e,
        StructureError::Geometry(_) | StructureError::MissingField { .. } | StructureError::NoSamples
    )
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn load(source: &Source) -> Result<ManifoldSpec, CliError> {
    match (&source.spec, &source.builtin) {
        (Some(path), None) => ManifoldSpec::load(path).map_err(|source| CliError::Load {
            path: path.display().to_string(),
            source,
        }),
        (None, Some(d)) => Ok(builtin(d)?),
        _ => Err(CliError::Usage("exactly one of --spec / --builtin is required".into())),
    }
}

fn resolve_point(spec: &ManifoldSpec, point: Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let point = point.unwrap_or_else(|| spec.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect());
    if point.len() != spec.dim {
        return Err(CliError::Usage(format!(
            "--point has {} coordinates, spec dimension is {}",
            point.len(),
            spec.dim
        )));
    }
    if !spec.contains(&point) {
        return Err(FieldError::OutsideDomain { point }.into());
    }
    Ok(point)
}

/// Split at top-level commas only, so `flat_kahler(2),s6` has two items.
fn split_top_level(list: &str) -> Vec<String> {
    let mut items = Vec::new();
    let (mut depth, mut cur) = (0i32, String::new());
    for ch in list.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                items.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        items.push(cur.trim().to_string());
    }
    items
}

fn generate_descriptor(a: &GenerateArgs) -> Result<String, CliError> {
    let name = a.name.trim();
    let unused = |flag: &str, set: bool| -> Result<(), CliError> {
        if set {
            Err(CliError::Usage(format!("--{flag} does not apply to {name}")))
        } else {
            Ok(())
        }
    };
    if name.contains('(') {
        unused("dim", a.dim.is_some())?;
        unused("radius", a.radius.is_some())?;
        unused("factors", a.factors.is_some())?;
        unused("weights", a.weights.is_some())?;
        unused("base", a.base.is_some())?;
        return Ok(name.to_string());
    }
    match name {
        "flat_kahler" | "flat_torus_kahler" => {
            unused("radius", a.radius.is_some())?;
            Ok(match a.dim {
                Some(d) => format!("{name}({d})"),
                None => name.to_string(),
            })
        }
        "round_s2" => {
            unused("dim", a.dim.is_some())?;
            Ok(match a.radius {
                Some(r) => format!("round_s2({r})"),
                None => name.to_string(),
            })
        }
        "weighted_product" => {
            let (Some(f), Some(w)) = (&a.factors, &a.weights) else {
                return Err(CliError::Usage("weighted_product needs --factors and --weights".into()));
            };
            Ok(format!(
                "weighted_product([{}], [{}])",
                split_top_level(f).join(", "),
                split_top_level(w).join(", ")
            ))
        }
        "line_product" => {
            let Some(b) = &a.base else {
                return Err(CliError::Usage("line_product needs --base".into()));
            };
            Ok(format!("line_product({b})"))
        }
        _ => {
            unused("dim", a.dim.is_some())?;
            unused("radius", a.radius.is_some())?;
            Ok(name.to_string())
        }
    }
}

fn emit(stdout: &mut dyn Write, out: Option<&PathBuf>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => stdout.write_all(body.as_bytes()).map_err(|source| CliError::Write {
            path: "stdout".into(),
            source,
        }),
    }
}
