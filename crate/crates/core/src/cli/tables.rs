//! Serializable outputs of the `connection`, `basis` and `split` commands.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::einstein::einstein_gamma;
use crate::fields::{FieldError, FieldProvider};
use crate::geometry::{christoffel, exterior_derivative, torsion_of, GeometryError};
use crate::structures::{AQBasis, InvolutivityResidual, SpectralSplit, StructureError};
use crate::tensor::TensorValue;

/// Entries below this magnitude are left out of text tables.
const PRINT_FLOOR: f64 = 1e-14;

type Cube = Vec<Vec<Vec<f64>>>;

fn cube(t: &TensorValue) -> Cube {
    let n = t.dim();
    (0..n)
        .map(|a| (0..n).map(|b| (0..n).map(|c| t.get(&[a, b, c])).collect()).collect())
        .collect()
}

fn cube_text(out: &mut String, title: &str, indices: &str, c: &Cube) {
    let _ = writeln!(out, "{title}");
    let mut any = false;
    for (a, plane) in c.iter().enumerate() {
        for (b, row) in plane.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if v.abs() >= PRINT_FLOOR {
                    let _ = writeln!(out, "  {indices}[{a},{b},{k}] = {v:+.12e}");
                    any = true;
                }
            }
        }
    }
    if !any {
        let _ = writeln!(out, "  (all zero)");
    }
}

fn point_text(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

/// Connection data at one point in local coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionTable {
    pub spec: String,
    pub point: Vec<f64>,
    /// `Γᵍ^k_ij` at `[k][i][j]`.
    pub levi_civita: Cube,
    /// `Γ^k_ij` of the skew-torsion Einstein connection.
    pub einstein: Cube,
    /// `T_ijk`.
    pub torsion: Cube,
    /// `K_ijk = g(∇_i ∂_j − ∇ᵍ_i ∂_j, ∂_k)`.
    pub contorsion: Cube,
    /// `dF_ijk`.
    pub df: Cube,
}

pub fn connection_table(provider: &FieldProvider, point: &[f64]) -> Result<ConnectionTable, GeometryError> {
    if !provider.spec().contains(point) {
        return Err(FieldError::OutsideDomain { point: point.to_vec() }.into());
    }
    let fj = provider.jets(point, 1)?;
    let g = fj.g.value();
    let lc = christoffel(&fj.g, &fj.g_inv).value();
    let gamma = einstein_gamma(&fj).value();
    let (_, torsion) = torsion_of(&gamma, &g);
    let contorsion = gamma.sub(&lc).lower_last(0, &g);
    Ok(ConnectionTable {
        spec: provider.spec().identity(),
        point: point.to_vec(),
        levi_civita: cube(&lc),
        einstein: cube(&gamma),
        torsion: cube(&torsion),
        contorsion: cube(&contorsion),
        df: cube(&exterior_derivative(&fj.f).value()),
    })
}

impl ConnectionTable {
    pub fn to_text(&self) -> String {
        let mut out = format!("spec  {}\npoint {}\n\n", self.spec, point_text(&self.point));
        cube_text(&mut out, "Levi-Civita  Γᵍ^k_ij", "Γᵍ", &self.levi_civita);
        cube_text(&mut out, "Einstein     Γ^k_ij", "Γ", &self.einstein);
        cube_text(&mut out, "torsion      T_ijk", "T", &self.torsion);
        cube_text(&mut out, "contorsion   K_ijk", "K", &self.contorsion);
        cube_text(&mut out, "exterior derivative dF_ijk", "dF", &self.df);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub spec: String,
    pub point: Vec<f64>,
    pub eigenvalues: Vec<Eigenvalue>,
    pub pairs: usize,
    pub pair_eigenvalues: Vec<f64>,
    pub kernel_eigenvalues: Vec<f64>,
    /// Chart components of each basis vector.
    pub vectors: Vec<Vec<f64>>,
    pub residual: Option<f64>,
    pub tol: f64,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BasisReport {
    pub fn from_basis(provider: &FieldProvider, b: AQBasis, tol: f64) -> Result<BasisReport, StructureError> {
        let pt = &b.point;
        let (g, a, q) = (
            provider.value("g", pt)?,
            provider.value("A", pt)?,
            provider.value("Q", pt)?,
        );
        let residual = b.residual(&g, &a, &q);
        Ok(BasisReport {
            spec: provider.spec().identity(),
            point: b.point.clone(),
            eigenvalues: b
                .eigenvalues
                .iter()
                .map(|&(value, multiplicity)| Eigenvalue { value, multiplicity })
                .collect(),
            pairs: b.pairs,
            pair_eigenvalues: b.pair_eigenvalues,
            kernel_eigenvalues: b.kernel_eigenvalues,
            vectors: b.vectors,
            residual: Some(residual),
            tol,
            verdict: if residual <= tol { "pass" } else { "fail" }.into(),
            note: None,
        })
    }

    pub fn failed(provider: &FieldProvider, point: &[f64], tol: f64, e: &StructureError) -> BasisReport {
        BasisReport {
            spec: provider.spec().identity(),
            point: point.to_vec(),
            eigenvalues: Vec::new(),
            pairs: 0,
            pair_eigenvalues: Vec::new(),
            kernel_eigenvalues: Vec::new(),
            vectors: Vec::new(),
            residual: None,
            tol,
            verdict: "fail".into(),
            note: Some(e.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("spec  {}\npoint {}\n", self.spec, point_text(&self.point));
        if let Some(note) = &self.note {
            let _ = writeln!(out, "fail: {note}");
            return out;
        }
        let _ = writeln!(out, "eigenvalues of Q:");
        for e in &self.eigenvalues {
            let _ = writeln!(out, "  {:.12} (multiplicity {})", e.value, e.multiplicity);
        }
        let _ = writeln!(
            out,
            "basis ({} pairs, {} kernel):",
            self.pairs,
            self.kernel_eigenvalues.len()
        );
        for (i, v) in self.vectors.iter().enumerate() {
            let label = if i < 2 * self.pairs {
                format!("{}{}", if i % 2 == 0 { "e" } else { "Ae" }, i / 2 + 1)
            } else {
                format!("xi{}", i - 2 * self.pairs + 1)
            };
            let comps: Vec<String> = v.iter().map(|x| format!("{x:+.9}")).collect();
            let _ = writeln!(out, "  {label:<5} [{}]", comps.join(", "));
        }
        let _ = writeln!(
            out,
            "residual {:.3e} (tol {:e}): {}",
            self.residual.unwrap_or(f64::NAN),
            self.tol,
            self.verdict
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// Largest bracket residual over the samples.
    pub bracket: f64,
    /// Largest totally-geodesic residual over the samples.
    pub geodesic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub spec: String,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub k: usize,
    pub kernel_dim: usize,
    pub spread: Option<f64>,
    pub distributions: Vec<Distribution>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SplitReport {
    pub fn from_split(
        provider: &FieldProvider,
        split: &SpectralSplit,
        rows: &[Vec<InvolutivityResidual>],
        seed: u64,
        tol: f64,
    ) -> SplitReport {
        let distributions: Vec<Distribution> = (0..split.k())
            .map(|i| Distribution {
                eigenvalue: split.eigenvalues[i],
                multiplicity: split.multiplicities[i],
                bracket: rows.iter().fold(0.0f64, |m, r| m.max(r[i].bracket)),
                geodesic: rows.iter().fold(0.0f64, |m, r| m.max(r[i].geodesic)),
            })
            .collect();
        let ok = split.spread <= tol && distributions.iter().all(|d| d.bracket <= tol && d.geodesic <= tol);
        SplitReport {
            spec: provider.spec().identity(),
            points: split.samples,
            seed,
            tol,
            k: split.k(),
            kernel_dim: split.kernel_dim,
            spread: Some(split.spread),
            distributions,
            verdict: if ok { "pass" } else { "fail" }.into(),
            note: None,
        }
    }

    pub fn failed(provider: &FieldProvider, points: usize, seed: u64, tol: f64, e: &StructureError) -> SplitReport {
        let spread = match e {
            StructureError::NonConstant { spread, .. } => Some(*spread),
            _ => None,
        };
        SplitReport {
            spec: provider.spec().identity(),
            points,
            seed,
            tol,
            k: 0,
            kernel_dim: 0,
            spread,
            distributions: Vec::new(),
            verdict: "fail".into(),
            note: Some(e.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "spec   {}\npoints {}  seed {}  tol {:e}\n",
            self.spec, self.points, self.seed, self.tol
        );
        if let Some(note) = &self.note {
            let _ = writeln!(out, "fail: {note}");
            return out;
        }
        let _ = writeln!(
            out,
            "k = {}  kernel dim {}  spread {:.3e}",
            self.k,
            self.kernel_dim,
            self.spread.unwrap_or(f64::NAN)
        );
        for d in &self.distributions {
            let _ = writeln!(
                out,
                "  lambda {:.12}  mult {}  bracket {:.3e}  geodesic {:.3e}",
                d.eigenvalue, d.multiplicity, d.bracket, d.geodesic
            );
        }
        let _ = writeln!(out, "{}", self.verdict);
        out
    }
}
