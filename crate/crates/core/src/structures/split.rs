use crate::expr::{Jet, Scalar};
use crate::fields::{FieldJets, FieldProvider, TensorJet};
use crate::geometry::{christoffel, lie_bracket};
use crate::tensor::{mat_mul_generic, TensorValue, Valence};

use super::eigen::{self_adjoint_eigenvalues, Mat};
use super::{StructureError, CLUSTER_TOL, MIN_GAP};

/// Constant eigenvalues of `Q` (of `Q − η⊗ξ` when a contact form is
/// present) with the Lagrange projectors onto their eigen-distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    /// Distinct nonzero eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Dimension of the `ξ` direction excluded from the split.
    pub kernel_dim: usize,
    pub contact: bool,
    /// Every interpolation node, including `0` for the kernel.
    pub nodes: Vec<f64>,
    /// Largest deviation of any eigenvalue from its cluster value over all
    /// samples.
    pub spread: f64,
    pub samples: usize,
}

impl SpectralSplit {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Monomial coefficients `c₀ + c₁Q + …` of `Pᵢ(Q) = Π_{j≠i}(Q − λⱼ)/(λᵢ − λⱼ)`.
    pub fn projector_coefficients(&self, i: usize) -> Vec<f64> {
        let li = self.eigenvalues[i];
        let mut coeffs = vec![1.0];
        for &lj in self.nodes.iter().filter(|&&l| l != li) {
            let d = li - lj;
            let mut next = vec![0.0; coeffs.len() + 1];
            for (p, c) in coeffs.iter().enumerate() {
                next[p + 1] += c / d;
                next[p] -= c * lj / d;
            }
            coeffs = next;
        }
        coeffs
    }

    /// `Pᵢ` evaluated on an effective `Q` given as jets.
    pub fn projector_jet(&self, i: usize, q_eff: &TensorJet) -> TensorJet {
        let n = q_eff.dim();
        let li = self.eigenvalues[i];
        let comps = q_eff.comps();
        let one = comps[0].constant_like(1.0);
        let zero = comps[0].constant_like(0.0);
        let mut acc: Vec<Jet> = (0..n * n)
            .map(|k| if k % (n + 1) == 0 { one.clone() } else { zero.clone() })
            .collect();
        for &lj in self.nodes.iter().filter(|&&l| l != li) {
            let factor: Vec<Jet> = (0..n * n)
                .map(|k| {
                    let c = if k % (n + 1) == 0 {
                        comps[k].minus(&one.scaled(lj))
                    } else {
                        comps[k].clone()
                    };
                    c.scaled(1.0 / (li - lj))
                })
                .collect();
            acc = mat_mul_generic(n, &acc, &factor);
        }
        TensorJet::new(n, Valence::new(1, 1), acc)
    }

    /// `Pᵢ` at a point.
    pub fn projector(&self, i: usize, provider: &FieldProvider, point: &[f64]) -> Result<TensorValue, StructureError> {
        let fj = provider.jets(point, 0)?;
        Ok(self.projector_jet(i, &effective_q(&fj, self.contact)?).value())
    }
}

/// `Q`, or `Q − η⊗ξ` for contact structures.
fn effective_q(fj: &FieldJets, contact: bool) -> Result<TensorJet, StructureError> {
    let q = fj.q.as_ref().ok_or(StructureError::MissingField {
        field: "Q",
        what: "spectral split",
    })?;
    if !contact {
        return Ok(q.clone());
    }
    let (xi, eta) = (fj.xi.as_ref().expect("contact"), fj.eta.as_ref().expect("contact"));
    let n = q.dim();
    let comps = (0..n * n)
        .map(|k| q.comps()[k].minus(&xi.comps()[k / n].times(&eta.comps()[k % n])))
        .collect();
    Ok(TensorJet::new(n, Valence::new(1, 1), comps))
}

fn cluster(values: &[f64]) -> Vec<(f64, usize, f64)> {
    // (mean, multiplicity, half-width)
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &v in values {
        match groups.last_mut() {
            Some(gr) if (v - gr[gr.len() - 1]).abs() <= CLUSTER_TOL => gr.push(v),
            _ => groups.push(vec![v]),
        }
    }
    groups
        .iter()
        .map(|gr| {
            let mean = gr.iter().sum::<f64>() / gr.len() as f64;
            let width = gr.iter().fold(0.0f64, |w, v| w.max((v - mean).abs()));
            (mean, gr.len(), width)
        })
        .collect()
}

/// Cluster the eigenvalues at every sample and require the same clusters
/// everywhere.
pub fn spectral_split(provider: &FieldProvider, points: &[Vec<f64>]) -> Result<SpectralSplit, StructureError> {
    let contact = provider.spec().has_contact();
    let mut reference: Option<Vec<(f64, usize, f64)>> = None;
    let mut spread = 0.0f64;
    for (s, pt) in points.iter().enumerate() {
        let fj = provider.jets(pt, 0)?;
        let q = effective_q(&fj, contact)?.value();
        let n = q.dim();
        let to_mat = |t: &TensorValue| Mat {
            n,
            data: t.comps().to_vec(),
        };
        let vals = self_adjoint_eigenvalues(&to_mat(&fj.g.value()), &to_mat(&q))?;
        let groups = cluster(&vals);
        match &reference {
            None => {
                for w in groups.windows(2) {
                    let gap = w[1].0 - w[0].0;
                    if gap < MIN_GAP {
                        return Err(StructureError::NearDegenerate {
                            a: w[0].0,
                            b: w[1].0,
                            gap,
                        });
                    }
                }
                spread = groups.iter().fold(0.0, |m, g| m.max(g.2));
                reference = Some(groups);
            }
            Some(r) => {
                let mult = |gs: &[(f64, usize, f64)]| gs.iter().map(|g| g.1).collect::<Vec<_>>();
                if mult(r) != mult(&groups) {
                    return Err(StructureError::ClusterMismatch {
                        sample: s,
                        expected: mult(r),
                        found: mult(&groups),
                    });
                }
                for (a, b) in r.iter().zip(&groups) {
                    let dev = (a.0 - b.0).abs() + b.2;
                    spread = spread.max(dev);
                    if dev > CLUSTER_TOL {
                        return Err(StructureError::NonConstant {
                            eigenvalue: a.0,
                            spread: dev,
                        });
                    }
                }
            }
        }
    }
    let groups = reference.ok_or(StructureError::NoSamples)?;
    let nodes: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let (kernel, rest): (Vec<&(f64, usize, f64)>, Vec<_>) =
        groups.iter().partition(|g| contact && g.0.abs() <= CLUSTER_TOL);
    Ok(SpectralSplit {
        eigenvalues: rest.iter().map(|g| g.0).collect(),
        multiplicities: rest.iter().map(|g| g.1).collect(),
        kernel_dim: kernel.iter().map(|g| g.1).sum(),
        contact,
        nodes,
        spread,
        samples: points.len(),
    })
}

/// Residuals for one eigen-distribution `Dᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvolutivityResidual {
    pub eigenvalue: f64,
    /// Component of `[Xᵢ, Yᵢ]` outside `Dᵢ`.
    pub bracket: f64,
    /// Component of `∇ᵍ_{Xᵢ} Yᵢ` outside `Dᵢ`.
    pub geodesic: f64,
}

fn column(p: &TensorJet, a: usize) -> TensorJet {
    let n = p.dim();
    TensorJet::new(
        n,
        Valence::new(1, 0),
        (0..n).map(|k| p.comps()[k * n + a].clone()).collect(),
    )
}

fn outside(p: &TensorValue, v: &[f64]) -> f64 {
    let pv = p.apply(v);
    v.iter().zip(&pv).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// For frame fields `Xᵢ = Pᵢ ∂_a`, `Yᵢ = Pᵢ ∂_b`, the parts of `[Xᵢ, Yᵢ]`
/// and `∇ᵍ_{Xᵢ}Yᵢ` outside `Dᵢ`, relative to `1 + ‖·‖∞`.
pub fn involutivity_residual(
    split: &SpectralSplit,
    provider: &FieldProvider,
    point: &[f64],
) -> Result<Vec<InvolutivityResidual>, StructureError> {
    let fj = provider.jets(point, 1)?;
    let n = fj.dim();
    let gamma = christoffel(&fj.g, &fj.g_inv).value();
    let q_eff = effective_q(&fj, split.contact)?;
    let mut out = Vec::with_capacity(split.k());
    for i in 0..split.k() {
        let p = split.projector_jet(i, &q_eff);
        let pv = p.value();
        let frames: Vec<TensorJet> = (0..n).map(|a| column(&p, a)).collect();
        let (mut bracket, mut geodesic) = (0.0f64, 0.0f64);
        let (mut b_size, mut g_size) = (0.0f64, 0.0f64);
        for x in &frames {
            let xv = x.value();
            for y in &frames {
                let br = lie_bracket(x, y);
                bracket = bracket.max(outside(&pv, br.comps()));
                b_size = b_size.max(br.sup_norm());
                let (yv, yg) = (y.value(), y.gradient());
                let cov: Vec<f64> = (0..n)
                    .map(|k| {
                        (0..n)
                            .map(|s| {
                                let inner: f64 = (0..n).map(|q| gamma.get(&[k, s, q]) * yv.comps()[q]).sum();
                                xv.comps()[s] * (yg.get(&[k, s]) + inner)
                            })
                            .sum()
                    })
                    .collect();
                geodesic = geodesic.max(outside(&pv, &cov));
                g_size = g_size.max(cov.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
        }
        out.push(InvolutivityResidual {
            eigenvalue: split.eigenvalues[i],
            bracket: bracket / (1.0 + b_size),
            geodesic: geodesic / (1.0 + g_size),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin, sample_points};

    fn provider(d: &str) -> FieldProvider {
        FieldProvider::new(builtin(d).unwrap())
    }

    #[test]
    fn conformal_q_has_identity_projector() {
        let p = provider("flat_kahler(4)");
        let pts = sample_points(&p.spec().domain, 8, 42);
        let s = spectral_split(&p, &pts).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0]);
        assert_eq!(s.multiplicities, vec![4]);
        assert_eq!(s.projector_coefficients(0), vec![1.0]);
        assert_eq!(s.projector(0, &p, &pts[0]).unwrap(), TensorValue::identity(4));
        for r in involutivity_residual(&s, &p, &pts[1]).unwrap() {
            assert_eq!((r.bracket, r.geodesic), (0.0, 0.0));
        }
    }

    #[test]
    fn weighted_product_splits_into_two() {
        let p = provider("weighted_product([t2,t2],[1,4])");
        let pts = sample_points(&p.spec().domain, 64, 42);
        let s = spectral_split(&p, &pts).unwrap();
        assert_eq!(s.multiplicities, vec![2, 2]);
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12 && (s.eigenvalues[1] - 4.0).abs() < 1e-12);
        assert!(s.spread < 1e-7);
        assert_eq!(s.projector_coefficients(0), vec![4.0 / 3.0, -1.0 / 3.0]);
        let p0 = s.projector(0, &p, &pts[0]).unwrap();
        assert!(p0.sub(&p0.matmul(&p0)).sup_norm() < 1e-14);
        for r in involutivity_residual(&s, &p, &pts[3]).unwrap() {
            assert!(r.bracket < 1e-12 && r.geodesic < 1e-12);
        }
    }

    #[test]
    fn drifting_eigenvalue_is_rejected() {
        let p = provider("control_drift");
        let pts = sample_points(&p.spec().domain, 16, 42);
        let err = spectral_split(&p, &pts).unwrap_err();
        assert!(matches!(
            err,
            StructureError::NonConstant { .. } | StructureError::ClusterMismatch { .. }
        ));
    }

    #[test]
    fn contact_kernel_is_split_off() {
        let p = provider("line_product(s6)");
        let pts = sample_points(&p.spec().domain, 8, 42);
        let s = spectral_split(&p, &pts).unwrap();
        assert_eq!(s.kernel_dim, 1);
        assert_eq!(s.multiplicities, vec![6]);
        let proj = s.projector(0, &p, &pts[0]).unwrap();
        let xi = p.value("xi", &pts[0]).unwrap();
        assert!(proj.apply(xi.comps()).iter().all(|v| v.abs() < 1e-12));
        for r in involutivity_residual(&s, &p, &pts[2]).unwrap() {
            assert!(r.bracket < 1e-12 && r.geodesic < 1e-12);
        }
    }
}
