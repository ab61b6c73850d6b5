use crate::expr::{EvalError, Expr, Jet, Scalar};
use crate::tensor::{determinant, invert_generic, invert_rows, TensorValue, Valence};

use super::{ExprMatrix, FieldError, ManifoldSpec, Metric};

/// Tangency of the ambient endomorphism is asserted to this relative level.
const TANGENCY_TOL: f64 = 1e-9;
/// Normalized Gram determinant below which the embedding counts as singular.
const RANK_TOL: f64 = 1e-10;

/// A tensor whose components are Taylor jets in the chart variables.
#[derive(Debug, Clone)]
pub struct TensorJet {
    dim: usize,
    valence: Valence,
    comps: Vec<Jet>,
}

impl TensorJet {
    pub fn new(dim: usize, valence: Valence, comps: Vec<Jet>) -> TensorJet {
        assert_eq!(comps.len(), dim.pow(valence.rank() as u32));
        TensorJet { dim, valence, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    pub fn order(&self) -> usize {
        self.comps[0].order()
    }

    pub fn value(&self) -> TensorValue {
        TensorValue::from_vec(self.dim, self.valence, self.comps.iter().map(|j| j.value()).collect()).expect("shape")
    }

    /// First partials as a tensor with one extra covariant slot, appended last.
    pub fn gradient(&self) -> TensorValue {
        let n = self.dim;
        let mut out = Vec::with_capacity(self.comps.len() * n);
        for c in &self.comps {
            for m in 0..n {
                out.push(c.derivative(&[m]));
            }
        }
        TensorValue::from_vec(n, Valence::new(self.valence.up, self.valence.down + 1), out).expect("shape")
    }

    /// `∂_m` of every component; lowers the jet order by one.
    pub fn partial(&self, m: usize) -> TensorJet {
        TensorJet {
            dim: self.dim,
            valence: self.valence,
            comps: self.comps.iter().map(|c| c.partial(m)).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> TensorJet {
        TensorJet {
            dim: self.dim,
            valence: self.valence,
            comps: self.comps.iter().map(|c| c.truncate(order)).collect(),
        }
    }
}

/// All fields of a spec expanded as jets at one point.
#[derive(Debug, Clone)]
pub struct FieldJets {
    pub point: Vec<f64>,
    pub order: usize,
    pub g: TensorJet,
    pub f: TensorJet,
    pub g_inv: TensorJet,
    /// From the spec when given, otherwise `A^k_i = F_ij g^{jk}`.
    pub a: TensorJet,
    pub a_given: bool,
    pub q: Option<TensorJet>,
    pub xi: Option<TensorJet>,
    pub eta: Option<TensorJet>,
}

impl FieldJets {
    pub fn dim(&self) -> usize {
        self.g.dim
    }
}

/// Evaluates the fields of a [`ManifoldSpec`] with exact partials.
#[derive(Debug, Clone)]
pub struct FieldProvider {
    spec: ManifoldSpec,
}

fn eval_matrix(field: &str, m: &ExprMatrix, vars: &[Jet]) -> Result<Vec<Jet>, FieldError> {
    let mut out = Vec::with_capacity(m.len() * m.len());
    for row in m {
        for e in row {
            out.push(eval_one(field, e, vars)?);
        }
    }
    Ok(out)
}

fn eval_vector(field: &str, v: &[Expr], vars: &[Jet]) -> Result<Vec<Jet>, FieldError> {
    v.iter().map(|e| eval_one(field, e, vars)).collect()
}

fn eval_one(field: &str, e: &Expr, vars: &[Jet]) -> Result<Jet, FieldError> {
    e.eval_with(vars).map_err(|source: EvalError| FieldError::Eval {
        field: field.to_string(),
        source,
    })
}

fn transpose<S: Clone>(n: usize, m: &[S]) -> Vec<S> {
    (0..n * n).map(|k| m[(k % n) * n + k / n].clone()).collect()
}

fn mat_mul(n: usize, a: &[Jet], b: &[Jet]) -> Vec<Jet> {
    crate::tensor::mat_mul_generic(n, a, b)
}

impl FieldProvider {
    pub fn new(spec: ManifoldSpec) -> FieldProvider {
        FieldProvider { spec }
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Expand every field at `point` as jets carrying derivatives up to `order`.
    pub fn jets(&self, point: &[f64], order: usize) -> Result<FieldJets, FieldError> {
        let n = self.spec.dim;
        assert_eq!(point.len(), n, "point dimension");
        let vars = Jet::variables(point, order);
        let (g, f) = match (&self.spec.metric, &self.spec.embedding) {
            (Some(metric), _) => match metric {
                Metric::Full(big) => {
                    let big = eval_matrix("G", big, &vars)?;
                    let mut g = Vec::with_capacity(n * n);
                    let mut f = Vec::with_capacity(n * n);
                    for i in 0..n {
                        for j in 0..n {
                            let (a, b) = (&big[i * n + j], &big[j * n + i]);
                            g.push(a.plus(b).scaled(0.5));
                            f.push(a.minus(b).scaled(0.5));
                        }
                    }
                    (g, f)
                }
                Metric::Split { g, f } => (eval_matrix("g", g, &vars)?, eval_matrix("F", f, &vars)?),
            },
            (None, Some(_)) => {
                let (g, h) = self.induced(point, order)?;
                (g, transpose(n, &h))
            }
            (None, None) => unreachable!("validated spec has a metric source"),
        };
        let g_inv = invert_generic(n, &g).map_err(|_| FieldError::DegenerateMetric {
            point: point.to_vec(),
            condition: f64::INFINITY,
        })?;
        let st = &self.spec.structure;
        let (a, a_given) = match &st.a {
            Some(m) => (eval_matrix("A", m, &vars)?, true),
            None => (transpose(n, &mat_mul(n, &f, &g_inv)), false),
        };
        let q = st.q.as_ref().map(|m| eval_matrix("Q", m, &vars)).transpose()?;
        let xi = st.xi.as_ref().map(|v| eval_vector("xi", v, &vars)).transpose()?;
        let eta = st.eta.as_ref().map(|v| eval_vector("eta", v, &vars)).transpose()?;
        let t11 = Valence::new(1, 1);
        Ok(FieldJets {
            point: point.to_vec(),
            order,
            g: TensorJet::new(n, Valence::new(0, 2), g),
            f: TensorJet::new(n, Valence::new(0, 2), f),
            g_inv: TensorJet::new(n, Valence::new(2, 0), g_inv),
            a: TensorJet::new(n, t11, a),
            a_given,
            q: q.map(|c| TensorJet::new(n, t11, c)),
            xi: xi.map(|c| TensorJet::new(n, Valence::new(1, 0), c)),
            eta: eta.map(|c| TensorJet::new(n, Valence::new(0, 1), c)),
        })
    }

    /// Induced metric `DφᵀDφ` and `H = Dφᵀ A_amb Dφ`, i.e. `H_ij = ⟨e_i, A e_j⟩`.
    fn induced(&self, point: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>), FieldError> {
        let emb = self.spec.embedding.as_ref().expect("embedded backend");
        let n = self.spec.dim;
        let m = emb.ambient_dim;
        let (dphi, amb) = self.ambient_frame(point, order)?;
        let zero = dphi[0].constant_like(0.0);
        let mut md = vec![zero.clone(); m * n];
        for a in 0..m {
            for b in 0..m {
                let mab = &amb[a * m + b];
                if mab.coeffs().iter().all(|&c| c == 0.0) {
                    continue;
                }
                for j in 0..n {
                    md[a * n + j] = md[a * n + j].plus(&mab.times(&dphi[b * n + j]));
                }
            }
        }
        let mut g = vec![zero.clone(); n * n];
        let mut h = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut gij = dphi[i].constant_like(0.0);
                let mut hij = gij.clone();
                for a in 0..m {
                    let d = &dphi[a * n + i];
                    gij = gij.plus(&d.times(&dphi[a * n + j]));
                    hij = hij.plus(&d.times(&md[a * n + j]));
                }
                g[i * n + j] = gij;
                h[i * n + j] = hij;
            }
        }
        Ok((g, h))
    }

    /// `Dφ` (`m × n`, row-major) and `A_amb(φ)` (`m × m`) as jets of `order`.
    fn ambient_frame(&self, point: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>), FieldError> {
        let emb = self.spec.embedding.as_ref().expect("embedded backend");
        let n = self.spec.dim;
        let vars = Jet::variables(point, order + 1);
        let phi = eval_vector("embedding.map", &emb.map, &vars)?;
        let mut dphi = Vec::with_capacity(emb.ambient_dim * n);
        for p in &phi {
            for i in 0..n {
                dphi.push(p.partial(i));
            }
        }
        let amb = eval_matrix("embedding.A_ambient", &emb.a_ambient, &phi)?
            .into_iter()
            .map(|j| j.truncate(order))
            .collect();
        Ok((dphi, amb))
    }

    /// Normal component of `A_amb Dφ`, relative to its size.
    pub fn tangency_residual(&self, point: &[f64]) -> Result<f64, FieldError> {
        let Some(emb) = &self.spec.embedding else {
            return Ok(0.0);
        };
        let n = self.spec.dim;
        let m = emb.ambient_dim;
        let (dphi, amb) = self.ambient_frame(point, 0)?;
        let fj = self.jets(point, 0)?;
        let a = fj.a.value();
        let mut worst: f64 = 0.0;
        let mut size: f64 = 0.0;
        for r in 0..m {
            for j in 0..n {
                let lhs: f64 = (0..m).map(|b| amb[r * m + b].value() * dphi[b * n + j].value()).sum();
                let rhs: f64 = (0..n).map(|k| dphi[r * n + k].value() * a.at(k, j)).sum();
                worst = worst.max((lhs - rhs).abs());
                size = size.max(lhs.abs());
            }
        }
        Ok(worst / (1.0 + size))
    }

    /// Invariant checks run by spec validation.
    pub fn spot_check(&self, point: &[f64]) -> Result<(), FieldError> {
        let n = self.spec.dim;
        if self.spec.embedding.is_some() {
            let (dphi, _) = self.ambient_frame(point, 0)?;
            let m = dphi.len() / n;
            let mut gram = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] = (0..m).map(|a| dphi[a * n + i].value() * dphi[a * n + j].value()).sum();
                }
            }
            let diag: f64 = (0..n).map(|i| gram[i * n + i]).product();
            let det = determinant(n, &gram);
            if !(diag > 0.0) || det / diag < RANK_TOL {
                return Err(FieldError::RankDeficient {
                    point: point.to_vec(),
                    gram_det: det,
                });
            }
            let residual = self.tangency_residual(point)?;
            if residual > TANGENCY_TOL {
                return Err(FieldError::NotTangent {
                    point: point.to_vec(),
                    residual,
                });
            }
        }
        let fj = self.jets(point, 0)?;
        let g = fj.g.value();
        if let Err(crate::tensor::LinalgError::IllConditioned { condition }) = invert_rows(n, g.comps()) {
            return Err(FieldError::DegenerateMetric {
                point: point.to_vec(),
                condition,
            });
        }
        if let (Some(xi), Some(eta)) = (&fj.xi, &fj.eta) {
            let value: f64 = xi
                .value()
                .comps()
                .iter()
                .zip(eta.value().comps())
                .map(|(a, b)| a * b)
                .sum();
            if (value - 1.0).abs() > 1e-9 {
                return Err(FieldError::EtaXi {
                    point: point.to_vec(),
                    value,
                });
            }
        }
        Ok(())
    }

    /// Named field as a jet tensor: `G`, `g`, `F`, `A`, `Q`, `xi`, `eta`.
    pub fn jet(&self, name: &str, point: &[f64], order: usize) -> Result<TensorJet, FieldError> {
        let fj = self.jets(point, order)?;
        let missing = || FieldError::MissingField(name.to_string());
        Ok(match name {
            "G" => {
                let comps = fj.g.comps.iter().zip(&fj.f.comps).map(|(a, b)| a.plus(b)).collect();
                TensorJet::new(fj.dim(), Valence::new(0, 2), comps)
            }
            "g" => fj.g,
            "F" => fj.f,
            "A" => fj.a,
            "Q" => fj.q.ok_or_else(missing)?,
            "xi" => fj.xi.ok_or_else(missing)?,
            "eta" => fj.eta.ok_or_else(missing)?,
            _ => return Err(missing()),
        })
    }

    pub fn value(&self, name: &str, point: &[f64]) -> Result<TensorValue, FieldError> {
        Ok(self.jet(name, point, 0)?.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin, sample_points};

    fn provider(name: &str) -> FieldProvider {
        FieldProvider::new(builtin(name).unwrap())
    }

    #[test]
    fn flat_kahler_metric_is_identity() {
        let p = provider("flat_kahler(4)");
        for pt in sample_points(&p.spec().domain, 5, 1) {
            assert_eq!(p.value("g", &pt).unwrap(), TensorValue::euclidean(4));
        }
    }

    #[test]
    fn s6_metric_is_identity_at_origin() {
        let p = provider("s6_nearly_kahler");
        let g = p.value("g", &[0.0; 6]).unwrap();
        assert!(g.sub(&TensorValue::euclidean(6)).sup_norm() < 1e-15);
    }

    #[test]
    fn jet_partials_match_finite_differences() {
        let p = provider("s6_nearly_kahler");
        let h = 1e-5;
        for pt in sample_points(&p.spec().domain, 4, 9) {
            let grad = p.jet("F", &pt, 1).unwrap().gradient();
            for m in 0..6 {
                let mut up = pt.clone();
                let mut dn = pt.clone();
                up[m] += h;
                dn[m] -= h;
                let fd = p
                    .value("F", &up)
                    .unwrap()
                    .sub(&p.value("F", &dn).unwrap())
                    .scale(0.5 / h);
                for i in 0..6 {
                    for j in 0..6 {
                        assert!((fd.at(i, j) - grad.get(&[i, j, m])).abs() < 1e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn derived_adjoint_matches_pullback() {
        // A built from (g, F) of the embedded provider, against the pullback.
        let p = provider("s6_nearly_kahler");
        for pt in sample_points(&p.spec().domain, 4, 3) {
            let g = p.value("g", &pt).unwrap();
            let f = p.value("F", &pt).unwrap();
            let a = p.value("A", &pt).unwrap();
            let ginv = crate::tensor::invert_matrix(&g).unwrap();
            let derived = f.matmul(&ginv).transpose();
            assert!(derived.sub(&a).sup_norm() < 1e-10);
        }
    }

    #[test]
    fn missing_fields_are_reported() {
        let p = provider("flat_kahler(2)");
        assert!(matches!(p.value("xi", &[0.0, 0.0]), Err(FieldError::MissingField(_))));
    }
}
