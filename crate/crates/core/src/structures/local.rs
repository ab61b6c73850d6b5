//! Everything an identity needs at one point, computed once from
//! first-order jets.

use crate::einstein::einstein_gamma;
use crate::fields::FieldProvider;
use crate::geometry::{christoffel, covariant_derivative, exterior_derivative, nijenhuis, torsion_of, GeometryError};
use crate::tensor::{TensorValue, Valence};

/// Values and first partials of the structure fields at a point, together
/// with the Levi-Civita and Einstein connections.
///
/// Trilinear forms are stored `[x, y, z]` for the arguments `(e_x, e_y, e_z)`.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    pub g: TensorValue,
    pub g_inv: TensorValue,
    pub f: TensorValue,
    pub a: TensorValue,
    pub a_given: bool,
    pub q: Option<TensorValue>,
    pub xi: Option<TensorValue>,
    pub eta: Option<TensorValue>,
    /// `∂_m g_ij` at `[i, j, m]`.
    pub dg: TensorValue,
    /// `∂_m F_ij` at `[i, j, m]`.
    pub dfield: TensorValue,
    /// `∂_m A^k_i` at `[k, i, m]`.
    pub da: TensorValue,
    pub dq: Option<TensorValue>,
    pub dxi: Option<TensorValue>,
    pub deta_grad: Option<TensorValue>,
    /// Exterior derivative `dF`.
    pub df: TensorValue,
    pub gamma_lc: TensorValue,
    /// Coefficients of the skew-torsion Einstein connection.
    pub gamma: TensorValue,
    /// `T(X, Y, Z)` of the Einstein connection.
    pub torsion: TensorValue,
}

impl PointGeometry {
    pub fn new(provider: &FieldProvider, point: &[f64]) -> Result<PointGeometry, GeometryError> {
        let fj = provider.jets(point, 1)?;
        let gamma_lc = christoffel(&fj.g, &fj.g_inv).value();
        let gamma = einstein_gamma(&fj).value();
        let g = fj.g.value();
        let torsion = torsion_of(&gamma, &g).1;
        Ok(PointGeometry {
            point: point.to_vec(),
            g_inv: fj.g_inv.value(),
            f: fj.f.value(),
            a: fj.a.value(),
            a_given: fj.a_given,
            q: fj.q.as_ref().map(|t| t.value()),
            xi: fj.xi.as_ref().map(|t| t.value()),
            eta: fj.eta.as_ref().map(|t| t.value()),
            dg: fj.g.gradient(),
            dfield: fj.f.gradient(),
            da: fj.a.gradient(),
            dq: fj.q.as_ref().map(|t| t.gradient()),
            dxi: fj.xi.as_ref().map(|t| t.gradient()),
            deta_grad: fj.eta.as_ref().map(|t| t.gradient()),
            df: exterior_derivative(&fj.f).value(),
            gamma_lc,
            gamma,
            torsion,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn has_contact(&self) -> bool {
        self.xi.is_some() && self.eta.is_some()
    }

    /// `∇ᵍ_m t` with the direction as the last covariant slot.
    pub fn nabla_lc(&self, value: &TensorValue, grad: &TensorValue) -> TensorValue {
        covariant_derivative(&self.gamma_lc, value, grad)
    }

    /// `∇_m t` for the Einstein connection.
    pub fn nabla(&self, value: &TensorValue, grad: &TensorValue) -> TensorValue {
        covariant_derivative(&self.gamma, value, grad)
    }

    /// `g((D_X P)Y, Z)` at `[x, y, z]` from a derivative stored `[k, y, x]`.
    pub fn as_form(&self, d: &TensorValue) -> TensorValue {
        d.lower_last(0, &self.g).permute(&[1, 0, 2])
    }

    /// `(∇_Z b)(X, Y)` stored `[x, y, z]` is what [`Self::nabla`] returns for
    /// a `(0,2)` field; this reorders it to `[z, x, y]`, direction first.
    pub fn direction_first(d: &TensorValue) -> TensorValue {
        d.permute(&[2, 0, 1])
    }

    /// `g((∇ᵍ_X A)Y, Z)` at `[x, y, z]`.
    pub fn lc_nabla_a_form(&self) -> TensorValue {
        self.as_form(&self.nabla_lc(&self.a, &self.da))
    }

    pub fn a_squared(&self) -> TensorValue {
        self.a.matmul(&self.a)
    }

    /// `N_A(X, Y, Z)` on the coordinate frame.
    pub fn nijenhuis_a(&self) -> TensorValue {
        nijenhuis(&self.a, &self.da, &self.g)
    }

    /// `t(P₀X, P₁Y, P₂Z)`; `None` leaves a slot alone.
    pub fn compose(t: &TensorValue, maps: [Option<&TensorValue>; 3]) -> TensorValue {
        let mut out = t.clone();
        for (slot, m) in maps.iter().enumerate() {
            if let Some(m) = m {
                out = out.compose_slot(slot, m);
            }
        }
        out
    }

    /// `dF(P₀X, P₁Y, P₂Z)`.
    pub fn df_with(&self, maps: [Option<&TensorValue>; 3]) -> TensorValue {
        Self::compose(&self.df, maps)
    }

    /// `dη(X, Y) = X η(Y) − Y η(X)` on the coordinate frame.
    pub fn deta(&self) -> Option<TensorValue> {
        let grad = self.deta_grad.as_ref()?;
        Some(TensorValue::from_fn(self.dim(), Valence::new(0, 2), |ix| {
            grad.get(&[ix[1], ix[0]]) - grad.get(&[ix[0], ix[1]])
        }))
    }

    /// `η ⊗ ξ` as the endomorphism `X ↦ η(X) ξ`.
    pub fn eta_xi(&self) -> Option<TensorValue> {
        let (xi, eta) = (self.xi.as_ref()?, self.eta.as_ref()?);
        Some(TensorValue::from_fn(self.dim(), Valence::new(1, 1), |ix| {
            xi.comps()[ix[0]] * eta.comps()[ix[1]]
        }))
    }

    /// `Q̃ = Q − Id`.
    pub fn q_tilde(&self) -> Option<TensorValue> {
        Some(self.q.as_ref()?.sub(&TensorValue::identity(self.dim())))
    }

    /// `N⁽⁵⁾(X, Y, Z)` on the coordinate frame, where `[e_i, e_j] = 0` and
    /// `[e_i, A e_k] = ∂_i A e_k`.
    pub fn n5(&self) -> Option<TensorValue> {
        let qt = self.q_tilde()?;
        let dq = self.dq.as_ref()?;
        let n = self.dim();
        // h(X, Y) = g(X, Q̃Y) and its partials
        let h = self.g.matmul(&qt);
        let dh = TensorValue::from_fn(n, Valence::new(0, 3), |ix| {
            let (i, j, m) = (ix[0], ix[1], ix[2]);
            (0..n)
                .map(|s| self.dg.get(&[i, s, m]) * qt.at(s, j) + self.g.at(i, s) * dq.get(&[s, j, m]))
                .sum()
        });
        let a = &self.a;
        let da = &self.da;
        Some(TensorValue::from_fn(n, Valence::new(0, 3), |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut acc = 0.0;
            for s in 0..n {
                acc += a.at(s, k) * dh.get(&[i, j, s]) - a.at(s, j) * dh.get(&[i, k, s]);
                acc += da.get(&[s, k, i]) * h.at(s, j) - da.get(&[s, j, i]) * h.at(s, k);
                acc += (da.get(&[s, k, j]) - da.get(&[s, j, k])) * h.at(s, i);
            }
            acc
        }))
    }

    /// `N_A^wac = N_A + dη ⊗ η`.
    pub fn nwac(&self) -> Option<TensorValue> {
        let deta = self.deta()?;
        let eta = self.eta.as_ref()?;
        let na = self.nijenhuis_a();
        Some(TensorValue::from_fn(self.dim(), Valence::new(0, 3), |ix| {
            na.get(ix) + deta.at(ix[0], ix[1]) * eta.comps()[ix[2]]
        }))
    }

    /// `∇ᵍ ξ` stored `[k, m]` (direction last).
    pub fn lc_nabla_xi(&self) -> Option<TensorValue> {
        Some(self.nabla_lc(self.xi.as_ref()?, self.dxi.as_ref()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::builtin;

    #[test]
    fn form_layout_matches_definition() {
        let p = FieldProvider::new(builtin("s6").unwrap());
        let pg = PointGeometry::new(&p, &[0.1, -0.05, 0.2, 0.0, 0.1, -0.1]).unwrap();
        let d = pg.nabla_lc(&pg.a, &pg.da);
        let form = pg.lc_nabla_a_form();
        let n = 6;
        let (x, y, z) = (1, 4, 2);
        let want: f64 = (0..n).map(|k| pg.g.at(z, k) * d.get(&[k, y, x])).sum();
        assert!((form.get(&[x, y, z]) - want).abs() < 1e-15);
    }

    #[test]
    fn compose_applies_each_slot() {
        let p = FieldProvider::new(builtin("s6").unwrap());
        let pg = PointGeometry::new(&p, &[0.05, 0.1, -0.2, 0.1, 0.0, 0.15]).unwrap();
        let c = pg.df_with([Some(&pg.a), None, Some(&pg.a)]);
        let n = 6;
        let (x, y, z) = (0, 3, 5);
        let mut want = 0.0;
        for s in 0..n {
            for t in 0..n {
                want += pg.a.at(s, x) * pg.a.at(t, z) * pg.df.get(&[s, y, t]);
            }
        }
        assert!((c.get(&[x, y, z]) - want).abs() < 1e-14);
    }
}
