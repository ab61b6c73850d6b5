//! Jet-level formulas. Each lowers the jet order by at most one so that a
//! single code path yields values (from order-1 fields) and first partials
//! (from order-2 fields).

use crate::expr::{Jet, Scalar};
use crate::fields::TensorJet;
use crate::tensor::Valence;

fn sum(terms: impl Iterator<Item = Jet>) -> Jet {
    terms.reduce(|a, b| a.plus(&b)).expect("non-empty sum")
}

/// Levi-Civita `Γ^k_{ij} = ½ g^{ks}(∂_i g_sj + ∂_j g_si − ∂_s g_ij)`.
pub fn christoffel(g: &TensorJet, g_inv: &TensorJet) -> TensorJet {
    let n = g.dim();
    let order = g.order().checked_sub(1).expect("metric jet of order >= 1");
    let dg: Vec<Vec<Jet>> = (0..n).map(|m| g.partial(m).comps().to_vec()).collect();
    let low: Vec<Jet> = (0..n * n * n)
        .map(|ix| {
            let (i, j, s) = (ix / (n * n), (ix / n) % n, ix % n);
            dg[i][s * n + j]
                .plus(&dg[j][s * n + i])
                .minus(&dg[s][i * n + j])
                .scaled(0.5)
        })
        .collect();
    raise_last(&TensorJet::new(n, Valence::new(0, 3), low), &g_inv.truncate(order))
}

/// `Γ^k_{ij} = g^{ks} L_{ijs}` for a lowered `(0,3)` jet `L`.
pub fn raise_last(low: &TensorJet, g_inv: &TensorJet) -> TensorJet {
    let n = low.dim();
    let order = low.order();
    let gi = g_inv.truncate(order);
    let (l, gi) = (low.comps(), gi.comps());
    let comps = (0..n * n * n)
        .map(|ix| {
            let (k, i, j) = (ix / (n * n), (ix / n) % n, ix % n);
            sum((0..n).map(|s| gi[k * n + s].times(&l[(i * n + j) * n + s])))
        })
        .collect();
    TensorJet::new(n, Valence::new(1, 2), comps)
}

/// `L_{ijk} = g_{ks} Γ^s_{ij}`.
pub fn lower_first(gamma: &TensorJet, g: &TensorJet) -> TensorJet {
    let n = gamma.dim();
    let gl = g.truncate(gamma.order());
    let (gm, gl) = (gamma.comps(), gl.comps());
    let comps = (0..n * n * n)
        .map(|ix| {
            let (i, j, k) = (ix / (n * n), (ix / n) % n, ix % n);
            sum((0..n).map(|s| gl[k * n + s].times(&gm[(s * n + i) * n + j])))
        })
        .collect();
    TensorJet::new(n, Valence::new(0, 3), comps)
}

/// `dF_{ijk} = ∂_i F_jk + ∂_j F_ki + ∂_k F_ij`.
pub fn exterior_derivative(f: &TensorJet) -> TensorJet {
    let n = f.dim();
    let df: Vec<Vec<Jet>> = (0..n).map(|m| f.partial(m).comps().to_vec()).collect();
    let comps = (0..n * n * n)
        .map(|ix| {
            let (i, j, k) = (ix / (n * n), (ix / n) % n, ix % n);
            df[i][j * n + k].plus(&df[j][k * n + i]).plus(&df[k][i * n + j])
        })
        .collect();
    TensorJet::new(n, Valence::new(0, 3), comps)
}

pub fn scale_jet(t: &TensorJet, s: f64) -> TensorJet {
    TensorJet::new(t.dim(), t.valence(), t.comps().iter().map(|c| c.scaled(s)).collect())
}
