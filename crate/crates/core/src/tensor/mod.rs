//! Dense pointwise tensors on an `n`-dimensional tangent space.
//!
//! Components are stored row-major over the index tuple, contravariant
//! indices first. A `(1,2)` tensor `T^k_{ij}` lives at `[k, i, j]`, a
//! `(1,1)` tensor `A^k_i` is the matrix acting on column vectors
//! (`(AX)^k = A^k_i X^i`), and a `(0,2)` tensor `g_{ij}` at `[i, j]`.
//!
//! Residual norms are sup norms over components.

mod linalg;

use std::fmt;

use thiserror::Error;

pub use linalg::{
    condition_estimate, determinant, invert_generic, invert_rows, mat_mul_generic, LinalgError, MAX_CONDITION,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("slot {slot} does not exist on a ({p},{q}) tensor")]
    NoSuchSlot { slot: usize, p: usize, q: usize },
    #[error("slots have mismatched variance")]
    VarianceMismatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Valence `(p, q)`: `p` contravariant, `q` covariant slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Valence {
    pub up: usize,
    pub down: usize,
}

impl Valence {
    pub const fn new(up: usize, down: usize) -> Valence {
        Valence { up, down }
    }

    pub fn rank(&self) -> usize {
        self.up + self.down
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.up, self.down)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    dim: usize,
    valence: Valence,
    comps: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(dim: usize, valence: Valence) -> TensorValue {
        TensorValue {
            dim,
            valence,
            comps: vec![0.0; dim.pow(valence.rank() as u32)],
        }
    }

    pub fn from_vec(dim: usize, valence: Valence, comps: Vec<f64>) -> Result<TensorValue, TensorError> {
        let want = dim.pow(valence.rank() as u32);
        if comps.len() != want {
            return Err(TensorError::Shape(format!(
                "{} components for a {valence} tensor in dimension {dim}, expected {want}",
                comps.len()
            )));
        }
        Ok(TensorValue { dim, valence, comps })
    }

    pub fn from_fn(dim: usize, valence: Valence, mut f: impl FnMut(&[usize]) -> f64) -> TensorValue {
        let mut t = TensorValue::zeros(dim, valence);
        let mut idx = vec![0usize; valence.rank()];
        for c in t.comps.iter_mut() {
            *c = f(&idx);
            increment(&mut idx, dim);
        }
        t
    }

    pub fn scalar(dim: usize, v: f64) -> TensorValue {
        TensorValue {
            dim,
            valence: Valence::new(0, 0),
            comps: vec![v],
        }
    }

    /// Kronecker delta `δ^i_j`.
    pub fn identity(dim: usize) -> TensorValue {
        TensorValue::from_fn(dim, Valence::new(1, 1), |ix| (ix[0] == ix[1]) as u8 as f64)
    }

    /// `(0,2)` tensor with components `δ_{ij}`.
    pub fn euclidean(dim: usize) -> TensorValue {
        TensorValue::from_fn(dim, Valence::new(0, 2), |ix| (ix[0] == ix[1]) as u8 as f64)
    }

    pub fn vector(comps: Vec<f64>) -> TensorValue {
        TensorValue {
            dim: comps.len(),
            valence: Valence::new(1, 0),
            comps,
        }
    }

    pub fn covector(comps: Vec<f64>) -> TensorValue {
        TensorValue {
            dim: comps.len(),
            valence: Valence::new(0, 1),
            comps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [f64] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<f64> {
        self.comps
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.valence.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.comps[o] = v;
    }

    /// `m[r][c]` for rank-2 tensors.
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.comps[r * self.dim + c]
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TensorValue {
        TensorValue {
            dim: self.dim,
            valence: self.valence,
            comps: self.comps.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TensorValue {
        self.map(|c| c * s)
    }

    fn zip(&self, o: &TensorValue, f: impl Fn(f64, f64) -> f64) -> TensorValue {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        assert_eq!(self.valence, o.valence, "valence mismatch");
        TensorValue {
            dim: self.dim,
            valence: self.valence,
            comps: self.comps.iter().zip(&o.comps).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &TensorValue) -> TensorValue {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &TensorValue) -> TensorValue {
        self.zip(o, |a, b| a - b)
    }

    /// Linear combination `Σ cᵢ tᵢ` of same-shaped tensors.
    pub fn combine(terms: &[(f64, &TensorValue)]) -> TensorValue {
        let (c0, t0) = terms[0];
        let mut out = t0.scale(c0);
        for (c, t) in &terms[1..] {
            out = out.zip(t, |a, b| a + c * b);
        }
        out
    }

    /// Outer product; slots of `self` come first within each variance group.
    pub fn outer(&self, o: &TensorValue) -> TensorValue {
        assert_eq!(self.dim, o.dim);
        let (p1, q1) = (self.valence.up, self.valence.down);
        let (p2, q2) = (o.valence.up, o.valence.down);
        let val = Valence::new(p1 + p2, q1 + q2);
        TensorValue::from_fn(self.dim, val, |ix| {
            let mut a = Vec::with_capacity(p1 + q1);
            let mut b = Vec::with_capacity(p2 + q2);
            a.extend_from_slice(&ix[..p1]);
            b.extend_from_slice(&ix[p1..p1 + p2]);
            a.extend_from_slice(&ix[p1 + p2..p1 + p2 + q1]);
            b.extend_from_slice(&ix[p1 + p2 + q1..]);
            self.get(&a) * o.get(&b)
        })
    }

    /// Trace over the `upper`-th contravariant and `lower`-th covariant slot.
    pub fn contract(&self, upper: usize, lower: usize) -> Result<TensorValue, TensorError> {
        let (p, q) = (self.valence.up, self.valence.down);
        if upper >= p {
            return Err(TensorError::NoSuchSlot { slot: upper, p, q });
        }
        if lower >= q {
            return Err(TensorError::NoSuchSlot { slot: p + lower, p, q });
        }
        let val = Valence::new(p - 1, q - 1);
        let up_abs = upper;
        let low_abs = p + lower;
        Ok(TensorValue::from_fn(self.dim, val, |ix| {
            let mut full = Vec::with_capacity(p + q);
            let mut rest = ix.iter();
            for s in 0..p + q {
                if s == up_abs || s == low_abs {
                    full.push(0);
                } else {
                    full.push(*rest.next().expect("index arity"));
                }
            }
            (0..self.dim)
                .map(|k| {
                    full[up_abs] = k;
                    full[low_abs] = k;
                    self.get(&full)
                })
                .sum()
        }))
    }

    fn check_slots(&self, slots: &[usize]) -> Result<(), TensorError> {
        let (p, q) = (self.valence.up, self.valence.down);
        for &s in slots {
            if s >= p + q {
                return Err(TensorError::NoSuchSlot { slot: s, p, q });
            }
        }
        let upper = slots.iter().filter(|&&s| s < p).count();
        if upper != 0 && upper != slots.len() {
            return Err(TensorError::VarianceMismatch);
        }
        Ok(())
    }

    fn average_over_permutations(&self, slots: &[usize], signed: bool) -> Result<TensorValue, TensorError> {
        self.check_slots(slots)?;
        let perms = permutations(slots.len());
        let norm = 1.0 / perms.len() as f64;
        Ok(TensorValue::from_fn(self.dim, self.valence, |ix| {
            let mut acc = 0.0;
            let mut moved = ix.to_vec();
            for (perm, sign) in &perms {
                for (k, &s) in slots.iter().enumerate() {
                    moved[s] = ix[slots[perm[k]]];
                }
                let v = self.get(&moved);
                acc += if signed { *sign * v } else { v };
            }
            acc * norm
        }))
    }

    /// Alternation over the listed absolute slots, with `1/k!` normalization.
    pub fn antisymmetrize(&self, slots: &[usize]) -> Result<TensorValue, TensorError> {
        self.average_over_permutations(slots, true)
    }

    /// Symmetrization over the listed absolute slots, with `1/k!` normalization.
    pub fn symmetrize(&self, slots: &[usize]) -> Result<TensorValue, TensorError> {
        self.average_over_permutations(slots, false)
    }

    /// Reorder slots: output index `k` reads input slot `order[k]`.
    /// Variance groups must be preserved by the caller.
    pub fn permute(&self, order: &[usize]) -> TensorValue {
        assert_eq!(order.len(), self.valence.rank());
        let mut src = vec![0usize; order.len()];
        TensorValue::from_fn(self.dim, self.valence, |ix| {
            for (k, &o) in order.iter().enumerate() {
                src[o] = ix[k];
            }
            self.get(&src)
        })
    }

    /// Replace the argument in covariant slot `slot` (absolute) by `P` applied
    /// to it: `t(.., P e_i, ..)`. `p` must be `(1,1)`.
    pub fn compose_slot(&self, slot: usize, p: &TensorValue) -> TensorValue {
        assert_eq!(p.valence, Valence::new(1, 1));
        assert!(
            slot >= self.valence.up && slot < self.valence.rank(),
            "covariant slot expected"
        );
        let n = self.dim;
        let mut src = vec![0usize; self.valence.rank()];
        TensorValue::from_fn(n, self.valence, |ix| {
            src.copy_from_slice(ix);
            let i = ix[slot];
            let mut acc = 0.0;
            for s in 0..n {
                let a = p.at(s, i);
                if a != 0.0 {
                    src[slot] = s;
                    acc += a * self.get(&src);
                }
            }
            acc
        })
    }

    /// Lower contravariant slot `upper` with `g`; the new covariant slot is
    /// appended after the existing ones.
    pub fn lower_last(&self, upper: usize, g: &TensorValue) -> TensorValue {
        assert_eq!(g.valence, Valence::new(0, 2));
        let (p, q) = (self.valence.up, self.valence.down);
        assert!(upper < p);
        let n = self.dim;
        let mut src = vec![0usize; p + q];
        TensorValue::from_fn(n, Valence::new(p - 1, q + 1), |ix| {
            // ix = [up without `upper`, down..., new]
            let new = ix[p + q - 1];
            let mut it = ix[..p + q - 1].iter();
            for (s, slot) in src.iter_mut().enumerate() {
                if s != upper {
                    *slot = *it.next().expect("arity");
                }
            }
            (0..n)
                .map(|k| {
                    src[upper] = k;
                    g.at(new, k) * self.get(&src)
                })
                .sum()
        })
    }

    /// Raise covariant slot `lower` (absolute) with `g⁻¹`; the new
    /// contravariant slot is prepended before the existing ones.
    pub fn raise_first(&self, lower: usize, ginv: &TensorValue) -> TensorValue {
        assert_eq!(ginv.valence, Valence::new(2, 0));
        let (p, q) = (self.valence.up, self.valence.down);
        assert!(lower >= p && lower < p + q);
        let n = self.dim;
        let mut src = vec![0usize; p + q];
        TensorValue::from_fn(n, Valence::new(p + 1, q - 1), |ix| {
            let new = ix[0];
            let mut it = ix[1..].iter();
            for (s, slot) in src.iter_mut().enumerate() {
                if s != lower {
                    *slot = *it.next().expect("arity");
                }
            }
            (0..n)
                .map(|k| {
                    src[lower] = k;
                    ginv.at(new, k) * self.get(&src)
                })
                .sum()
        })
    }

    /// Matrix product of rank-2 tensors, pairing `self`'s second slot with
    /// `o`'s first. Valences combine accordingly.
    pub fn matmul(&self, o: &TensorValue) -> TensorValue {
        assert_eq!(self.valence.rank(), 2);
        assert_eq!(o.valence.rank(), 2);
        let n = self.dim;
        let first_up = self.valence.up >= 1;
        let second_up = o.valence.up == 2;
        let val = Valence::new(
            first_up as usize + second_up as usize,
            2 - first_up as usize - second_up as usize,
        );
        let mut out = TensorValue::zeros(n, val);
        for r in 0..n {
            for c in 0..n {
                out.comps[r * n + c] = (0..n).map(|s| self.at(r, s) * o.at(s, c)).sum();
            }
        }
        out
    }

    pub fn transpose(&self) -> TensorValue {
        assert_eq!(self.valence.rank(), 2);
        let n = self.dim;
        TensorValue::from_fn(n, self.valence, |ix| self.at(ix[1], ix[0]))
    }

    /// `P X` for a `(1,1)` tensor and a vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.valence, Valence::new(1, 1));
        let n = self.dim;
        (0..n).map(|k| (0..n).map(|i| self.at(k, i) * v[i]).sum()).collect()
    }

    /// Bilinear form `b(X, Y)` for a `(0,2)` tensor.
    pub fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.at(i, j) * x[i] * y[j];
            }
        }
        acc
    }
}

/// Inverse of a `(0,2)` tensor (returns `(2,0)`) or of a `(1,1)` tensor.
///
/// Fails when a pivot vanishes or the 1-norm condition estimate exceeds
/// [`MAX_CONDITION`].
pub fn invert_matrix(m: &TensorValue) -> Result<TensorValue, TensorError> {
    let val = m.valence();
    let out_val = match (val.up, val.down) {
        (0, 2) => Valence::new(2, 0),
        (1, 1) => Valence::new(1, 1),
        (2, 0) => Valence::new(0, 2),
        _ => return Err(TensorError::Shape(format!("cannot invert a {val} tensor"))),
    };
    let inv = invert_rows(m.dim(), m.comps())?;
    Ok(TensorValue::from_vec(m.dim(), out_val, inv)?)
}

/// `‖a − b‖∞ / (1 + max(‖a‖∞, ‖b‖∞))`.
pub fn relative_residual(a: &TensorValue, b: &TensorValue) -> f64 {
    let diff = a.sub(b).sup_norm();
    diff / (1.0 + a.sup_norm().max(b.sup_norm()))
}

fn increment(idx: &mut [usize], dim: usize) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dim {
            return;
        }
        idx[k] = 0;
    }
}

/// All permutations of `0..k` with their signs.
fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    heap_permute(k, &mut cur, &mut out);
    out.into_iter()
        .map(|p| {
            let s = permutation_sign(&p);
            (p, s)
        })
        .collect()
}

fn heap_permute(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, a, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, a, out);
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
