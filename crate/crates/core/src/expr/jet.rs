//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the normalized Taylor coefficients `∂^α f / α!` of a
//! function of `n` variables for every multi-index `|α| ≤ order`. Products
//! are truncated polynomial products, and the elementary functions are
//! applied by composing their univariate Taylor series with the nilpotent
//! part of the argument, so every derivative up to `order` is exact.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Raised when a scalar operation leaves its domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("sqrt of negative value {0}")]
    SqrtNegative(f64),
    #[error("sqrt at zero is not differentiable")]
    SqrtAtZero,
    #[error("non-finite result")]
    NonFinite,
}

/// Arithmetic needed by the generic linear algebra in this crate.
///
/// Implemented for `f64` (plain values) and [`Jet`] (values plus exact
/// partial derivatives).
pub trait Scalar: Clone + fmt::Debug + Send + Sync {
    /// A constant with the same shape (variables, order) as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, s: f64) -> Self;
    fn negated(&self) -> Self {
        self.scaled(-1.0)
    }
    fn recip(&self) -> Result<Self, DomainError>;
    fn divide(&self, o: &Self) -> Result<Self, DomainError> {
        Ok(self.times(&o.recip()?))
    }
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Result<Self, DomainError>;
    fn powi(&self, k: i32) -> Result<Self, DomainError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.constant_like(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.times(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.times(&sq);
            }
        }
        Ok(acc)
    }
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn recip(&self) -> Result<Self, DomainError> {
        if *self == 0.0 {
            Err(DomainError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Result<Self, DomainError> {
        if *self < 0.0 {
            Err(DomainError::SqrtNegative(*self))
        } else {
            Ok(f64::sqrt(*self))
        }
    }
}

/// Monomial layout shared by all jets of a given `(nvars, order)`.
///
/// Monomials are graded by total degree and ordered lexicographically inside
/// a degree, so the basis of a lower order is a prefix of a higher one.
#[derive(Debug)]
pub struct Basis {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    // (lhs, rhs, out) for every pair with deg(lhs) + deg(rhs) <= order
    products: Vec<(u32, u32, u32)>,
}

impl Basis {
    fn build(nvars: usize, order: usize) -> Basis {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u8; nvars];
            push_degree(&mut exps, &mut cur, 0, d);
        }
        let index: HashMap<Vec<u8>, usize> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let deg: Vec<usize> = exps.iter().map(|e| e.iter().map(|&x| x as usize).sum()).collect();
        let mut products = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if deg[a] + deg[b] > order {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                products.push((a as u32, b as u32, index[&sum] as u32));
            }
        }
        Basis {
            nvars,
            order,
            exps,
            index,
            products,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    fn slot(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, var: usize, remaining: usize) {
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if var + 1 == cur.len() {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(out, cur, var + 1, remaining - k);
    }
    cur[var] = 0;
}

/// Shared basis for `(nvars, order)`.
pub fn basis(nvars: usize, order: usize) -> Arc<Basis> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard
        .entry((nvars, order))
        .or_insert_with(|| Arc::new(Basis::build(nvars, order)))
        .clone()
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.basis.nvars)
            .field("order", &self.basis.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(basis: &Arc<Basis>, c: f64) -> Jet {
        let mut coeffs = vec![0.0; basis.len()];
        coeffs[0] = c;
        Jet {
            basis: basis.clone(),
            coeffs,
        }
    }

    /// The coordinate function `x_i` expanded at `x_i = value`.
    pub fn variable(basis: &Arc<Basis>, i: usize, value: f64) -> Jet {
        let mut j = Jet::constant(basis, value);
        if basis.order >= 1 {
            let mut e = vec![0u8; basis.nvars];
            e[i] = 1;
            let s = basis.slot(&e).expect("variable index within basis");
            j.coeffs[s] = 1.0;
        }
        j
    }

    /// All coordinate functions expanded at `point`.
    pub fn variables(point: &[f64], order: usize) -> Vec<Jet> {
        let b = basis(point.len(), order);
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(&b, i, v))
            .collect()
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars
    }

    pub fn order(&self) -> usize {
        self.basis.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Partial derivative `∂^α f` for the multi-index given as a list of
    /// variable indices (repetitions allowed).
    pub fn derivative(&self, vars: &[usize]) -> f64 {
        if vars.len() > self.basis.order {
            panic!(
                "derivative of order {} requested from a jet of order {}",
                vars.len(),
                self.basis.order
            );
        }
        let mut e = vec![0u8; self.basis.nvars];
        for &v in vars {
            e[v] += 1;
        }
        let s = self.basis.slot(&e).expect("multi-index within basis");
        let fact: f64 = e.iter().map(|&k| factorial(k as usize)).product();
        self.coeffs[s] * fact
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars()).map(|i| self.derivative(&[i])).collect()
    }

    /// The jet of `∂f/∂x_i`, one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.basis.order >= 1, "cannot differentiate an order-0 jet");
        let lower = basis(self.basis.nvars, self.basis.order - 1);
        let mut coeffs = vec![0.0; lower.len()];
        for (s, e) in lower.exps.iter().enumerate() {
            let mut up = e.clone();
            up[i] += 1;
            let src = self.basis.slot(&up).expect("raised multi-index within basis");
            coeffs[s] = self.coeffs[src] * up[i] as f64;
        }
        Jet { basis: lower, coeffs }
    }

    /// Drop every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.basis.order);
        let lower = basis(self.basis.nvars, order);
        Jet {
            coeffs: self.coeffs[..lower.len()].to_vec(),
            basis: lower,
        }
    }

    fn same_shape(&self, o: &Jet) {
        debug_assert!(
            Arc::ptr_eq(&self.basis, &o.basis),
            "jets over different bases: ({}, {}) vs ({}, {})",
            self.basis.nvars,
            self.basis.order,
            o.basis.nvars,
            o.basis.order
        );
    }

    /// Apply a univariate function given its derivatives `d[k] = f^(k)(value)`.
    fn compose(&self, d: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Jet::constant(&self.basis, d[0]);
        let mut pow = Jet::constant(&self.basis, 1.0);
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1) {
            pow = pow.times(&h);
            fact *= k as f64;
            let c = dk / fact;
            for (o, p) in out.coeffs.iter_mut().zip(&pow.coeffs) {
                *o += c * p;
            }
        }
        out
    }

    fn check_finite(self) -> Result<Jet, DomainError> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(DomainError::NonFinite)
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

impl Scalar for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(&self.basis, c)
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn plus(&self, o: &Self) -> Self {
        self.same_shape(o);
        Jet {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    fn minus(&self, o: &Self) -> Self {
        self.same_shape(o);
        Jet {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    fn times(&self, o: &Self) -> Self {
        self.same_shape(o);
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(a, b, c) in &self.basis.products {
            coeffs[c as usize] += self.coeffs[a as usize] * o.coeffs[b as usize];
        }
        Jet {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    fn scaled(&self, s: f64) -> Self {
        Jet {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn recip(&self) -> Result<Self, DomainError> {
        let v = self.value();
        if v == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        // d^k/dx^k x^-1 = (-1)^k k! x^(-k-1)
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut term = 1.0 / v;
        for k in 0..=self.order() {
            d.push(term);
            term *= -((k + 1) as f64) / v;
        }
        self.compose(&d).check_finite()
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    fn sqrt(&self) -> Result<Self, DomainError> {
        let v = self.value();
        if v < 0.0 {
            return Err(DomainError::SqrtNegative(v));
        }
        if v == 0.0 && self.order() > 0 {
            return Err(DomainError::SqrtAtZero);
        }
        // d^k/dx^k x^(1/2) = (1/2)(1/2 - 1)...(1/2 - k + 1) x^(1/2 - k)
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = 1.0;
        for k in 0..=self.order() {
            d.push(coef * v.powf(0.5 - k as f64));
            coef *= 0.5 - k as f64;
        }
        self.compose(&d).check_finite()
    }
}
