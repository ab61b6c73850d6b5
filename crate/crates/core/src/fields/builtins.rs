//! Model spaces: flat Kähler, round S², nearly Kähler S⁶, weighted and
//! line products, and two negative-control specs.
//!
//! Builtins are named by a small descriptor language:
//! `flat_kahler(4)`, `round_s2(2)`, `s6`, `line_product(s6)`,
//! `weighted_product([t2, t2], [1, 4])`.

use std::fmt;

use thiserror::Error;

use crate::expr::{parse_expr, BinOp, Expr};

use super::{Embedding, ExprMatrix, FieldError, ManifoldSpec, Metric, Structure, DEFAULT_DOMAIN};

/// Chart box for the orthographic S⁶ chart: `|u| ≤ 0.32·√6 < 0.8`.
const S6_HALF_WIDTH: f64 = 0.32;

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    FlatKahler(usize),
    FlatTorusKahler(usize),
    RoundS2(f64),
    S6NearlyKahler,
    WeightedProduct(Vec<Builtin>, Vec<f64>),
    LineProduct(Box<Builtin>),
    /// Generic `F` on flat `ℝ⁴` violating the existence criterion.
    ControlNoncriterion,
    /// `Q` with an eigenvalue that varies over the chart.
    ControlDrift,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad builtin descriptor at byte {offset}: {message}")]
pub struct BuiltinParseError {
    pub offset: usize,
    pub message: String,
}

enum Arg {
    Num(f64),
    List(Vec<Arg>),
    Spec(Builtin),
}

struct DescParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl DescParser<'_> {
    fn err(&self, message: impl Into<String>) -> BuiltinParseError {
        BuiltinParseError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn arg(&mut self) -> Result<Arg, BuiltinParseError> {
        match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let items = self.items(b']')?;
                Ok(Arg::List(items))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'-' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || b".-+".contains(&self.src[self.pos]))
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                text.parse().map(Arg::Num).map_err(|_| BuiltinParseError {
                    offset: start,
                    message: format!("bad number `{text}`"),
                })
            }
            Some(_) => Ok(Arg::Spec(self.descriptor()?)),
            None => Err(self.err("unexpected end")),
        }
    }

    fn items(&mut self, close: u8) -> Result<Vec<Arg>, BuiltinParseError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.arg()?);
            if self.eat(close) {
                return Ok(out);
            }
            if !self.eat(b',') {
                return Err(self.err(format!("expected `,` or `{}`", close as char)));
            }
        }
    }

    fn descriptor(&mut self) -> Result<Builtin, BuiltinParseError> {
        self.peek();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a builtin name"));
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .to_string();
        let args = if self.eat(b'(') { self.items(b')')? } else { Vec::new() };
        let bad = |m: &str| BuiltinParseError {
            offset: start,
            message: format!("{name}: {m}"),
        };
        let int_arg = |args: &[Arg], default: usize| -> Result<usize, BuiltinParseError> {
            match args {
                [] => Ok(default),
                [Arg::Num(x)] if x.fract() == 0.0 && *x >= 1.0 => Ok(*x as usize),
                _ => Err(bad("expected one positive integer")),
            }
        };
        Ok(match name.as_str() {
            "flat_kahler" => Builtin::FlatKahler(int_arg(&args, 4)?),
            "flat_torus_kahler" => Builtin::FlatTorusKahler(int_arg(&args, 2)?),
            "t2" if args.is_empty() => Builtin::FlatTorusKahler(2),
            "round_s2" => match args.as_slice() {
                [] => Builtin::RoundS2(1.0),
                [Arg::Num(r)] => Builtin::RoundS2(*r),
                _ => return Err(bad("expected a radius")),
            },
            "s6_nearly_kahler" | "s6" if args.is_empty() => Builtin::S6NearlyKahler,
            "control_noncriterion" if args.is_empty() => Builtin::ControlNoncriterion,
            "control_drift" if args.is_empty() => Builtin::ControlDrift,
            "line_product" => match args.into_iter().next() {
                Some(Arg::Spec(b)) => Builtin::LineProduct(Box::new(b)),
                _ => return Err(bad("expected one factor")),
            },
            "weighted_product" => {
                let mut it = args.into_iter();
                match (it.next(), it.next(), it.next()) {
                    (Some(Arg::List(fs)), Some(Arg::List(ws)), None) => {
                        let factors = fs
                            .into_iter()
                            .map(|a| match a {
                                Arg::Spec(b) => Ok(b),
                                _ => Err(bad("factors must be builtins")),
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        let weights = ws
                            .into_iter()
                            .map(|a| match a {
                                Arg::Num(w) => Ok(w),
                                _ => Err(bad("weights must be numbers")),
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        Builtin::WeightedProduct(factors, weights)
                    }
                    _ => return Err(bad("expected ([factors], [weights])")),
                }
            }
            _ => {
                return Err(BuiltinParseError {
                    offset: start,
                    message: format!("unknown builtin `{name}`"),
                })
            }
        })
    }
}

impl Builtin {
    pub fn parse(text: &str) -> Result<Builtin, BuiltinParseError> {
        let mut p = DescParser {
            src: text.as_bytes(),
            pos: 0,
        };
        let b = p.descriptor()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(b)
    }

    pub fn spec(&self) -> Result<ManifoldSpec, FieldError> {
        let mut spec = match self {
            Builtin::FlatKahler(n) => flat_kahler(*n, vec![DEFAULT_DOMAIN; *n])?,
            Builtin::FlatTorusKahler(n) => flat_kahler(*n, vec![(0.0, std::f64::consts::TAU); *n])?,
            Builtin::RoundS2(r) => round_s2(*r)?,
            Builtin::S6NearlyKahler => s6(),
            Builtin::WeightedProduct(fs, ws) => {
                let specs = fs.iter().map(|f| f.spec()).collect::<Result<Vec<_>, _>>()?;
                weighted_product(&specs, ws)?
            }
            Builtin::LineProduct(b) => line_product(&b.spec()?)?,
            Builtin::ControlNoncriterion => control_noncriterion(),
            Builtin::ControlDrift => control_drift(),
        };
        spec.name = self.to_string();
        Ok(spec)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::FlatKahler(n) => write!(f, "flat_kahler({n})"),
            Builtin::FlatTorusKahler(n) => write!(f, "flat_torus_kahler({n})"),
            Builtin::RoundS2(r) => write!(f, "round_s2({r})"),
            Builtin::S6NearlyKahler => f.write_str("s6_nearly_kahler"),
            Builtin::WeightedProduct(fs, ws) => {
                f.write_str("weighted_product([")?;
                for (i, b) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_str("],[")?;
                for (i, w) in ws.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
                f.write_str("])")
            }
            Builtin::LineProduct(b) => write!(f, "line_product({b})"),
            Builtin::ControlNoncriterion => f.write_str("control_noncriterion"),
            Builtin::ControlDrift => f.write_str("control_drift"),
        }
    }
}

/// Build a validated builtin spec from its descriptor.
pub fn builtin(descriptor: &str) -> Result<ManifoldSpec, FieldError> {
    let spec = Builtin::parse(descriptor)?.spec()?;
    spec.validate()?;
    Ok(spec)
}

fn ex(text: &str, vars: usize) -> Expr {
    parse_expr(text, vars).unwrap_or_else(|e| panic!("builtin expression `{text}`: {e}"))
}

fn matrix(n: usize, vars: usize, f: impl Fn(usize, usize) -> String) -> ExprMatrix {
    (0..n).map(|i| (0..n).map(|j| ex(&f(i, j), vars)).collect()).collect()
}

fn identity(n: usize) -> ExprMatrix {
    matrix(n, n.max(1), |i, j| if i == j { "1".into() } else { "0".into() })
}

fn zero() -> Expr {
    Expr::Const(0.0)
}

fn scaled(s: f64, e: &Expr) -> Expr {
    if s == 1.0 {
        e.clone()
    } else if e.is_zero_literal() {
        zero()
    } else {
        Expr::bin(BinOp::Mul, Expr::Const(s), e.clone())
    }
}

fn block_diag(blocks: &[ExprMatrix]) -> ExprMatrix {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = vec![vec![zero(); n]; n];
    let mut o = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[o + i][o + j] = e.clone();
            }
        }
        o += b.len();
    }
    out
}

fn shift_matrix(m: &ExprMatrix, by: usize) -> ExprMatrix {
    m.iter()
        .map(|r| r.iter().map(|e| e.remap_vars(&|v| v + by)).collect())
        .collect()
}

fn shift_vector(v: &[Expr], by: usize) -> Vec<Expr> {
    v.iter().map(|e| e.remap_vars(&|i| i + by)).collect()
}

/// `(g, F)` of a chart spec as separate expression matrices.
fn split_exprs(metric: &Metric) -> (ExprMatrix, ExprMatrix) {
    match metric {
        Metric::Split { g, f } => (g.clone(), f.clone()),
        Metric::Full(big) => {
            let n = big.len();
            let half = |op: BinOp, i: usize, j: usize| {
                Expr::bin(
                    BinOp::Mul,
                    Expr::Const(0.5),
                    Expr::bin(op, big[i][j].clone(), big[j][i].clone()),
                )
            };
            let g = (0..n)
                .map(|i| (0..n).map(|j| half(BinOp::Add, i, j)).collect())
                .collect();
            let f = (0..n)
                .map(|i| (0..n).map(|j| half(BinOp::Sub, i, j)).collect())
                .collect();
            (g, f)
        }
    }
}

fn is_literal_identity(m: &ExprMatrix) -> bool {
    m.iter().enumerate().all(|(i, r)| {
        r.iter()
            .enumerate()
            .all(|(j, e)| matches!(e, Expr::Const(c) if *c == if i == j { 1.0 } else { 0.0 }))
    })
}

fn flat_kahler(n: usize, domain: Vec<(f64, f64)>) -> Result<ManifoldSpec, FieldError> {
    if n == 0 || n % 2 != 0 {
        return Err(FieldError::Builtin(format!(
            "Kähler builders need an even dimension, got {n}"
        )));
    }
    // F = Σ dx^{2i} ∧ dx^{2i+1}; A is the matching block J.
    let f = matrix(n, n, |i, j| {
        if i / 2 != j / 2 || i == j {
            "0".into()
        } else if i % 2 == 0 {
            "1".into()
        } else {
            "-1".into()
        }
    });
    let a = matrix(n, n, |k, i| {
        if k / 2 != i / 2 || k == i {
            "0".into()
        } else if k % 2 == 0 {
            "-1".into()
        } else {
            "1".into()
        }
    });
    Ok(ManifoldSpec {
        name: String::new(),
        dim: n,
        domain,
        metric: Some(Metric::Split { g: identity(n), f }),
        embedding: None,
        structure: Structure {
            a: Some(a),
            q: Some(identity(n)),
            xi: None,
            eta: None,
        },
    })
}

/// Round sphere of radius `r` in the chart `(θ, φ)`.
fn round_s2(r: f64) -> Result<ManifoldSpec, FieldError> {
    if !(r > 0.0) {
        return Err(FieldError::Builtin(format!("radius must be positive, got {r}")));
    }
    let r2 = r * r;
    let g = vec![
        vec![ex(&format!("{r2}"), 2), zero()],
        vec![zero(), ex(&format!("{r2}*sin(x0)^2"), 2)],
    ];
    let f = vec![
        vec![zero(), ex(&format!("{r2}*sin(x0)"), 2)],
        vec![ex(&format!("-{r2}*sin(x0)"), 2), zero()],
    ];
    let a = vec![vec![zero(), ex("-sin(x0)", 2)], vec![ex("1/sin(x0)", 2), zero()]];
    Ok(ManifoldSpec {
        name: String::new(),
        dim: 2,
        domain: vec![(0.4, 2.7), (-0.8, 0.8)],
        metric: Some(Metric::Split { g, f }),
        embedding: None,
        structure: Structure {
            a: Some(a),
            q: Some(identity(2)),
            xi: None,
            eta: None,
        },
    })
}

/// Structure constants `ε_{ijk}` of the cross product on `ℝ⁷` (0-based).
pub(crate) fn octonion_epsilon() -> [[[i8; 7]; 7]; 7] {
    const TRIPLES: [[usize; 3]; 7] = [
        [1, 2, 3],
        [1, 4, 5],
        [1, 7, 6],
        [2, 4, 6],
        [2, 5, 7],
        [3, 4, 7],
        [3, 6, 5],
    ];
    let mut eps = [[[0i8; 7]; 7]; 7];
    for t in TRIPLES {
        let [a, b, c] = t.map(|x| x - 1);
        for (i, j, k, s) in [
            (a, b, c, 1),
            (b, c, a, 1),
            (c, a, b, 1),
            (b, a, c, -1),
            (a, c, b, -1),
            (c, b, a, -1),
        ] {
            eps[i][j][k] = s;
        }
    }
    eps
}

fn s6() -> ManifoldSpec {
    let eps = octonion_epsilon();
    let mut map: Vec<Expr> = (0..6).map(Expr::Var).collect();
    let radicand: Vec<String> = (0..6).map(|i| format!(" - x{i}^2")).collect();
    map.push(ex(&format!("sqrt(1{})", radicand.concat()), 6));
    // (p × X)^k = ε_{ijk} p_i X_j, so row k column j is Σ_i ε_{ijk} x_i.
    let a_ambient = matrix(7, 7, |k, j| {
        let mut s = String::new();
        for (i, plane) in eps.iter().enumerate() {
            match plane[j][k] {
                1 => s.push_str(&format!("{}x{i}", if s.is_empty() { "" } else { " + " })),
                -1 => s.push_str(&format!("{}x{i}", if s.is_empty() { "-" } else { " - " })),
                _ => {}
            }
        }
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    });
    ManifoldSpec {
        name: String::new(),
        dim: 6,
        domain: vec![(-S6_HALF_WIDTH, S6_HALF_WIDTH); 6],
        metric: None,
        embedding: Some(Embedding {
            ambient_dim: 7,
            map,
            a_ambient,
        }),
        structure: Structure {
            a: None,
            q: Some(identity(6)),
            xi: None,
            eta: None,
        },
    }
}

/// `⊕ M_j` with `A = ⊕√λ_j A_j`, `Q = ⊕λ_j Q_j`.
pub(crate) fn weighted_product(factors: &[ManifoldSpec], weights: &[f64]) -> Result<ManifoldSpec, FieldError> {
    if factors.is_empty() || factors.len() != weights.len() {
        return Err(FieldError::Builtin("need one positive weight per factor".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(FieldError::Builtin(format!("weights must be positive, got {w}")));
    }
    for f in factors {
        if f.has_contact() || f.structure.xi.is_some() {
            return Err(FieldError::Builtin("weighted product factors must be Hermitian".into()));
        }
        if f.structure.a.is_none() && f.embedding.is_none() {
            return Err(FieldError::Builtin(format!("factor {} carries no A", f.name)));
        }
    }
    let dim: usize = factors.iter().map(|f| f.dim).sum();
    let mut domain = Vec::with_capacity(dim);
    let mut q_blocks = Vec::new();
    let mut offset = 0;
    for (f, &w) in factors.iter().zip(weights) {
        domain.extend_from_slice(&f.domain);
        let q = f.structure.q.clone().unwrap_or_else(|| identity(f.dim));
        q_blocks.push(
            shift_matrix(&q, offset)
                .iter()
                .map(|r| r.iter().map(|e| scaled(w, e)).collect())
                .collect(),
        );
        offset += f.dim;
    }
    let q = block_diag(&q_blocks);
    let any_embedded = factors.iter().any(|f| f.embedding.is_some());
    if !any_embedded {
        let (mut gs, mut fs, mut as_) = (Vec::new(), Vec::new(), Vec::new());
        let mut offset = 0;
        for (f, &w) in factors.iter().zip(weights) {
            let (g, ff) = split_exprs(f.metric.as_ref().expect("chart factor"));
            let root = w.sqrt();
            gs.push(shift_matrix(&g, offset));
            let scale = |m: &ExprMatrix| -> ExprMatrix {
                shift_matrix(m, offset)
                    .iter()
                    .map(|r| r.iter().map(|e| scaled(root, e)).collect())
                    .collect()
            };
            fs.push(scale(&ff));
            as_.push(scale(f.structure.a.as_ref().expect("checked above")));
            offset += f.dim;
        }
        return Ok(ManifoldSpec {
            name: String::new(),
            dim,
            domain,
            metric: Some(Metric::Split {
                g: block_diag(&gs),
                f: block_diag(&fs),
            }),
            embedding: None,
            structure: Structure {
                a: Some(block_diag(&as_)),
                q: Some(q),
                xi: None,
                eta: None,
            },
        });
    }
    let ambient: usize = factors
        .iter()
        .map(|f| f.embedding.as_ref().map_or(f.dim, |e| e.ambient_dim))
        .sum();
    let mut map = Vec::with_capacity(ambient);
    let mut amb_blocks = Vec::new();
    let (mut chart_off, mut amb_off) = (0, 0);
    for (f, &w) in factors.iter().zip(weights) {
        let root = w.sqrt();
        let scale = |m: &ExprMatrix, by: usize| -> ExprMatrix {
            shift_matrix(m, by)
                .iter()
                .map(|r| r.iter().map(|e| scaled(root, e)).collect())
                .collect()
        };
        match (&f.embedding, &f.metric) {
            (Some(e), _) => {
                map.extend(shift_vector(&e.map, chart_off));
                amb_blocks.push(scale(&e.a_ambient, amb_off));
                amb_off += e.ambient_dim;
            }
            (None, Some(Metric::Split { g, .. })) if is_literal_identity(g) => {
                // Flat chart factor embeds by the identity map.
                map.extend((0..f.dim).map(|i| Expr::Var(chart_off + i)));
                amb_blocks.push(scale(f.structure.a.as_ref().expect("checked above"), amb_off));
                amb_off += f.dim;
            }
            _ => {
                return Err(FieldError::Builtin(format!(
                    "cannot mix chart factor {} (non-identity metric) with embedded factors",
                    f.name
                )))
            }
        }
        chart_off += f.dim;
    }
    Ok(ManifoldSpec {
        name: String::new(),
        dim,
        domain,
        metric: None,
        embedding: Some(Embedding {
            ambient_dim: ambient,
            map,
            a_ambient: block_diag(&amb_blocks),
        }),
        structure: Structure {
            a: None,
            q: Some(q),
            xi: None,
            eta: None,
        },
    })
}

/// `ℝ × M` with `ξ = ∂_t`, `η = dt`, `A = 0 ⊕ A`, `Q = 1 ⊕ Q`; `t` is coordinate 0.
pub(crate) fn line_product(base: &ManifoldSpec) -> Result<ManifoldSpec, FieldError> {
    if base.structure.xi.is_some() {
        return Err(FieldError::Builtin("line product base already has a Reeb field".into()));
    }
    let n = base.dim + 1;
    let one = || vec![vec![Expr::Const(1.0)]];
    let nil = || vec![vec![zero()]];
    let mut domain = vec![DEFAULT_DOMAIN];
    domain.extend_from_slice(&base.domain);
    let q = block_diag(&[
        one(),
        shift_matrix(&base.structure.q.clone().unwrap_or_else(|| identity(base.dim)), 1),
    ]);
    let mut xi = vec![zero(); n];
    xi[0] = Expr::Const(1.0);
    let structure_a = base
        .structure
        .a
        .as_ref()
        .map(|a| block_diag(&[nil(), shift_matrix(a, 1)]));
    let (metric, embedding) = match (&base.metric, &base.embedding) {
        (Some(m), _) => {
            let (g, f) = split_exprs(m);
            (
                Some(Metric::Split {
                    g: block_diag(&[one(), shift_matrix(&g, 1)]),
                    f: block_diag(&[nil(), shift_matrix(&f, 1)]),
                }),
                None,
            )
        }
        (None, Some(e)) => {
            let mut map = vec![Expr::Var(0)];
            map.extend(shift_vector(&e.map, 1));
            (
                None,
                Some(Embedding {
                    ambient_dim: e.ambient_dim + 1,
                    map,
                    a_ambient: block_diag(&[nil(), shift_matrix(&e.a_ambient, 1)]),
                }),
            )
        }
        (None, None) => unreachable!("spec has a metric source"),
    };
    Ok(ManifoldSpec {
        name: String::new(),
        dim: n,
        domain,
        metric,
        embedding,
        structure: Structure {
            a: structure_a,
            q: Some(q),
            xi: Some(xi.clone()),
            eta: Some(xi),
        },
    })
}

fn control_noncriterion() -> ManifoldSpec {
    let entries = [
        (0, 1, "1 + 0.5*x2^2 + x3"),
        (0, 2, "0.3*x1*x3"),
        (0, 3, "0.2 + x1"),
        (1, 2, "x0*x3 - 0.4"),
        (1, 3, "0.4*x2^2"),
        (2, 3, "1 + x0*x1"),
    ];
    let mut f = vec![vec!["0".to_string(); 4]; 4];
    for (i, j, s) in entries {
        f[i][j] = s.to_string();
        f[j][i] = format!("-({s})");
    }
    ManifoldSpec {
        name: String::new(),
        dim: 4,
        domain: vec![DEFAULT_DOMAIN; 4],
        metric: Some(Metric::Split {
            g: identity(4),
            f: matrix(4, 4, |i, j| f[i][j].clone()),
        }),
        embedding: None,
        structure: Structure::default(),
    }
}

fn control_drift() -> ManifoldSpec {
    let a = matrix(4, 4, |k, i| match (k, i) {
        (0, 1) => "-sqrt(1 + x0^2)".into(),
        (1, 0) => "sqrt(1 + x0^2)".into(),
        (2, 3) => "-1".into(),
        (3, 2) => "1".into(),
        _ => "0".into(),
    });
    // g = δ, so F_ij = A^j_i.
    let f = a
        .iter()
        .enumerate()
        .map(|(i, _)| (0..4).map(|j| a[j][i].clone()).collect())
        .collect();
    let q = matrix(4, 4, |i, j| match (i, j) {
        (0, 0) | (1, 1) => "1 + x0^2".into(),
        (2, 2) | (3, 3) => "1".into(),
        _ => "0".into(),
    });
    ManifoldSpec {
        name: String::new(),
        dim: 4,
        domain: vec![DEFAULT_DOMAIN; 4],
        metric: Some(Metric::Split { g: identity(4), f }),
        embedding: None,
        structure: Structure {
            a: Some(a),
            q: Some(q),
            xi: None,
            eta: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample_points, FieldProvider};
    use crate::tensor::TensorValue;

    #[test]
    fn descriptors_round_trip() {
        for d in [
            "flat_kahler(4)",
            "round_s2(2.5)",
            "s6_nearly_kahler",
            "line_product(s6_nearly_kahler)",
            "weighted_product([flat_torus_kahler(2),flat_torus_kahler(2)],[1,4])",
        ] {
            assert_eq!(Builtin::parse(d).unwrap().to_string(), d);
        }
        assert_eq!(Builtin::parse("s6").unwrap(), Builtin::S6NearlyKahler);
        assert_eq!(
            Builtin::parse("weighted_product([t2, t2], [1, 4])")
                .unwrap()
                .to_string(),
            "weighted_product([flat_torus_kahler(2),flat_torus_kahler(2)],[1,4])"
        );
        assert!(Builtin::parse("nope").is_err());
        assert!(Builtin::parse("flat_kahler(4").is_err());
    }

    #[test]
    fn flat_kahler_f_components() {
        let s = builtin("flat_kahler(4)").unwrap();
        let p = FieldProvider::new(s);
        let f = p.value("F", &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut want = TensorValue::zeros(4, f.valence());
        for (i, j, v) in [(0, 1, 1.0), (1, 0, -1.0), (2, 3, 1.0), (3, 2, -1.0)] {
            want.set(&[i, j], v);
        }
        assert_eq!(f, want);
    }

    #[test]
    fn odd_dimension_and_bad_weights_fail() {
        assert!(matches!(builtin("flat_kahler(3)"), Err(FieldError::Builtin(_))));
        assert!(matches!(
            builtin("weighted_product([t2],[0])"),
            Err(FieldError::Builtin(_))
        ));
        assert!(matches!(
            builtin("weighted_product([t2],[1,2])"),
            Err(FieldError::Builtin(_))
        ));
    }

    #[test]
    fn weighted_product_blocks() {
        let p = FieldProvider::new(builtin("weighted_product([t2,t2],[1,4])").unwrap());
        let pt = [0.5, 1.0, 2.0, 3.0];
        let q = p.value("Q", &pt).unwrap();
        let a = p.value("A", &pt).unwrap();
        for i in 0..4 {
            assert_eq!(q.at(i, i), [1.0, 1.0, 4.0, 4.0][i]);
        }
        assert_eq!(a.at(1, 0), 1.0);
        assert_eq!(a.at(0, 1), -1.0);
        assert_eq!(a.at(3, 2), 2.0);
        assert_eq!(a.at(2, 3), -2.0);
    }

    #[test]
    fn s6_structure_squares_to_minus_identity() {
        let p = FieldProvider::new(builtin("s6").unwrap());
        for pt in std::iter::once(vec![0.0; 6]).chain(sample_points(&p.spec().domain, 8, 5)) {
            let a = p.value("A", &pt).unwrap();
            let a2 = a.matmul(&a);
            let err = a2.add(&TensorValue::identity(6)).sup_norm();
            assert!(err < 1e-12, "A² + Id = {err} at {pt:?}");
        }
    }

    #[test]
    fn epsilon_is_a_cross_product() {
        // |p × x|² = |p|²|x|² − (p·x)² for random p, x.
        let eps = octonion_epsilon();
        let p = [0.3, -0.1, 0.7, 0.2, -0.5, 0.4, 0.1];
        let x = [0.2, 0.9, -0.3, 0.1, 0.0, -0.6, 0.5];
        let mut c = [0.0; 7];
        for i in 0..7 {
            for j in 0..7 {
                for k in 0..7 {
                    c[k] += eps[i][j][k] as f64 * p[i] * x[j];
                }
            }
        }
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let lhs = dot(&c, &c);
        let rhs = dot(&p, &p) * dot(&x, &x) - dot(&p, &x).powi(2);
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn line_product_has_contact_fields() {
        let s = builtin("line_product(s6)").unwrap();
        assert_eq!(s.dim, 7);
        assert_eq!(s.embedding.as_ref().unwrap().ambient_dim, 8);
        let p = FieldProvider::new(s);
        let pt = [0.3, 0.1, -0.2, 0.05, 0.0, 0.1, -0.1];
        let a = p.value("A", &pt).unwrap();
        let xi = p.value("xi", &pt).unwrap();
        assert!(a.apply(xi.comps()).iter().all(|v| v.abs() < 1e-14));
    }
}
