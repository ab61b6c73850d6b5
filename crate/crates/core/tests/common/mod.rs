//! Random expression trees that stay finite and smooth on `[-1, 1]ⁿ`.

#![allow(dead_code)]

use genriem::expr::{BinOp, Expr, Func};
use rand::Rng;

fn leaf<R: Rng>(rng: &mut R, nvars: usize) -> Expr {
    if rng.gen_bool(0.3) {
        Expr::constant((rng.gen_range(-2.0..2.0f64) * 8.0).round() / 8.0)
    } else {
        Expr::var(rng.gen_range(0..nvars))
    }
}

/// `1 + e²`, bounded below by one.
fn positive(e: Expr) -> Expr {
    Expr::bin(BinOp::Add, Expr::constant(1.0), Expr::Pow(Box::new(e), 2))
}

/// A tree of the given depth. Divisions, square roots and negative powers
/// only see arguments `≥ 1`; `exp` only sees arguments in `[-1, 1]`.
pub fn random_expr<R: Rng>(rng: &mut R, nvars: usize, depth: usize, allow_exp: bool) -> Expr {
    if depth == 0 || rng.gen_bool(0.15) {
        return leaf(rng, nvars);
    }
    let d = depth - 1;
    match rng.gen_range(0..10) {
        0 => Expr::Neg(Box::new(random_expr(rng, nvars, d, allow_exp))),
        1 => Expr::Func(Func::Sin, Box::new(random_expr(rng, nvars, d, allow_exp))),
        2 => Expr::Func(Func::Cos, Box::new(random_expr(rng, nvars, d, allow_exp))),
        3 if allow_exp => {
            let arg = Expr::Func(Func::Sin, Box::new(random_expr(rng, nvars, d, false)));
            Expr::Func(Func::Exp, Box::new(arg))
        }
        4 => Expr::Func(Func::Sqrt, Box::new(positive(random_expr(rng, nvars, d, allow_exp)))),
        5 => {
            let k = rng.gen_range(-2..=3);
            let base = random_expr(rng, nvars, d, allow_exp);
            Expr::Pow(Box::new(if k < 0 { positive(base) } else { base }), k)
        }
        6 => Expr::bin(
            BinOp::Div,
            random_expr(rng, nvars, d, allow_exp),
            positive(random_expr(rng, nvars, d, allow_exp)),
        ),
        7 => Expr::bin(
            BinOp::Mul,
            random_expr(rng, nvars, d, allow_exp),
            random_expr(rng, nvars, d, allow_exp),
        ),
        8 => Expr::bin(
            BinOp::Sub,
            random_expr(rng, nvars, d, allow_exp),
            random_expr(rng, nvars, d, allow_exp),
        ),
        _ => Expr::bin(
            BinOp::Add,
            random_expr(rng, nvars, d, allow_exp),
            random_expr(rng, nvars, d, allow_exp),
        ),
    }
}

/// `|a − b| / max(1, scale)`.
pub fn rel_err(exact: f64, approx: f64, scale: f64) -> f64 {
    (exact - approx).abs() / scale.max(1.0)
}

/// Worst first- and second-order errors of the jet of `e` at `p` against
/// central differences with step `h`, relative to the largest jet entry.
pub fn jet_vs_fd(e: &Expr, p: &[f64], h: f64) -> (f64, f64) {
    let n = p.len();
    let j = genriem::expr::eval_jet2(e, p).expect("finite by construction");
    let f = |q: &[f64]| e.eval(q).expect("finite by construction");
    let shifted = |moves: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in moves {
            q[i] += s;
        }
        f(&q)
    };
    let scale = j.grad.iter().chain(&j.hess).fold(j.value.abs(), |m, v| m.max(v.abs()));
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for i in 0..n {
        let fd = (shifted(&[(i, h)]) - shifted(&[(i, -h)])) / (2.0 * h);
        e1 = e1.max(rel_err(j.grad[i], fd, scale));
        for k in 0..n {
            let fd2 = if i == k {
                (shifted(&[(i, h)]) - 2.0 * f(p) + shifted(&[(i, -h)])) / (h * h)
            } else {
                (shifted(&[(i, h), (k, h)]) - shifted(&[(i, h), (k, -h)]) - shifted(&[(i, -h), (k, h)])
                    + shifted(&[(i, -h), (k, -h)]))
                    / (4.0 * h * h)
            };
            e2 = e2.max(rel_err(j.hess_at(i, k), fd2, scale));
        }
    }
    (e1, e2)
}
