//! Parse a chart expression, print it back, and read exact derivatives off
//! its jet.
//!
//! ```text
//! cargo run --example expressions
//! ```

use genriem::expr::{eval_jet2, parse_expr};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = parse_expr("sin(x0) * exp(x1) + x0^2 / (1 + x1^2)", 2)?;
    println!("parsed:   {e}");
    println!("reparsed: {}", parse_expr(&e.to_string(), 2)?);

    let p = [0.7, -0.3];
    let j = eval_jet2(&e, &p)?;
    println!("value at {p:?}: {:.12}", j.value);
    println!("gradient:      [{:.12}, {:.12}]", j.grad[0], j.grad[1]);
    println!(
        "hessian:       [[{:.9}, {:.9}], [{:.9}, {:.9}]]",
        j.hess_at(0, 0),
        j.hess_at(0, 1),
        j.hess_at(1, 0),
        j.hess_at(1, 1)
    );

    // central differences for comparison
    let h = 1e-6;
    let f = |x: f64, y: f64| e.eval(&[x, y]).unwrap();
    let fd0 = (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2.0 * h);
    println!("d/dx0 by central difference: {fd0:.12}");

    match parse_expr("sqrt(x0", 1) {
        Err(err) => println!("error for `sqrt(x0`: {err}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
