//! Builtin manifolds, their JSON documents, and field values at a point.
//!
//! ```text
//! cargo run --example manifold_specs
//! ```

use genriem::fields::{builtin, FieldProvider, ManifoldSpec};
use genriem::geometry::split_metric;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in [
        "flat_kahler(4)",
        "round_s2(2)",
        "s6",
        "weighted_product([t2, t2], [1, 4])",
        "line_product(s6)",
    ] {
        let spec = builtin(d)?;
        println!(
            "{:<40} dim {}  backend {}  contact {}",
            spec.identity(),
            spec.dim,
            spec.backend(),
            spec.has_contact()
        );
    }

    // Documents round-trip byte for byte.
    let spec = builtin("weighted_product([t2, t2], [1, 4])")?;
    let text = spec.to_json();
    let back = ManifoldSpec::from_json(&text)?;
    assert_eq!(back.to_json(), text);
    println!("\n{text}");

    let provider = FieldProvider::new(builtin("s6")?);
    let p = [0.1, -0.2, 0.05, 0.0, 0.3, -0.1];
    let (g, f) = split_metric(&provider, &p)?;
    let a = provider.value("A", &p)?;
    let a2 = a.matmul(&a);
    println!("S6 at {p:?}");
    println!(
        "  |g - g^T| = {:.1e}, |F + F^T| = {:.1e}",
        g.sub(&g.transpose()).sup_norm(),
        f.add(&f.transpose()).sup_norm()
    );
    println!(
        "  A^2 + Id  = {:.1e}",
        a2.add(&genriem::tensor::TensorValue::identity(6)).sup_norm()
    );
    Ok(())
}
