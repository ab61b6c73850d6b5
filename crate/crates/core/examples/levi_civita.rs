//! Christoffel symbols and curvature of the round 2-sphere, compared with
//! the closed forms in the `(θ, φ)` chart.
//!
//! ```text
//! cargo run --example levi_civita
//! ```

use std::sync::Arc;

use genriem::fields::{builtin, FieldProvider};
use genriem::geometry::{curvature, levi_civita, sectional_curvature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = 2.0;
    let provider = Arc::new(FieldProvider::new(builtin(&format!("round_s2({r})"))?));
    let lc = levi_civita(provider.clone());
    let p = [1.1, 0.4];
    let gamma = lc.coefficients(&p)?;
    let (s, c) = p[0].sin_cos();
    println!(
        "Γ^θ_φφ = {:+.12}   closed form −sinθ cosθ = {:+.12}",
        gamma.get(&[0, 1, 1]),
        -s * c
    );
    println!(
        "Γ^φ_θφ = {:+.12}   closed form  cotθ      = {:+.12}",
        gamma.get(&[1, 0, 1]),
        c / s
    );

    let rm = curvature(&lc.jet(&p)?);
    let g = provider.value("g", &p)?;
    println!(
        "sectional curvature K = {:.12}   expected 1/r² = {:.12}",
        sectional_curvature(&rm, &g, 0, 1),
        1.0 / (r * r)
    );
    Ok(())
}
