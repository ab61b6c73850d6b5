//! Eigen-distributions of `Q` on a weighted product: constant spectrum,
//! involutive and totally geodesic distributions, and the adapted basis.
//!
//! ```text
//! cargo run --example splitting
//! ```

use genriem::fields::{builtin, sample_points, FieldProvider};
use genriem::structures::{aq_basis, involutivity_residual, spectral_split};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let provider = FieldProvider::new(builtin("weighted_product([s6, flat_kahler(2)], [1, 3])")?);
    let points = sample_points(&provider.spec().domain, 16, 7);
    let split = spectral_split(&provider, &points)?;
    println!(
        "k = {}, spread {:.1e} over {} samples",
        split.k(),
        split.spread,
        split.samples
    );
    for (lam, m) in split.eigenvalues.iter().zip(&split.multiplicities) {
        println!("  λ = {lam:.12}  multiplicity {m}");
    }
    for r in involutivity_residual(&split, &provider, &points[0])? {
        println!(
            "  D(λ = {:.3}): bracket {:.1e}, geodesic {:.1e}",
            r.eigenvalue, r.bracket, r.geodesic
        );
    }

    let b = aq_basis(&provider, &points[0])?;
    let (g, a, q) = (
        provider.value("g", &points[0])?,
        provider.value("A", &points[0])?,
        provider.value("Q", &points[0])?,
    );
    println!(
        "adapted basis: {} pairs, eigenvalues per pair {:?}",
        b.pairs, b.pair_eigenvalues
    );
    println!("  block-form residual {:.1e}", b.residual(&g, &a, &q));

    // A spectrum that drifts across the chart is refused.
    let drift = FieldProvider::new(builtin("control_drift")?);
    let pts = sample_points(&drift.spec().domain, 16, 7);
    match spectral_split(&drift, &pts) {
        Err(e) => println!("control_drift: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
