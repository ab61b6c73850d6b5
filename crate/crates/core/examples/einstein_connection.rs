//! The skew-torsion Einstein connection on the nearly Kähler 6-sphere:
//! metricity condition, torsion `T = −⅓dF`, and the contorsion.
//!
//! ```text
//! cargo run --example einstein_connection
//! ```

use std::sync::Arc;

use genriem::einstein::{contorsion, einstein_connection, general_emc_connection, torsion_from_df};
use genriem::fields::{builtin, FieldProvider};
use genriem::geometry::{exterior_derivative_f, levi_civita};
use genriem::tensor::relative_residual;
use genriem::verify::identity_residual;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let provider = Arc::new(FieldProvider::new(builtin("s6")?));
    let p = [0.12, -0.05, 0.2, 0.0, -0.17, 0.08];

    let ein = einstein_connection(provider.clone());
    let t = ein.torsion(&p)?;
    let df = exterior_derivative_f(&provider, &p)?;
    println!("sup |dF|                 = {:.6}", df.sup_norm());
    println!(
        "torsion vs −dF/3         : {:.2e}",
        relative_residual(&t, &df.scale(-1.0 / 3.0))
    );
    println!(
        "metricity residual       : {:.2e}",
        identity_residual("emc", &provider, &p)?
    );
    println!(
        "existence criterion      : {:.2e}",
        identity_residual("skew1", &provider, &p)?
    );

    // The same connection rebuilt from its torsion.
    let rebuilt = general_emc_connection(provider.clone(), torsion_from_df);
    let diff = relative_residual(&ein.coefficients(&p)?, &rebuilt.coefficients(&p)?);
    println!("rebuilt from torsion     : {diff:.2e}");

    let k = contorsion(ein.connection(), &p)?;
    let lc = levi_civita(provider.clone());
    println!("sup |K|                  = {:.6}", k.sup_norm());
    println!("Levi-Civita has torsion  : {}", !lc.is_symmetric());

    // The criterion fails on a generic F, and with it the metricity condition.
    let control = FieldProvider::new(builtin("control_noncriterion")?);
    let q = [0.1, 0.2, -0.3, 0.4];
    println!(
        "control: criterion {:.3}, metricity {:.3}",
        identity_residual("skew1", &control, &q)?,
        identity_residual("emc", &control, &q)?
    );
    Ok(())
}
