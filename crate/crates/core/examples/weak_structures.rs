//! Structure axioms and the tensors built from them: weak almost Hermitian
//! on S⁶, weak almost contact metric on ℝ × S⁶, and the para-Hermitian
//! example spec.
//!
//! ```text
//! cargo run --example weak_structures
//! ```

use std::path::Path;

use genriem::fields::{builtin, FieldProvider, ManifoldSpec};
use genriem::structures::{anc_residual, check_axioms, nearly_kahler_residual, special_tensors, AxiomKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s6 = FieldProvider::new(builtin("s6")?);
    let p = [0.1, 0.0, -0.2, 0.15, 0.05, -0.1];
    let report = check_axioms(&s6, AxiomKind::WeakHermitian, &p)?;
    println!("S6 {}:", report.kind);
    for (name, r) in &report.residuals {
        println!("  {name:<16} {r:.2e}");
    }
    println!("  Q eigenvalues ≥ {:.3}", report.q_min_eigenvalue);
    println!("  nearly Kähler residual {:.2e}", nearly_kahler_residual(&s6, &p)?);

    let line = FieldProvider::new(builtin("line_product(s6)")?);
    let q = [0.4, 0.1, 0.0, -0.2, 0.15, 0.05, -0.1];
    let acm = check_axioms(&line, AxiomKind::WeakAcm, &q)?;
    println!("R x S6 {}: max residual {:.2e}", acm.kind, acm.max_residual());
    println!("  almost nearly cosymplectic residual {:.2e}", anc_residual(&line, &q)?);
    let st = special_tensors(&line, &q)?;
    println!(
        "  sup |N5| = {:.6}, sup |N_wac| = {:.6}, sup |dη| = {:.1e}",
        st.n5.sup_norm(),
        st.nwac.sup_norm(),
        st.deta.sup_norm()
    );

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs/para_hermitian_r4.json");
    let para = FieldProvider::new(ManifoldSpec::load(&path)?);
    let r = check_axioms(&para, AxiomKind::WeakParaHermitian, &[0.0; 4])?;
    println!("{}: {} max residual {:.2e}", para.spec().name, r.kind, r.max_residual());
    let wrong = check_axioms(&para, AxiomKind::WeakHermitian, &[0.0; 4])?;
    println!("  read as Hermitian instead: max residual {:.2e}", wrong.max_residual());
    Ok(())
}
