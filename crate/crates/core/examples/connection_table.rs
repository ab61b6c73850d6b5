//! Local connection data as printed by the `connection` command, built from
//! the library directly.
//!
//! ```text
//! cargo run --example connection_table
//! ```

use genriem::cli::connection_table;
use genriem::fields::{builtin, FieldProvider};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let provider = FieldProvider::new(builtin("s6")?);
    let table = connection_table(&provider, &[0.0; 6])?;
    let text = table.to_text();
    // Print the torsion section only; the full table is long.
    let start = text.find("torsion").unwrap_or(0);
    let end = text.find("contorsion").unwrap_or(text.len());
    print!("{}", &text[start..end]);
    println!(
        "T[0,1,2] = {:+.12}, −dF[0,1,2]/3 = {:+.12}",
        table.torsion[0][1][2],
        -table.df[0][1][2] / 3.0
    );
    Ok(())
}
