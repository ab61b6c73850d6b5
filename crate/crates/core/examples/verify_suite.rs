//! Run identity suites and print their reports.
//!
//! ```text
//! cargo run --release --example verify_suite -- [builtin] [suite]
//! cargo run --release --example verify_suite -- "line_product(s6)" acm
//! ```

use genriem::fields::builtin;
use genriem::verify::{run_suite, RunOptions, Suite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let descriptor = args.next().unwrap_or_else(|| "s6".into());
    let suite: Suite = args.next().unwrap_or_else(|| "hermitian".into()).parse()?;
    let spec = builtin(&descriptor)?;
    let report = run_suite(&spec, suite, &RunOptions::default())?;
    print!("{}", report.to_text());
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
