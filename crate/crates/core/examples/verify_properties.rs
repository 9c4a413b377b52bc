//! Run every property suite (projections, sampling, estimator variance,
//! gradients, smoothness, weak strong convexity) and print a report.
//!
//! ```text
//! cargo run --release --example verify_properties
//! ```

use ps2gd::verify::{run_verification, Suite, VerifyOptions};

fn main() -> ps2gd::Result<()> {
    let reports = run_verification(&Suite::ALL, &VerifyOptions::default())?;
    for report in &reports {
        println!("{report}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} suites, {failed} failed", reports.len());
    Ok(())
}
