//! PS2GD on a rank-deficient least-squares problem inside an L∞ ball.
//!
//! The problem is not strongly convex, yet the gap still falls geometrically.
//!
//! ```text
//! cargo run --release --example least_squares_ps2gd
//! ```

use ps2gd::data_io::{synth_least_squares, LeastSquaresSpec};
use ps2gd::model::{CompositeObjective, Loss};
use ps2gd::projections::ConstraintSet;
use ps2gd::solvers::{run_ps2gd, run_reference, SolverConfig};

fn main() -> ps2gd::Result<()> {
    let (ds, meta) = synth_least_squares(&LeastSquaresSpec::new(200, 50, 20).seed(0))?;
    println!(
        "synthetic problem: {}",
        meta.to_text()
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join(", ")
    );

    let obj = CompositeObjective::primal(&ds, Loss::Squared)?;
    let set = ConstraintSet::linf_ball(obj.dim(), 0.1)?;
    let reference = run_reference(&obj, &set, 1e-12)?;
    println!(
        "F* = {:.12} after {} reference iterations",
        reference.f_star, reference.iterations
    );

    let n = obj.n_components();
    let cfg = SolverConfig::ps2gd(0.1 / obj.lipschitz(), 2 * n, 1)
        .epochs(40)
        .seed(7);
    let trace = run_ps2gd(&obj, &set, &cfg)?;

    println!("{:>5} {:>8} {:>12}", "epoch", "passes", "gap");
    for r in trace.records.iter().step_by(5) {
        println!(
            "{:>5} {:>8.2} {:>12.3e}",
            r.epoch,
            r.effective_passes,
            r.objective - reference.f_star
        );
    }
    Ok(())
}
