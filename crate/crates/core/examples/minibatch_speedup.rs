//! Effect of the mini-batch size: sequential passes versus passes when each
//! mini-batch is evaluated in parallel, to reach a fixed accuracy.
//!
//! ```text
//! cargo run --release --example minibatch_speedup
//! ```

use ps2gd::data_io::synth_logistic;
use ps2gd::model::{CompositeObjective, Loss};
use ps2gd::projections::ConstraintSet;
use ps2gd::solvers::{run_ps2gd, run_reference, safe_ps2gd_stepsize, SolverConfig};

fn main() -> ps2gd::Result<()> {
    let ds = synth_logistic(2000, 50, false, 8)?;
    let obj = CompositeObjective::primal(&ds, Loss::Logistic)?;
    let set = ConstraintSet::linf_ball(obj.dim(), 0.1)?;
    let f_star = run_reference(&obj, &set, 1e-12)?.f_star;
    let n = obj.n_components();
    let tol = 1e-8;

    println!(
        "{:>3} {:>8} {:>10} {:>16}",
        "b", "h·L", "passes", "parallel passes"
    );
    for b in [1, 2, 4, 8, 16, 32] {
        let h = safe_ps2gd_stepsize(&obj, b)?;
        let cfg = SolverConfig::ps2gd(h, n / b, b)
            .epochs(200)
            .max_passes(200.0)
            .seed(1)
            .threads(4);
        let trace = run_ps2gd(&obj, &set, &cfg)?;
        match trace.records.iter().find(|r| r.objective - f_star <= tol) {
            Some(r) => println!(
                "{b:>3} {:>8.3} {:>10.1} {:>16.1}",
                h * obj.lipschitz(),
                r.effective_passes,
                r.passes_parallel
            ),
            None => println!("{b:>3} {:>8.3} did not reach {tol:e}", h * obj.lipschitz()),
        }
    }
    Ok(())
}
