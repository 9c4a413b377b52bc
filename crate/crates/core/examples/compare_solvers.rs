//! PS2GD against projected SGD, SGD with a decaying stepsize and FISTA on a
//! logistic problem, all measured in effective passes over the data.
//!
//! ```text
//! cargo run --release --example compare_solvers
//! ```

use ps2gd::data_io::synth_logistic;
use ps2gd::model::{CompositeObjective, Loss};
use ps2gd::projections::ConstraintSet;
use ps2gd::solvers::{run, run_reference, safe_ps2gd_stepsize, SolverConfig};

fn main() -> ps2gd::Result<()> {
    let ds = synth_logistic(1000, 40, false, 3)?;
    let obj = CompositeObjective::primal(&ds, Loss::Logistic)?;
    let set = ConstraintSet::linf_ball(obj.dim(), 0.1)?;
    let f_star = run_reference(&obj, &set, 1e-11)?.f_star;

    let n = obj.n_components();
    let l = obj.lipschitz();
    let budget = 30.0;
    let solvers = [
        (
            "ps2gd b=1",
            SolverConfig::ps2gd(safe_ps2gd_stepsize(&obj, 1)?, 2 * n, 1).epochs(1000),
        ),
        (
            "ps2gd b=8",
            SolverConfig::ps2gd(safe_ps2gd_stepsize(&obj, 8)?, 2 * n / 8, 8).epochs(1000),
        ),
        ("sgd", SolverConfig::sgd(0.1 / l).epochs(30)),
        ("sgd+", SolverConfig::sgd_plus(1.0 / l).epochs(30)),
        ("fista", SolverConfig::fista(1.0 / l).epochs(1000)),
    ];

    println!(
        "{:<10} {:>12} {:>12} {:>12}",
        "solver", "gap@5", "gap@15", "gap@30"
    );
    for (name, cfg) in solvers {
        let trace = run(&obj, &set, &cfg.max_passes(budget).seed(1))?;
        let at = |p: f64| {
            trace
                .objective_at_passes(p)
                .map_or(f64::NAN, |f| f - f_star)
        };
        println!(
            "{name:<10} {:>12.3e} {:>12.3e} {:>12.3e}",
            at(5.0),
            at(15.0),
            at(30.0)
        );
    }
    Ok(())
}
