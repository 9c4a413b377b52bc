//! The dual of a hinge-loss SVM is a box-constrained quadratic that fits the
//! finite-sum form with one component per feature. Solve it with PS2GD and
//! FISTA and compare.
//!
//! ```text
//! cargo run --release --example svm_dual
//! ```

use ps2gd::data_io::synth_logistic;
use ps2gd::model::build_svm_dual;
use ps2gd::solvers::{run, run_reference, safe_ps2gd_stepsize, SolverConfig};

fn main() -> ps2gd::Result<()> {
    let ds = synth_logistic(300, 60, false, 11)?;
    let lambda = 1.0 / ds.n_examples() as f64;
    let (obj, set) = build_svm_dual(&ds, lambda)?;
    println!(
        "dual variables: {}, components (features): {}, L = {:.3}",
        obj.dim(),
        obj.n_components(),
        obj.lipschitz()
    );

    let reference = run_reference(&obj, &set, 1e-10)?;
    let (_, upper) = set.bounding_box();
    let support = reference.x_star.iter().filter(|&&y| y > 1e-9).count();
    let at_bound = reference
        .x_star
        .iter()
        .zip(&upper)
        .filter(|(y, u)| **y >= **u - 1e-9)
        .count();
    println!(
        "F* = {:.8}; {support} support vectors, {at_bound} at the upper bound",
        reference.f_star
    );

    let m = obj.n_components();
    let b = 4;
    let ps2gd = SolverConfig::ps2gd(safe_ps2gd_stepsize(&obj, b)?, 2 * m, b)
        .epochs(5000)
        .max_passes(300.0);
    let fista = SolverConfig::fista(1.0 / obj.lipschitz()).epochs(300);
    for (name, cfg) in [("ps2gd", ps2gd), ("fista", fista)] {
        let trace = run(&obj, &set, &cfg.seed(2))?;
        let last = trace.records.last().unwrap();
        println!(
            "{name:<6} gap {:.3e} after {:.1} passes",
            last.objective - reference.f_star,
            last.effective_passes
        );
    }
    Ok(())
}
