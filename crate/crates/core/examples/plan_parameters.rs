//! Measure the problem constants, plan a stepsize and inner-loop length for
//! a target per-epoch contraction, and check the plan on a real run.
//!
//! ```text
//! cargo run --release --example plan_parameters
//! ```

use ps2gd::data_io::{synth_least_squares, LeastSquaresSpec};
use ps2gd::model::{CompositeObjective, Loss};
use ps2gd::projections::ConstraintSet;
use ps2gd::sampling::RandomSource;
use ps2gd::solvers::{run_ps2gd, run_reference, SolverConfig};
use ps2gd::theory::{estimate_beta, g_strong_convexity, plan, smallest_hessian_eigenvalue};

fn main() -> ps2gd::Result<()> {
    let (ds, _) = synth_least_squares(&LeastSquaresSpec::new(200, 10, 10).seed(4))?;
    let obj = CompositeObjective::primal(&ds, Loss::Squared)?;
    let set = ConstraintSet::linf_ball(obj.dim(), 0.1)?;
    let reference = run_reference(&obj, &set, 1e-12)?;
    let (l, n) = (obj.lipschitz(), obj.n_components());

    // Full rank: F is strongly convex, so beta = mu / mu_F is a valid constant.
    // The sampled estimate only bounds beta from below.
    let mu = g_strong_convexity(&obj, &set)?;
    let mu_f = smallest_hessian_eigenvalue(&obj, &reference.x_star)?;
    let beta = mu / mu_f;
    let est = estimate_beta(
        &obj,
        &set,
        &reference.x_star,
        reference.f_star,
        &RandomSource::new(1),
        200,
    )?;
    println!("mu = {mu:.3e}, mu_F = {mu_f:.3e}, beta = {beta:.3} (sampled lower bound {:.3}), L = {l:.3}, n = {n}", est.beta);

    let target = 0.5;
    println!(
        "{:>3} {:>10} {:>10} {:>12} {:>12}",
        "b", "regime", "h*·L", "m*", "m*·b"
    );
    for b in [1, 2, 4, 8, 16, 32] {
        let p = plan(target, mu, beta, l, b, n)?;
        println!(
            "{b:>3} {:>10} {:>10.4} {:>12.1} {:>12.1}",
            p.regime.name(),
            p.h_star * l,
            p.m_star,
            p.m_star * b as f64
        );
    }

    // the rate is a worst-case bound; in practice one planned epoch does far better
    let b = 8;
    let p = plan(target, mu, beta, l, b, n)?;
    let cfg = SolverConfig::ps2gd(p.h_star, p.m_star.ceil() as usize, b)
        .epochs(1)
        .seed(9);
    let gaps = run_ps2gd(&obj, &set, &cfg)?.gaps(reference.f_star);
    println!(
        "b = {b}: gap {:.3e} -> {:.3e} in one epoch (planned factor {target})",
        gaps[0], gaps[1]
    );
    Ok(())
}
