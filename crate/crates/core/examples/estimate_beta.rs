//! Empirical weak-strong-convexity constant on a full-rank and a
//! rank-deficient least-squares problem of the same size.
//!
//! ```text
//! cargo run --release --example estimate_beta
//! ```

use ps2gd::data_io::{synth_least_squares, LeastSquaresSpec};
use ps2gd::model::{CompositeObjective, Loss};
use ps2gd::projections::ConstraintSet;
use ps2gd::sampling::RandomSource;
use ps2gd::solvers::run_reference;
use ps2gd::theory::{estimate_beta, smallest_hessian_eigenvalue};

fn main() -> ps2gd::Result<()> {
    for rank in [20, 8] {
        let (ds, _) = synth_least_squares(&LeastSquaresSpec::new(120, 20, rank).seed(2))?;
        let obj = CompositeObjective::primal(&ds, Loss::Squared)?;
        let set = ConstraintSet::linf_ball(20, 0.2)?;
        let reference = run_reference(&obj, &set, 1e-12)?;
        let mu_f = smallest_hessian_eigenvalue(&obj, &reference.x_star)?;
        for samples in [100, 1000] {
            let est = estimate_beta(
                &obj,
                &set,
                &reference.x_star,
                reference.f_star,
                &RandomSource::new(3),
                samples,
            )?;
            println!(
                "rank {rank:>2}: smallest Hessian eigenvalue {mu_f:.2e}, mu {:.2e}, beta ≈ {:.3} from {} samples",
                est.mu, est.beta, est.samples_used
            );
        }
    }
    Ok(())
}
