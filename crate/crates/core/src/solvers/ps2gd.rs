//! Projected semi-stochastic gradient descent with mini-batches.
//!
//! Each epoch computes the full gradient `v_k` at the reference point `x_k`,
//! draws an inner-loop length `t_k ∈ {1..M}`, and runs `t_k` projected steps
//! with the variance-reduced estimate
//!
//! ```text
//! G = v_k + (1/b) Σ_{i∈A} (∇f_i(y) − ∇f_i(x_k))
//! ```
//!
//! The next reference point is the last inner iterate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CompositeObjective;
use crate::projections::ConstraintSet;
use crate::sampling::RandomSource;
use crate::solvers::trace::Recorder;
use crate::solvers::{
    check_stepsize, starting_point, with_threads, SolverConfig, SolverKind, Trace,
};

/// Batches at least this large are evaluated on the rayon pool when the
/// solver runs with more than one thread.
const PARALLEL_BATCH_MIN: usize = 2;

pub fn run_ps2gd(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    cfg: &SolverConfig,
) -> Result<Trace> {
    cfg.expect_kind(SolverKind::Ps2gd)?;
    check_stepsize(cfg.stepsize, false)?;
    let n = obj.n_components();
    if cfg.inner_max == 0 {
        return Err(Error::arg("inner loop bound M must be at least 1"));
    }
    if cfg.batch == 0 || cfg.batch > n {
        return Err(Error::arg(format!(
            "mini-batch size {} must lie in [1, {n}]",
            cfg.batch
        )));
    }
    let x0 = starting_point(obj, set, cfg)?;
    with_threads(cfg.threads, || ps2gd_loop(obj, set, cfg, x0))?
}

fn ps2gd_loop(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    cfg: &SolverConfig,
    mut x: Vec<f64>,
) -> Result<Trace> {
    let n = obj.n_components();
    let b = cfg.batch;
    let h = cfg.stepsize;
    let parallel = cfg.threads > 1 && b >= PARALLEL_BATCH_MIN;
    let mut rng = RandomSource::new(cfg.seed);
    let mut recorder = Recorder::new(obj, cfg);

    // component-gradient evaluations, serial and with each mini-batch counted once
    let mut evals: u64 = 0;
    let mut evals_parallel: u64 = 0;
    let passes = |e: u64| e as f64 / n as f64;
    recorder.record(0, 0.0, 0.0, &x)?;

    let mut y = vec![0.0; x.len()];
    let mut g = vec![0.0; x.len()];
    for epoch in 1..=cfg.epochs {
        if cfg.budget_exhausted(passes(evals)) {
            break;
        }
        let v = obj.full_gradient(&x).map_err(|e| at_epoch(e, epoch))?;
        let inner = rng.sample_inner_length(cfg.inner_max)?;
        y.copy_from_slice(&x);
        for _ in 0..inner {
            let batch = rng.sample_minibatch(n, b)?;
            estimate(obj, &v, &x, &y, &batch, 1.0, parallel, &mut g);
            for (yj, gj) in y.iter_mut().zip(&g) {
                *yj -= h * gj;
            }
            set.project_in_place(&mut y);
        }
        std::mem::swap(&mut x, &mut y);

        evals += (n + 2 * b * inner) as u64;
        evals_parallel += (n + 2 * inner) as u64;
        recorder.record(epoch, passes(evals), passes(evals_parallel), &x)?;
    }

    let notes = vec![
        "passes: 1 per full gradient + 2b/N per inner step (both component gradients recomputed)"
            .to_string(),
    ];
    Ok(recorder.finish(cfg, x, 0, notes))
}

fn at_epoch(e: Error, epoch: usize) -> Error {
    match e {
        Error::Numeric { message, .. } => Error::Numeric {
            epoch: Some(epoch),
            message,
        },
        other => other,
    }
}

/// Writes the mini-batch variance-reduced gradient estimate into `out`:
/// `full_grad_at_ref + (1/b) Σ_{i∈batch} (∇f_i(y) − ∇f_i(reference))`.
///
/// The linear term cancels inside the correction, so only the scalar
/// derivatives of the sampled rows are evaluated.
pub fn variance_reduced_gradient(
    obj: &CompositeObjective,
    full_grad_at_ref: &[f64],
    reference: &[f64],
    y: &[f64],
    batch: &[usize],
    out: &mut [f64],
) {
    estimate(obj, full_grad_at_ref, reference, y, batch, 1.0, false, out);
}

/// [`variance_reduced_gradient`] with the correction multiplied by `sign`.
/// Only used to check that the verification suites catch a broken estimator.
pub fn variance_reduced_gradient_signed(
    obj: &CompositeObjective,
    full_grad_at_ref: &[f64],
    reference: &[f64],
    y: &[f64],
    batch: &[usize],
    sign: f64,
    out: &mut [f64],
) {
    estimate(obj, full_grad_at_ref, reference, y, batch, sign, false, out);
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    obj: &CompositeObjective,
    v: &[f64],
    reference: &[f64],
    y: &[f64],
    batch: &[usize],
    sign: f64,
    parallel: bool,
    out: &mut [f64],
) {
    let coef = |&i: &usize| {
        let rows = obj.rows();
        let row = rows.row(i);
        obj.scalar_derivative(i, row.dot(y)) - obj.scalar_derivative(i, row.dot(reference))
    };
    // Coefficients may be computed concurrently; the scatter below always runs
    // in batch order so the result does not depend on the thread count.
    let coefs: Vec<f64> = if parallel {
        batch.par_iter().map(coef).collect()
    } else {
        batch.iter().map(coef).collect()
    };
    out.copy_from_slice(v);
    let scale = sign / batch.len() as f64;
    for (&i, c) in batch.iter().zip(coefs) {
        obj.rows().row(i).axpy(scale * c, out);
    }
}
