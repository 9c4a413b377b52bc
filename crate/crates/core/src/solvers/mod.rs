//! PS2GD and the baseline solvers. Every solver returns a [`Trace`] whose
//! x-axis is effective passes over the data.

mod config;
mod fista;
mod ps2gd;
mod reference;
mod sgd;
mod trace;

pub use config::{InitialPoint, SolverConfig, SolverKind};
pub use fista::run_fista;
#[doc(hidden)]
pub use ps2gd::variance_reduced_gradient_signed;
pub use ps2gd::{run_ps2gd, variance_reduced_gradient};
pub use reference::{gradient_mapping_norm, run_reference, run_reference_from, Reference};
pub use sgd::{run_sgd, run_sgd_plus};
pub use trace::{Trace, TraceMetadata, TraceRecord};

use crate::error::{check_dim, Error, Result};
use crate::model::CompositeObjective;
use crate::projections::ConstraintSet;

/// Runs the solver selected by `cfg.kind`.
pub fn run(obj: &CompositeObjective, set: &ConstraintSet, cfg: &SolverConfig) -> Result<Trace> {
    match cfg.kind {
        SolverKind::Ps2gd => run_ps2gd(obj, set, cfg),
        SolverKind::Sgd => run_sgd(obj, set, cfg),
        SolverKind::SgdPlus => run_sgd_plus(obj, set, cfg),
        SolverKind::Fista => run_fista(obj, set, cfg),
    }
}

/// Largest PS2GD stepsize covered by the linear-rate guarantee,
/// `min{1/(4Lα(b)), 1/L}`.
pub fn safe_ps2gd_stepsize(obj: &CompositeObjective, batch: usize) -> Result<f64> {
    let alpha = crate::theory::alpha(obj.n_components(), batch)?;
    let l = obj.lipschitz();
    Ok(if alpha > 0.0 {
        (1.0 / (4.0 * l * alpha)).min(1.0 / l)
    } else {
        1.0 / l
    })
}

/// Runs `base` once per candidate stepsize and keeps the run with the lowest
/// objective anywhere in its trace. Ties go to the earlier candidate.
pub fn tune_stepsize(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    base: &SolverConfig,
    candidates: &[f64],
) -> Result<(f64, Trace)> {
    let mut best: Option<(f64, Trace)> = None;
    for &h in candidates {
        let trace = match run(obj, set, &base.clone().with_stepsize(h)) {
            Ok(t) => t,
            Err(Error::Numeric { .. }) => continue,
            Err(e) => return Err(e),
        };
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| trace.min_objective() < b.min_objective());
        if better {
            best = Some((h, trace));
        }
    }
    best.ok_or_else(|| Error::numeric("every candidate stepsize diverged"))
}

pub(crate) fn starting_point(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    check_dim("constraint set", obj.dim(), set.dim())?;
    let mut x = match &cfg.initial_point {
        InitialPoint::Zero => vec![0.0; obj.dim()],
        InitialPoint::Given(x0) => {
            check_dim("initial point", obj.dim(), x0.len())?;
            x0.clone()
        }
    };
    set.project_in_place(&mut x);
    Ok(x)
}

pub(crate) fn check_stepsize(h: f64, allow_zero: bool) -> Result<()> {
    let ok = h.is_finite() && (h > 0.0 || (allow_zero && h == 0.0));
    if !ok {
        return Err(Error::arg(format!("invalid stepsize {h}")));
    }
    Ok(())
}

/// Runs `f` on a dedicated pool when more than one thread is requested.
pub(crate) fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::arg(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
