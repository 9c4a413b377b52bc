//! Projected FISTA with a monotone momentum restart.

use crate::error::{Error, Result};
use crate::model::CompositeObjective;
use crate::projections::ConstraintSet;
use crate::solvers::trace::Recorder;
use crate::solvers::{check_stepsize, starting_point, SolverConfig, SolverKind, Trace};

/// One iteration of accelerated projected gradient; `state` carries the
/// previous iterate and momentum parameter.
pub(crate) struct FistaState {
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub t: f64,
    pub f: f64,
    pub restarts: usize,
}

impl FistaState {
    pub fn new(obj: &CompositeObjective, x: Vec<f64>) -> Result<Self> {
        let f = obj.value(&x)?;
        Ok(FistaState {
            x_prev: x.clone(),
            x,
            t: 1.0,
            f,
            restarts: 0,
        })
    }

    /// Advances one iteration and returns the number of gradient evaluations spent.
    pub fn step(&mut self, obj: &CompositeObjective, set: &ConstraintSet, h: f64) -> Result<usize> {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.t * self.t).sqrt());
        let momentum = (self.t - 1.0) / t_next;
        let y: Vec<f64> = self
            .x
            .iter()
            .zip(&self.x_prev)
            .map(|(x, xp)| x + momentum * (x - xp))
            .collect();
        let mut candidate = projected_step(obj, set, &y, h)?;
        let mut f_candidate = obj.value(&candidate)?;
        let mut evaluations = 1;
        let mut t_next = t_next;
        if f_candidate > self.f && momentum > 0.0 {
            // restart from a plain projected gradient step
            self.restarts += 1;
            t_next = 1.0;
            candidate = projected_step(obj, set, &self.x, h)?;
            f_candidate = obj.value(&candidate)?;
            evaluations += 1;
        }
        self.x_prev = std::mem::replace(&mut self.x, candidate);
        self.t = t_next;
        self.f = f_candidate;
        Ok(evaluations)
    }
}

fn projected_step(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    y: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let g = obj.full_gradient(y)?;
    let mut x: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - h * b).collect();
    set.project_in_place(&mut x);
    Ok(x)
}

pub fn run_fista(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    cfg: &SolverConfig,
) -> Result<Trace> {
    cfg.expect_kind(SolverKind::Fista)?;
    check_stepsize(cfg.stepsize, false)?;
    let h = cfg.stepsize;
    if h > 1.0 / obj.lipschitz() {
        return Err(Error::arg(format!(
            "FISTA stepsize {h} exceeds 1/L = {}",
            1.0 / obj.lipschitz()
        )));
    }
    let x0 = starting_point(obj, set, cfg)?;
    let mut recorder = Recorder::new(obj, cfg);
    recorder.record(0, 0.0, 0.0, &x0)?;
    let mut state = FistaState::new(obj, x0)?;
    let mut passes = 0.0;
    for k in 1..=cfg.epochs {
        if cfg.budget_exhausted(passes) {
            break;
        }
        passes += state.step(obj, set, h).map_err(|e| match e {
            Error::Numeric { message, .. } => Error::Numeric {
                epoch: Some(k),
                message,
            },
            other => other,
        })? as f64;
        recorder.record(k, passes, passes, &state.x)?;
    }
    let restarts = state.restarts;
    let notes = vec![format!("momentum restarts: {restarts}")];
    Ok(recorder.finish(cfg, state.x, restarts, notes))
}
