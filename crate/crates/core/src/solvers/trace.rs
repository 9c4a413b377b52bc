use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::CompositeObjective;
use crate::solvers::{SolverConfig, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub epoch: usize,
    /// Component-gradient evaluations divided by `N`.
    pub effective_passes: f64,
    /// Passes when the `b` gradients of a mini-batch are evaluated concurrently:
    /// full-gradient passes plus inner passes divided by `b`.
    pub passes_parallel: f64,
    pub wall_seconds: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub solver: SolverKind,
    pub config: SolverConfig,
    pub n_components: usize,
    pub dim: usize,
    pub lipschitz: f64,
    pub threads: usize,
    /// Momentum restarts (FISTA only).
    pub restarts: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub metadata: TraceMetadata,
    pub final_point: Vec<f64>,
    /// One point per record when `record_iterates` is set, otherwise empty.
    pub iterates: Vec<Vec<f64>>,
}

impl Trace {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn gaps(&self, f_star: f64) -> Vec<f64> {
        self.records.iter().map(|r| r.objective - f_star).collect()
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn min_objective(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.objective)
            .fold(f64::INFINITY, f64::min)
    }

    /// Objective of the last record whose pass count does not exceed `passes`.
    pub fn objective_at_passes(&self, passes: f64) -> Option<f64> {
        self.records
            .iter()
            .take_while(|r| r.effective_passes <= passes)
            .last()
            .map(|r| r.objective)
    }
}

/// Accumulates records while a solver runs.
pub(crate) struct Recorder<'a> {
    obj: &'a CompositeObjective,
    start: Instant,
    keep_iterates: bool,
    records: Vec<TraceRecord>,
    iterates: Vec<Vec<f64>>,
}

impl<'a> Recorder<'a> {
    pub fn new(obj: &'a CompositeObjective, cfg: &SolverConfig) -> Self {
        Recorder {
            obj,
            start: Instant::now(),
            keep_iterates: cfg.record_iterates,
            records: Vec::new(),
            iterates: Vec::new(),
        }
    }

    /// Evaluates `F(x)` and appends a record; returns the objective.
    pub fn record(
        &mut self,
        epoch: usize,
        passes: f64,
        passes_parallel: f64,
        x: &[f64],
    ) -> Result<f64> {
        let objective = self.obj.value(x).map_err(|e| match e {
            Error::Numeric { message, .. } => Error::Numeric {
                epoch: Some(epoch),
                message,
            },
            other => other,
        })?;
        self.records.push(TraceRecord {
            epoch,
            effective_passes: passes,
            passes_parallel,
            wall_seconds: self.start.elapsed().as_secs_f64(),
            objective,
        });
        if self.keep_iterates {
            self.iterates.push(x.to_vec());
        }
        Ok(objective)
    }

    pub fn finish(
        self,
        cfg: &SolverConfig,
        final_point: Vec<f64>,
        restarts: usize,
        notes: Vec<String>,
    ) -> Trace {
        Trace {
            records: self.records,
            metadata: TraceMetadata {
                solver: cfg.kind,
                config: cfg.clone(),
                n_components: self.obj.n_components(),
                dim: self.obj.dim(),
                lipschitz: self.obj.lipschitz(),
                threads: cfg.threads,
                restarts,
                notes,
            },
            final_point,
            iterates: self.iterates,
        }
    }
}
