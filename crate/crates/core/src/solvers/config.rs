use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ps2gd,
    Sgd,
    SgdPlus,
    Fista,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Ps2gd,
        SolverKind::Sgd,
        SolverKind::SgdPlus,
        SolverKind::Fista,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ps2gd => "ps2gd",
            SolverKind::Sgd => "sgd",
            SolverKind::SgdPlus => "sgd+",
            SolverKind::Fista => "fista",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ps2gd" => Ok(SolverKind::Ps2gd),
            "sgd" => Ok(SolverKind::Sgd),
            "sgd+" | "sgd_plus" | "sgd-plus" => Ok(SolverKind::SgdPlus),
            "fista" => Ok(SolverKind::Fista),
            other => Err(Error::arg(format!(
                "unknown solver '{other}' (valid: ps2gd, sgd, sgd+, fista)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialPoint {
    /// The origin, projected onto the feasible set.
    #[default]
    Zero,
    Given(Vec<f64>),
}

/// Parameters shared by all solvers.
///
/// `epochs` counts outer loops for PS2GD, effective passes for the SGD
/// variants and iterations for FISTA. `max_passes`, when set, stops any
/// solver once that many effective passes have been spent.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub stepsize: f64,
    /// Upper bound `M` on the random inner-loop length (PS2GD only).
    pub inner_max: usize,
    /// Mini-batch size `b` (PS2GD only).
    pub batch: usize,
    pub epochs: usize,
    pub max_passes: Option<f64>,
    pub seed: u64,
    pub initial_point: InitialPoint,
    /// Worker threads for mini-batch gradient evaluation. Results do not
    /// depend on this value.
    pub threads: usize,
    /// Keep a copy of every recorded iterate in the trace.
    pub record_iterates: bool,
}

impl SolverConfig {
    fn base(kind: SolverKind, stepsize: f64) -> Self {
        SolverConfig {
            kind,
            stepsize,
            inner_max: 1,
            batch: 1,
            epochs: 30,
            max_passes: None,
            seed: 0,
            initial_point: InitialPoint::Zero,
            threads: 1,
            record_iterates: false,
        }
    }

    pub fn ps2gd(stepsize: f64, inner_max: usize, batch: usize) -> Self {
        SolverConfig {
            inner_max,
            batch,
            ..Self::base(SolverKind::Ps2gd, stepsize)
        }
    }

    pub fn sgd(stepsize: f64) -> Self {
        Self::base(SolverKind::Sgd, stepsize)
    }

    /// SGD with stepsize `h0/(k+1)` during effective pass `k`.
    pub fn sgd_plus(initial_stepsize: f64) -> Self {
        Self::base(SolverKind::SgdPlus, initial_stepsize)
    }

    pub fn fista(stepsize: f64) -> Self {
        Self::base(SolverKind::Fista, stepsize)
    }

    pub fn epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn max_passes(mut self, passes: f64) -> Self {
        self.max_passes = Some(passes);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn initial_point(mut self, x0: Vec<f64>) -> Self {
        self.initial_point = InitialPoint::Given(x0);
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn record_iterates(mut self, on: bool) -> Self {
        self.record_iterates = on;
        self
    }

    pub fn with_stepsize(mut self, stepsize: f64) -> Self {
        self.stepsize = stepsize;
        self
    }

    pub(crate) fn expect_kind(&self, kind: SolverKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::arg(format!(
                "config is for {}, not {}",
                self.kind, kind
            )));
        }
        Ok(())
    }

    pub(crate) fn budget_exhausted(&self, passes: f64) -> bool {
        self.max_passes.is_some_and(|cap| passes >= cap)
    }
}
