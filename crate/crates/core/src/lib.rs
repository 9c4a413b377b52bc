//! Projected semi-stochastic gradient descent (PS2GD) with mini-batches for
//! constrained finite-sum problems
//!
//! ```text
//! minimize  F(x) = (1/N) Σ_i g_i(a_iᵀx) + qᵀx   subject to  x ∈ W
//! ```
//!
//! where `W` is a box, an L∞ ball or an L1 ball. The crate also provides
//! projected SGD, SGD with a decaying stepsize and restarted FISTA as
//! baselines, the rate and parameter-planning formulas for PS2GD, LIBSVM
//! input, synthetic problem generators, and brute-force oracles used by the
//! property suites.
//!
//! ```
//! use ps2gd::data_io::{synth_least_squares, LeastSquaresSpec};
//! use ps2gd::model::{CompositeObjective, Loss};
//! use ps2gd::projections::ConstraintSet;
//! use ps2gd::solvers::{run_ps2gd, run_reference, SolverConfig};
//!
//! let (ds, _) = synth_least_squares(&LeastSquaresSpec::new(60, 10, 4).seed(1)).unwrap();
//! let obj = CompositeObjective::primal(&ds, Loss::Squared).unwrap();
//! let set = ConstraintSet::linf_ball(10, 0.1).unwrap();
//! let reference = run_reference(&obj, &set, 1e-10).unwrap();
//!
//! let h = 0.1 / obj.lipschitz();
//! let cfg = SolverConfig::ps2gd(h, 120, 1).epochs(40).seed(3);
//! let trace = run_ps2gd(&obj, &set, &cfg).unwrap();
//! assert!(trace.final_objective() - reference.f_star < 1e-8);
//! ```

pub mod cli;
pub mod data_io;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod projections;
pub mod sampling;
pub mod solvers;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
