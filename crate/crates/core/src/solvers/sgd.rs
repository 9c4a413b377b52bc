//! Projected stochastic gradient descent with a constant or `h0/(k+1)` stepsize.

use crate::error::Result;
use crate::model::CompositeObjective;
use crate::projections::ConstraintSet;
use crate::sampling::RandomSource;
use crate::solvers::trace::Recorder;
use crate::solvers::{check_stepsize, starting_point, SolverConfig, SolverKind, Trace};

pub fn run_sgd(obj: &CompositeObjective, set: &ConstraintSet, cfg: &SolverConfig) -> Result<Trace> {
    cfg.expect_kind(SolverKind::Sgd)?;
    sgd_loop(obj, set, cfg, |_| cfg.stepsize)
}

/// SGD whose stepsize during effective pass `k` (counting from zero) is `h0/(k+1)`.
pub fn run_sgd_plus(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    cfg: &SolverConfig,
) -> Result<Trace> {
    cfg.expect_kind(SolverKind::SgdPlus)?;
    sgd_loop(obj, set, cfg, |pass| cfg.stepsize / (pass + 1) as f64)
}

fn sgd_loop(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    cfg: &SolverConfig,
    stepsize_at_pass: impl Fn(usize) -> f64,
) -> Result<Trace> {
    check_stepsize(cfg.stepsize, true)?;
    let mut y = starting_point(obj, set, cfg)?;
    let n = obj.n_components();
    let q = obj.linear_term();
    // With q = 0 and a coordinate-separable set only the touched coordinates move.
    let sparse_steps = q.iter().all(|&v| v == 0.0) && !matches!(set, ConstraintSet::L1Ball { .. });
    let mut rng = RandomSource::new(cfg.seed);
    let mut recorder = Recorder::new(obj, cfg);
    recorder.record(0, 0.0, 0.0, &y)?;

    for pass in 0..cfg.epochs {
        if cfg.budget_exhausted(pass as f64) {
            break;
        }
        let h = stepsize_at_pass(pass);
        for _ in 0..n {
            let i = rng.index(n);
            let row = obj.rows().row(i);
            let coef = obj.scalar_derivative(i, row.dot(&y));
            if sparse_steps {
                for (&j, &a) in row.indices.iter().zip(row.values) {
                    y[j] = clamp_coordinate(set, j, y[j] - h * coef * a);
                }
            } else {
                for (yj, qj) in y.iter_mut().zip(q) {
                    *yj -= h * qj;
                }
                row.axpy(-h * coef, &mut y);
                set.project_in_place(&mut y);
            }
        }
        let passes = (pass + 1) as f64;
        recorder.record(pass + 1, passes, passes, &y)?;
    }
    Ok(recorder.finish(
        cfg,
        y,
        0,
        vec!["passes: 1 per N single-component steps".to_string()],
    ))
}

fn clamp_coordinate(set: &ConstraintSet, j: usize, v: f64) -> f64 {
    match set {
        ConstraintSet::Box { lower, upper } => v.clamp(lower[j], upper[j]),
        ConstraintSet::LinfBall { radius, .. } => v.clamp(-radius, *radius),
        ConstraintSet::L1Ball { .. } => unreachable!("l1 ball is not coordinate-separable"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LabeledDataset, Loss, SparseMatrix};

    fn single_example() -> CompositeObjective {
        let ds = LabeledDataset::new(
            SparseMatrix::from_dense(&[vec![1.0, 2.0]]).unwrap(),
            vec![3.0],
        )
        .unwrap();
        CompositeObjective::primal(&ds, Loss::Squared).unwrap()
    }

    #[test]
    fn single_example_is_gradient_descent() {
        let obj = single_example();
        let set = ConstraintSet::uniform_box(2, -1e10, 1e10).unwrap();
        let h = 0.5 / obj.lipschitz();
        let trace = run_sgd(
            &obj,
            &set,
            &SolverConfig::sgd(h).epochs(10).record_iterates(true),
        )
        .unwrap();
        let mut x = vec![0.0, 0.0];
        for got in &trace.iterates {
            for (a, b) in got.iter().zip(&x) {
                assert!((a - b).abs() < 1e-15);
            }
            let g = obj.full_gradient(&x).unwrap();
            x = x.iter().zip(&g).map(|(a, b)| a - h * b).collect();
        }
        assert!(trace.final_objective() < 1e-5);
    }

    #[test]
    fn zero_stepsize_freezes_iterates() {
        let obj = single_example();
        let set = ConstraintSet::linf_ball(2, 1.0).unwrap();
        for cfg in [SolverConfig::sgd(0.0), SolverConfig::sgd_plus(0.0)] {
            let trace = run(&obj, &set, &cfg.epochs(5).initial_point(vec![0.5, -0.5])).unwrap();
            let first = trace.records[0].objective;
            assert!(trace.records.iter().all(|r| r.objective == first));
            assert_eq!(trace.final_point, vec![0.5, -0.5]);
        }
    }

    fn run(obj: &CompositeObjective, set: &ConstraintSet, cfg: &SolverConfig) -> Result<Trace> {
        crate::solvers::run(obj, set, cfg)
    }

    #[test]
    fn sgd_plus_schedule() {
        // one component: each pass is one step with stepsize h0/(k+1)
        let ds = LabeledDataset::new(SparseMatrix::from_dense(&[vec![1.0]]).unwrap(), vec![0.0])
            .unwrap();
        let obj = CompositeObjective::primal(&ds, Loss::Squared).unwrap();
        let set = ConstraintSet::uniform_box(1, -10.0, 10.0).unwrap();
        let h0 = 0.5;
        let trace = run_sgd_plus(
            &obj,
            &set,
            &SolverConfig::sgd_plus(h0)
                .epochs(10)
                .initial_point(vec![1.0]),
        )
        .unwrap();
        let mut x = 1.0f64;
        for k in 0..10 {
            x -= h0 / (k + 1) as f64 * x;
        }
        assert!((trace.final_point[0] - x).abs() < 1e-15);
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let rows = vec![
            vec![1.0, 0.0, 2.0],
            vec![0.0, -1.0, 0.5],
            vec![3.0, 1.0, 0.0],
        ];
        let ds = LabeledDataset::new(
            SparseMatrix::from_dense(&rows).unwrap(),
            vec![1.0, -1.0, 1.0],
        )
        .unwrap();
        let obj = CompositeObjective::primal(&ds, Loss::Logistic).unwrap();
        let set = ConstraintSet::linf_ball(3, 0.2).unwrap();
        let cfg = SolverConfig::sgd(0.3).epochs(20).seed(4);
        let sparse = run_sgd(&obj, &set, &cfg).unwrap();
        // a negligible nonzero linear term forces the dense update path
        let obj_q = obj
            .clone()
            .with_linear_term(vec![0.0, 0.0, 1e-300])
            .unwrap();
        let dense = run_sgd(&obj_q, &set, &cfg).unwrap();
        for (a, b) in sparse.final_point.iter().zip(&dense.final_point) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
