//! Property suites run by `ps2gd verify`. Each suite draws random instances
//! from a fixed seed, checks the library against the brute-force oracles and
//! the analytic inequalities, and reports how many checks failed.

use std::fmt;
use std::str::FromStr;

use crate::data_io::{synth_least_squares, LeastSquaresSpec};
use crate::error::{Error, Result};
use crate::linalg::{dist, dist_sq, dot, norm};
use crate::model::{build_svm_dual, CompositeObjective, LabeledDataset, Loss, SparseMatrix};
use crate::oracles::{
    enumerate_estimator_variance, enumerate_minibatch_expectation, enumerate_moments_of,
    finite_diff_gradient, grid_projection_oracle,
};
use crate::projections::ConstraintSet;
use crate::sampling::{tau_nice_variance, tau_nice_variance_bound, RandomSource};
use crate::solvers::{run_reference, run_reference_from, variance_reduced_gradient_signed};
use crate::theory::{alpha, estimate_beta, random_feasible_point, smallest_hessian_eigenvalue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Projection,
    Sampling,
    Variance,
    Gradient,
    Smoothness,
    WeakConvexity,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Projection,
        Suite::Sampling,
        Suite::Variance,
        Suite::Gradient,
        Suite::Smoothness,
        Suite::WeakConvexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Projection => "projection",
            Suite::Sampling => "sampling",
            Suite::Variance => "variance",
            Suite::Gradient => "gradient",
            Suite::Smoothness => "smoothness",
            Suite::WeakConvexity => "weak-convexity",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Projection => {
                "non-expansiveness, idempotence, variational inequality, grid oracle"
            }
            Suite::Sampling => "tau-nice sampling variance identity and uncentered bound",
            Suite::Variance => "estimator unbiasedness and mini-batch variance bound",
            Suite::Gradient => "finite-difference gradients for every loss",
            Suite::Smoothness => {
                "component Lipschitz bound and gradient-difference bound at optimum"
            }
            Suite::WeakConvexity => "quadratic growth away from the optimal set",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|k| k.name()).collect();
                Error::arg(format!("unknown suite '{s}' (valid: {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random pairs per set kind in the projection suite.
    pub projection_pairs: usize,
    /// Random instances in the variance suite.
    pub variance_instances: usize,
    /// Flip the sign of the estimator correction. Exists to prove the
    /// variance suite can fail.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_150_101,
            projection_pairs: 2000,
            variance_instances: 50,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: usize,
    /// First failure, if any.
    pub first_failure: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<15} {}/{} checks ({})",
            self.suite.name(),
            self.checks - self.failures,
            self.checks,
            self.suite.description()
        )?;
        if let Some(msg) = &self.first_failure {
            write!(f, "\n     first failure: {msg}")?;
        }
        Ok(())
    }
}

struct Tally {
    suite: Suite,
    checks: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn new(suite: Suite) -> Self {
        Tally {
            suite,
            checks: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            checks: self.checks,
            failures: self.failures,
            first_failure: self.first_failure,
        }
    }
}

/// Runs the selected suites (all of them when `suites` is empty).
pub fn run_verification(suites: &[Suite], opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    let selected: &[Suite] = if suites.is_empty() {
        &Suite::ALL
    } else {
        suites
    };
    selected.iter().map(|&s| run_suite(s, opts)).collect()
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let rng = RandomSource::new(opts.seed).child(suite as u64);
    match suite {
        Suite::Projection => projection_suite(rng, opts.projection_pairs),
        Suite::Sampling => sampling_suite(rng),
        Suite::Variance => variance_suite(rng, opts.variance_instances, opts.inject_fault),
        Suite::Gradient => gradient_suite(rng),
        Suite::Smoothness => smoothness_suite(rng),
        Suite::WeakConvexity => weak_convexity_suite(rng),
    }
}

const GRID_SPACING: f64 = 1e-3;

/// A random set whose grid (at the spacing used for `dim`) stays small, with
/// the L1 radius a whole number of grid steps.
fn random_set(rng: &mut RandomSource, kind: usize, dim: usize) -> Result<ConstraintSet> {
    let spacing = grid_spacing(dim);
    let scale = if dim <= 3 {
        (rng.uniform(0.05, 0.1) / spacing).round() * spacing
    } else {
        10f64.powf(rng.uniform(-2.0, 2.0))
    };
    match kind {
        0 => {
            let lower: Vec<f64> = (0..dim).map(|_| rng.uniform(-scale, 0.5 * scale)).collect();
            let upper: Vec<f64> = lower
                .iter()
                .map(|l| l + rng.uniform(0.1, 1.0) * scale)
                .collect();
            ConstraintSet::boxed(lower, upper)
        }
        1 => ConstraintSet::linf_ball(dim, scale),
        _ => ConstraintSet::l1_ball(dim, scale),
    }
}

fn grid_spacing(dim: usize) -> f64 {
    if dim <= 2 {
        GRID_SPACING
    } else {
        4.0 * GRID_SPACING
    }
}

fn random_near(rng: &mut RandomSource, set: &ConstraintSet) -> Vec<f64> {
    let (lo, hi) = set.bounding_box();
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| {
            let mid = 0.5 * (l + h);
            let half = 0.5 * (h - l);
            mid + 2.0 * half * rng.normal()
        })
        .collect()
}

fn projection_suite(mut rng: RandomSource, pairs: usize) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Projection);
    for kind in 0..3 {
        for p in 0..pairs {
            let dim = 1 + rng.index(6);
            let set = random_set(&mut rng, kind, dim)?;
            let scale = set
                .bounding_box()
                .1
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(1e-300);
            let tol = 1e-12 * scale.max(1.0);
            let x = random_near(&mut rng, &set);
            let y = random_near(&mut rng, &set);
            let px = set.project(&x)?;
            let py = set.project(&y)?;
            let kind_name = set.kind();

            t.check(set.contains(&px, tol)?, || {
                format!("{kind_name}: projection of {x:?} infeasible")
            });
            t.check(dist(&px, &py) <= dist(&x, &y) + tol, || {
                format!("{kind_name}: ‖P(x)−P(y)‖ > ‖x−y‖ for x={x:?}, y={y:?}")
            });
            let ppx = set.project(&px)?;
            t.check(dist(&ppx, &px) <= tol, || {
                format!("{kind_name}: P(P(x)) ≠ P(x) for x={x:?}")
            });
            let w = random_feasible_point(&set, &mut rng);
            for other in [&w, &py] {
                let lhs: f64 = (0..dim).map(|j| (x[j] - px[j]) * (other[j] - px[j])).sum();
                t.check(lhs <= tol * (1.0 + norm(&x)) * (1.0 + scale), || {
                    format!("{kind_name}: variational inequality violated by {lhs:e} at x={x:?}")
                });
            }
            if dim <= 3 && p % 10 == 0 {
                let spacing = grid_spacing(dim);
                let g = grid_projection_oracle(&set, &x, spacing)?;
                let delta = spacing * (dim as f64).sqrt();
                let bound = (2.0 * delta * dist(&px, &x) + delta * delta).sqrt() + 1e-9;
                let gap = dist(&g, &px);
                t.check(gap <= bound, || {
                    format!("{kind_name}: grid minimizer {g:?} is {gap:e} from P(x) = {px:?} (bound {bound:e})")
                });
            }
        }
    }
    Ok(t.finish())
}

fn sampling_suite(mut rng: RandomSource) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Sampling);
    for _ in 0..100 {
        let n = 1 + rng.index(8);
        let d = 1 + rng.index(4);
        let shift = rng.normal_vec(d);
        let family: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                rng.normal_vec(d)
                    .iter()
                    .zip(&shift)
                    .map(|(a, s)| a + s)
                    .collect()
            })
            .collect();
        for tau in 1..=n {
            let exact = enumerate_minibatch_expectation(&family, tau)?;
            let closed = tau_nice_variance(&family, tau)?;
            let bound = tau_nice_variance_bound(&family, tau)?;
            t.check(
                (exact - closed).abs() <= 1e-12 * exact.abs().max(1.0),
                || format!("n={n}, τ={tau}: enumeration {exact:e} vs closed form {closed:e}"),
            );
            t.check(bound >= exact - 1e-12, || {
                format!("n={n}, τ={tau}: uncentered form {bound:e} below exact {exact:e}")
            });
        }
    }
    // the sampler itself: every 2-subset of 5 equally likely
    let draws = 50_000;
    let mut counts = std::collections::HashMap::new();
    for _ in 0..draws {
        *counts.entry(rng.sample_minibatch(5, 2)?).or_insert(0usize) += 1;
    }
    t.check(counts.len() == 10, || {
        format!("{} distinct 2-subsets of 5", counts.len())
    });
    for (subset, c) in &counts {
        let freq = *c as f64 / draws as f64;
        t.check((freq - 0.1).abs() <= 0.01, || {
            format!("subset {subset:?} frequency {freq}")
        });
    }
    Ok(t.finish())
}

/// Random sparse problem with `n` examples and `d` features.
fn random_problem(
    rng: &mut RandomSource,
    loss: Loss,
    n: usize,
    d: usize,
) -> Result<(CompositeObjective, ConstraintSet)> {
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|_| {
            let forced = rng.index(d);
            let mut row = Vec::new();
            for j in 0..d {
                if j == forced || rng.unit() < 0.5 {
                    row.push((j, rng.normal()));
                }
            }
            row
        })
        .collect();
    let labels: Vec<f64> = (0..n)
        .map(|_| match loss {
            Loss::Squared => rng.normal(),
            _ => {
                if rng.unit() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
        })
        .collect();
    let ds = LabeledDataset::new(SparseMatrix::from_rows(d, rows)?, labels)?;
    match loss {
        Loss::SvmDualQuadratic => build_svm_dual(&ds, rng.uniform(0.05, 1.0)),
        _ => {
            let obj = CompositeObjective::primal(&ds, loss)?;
            let kind = rng.index(3);
            let set = match kind {
                0 => {
                    let lower: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 0.0)).collect();
                    let upper: Vec<f64> = lower.iter().map(|l| l + rng.uniform(0.1, 1.5)).collect();
                    ConstraintSet::boxed(lower, upper)?
                }
                1 => ConstraintSet::linf_ball(d, rng.uniform(0.1, 1.0))?,
                _ => ConstraintSet::l1_ball(d, rng.uniform(0.2, 2.0))?,
            };
            Ok((obj, set))
        }
    }
}

fn variance_suite(
    mut rng: RandomSource,
    instances: usize,
    inject_fault: bool,
) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Variance);
    let sign = if inject_fault { -1.0 } else { 1.0 };
    for inst in 0..instances {
        let loss = Loss::ALL[inst % 3];
        let (obj, set) = loop {
            let n = 2 + rng.index(7);
            let d = 1 + rng.index(4);
            let candidate = random_problem(&mut rng, loss, n, d)?;
            if candidate.0.n_components() <= 8 {
                break candidate;
            }
        };
        let n = obj.n_components();
        let reference = run_reference(&obj, &set, 1e-11)?;
        let f_star = reference.f_star;
        let x_k = random_feasible_point(&set, &mut rng);
        let y = random_feasible_point(&set, &mut rng);
        let gap_sum = (obj.value(&y)? - f_star) + (obj.value(&x_k)? - f_star);
        let grad_xk = obj.full_gradient(&x_k)?;
        for b in 1..=n {
            let oracle = enumerate_estimator_variance(&obj, &x_k, &y, b)?;
            let library = enumerate_moments_of(&obj, oracle.gradient.clone(), b, |batch| {
                let mut out = vec![0.0; obj.dim()];
                variance_reduced_gradient_signed(&obj, &grad_xk, &x_k, &y, batch, sign, &mut out);
                Ok(out)
            })?;
            let scale = norm(&oracle.gradient).max(1.0);
            let bias = dist(&library.mean, &oracle.gradient);
            t.check(bias <= 1e-12 * scale, || {
                format!("{loss}, n={n}, b={b}: E[G] misses ∇F(y) by {bias:e}")
            });
            let mismatch = (library.variance - oracle.variance).abs();
            t.check(
                mismatch <= 1e-12 * oracle.variance.max(scale * scale),
                || {
                    format!(
                        "{loss}, n={n}, b={b}: estimator variance {:e} vs enumeration {:e}",
                        library.variance, oracle.variance
                    )
                },
            );
            let bound = 4.0 * obj.lipschitz() * alpha(n, b)? * gap_sum + 1e-9;
            t.check(library.variance <= bound, || {
                format!(
                    "{loss}, n={n}, b={b}: variance {:e} exceeds bound {bound:e}",
                    library.variance
                )
            });
        }
    }
    Ok(t.finish())
}

fn gradient_suite(mut rng: RandomSource) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Gradient);
    for inst in 0..30 {
        let loss = Loss::ALL[inst % 3];
        let n = 1 + rng.index(20);
        let d = 1 + rng.index(20);
        let (obj, set) = random_problem(&mut rng, loss, n, d)?;
        let x = random_feasible_point(&set, &mut rng);
        let g = obj.full_gradient(&x)?;
        let fd = finite_diff_gradient(|z| obj.value(z), &x, 1e-5)?;
        let err = dist(&g, &fd) / norm(&g).max(1e-2);
        t.check(err <= 1e-6, || {
            format!("{loss} n={n} d={d}: relative error {err:e}")
        });

        let i = rng.index(obj.n_components());
        let q = obj.linear_term();
        let gi = obj.component_gradient(i, &x)?;
        let fdi = finite_diff_gradient(
            |z| Ok(obj.scalar_loss(i, obj.margin(i, z)) + dot(q, z)),
            &x,
            1e-5,
        )?;
        let err = dist(&gi, &fdi) / norm(&gi).max(1e-2);
        t.check(err <= 1e-6, || {
            format!("{loss} component {i}: relative error {err:e}")
        });
    }
    Ok(t.finish())
}

fn smoothness_suite(mut rng: RandomSource) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::Smoothness);
    for inst in 0..30 {
        let loss = Loss::ALL[inst % 3];
        let n = 2 + rng.index(10);
        let d = 1 + rng.index(6);
        let (obj, set) = random_problem(&mut rng, loss, n, d)?;
        let reference = run_reference(&obj, &set, 1e-11)?;
        let x_star = &reference.x_star;
        let comps = obj.n_components();
        let grads_star: Vec<Vec<f64>> = (0..comps)
            .map(|i| obj.component_gradient(i, x_star))
            .collect::<Result<_>>()?;
        for _ in 0..5 {
            let x = random_feasible_point(&set, &mut rng);
            let y = random_feasible_point(&set, &mut rng);
            let mut lhs = 0.0;
            for (i, gs) in grads_star.iter().enumerate() {
                let gx = obj.component_gradient(i, &x)?;
                lhs += dist_sq(&gx, gs);
                let gy = obj.component_gradient(i, &y)?;
                let li = obj.component_lipschitz(i);
                let (l, r) = (dist(&gx, &gy), li * dist(&x, &y));
                t.check(l <= r * (1.0 + 1e-12) + 1e-12, || {
                    format!("{loss} component {i}: ‖∇f_i(x)−∇f_i(y)‖ = {l:e} > L_i‖x−y‖ = {r:e}")
                });
            }
            lhs /= comps as f64;
            let rhs = 2.0 * obj.lipschitz() * (obj.value(&x)? - reference.f_star) + 1e-9;
            t.check(lhs <= rhs, || {
                format!("{loss}: mean squared gradient difference {lhs:e} > {rhs:e}")
            });
        }
    }
    Ok(t.finish())
}

fn weak_convexity_suite(rng: RandomSource) -> Result<SuiteReport> {
    let mut t = Tally::new(Suite::WeakConvexity);
    let (ds, _) = synth_least_squares(&LeastSquaresSpec::new(12, 6, 3).seed(rng.seed()))?;
    let obj = CompositeObjective::primal(&ds, Loss::Squared)?;
    let set = ConstraintSet::linf_ball(6, 0.5)?;
    let lam = smallest_hessian_eigenvalue(&obj, &[0.0; 6])?;
    t.check(lam.abs() <= 1e-10, || {
        format!("expected a singular Hessian, smallest eigenvalue {lam:e}")
    });

    let reference = run_reference(&obj, &set, 1e-11)?;
    let est = estimate_beta(
        &obj,
        &set,
        &reference.x_star,
        reference.f_star,
        &rng.child(1),
        60,
    )?;
    t.check(est.beta.is_finite() && est.beta > 0.0, || {
        format!("beta estimate {}", est.beta)
    });

    // fresh points must show growth at least half as steep as the estimate
    let mut fresh = rng.child(2);
    for _ in 0..30 {
        let x = random_feasible_point(&set, &mut fresh);
        let gap = obj.value(&x)? - reference.f_star;
        let nearest = run_reference_from(&obj, &set, 1e-10, &x)?;
        let growth = est.mu / (2.0 * 2.0 * est.beta) * dist_sq(&x, &nearest.x_star);
        t.check(gap >= growth - 1e-10, || {
            format!(
                "gap {gap:e} below quadratic growth {growth:e} (beta {:e})",
                est.beta
            )
        });
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            projection_pairs: 200,
            variance_instances: 12,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn clean_variance_suite_passes() {
        let r = run_suite(Suite::Variance, &quick()).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn injected_fault_is_caught() {
        let opts = VerifyOptions {
            inject_fault: true,
            ..quick()
        };
        let r = run_suite(Suite::Variance, &opts).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn projection_suite_passes() {
        let r = run_suite(Suite::Projection, &quick()).unwrap();
        assert!(r.passed(), "{r}");
    }
}
