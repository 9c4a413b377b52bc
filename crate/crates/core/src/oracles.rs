//! Brute-force checkers: finite differences, exhaustive enumeration over
//! mini-batches, and grid search for projections.
//!
//! These only use `value`, `component_gradient`, set membership and plain
//! arithmetic, so they stay independent of the code paths they check.

use itertools::Itertools;

use crate::error::{check_dim, Error, Result};
use crate::model::CompositeObjective;
use crate::projections::ConstraintSet;

/// Largest family size for mini-batch enumeration.
pub const MAX_ENUMERATION: usize = 12;
/// Largest component count for estimator enumeration.
pub const MAX_ESTIMATOR_COMPONENTS: usize = 10;
/// Largest dimension for grid projection.
pub const MAX_GRID_DIM: usize = 3;

/// Central differences `(f(x+s·e_j) − f(x−s·e_j)) / 2s`.
pub fn finite_diff_gradient(
    f: impl Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::arg(format!("step must be positive, got {step}")));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        probe[j] = x[j] + step;
        let up = f(&probe)?;
        probe[j] = x[j] - step;
        let down = f(&probe)?;
        probe[j] = x[j];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite function value along coordinate {j}"
            )));
        }
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// All `C(n, tau)` subsets of `0..n`, in lexicographic order.
pub fn all_minibatches(n: usize, tau: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(tau).collect()
}

/// Exact `E‖(1/τ) Σ_{i∈S} ξ_i − mean‖²` over uniformly random `τ`-subsets.
pub fn enumerate_minibatch_expectation(vectors: &[Vec<f64>], tau: usize) -> Result<f64> {
    let n = vectors.len();
    if n == 0 || n > MAX_ENUMERATION {
        return Err(Error::Budget(format!(
            "family size {n} outside [1, {MAX_ENUMERATION}]"
        )));
    }
    if tau == 0 || tau > n {
        return Err(Error::arg(format!("tau {tau} outside [1, {n}]")));
    }
    let dim = vectors[0].len();
    for v in vectors {
        check_dim("vector family", dim, v.len())?;
    }
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let subsets = all_minibatches(n, tau);
    let mut total = 0.0;
    for s in &subsets {
        let mut dev = 0.0;
        for j in 0..dim {
            let avg = s.iter().map(|&i| vectors[i][j]).sum::<f64>() / tau as f64;
            dev += (avg - mean[j]).powi(2);
        }
        total += dev;
    }
    Ok(total / subsets.len() as f64)
}

/// Exact first and second moments of the mini-batch estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorMoments {
    /// `E[G]`, averaged over every size-`b` batch.
    pub mean: Vec<f64>,
    /// `∇F(y)` assembled from component gradients.
    pub gradient: Vec<f64>,
    /// `E‖G − ∇F(y)‖²`.
    pub variance: f64,
}

/// Enumerates `G = ∇F(x_k) + (1/b) Σ_{i∈S} (∇f_i(y) − ∇f_i(x_k))` over all
/// batches `S` of size `b`, using only `component_gradient`.
pub fn enumerate_estimator_variance(
    obj: &CompositeObjective,
    x_k: &[f64],
    y: &[f64],
    b: usize,
) -> Result<EstimatorMoments> {
    let batches = estimator_batches(obj, b)?;
    let n = obj.n_components();
    let at_y: Vec<Vec<f64>> = (0..n).map(|i| obj.component_gradient(i, y)).try_collect()?;
    let at_x: Vec<Vec<f64>> = (0..n)
        .map(|i| obj.component_gradient(i, x_k))
        .try_collect()?;
    let average = |grads: &[Vec<f64>]| -> Vec<f64> {
        (0..obj.dim())
            .map(|j| grads.iter().map(|g| g[j]).sum::<f64>() / n as f64)
            .collect()
    };
    let grad_y = average(&at_y);
    let grad_x = average(&at_x);
    estimator_moments(&batches, grad_y, |s| {
        Ok((0..obj.dim())
            .map(|j| grad_x[j] + s.iter().map(|&i| at_y[i][j] - at_x[i][j]).sum::<f64>() / b as f64)
            .collect())
    })
}

/// Moments of an arbitrary estimator `G(S)` over every size-`b` batch, measured
/// against `gradient`. Used to audit estimator implementations.
pub fn enumerate_moments_of(
    obj: &CompositeObjective,
    gradient: Vec<f64>,
    b: usize,
    estimator: impl FnMut(&[usize]) -> Result<Vec<f64>>,
) -> Result<EstimatorMoments> {
    let batches = estimator_batches(obj, b)?;
    estimator_moments(&batches, gradient, estimator)
}

fn estimator_batches(obj: &CompositeObjective, b: usize) -> Result<Vec<Vec<usize>>> {
    let n = obj.n_components();
    if n > MAX_ESTIMATOR_COMPONENTS {
        return Err(Error::Budget(format!(
            "{n} components exceed the limit of {MAX_ESTIMATOR_COMPONENTS}"
        )));
    }
    if b == 0 || b > n {
        return Err(Error::arg(format!("mini-batch size {b} outside [1, {n}]")));
    }
    Ok(all_minibatches(n, b))
}

fn estimator_moments(
    batches: &[Vec<usize>],
    gradient: Vec<f64>,
    mut estimator: impl FnMut(&[usize]) -> Result<Vec<f64>>,
) -> Result<EstimatorMoments> {
    let dim = gradient.len();
    let mut mean = vec![0.0; dim];
    let mut variance = 0.0;
    for s in batches {
        let g = estimator(s)?;
        check_dim("estimator output", dim, g.len())?;
        for j in 0..dim {
            mean[j] += g[j];
            variance += (g[j] - gradient[j]).powi(2);
        }
    }
    let count = batches.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    Ok(EstimatorMoments {
        mean,
        gradient,
        variance: variance / count,
    })
}

/// Minimizes `½‖x − z‖²` over the feasible points of a grid laid over the
/// set's bounding box, starting at the lower corner with the given spacing.
pub fn grid_projection_oracle(set: &ConstraintSet, z: &[f64], spacing: f64) -> Result<Vec<f64>> {
    let dim = set.dim();
    check_dim("point", dim, z.len())?;
    if dim > MAX_GRID_DIM {
        return Err(Error::Budget(format!(
            "grid search in dimension {dim} (limit {MAX_GRID_DIM})"
        )));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::arg(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let (lo, hi) = set.bounding_box();
    let counts: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| ((h - l) / spacing + 1e-9).floor() as usize + 1)
        .collect();
    let total: f64 = counts.iter().map(|&c| c as f64).product();
    if total > 1e8 {
        return Err(Error::Budget(format!("{total} grid points")));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut point = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    loop {
        for j in 0..dim {
            point[j] = lo[j] + idx[j] as f64 * spacing;
        }
        if set.contains(&point, 1e-12)? {
            let d: f64 = point.iter().zip(z).map(|(p, q)| (p - q).powi(2)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, point.clone()));
            }
        }
        // odometer increment
        let mut j = 0;
        loop {
            if j == dim {
                return best
                    .map(|(_, p)| p)
                    .ok_or_else(|| Error::arg("no grid point is feasible; reduce the spacing"));
            }
            idx[j] += 1;
            if idx[j] < counts[j] {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LabeledDataset, Loss, SparseMatrix};

    #[test]
    fn finite_differences_of_quadratic() {
        let g = finite_diff_gradient(|x| Ok(0.5 * (x[0] * x[0] + x[1] * x[1])), &[1.0, 2.0], 1e-5)
            .unwrap();
        assert!((g[0] - 1.0).abs() < 1e-9 && (g[1] - 2.0).abs() < 1e-9);
        let c = finite_diff_gradient(|_| Ok(3.0), &[1.0, 2.0, 3.0], 1e-3).unwrap();
        assert_eq!(c, vec![0.0; 3]);
        assert!(finite_diff_gradient(|_| Ok(f64::NAN), &[0.0], 1e-3).is_err());
        assert!(finite_diff_gradient(|_| Ok(0.0), &[0.0], 0.0).is_err());
    }

    #[test]
    fn minibatch_expectation_examples() {
        let e = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(enumerate_minibatch_expectation(&e, 1).unwrap(), 0.5);
        let v = vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 4.0]];
        assert!(enumerate_minibatch_expectation(&v, 3).unwrap().abs() < 1e-30);
        let same = vec![vec![2.0, -1.0]; 5];
        assert_eq!(enumerate_minibatch_expectation(&same, 2).unwrap(), 0.0);
        assert!(matches!(
            enumerate_minibatch_expectation(&vec![vec![0.0]; 13], 1),
            Err(Error::Budget(_))
        ));
    }

    fn logistic() -> CompositeObjective {
        let rows = vec![
            vec![0.5, -1.0],
            vec![1.0, 0.2],
            vec![-0.3, 0.8],
            vec![0.1, 0.1],
            vec![2.0, -0.5],
            vec![-1.0, -1.0],
        ];
        let ds = LabeledDataset::new(
            SparseMatrix::from_dense(&rows).unwrap(),
            vec![1.0, -1.0, 1.0, 1.0, -1.0, -1.0],
        )
        .unwrap();
        CompositeObjective::primal(&ds, Loss::Logistic).unwrap()
    }

    #[test]
    fn estimator_zero_cases() {
        let obj = logistic();
        let y = [0.3, -0.2];
        let same = enumerate_estimator_variance(&obj, &y, &y, 2).unwrap();
        assert!(same.variance < 1e-30);
        let full = enumerate_estimator_variance(&obj, &[0.0, 0.0], &y, 6).unwrap();
        assert!(full.variance < 1e-28);
        for (m, g) in full.mean.iter().zip(&full.gradient) {
            assert!((m - g).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_oracle_examples() {
        let set = ConstraintSet::linf_ball(2, 0.1).unwrap();
        let p = grid_projection_oracle(&set, &[0.5, -0.05], 1e-3).unwrap();
        assert!((p[0] - 0.1).abs() <= 1e-3 && (p[1] + 0.05).abs() <= 1e-3);

        let l1 = ConstraintSet::l1_ball(2, 1.0).unwrap();
        let p = grid_projection_oracle(&l1, &[2.0, 1.0], 1e-3).unwrap();
        assert!((p[0] - 1.0).abs() <= 1e-3 && p[1].abs() <= 1e-3);

        let big = ConstraintSet::linf_ball(4, 1.0).unwrap();
        assert!(matches!(
            grid_projection_oracle(&big, &[0.0; 4], 0.1),
            Err(Error::Budget(_))
        ));
    }
}
