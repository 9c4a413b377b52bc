//! Seedable randomness: uniform mini-batches (τ-nice sampling) and inner-loop lengths.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Deterministic random stream backed by ChaCha8, which is portable across
/// platforms and supports independent sub-streams.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream `stream` derived from the same seed. Children
    /// never share state with the parent or with each other.
    pub fn child(&self, stream: u64) -> RandomSource {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_add(1));
        RandomSource {
            seed: self.seed,
            rng,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Uniform index in `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    /// Uniformly random `b`-subset of `[0, n)`, returned in increasing order.
    ///
    /// Floyd's algorithm: every subset is equally likely and only `b` draws
    /// are made.
    pub fn sample_minibatch(&mut self, n: usize, b: usize) -> Result<Vec<usize>> {
        if b == 0 || b > n {
            return Err(Error::arg(format!(
                "mini-batch size {b} must lie in [1, {n}]"
            )));
        }
        if b == n {
            return Ok((0..n).collect());
        }
        let mut chosen = BTreeSet::new();
        for j in (n - b)..n {
            let t = self.rng.random_range(0..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        Ok(chosen.into_iter().collect())
    }

    /// Uniform draw from `{1, …, max_len}`.
    pub fn sample_inner_length(&mut self, max_len: usize) -> Result<usize> {
        if max_len == 0 {
            return Err(Error::arg("inner loop bound M must be at least 1"));
        }
        Ok(self.rng.random_range(1..=max_len))
    }
}

/// Exact `E‖(1/τ) Σ_{i∈S} ξ_i − μ‖²` for a τ-nice sampling `S`:
/// `(n−τ)/(τ n (n−1)) · Σ_i ‖ξ_i − μ‖²`, with `μ` the mean of the vectors.
pub fn tau_nice_variance(vectors: &[Vec<f64>], tau: usize) -> Result<f64> {
    let n = check_family(vectors, tau)?;
    if n == 1 {
        return Ok(0.0);
    }
    let mean = mean_vector(vectors);
    let spread: f64 = vectors
        .iter()
        .map(|v| crate::linalg::dist_sq(v, &mean))
        .sum();
    Ok((n - tau) as f64 / (tau as f64 * n as f64 * (n - 1) as f64) * spread)
}

/// The uncentered form `(1/(nτ)) · (n−τ)/(n−1) · Σ_i ‖ξ_i‖²`. It equals
/// [`tau_nice_variance`] when the vectors average to zero and bounds it from
/// above otherwise.
pub fn tau_nice_variance_bound(vectors: &[Vec<f64>], tau: usize) -> Result<f64> {
    let n = check_family(vectors, tau)?;
    if n == 1 {
        return Ok(0.0);
    }
    let total: f64 = vectors.iter().map(|v| crate::linalg::norm_sq(v)).sum();
    Ok(1.0 / (n as f64 * tau as f64) * (n - tau) as f64 / (n - 1) as f64 * total)
}

fn check_family(vectors: &[Vec<f64>], tau: usize) -> Result<usize> {
    let n = vectors.len();
    if n == 0 || tau == 0 || tau > n {
        return Err(Error::arg(format!(
            "need 1 ≤ τ ≤ n, got τ = {tau}, n = {n}"
        )));
    }
    let d = vectors[0].len();
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::arg("vectors have unequal lengths"));
    }
    Ok(n)
}

pub(crate) fn mean_vector(vectors: &[Vec<f64>]) -> Vec<f64> {
    let d = vectors[0].len();
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let inv = 1.0 / vectors.len() as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    mean
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[test]
    fn full_and_single_batches() {
        let mut rng = RandomSource::new(3);
        assert_eq!(rng.sample_minibatch(5, 5).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(rng.sample_minibatch(1, 1).unwrap(), vec![0]);
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut rng = RandomSource::new(0);
        assert!(rng.sample_minibatch(3, 0).is_err());
        assert!(rng.sample_minibatch(3, 4).is_err());
        assert!(rng.sample_inner_length(0).is_err());
    }

    #[test]
    fn pairs_from_four_are_uniform() {
        let mut rng = RandomSource::new(11);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            let s = rng.sample_minibatch(4, 2).unwrap();
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            *counts.entry(s).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (subset, c) in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.01, "{subset:?}: {freq}");
        }
    }

    #[test]
    fn inner_length_distribution() {
        let mut rng = RandomSource::new(5);
        assert_eq!(rng.sample_inner_length(1).unwrap(), 1);

        let draws = 100_000;
        let mean = (0..draws)
            .map(|_| rng.sample_inner_length(2).unwrap() as f64)
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 1.5).abs() < 0.01, "{mean}");

        let mut counts = [0usize; 11];
        for _ in 0..draws {
            counts[rng.sample_inner_length(10).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        for (v, &c) in counts.iter().enumerate().skip(1) {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.1).abs() < 0.005, "value {v}: {freq}");
        }
    }

    #[test]
    fn equal_seeds_reproduce() {
        let mut a = RandomSource::new(42);
        let mut b = RandomSource::new(42);
        for _ in 0..100 {
            assert_eq!(
                a.sample_minibatch(50, 7).unwrap(),
                b.sample_minibatch(50, 7).unwrap()
            );
        }
        let mut c1 = a.child(1);
        let mut c2 = a.child(2);
        let xs: Vec<usize> = (0..20).map(|_| c1.index(1000)).collect();
        let ys: Vec<usize> = (0..20).map(|_| c2.index(1000)).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn closed_forms_small_case() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((tau_nice_variance(&v, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((tau_nice_variance_bound(&v, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(tau_nice_variance(&v, 2).unwrap(), 0.0);
    }
}
