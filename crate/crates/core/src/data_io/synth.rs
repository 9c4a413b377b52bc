//! Seeded synthetic problems: low-rank least squares and Gaussian logistic
//! classification.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::{scale_rows_to_unit_norm, LabeledDataset, Loss, SparseMatrix};
use crate::sampling::RandomSource;

use super::Metadata;

/// `A = U·Vᵀ` with Gaussian factors of width `rank`, targets `A·x_true + noise·ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSpec {
    pub n: usize,
    pub d: usize,
    pub rank: usize,
    pub noise: f64,
    pub seed: u64,
    /// Normalize rows (and their targets) so every component is 1-smooth.
    pub scale_rows: bool,
}

impl LeastSquaresSpec {
    pub fn new(n: usize, d: usize, rank: usize) -> Self {
        LeastSquaresSpec {
            n,
            d,
            rank,
            noise: 0.1,
            seed: 0,
            scale_rows: true,
        }
    }

    pub fn noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn scale_rows(mut self, on: bool) -> Self {
        self.scale_rows = on;
        self
    }
}

pub fn synth_least_squares(spec: &LeastSquaresSpec) -> Result<(LabeledDataset, Metadata)> {
    let &LeastSquaresSpec {
        n,
        d,
        rank,
        noise,
        seed,
        scale_rows,
    } = spec;
    if n == 0 || d == 0 {
        return Err(Error::arg("n and d must be at least 1"));
    }
    if rank == 0 || rank > n.min(d) {
        return Err(Error::arg(format!(
            "rank {rank} outside [1, min(n, d) = {}]",
            n.min(d)
        )));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::arg(format!(
            "noise must be finite and nonnegative, got {noise}"
        )));
    }
    let mut rng = RandomSource::new(seed);
    let u: Vec<Vec<f64>> = (0..n).map(|_| rng.normal_vec(rank)).collect();
    let v: Vec<Vec<f64>> = (0..d).map(|_| rng.normal_vec(rank)).collect();
    let x_true = rng.normal_vec(d);
    let rows: Vec<Vec<f64>> = u
        .iter()
        .map(|ui| v.iter().map(|vj| dot(ui, vj)).collect())
        .collect();
    let mut targets: Vec<f64> = rows
        .iter()
        .map(|a| dot(a, &x_true) + noise * rng.normal())
        .collect();
    if scale_rows {
        for (a, t) in rows.iter().zip(targets.iter_mut()) {
            *t /= dot(a, a).sqrt();
        }
    }
    let mut ds = LabeledDataset::new(SparseMatrix::from_dense(&rows)?, targets)?;
    if scale_rows {
        ds = scale_rows_to_unit_norm(&ds)?;
    }

    let mut meta = Metadata::default();
    meta.push("kind", "least_squares");
    meta.push("n", n);
    meta.push("d", d);
    meta.push("rank", rank);
    meta.push("noise", noise);
    meta.push("seed", seed);
    meta.push("scale_rows", scale_rows);
    meta.push_list("x_true", &x_true);
    Ok((ds, meta))
}

/// Gaussian features labelled by a random hyperplane through the origin.
/// Without `separable`, one label in ten is flipped. Rows are unit-norm.
pub fn synth_logistic(n: usize, d: usize, separable: bool, seed: u64) -> Result<LabeledDataset> {
    if n == 0 || d == 0 {
        return Err(Error::arg("n and d must be at least 1"));
    }
    let mut rng = RandomSource::new(seed);
    let w = rng.normal_vec(d);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a = rng.normal_vec(d);
        while dot(&a, &a) == 0.0 {
            a = rng.normal_vec(d);
        }
        let mut label = if dot(&a, &w) >= 0.0 { 1.0 } else { -1.0 };
        if !separable && rng.unit() < 0.1 {
            label = -label;
        }
        rows.push(a);
        labels.push(label);
    }
    let ds = LabeledDataset::new(SparseMatrix::from_dense(&rows)?, labels)?;
    scale_rows_to_unit_norm(&ds)
}

/// Command-line description of a synthetic problem, e.g.
/// `lsq:n=200,d=50,rank=20,noise=0.1,seed=3` or `logistic:n=500,d=20,separable=0`.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticSpec {
    LeastSquares(LeastSquaresSpec),
    Logistic {
        n: usize,
        d: usize,
        separable: bool,
        seed: u64,
    },
}

impl SyntheticSpec {
    /// The loss the generated data is meant for.
    pub fn natural_loss(&self) -> Loss {
        match self {
            SyntheticSpec::LeastSquares(_) => Loss::Squared,
            SyntheticSpec::Logistic { .. } => Loss::Logistic,
        }
    }

    pub fn generate(&self) -> Result<(LabeledDataset, Metadata)> {
        match self {
            SyntheticSpec::LeastSquares(spec) => synth_least_squares(spec),
            &SyntheticSpec::Logistic {
                n,
                d,
                separable,
                seed,
            } => {
                let ds = synth_logistic(n, d, separable, seed)?;
                let mut meta = Metadata::default();
                meta.push("kind", "logistic");
                meta.push("n", n);
                meta.push("d", d);
                meta.push("separable", separable);
                meta.push("seed", seed);
                Ok((ds, meta))
            }
        }
    }
}

impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut fields = Vec::new();
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                Error::arg(format!("bad synthetic field '{pair}' (expected key=value)"))
            })?;
            fields.push((k.trim(), v.trim()));
        }
        let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|&(_, v)| v);
        let count = |key: &str, default: Option<usize>| -> Result<usize> {
            match get(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::arg(format!("bad value '{v}' for {key}"))),
                None => {
                    default.ok_or_else(|| Error::arg(format!("synthetic spec '{s}' needs {key}=")))
                }
            }
        };
        let seed = match get("seed") {
            Some(v) => v
                .parse()
                .map_err(|_| Error::arg(format!("bad seed '{v}'")))?,
            None => 0,
        };
        let flag = |key: &str, default: bool| -> Result<bool> {
            match get(key) {
                None => Ok(default),
                Some("1" | "true" | "yes") => Ok(true),
                Some("0" | "false" | "no") => Ok(false),
                Some(v) => Err(Error::arg(format!("bad flag '{v}' for {key}"))),
            }
        };
        let known: &[&str] = match kind {
            "lsq" | "least_squares" => &["n", "d", "rank", "noise", "seed", "scale"],
            "logistic" => &["n", "d", "separable", "seed"],
            _ => {
                return Err(Error::arg(format!(
                    "unknown synthetic kind '{kind}' (expected lsq or logistic)"
                )))
            }
        };
        if let Some((k, _)) = fields.iter().find(|(k, _)| !known.contains(k)) {
            return Err(Error::arg(format!(
                "unknown synthetic field '{k}' for {kind}"
            )));
        }
        let n = count("n", None)?;
        let d = count("d", None)?;
        if known.contains(&"rank") {
            let noise = match get("noise") {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::arg(format!("bad noise '{v}'")))?,
                None => 0.1,
            };
            Ok(SyntheticSpec::LeastSquares(
                LeastSquaresSpec::new(n, d, count("rank", Some(n.min(d)))?)
                    .noise(noise)
                    .seed(seed)
                    .scale_rows(flag("scale", true)?),
            ))
        } else {
            Ok(SyntheticSpec::Logistic {
                n,
                d,
                separable: flag("separable", false)?,
                seed,
            })
        }
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntheticSpec::LeastSquares(s) => write!(
                f,
                "lsq:n={},d={},rank={},noise={},seed={},scale={}",
                s.n, s.d, s.rank, s.noise, s.seed, s.scale_rows as u8
            ),
            SyntheticSpec::Logistic {
                n,
                d,
                separable,
                seed,
            } => {
                write!(
                    f,
                    "logistic:n={n},d={d},separable={},seed={seed}",
                    *separable as u8
                )
            }
        }
    }
}
