//! Rate expressions, the mini-batch parameter planner, and an empirical
//! estimate of the weak-strong-convexity constant `β`.
//!
//! With `α(b) = (n−b)/(b(n−1))`, PS2GD contracts the expected optimality gap
//! per epoch by
//!
//! ```text
//! ρ = (β + 4μh²Lα(M+1)) / (μh(1 − 4hLα)M)
//! ```
//!
//! whenever `h ≤ min{1/(4Lα), 1/L}` and `ρ < 1`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::dist_sq;
use crate::model::{CompositeObjective, Loss};
use crate::projections::ConstraintSet;
use crate::sampling::RandomSource;
use crate::solvers::run_reference_from;

/// Variance factor of a `b`-nice sampling out of `n`: `(n−b)/(b(n−1))`.
/// Defined as 0 when `n = 1`.
pub fn alpha(n: usize, b: usize) -> Result<f64> {
    if b == 0 || b > n {
        return Err(Error::arg(format!(
            "mini-batch size {b} must lie in [1, {n}]"
        )));
    }
    if n == 1 {
        return Ok(0.0);
    }
    Ok((n - b) as f64 / (b as f64 * (n - 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    /// Strong convexity of `g`.
    pub mu: f64,
    /// Weak-strong-convexity constant (`θ²` for the Hoffman constant `θ`).
    pub beta: f64,
    pub lipschitz: f64,
    pub stepsize: f64,
    pub inner_max: usize,
    pub batch: usize,
    pub n: usize,
}

impl RateInputs {
    fn validate(&self) -> Result<f64> {
        for (name, v) in [
            ("mu", self.mu),
            ("beta", self.beta),
            ("L", self.lipschitz),
            ("h", self.stepsize),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::arg(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.inner_max == 0 {
            return Err(Error::arg("M must be at least 1"));
        }
        alpha(self.n, self.batch)
    }
}

/// Checks `h ≤ 1/L` and `1 − 4hLα > 0`; returns `1 − 4hLα`.
fn stepsize_margin(h: f64, lipschitz: f64, alpha: f64) -> Result<f64> {
    if h > 1.0 / lipschitz {
        return Err(Error::arg(format!(
            "stepsize {h} violates h ≤ 1/L = {}",
            1.0 / lipschitz
        )));
    }
    let margin = 1.0 - 4.0 * h * lipschitz * alpha;
    if margin <= 0.0 {
        return Err(Error::arg(format!(
            "stepsize {h} violates h < 1/(4Lα) = {} (zero or negative denominator)",
            1.0 / (4.0 * lipschitz * alpha)
        )));
    }
    Ok(margin)
}

/// Expected per-epoch contraction factor `ρ` under weak strong convexity.
pub fn rho(inputs: &RateInputs) -> Result<f64> {
    let a = inputs.validate()?;
    let RateInputs {
        mu,
        beta,
        lipschitz: l,
        stepsize: h,
        inner_max,
        ..
    } = *inputs;
    let margin = stepsize_margin(h, l, a)?;
    let m = inner_max as f64;
    Ok((beta + 4.0 * mu * h * h * l * a * (m + 1.0)) / (mu * h * margin * m))
}

/// Contraction factor when `F` itself is `μ_F`-strongly convex.
pub fn rho_strongly_convex(
    mu_f: f64,
    lipschitz: f64,
    stepsize: f64,
    inner_max: usize,
    batch: usize,
    n: usize,
) -> Result<f64> {
    // Same validation as `rho` with μ = μ_F and β = 1.
    let inputs = RateInputs {
        mu: mu_f,
        beta: 1.0,
        lipschitz,
        stepsize,
        inner_max,
        batch,
        n,
    };
    let a = inputs.validate()?;
    let margin = stepsize_margin(stepsize, lipschitz, a)?;
    let m = inner_max as f64;
    let hla = 4.0 * stepsize * lipschitz * a;
    Ok(1.0 / (stepsize * mu_f * margin * m) + hla * (m + 1.0) / (margin * m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// The interior optimum `h̃ ≤ 1/L` is used.
    Interior,
    /// The stepsize is capped at `1/L`.
    InverseLipschitz,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::InverseLipschitz => "1/L",
        }
    }
}

/// Stepsize and inner-loop length minimizing gradient work for a target `ρ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plan {
    pub h_star: f64,
    /// Real-valued inner-loop length; round up before use.
    pub m_star: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub regime: Regime,
}

/// Chooses `(h*, m*)` so that `ρ(h*, ⌈m*⌉) ≤ ρ*` with the least work per
/// epoch for a fixed mini-batch size.
pub fn plan(
    rho_star: f64,
    mu: f64,
    beta: f64,
    lipschitz: f64,
    batch: usize,
    n: usize,
) -> Result<Plan> {
    if !(rho_star > 0.0 && rho_star < 1.0) {
        return Err(Error::arg(format!(
            "target rate must lie in (0, 1), got {rho_star}"
        )));
    }
    for (name, v) in [("mu", mu), ("beta", beta), ("L", lipschitz)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::arg(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let a = alpha(n, batch)?;
    let r = rho_star;
    let kappa = beta * lipschitz / mu;

    if a > 0.0 {
        let shift = beta * (1.0 + r) / (r * mu);
        let h_tilde = (shift * shift + beta / (4.0 * mu * a * lipschitz)).sqrt() - shift;
        if h_tilde <= 1.0 / lipschitz {
            let c = (1.0 + 1.0 / r) * 4.0 * a;
            let m_star = 2.0 * kappa / r * (c + (4.0 * a / kappa + c * c).sqrt());
            return Ok(Plan {
                h_star: h_tilde,
                m_star,
                kappa,
                alpha: a,
                regime: Regime::Interior,
            });
        }
    }
    let denom = r - 4.0 * a * (1.0 + r);
    if denom <= 0.0 {
        return Err(Error::Planning(format!(
            "target rate {r} unreachable with b = {batch}: ρ − 4α(1+ρ) = {denom} ≤ 0"
        )));
    }
    Ok(Plan {
        h_star: 1.0 / lipschitz,
        m_star: (kappa + 4.0 * a) / denom,
        kappa,
        alpha: a,
        regime: Regime::InverseLipschitz,
    })
}

/// Strong-convexity modulus of `g` over the image of the feasible set.
///
/// Squared loss: `g(z) = (1/2N)‖z − b‖²`, so `μ = 1/N`. SVM dual:
/// `g(z) = ½‖z‖²`, so `μ = 1`. Logistic: the smallest curvature
/// `σ(t)(1−σ(t))/N` over the margins reachable inside `W`.
pub fn g_strong_convexity(obj: &CompositeObjective, set: &ConstraintSet) -> Result<f64> {
    check_dim("constraint set", obj.dim(), set.dim())?;
    let n = obj.n_components() as f64;
    Ok(match obj.loss() {
        Loss::Squared => 1.0 / n,
        Loss::SvmDualQuadratic => 1.0,
        Loss::Logistic => {
            let widest = obj
                .rows()
                .rows()
                .map(|row| set.support_abs(row))
                .fold(0.0, f64::max);
            let s = 1.0 / (1.0 + widest.exp());
            s * (1.0 - s) / n
        }
    })
}

/// Smallest eigenvalue of `∇²F(x) = (1/N) Σ_i g_i''(a_iᵀx) a_i a_iᵀ`
/// (independent of `x` for the quadratic losses). Dense, so meant for
/// moderate dimensions.
pub fn smallest_hessian_eigenvalue(obj: &CompositeObjective, x: &[f64]) -> Result<f64> {
    check_dim("hessian point", obj.dim(), x.len())?;
    let d = obj.dim();
    let mut hess = DMatrix::<f64>::zeros(d, d);
    for i in 0..obj.n_components() {
        let row = obj.rows().row(i);
        let w = obj.scalar_curvature(i, row.dot(x)) / obj.n_components() as f64;
        for (&j, &u) in row.indices.iter().zip(row.values) {
            for (&k, &v) in row.indices.iter().zip(row.values) {
                hess[(j, k)] += w * u * v;
            }
        }
    }
    let eig = SymmetricEigen::new(hess);
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaEstimate {
    /// Largest observed `μ‖x − P(x)‖² / (2(F(x) − F*))`; a lower bound on `β`.
    pub beta: f64,
    pub mu: f64,
    pub samples_used: usize,
}

/// Tolerance for the warm-started solves that locate a nearby optimal point.
const NEAREST_OPTIMUM_TOL: f64 = 1e-10;

/// Empirical lower bound on the weak-strong-convexity constant.
///
/// Sample points are drawn on segments from `x_star` towards random feasible
/// points at log-uniform distances. For each, a warm-started reference solve
/// stands in for the nearest optimal point `P(x)`. Samples whose gap is
/// below `1e-12` are skipped.
pub fn estimate_beta(
    obj: &CompositeObjective,
    set: &ConstraintSet,
    x_star: &[f64],
    f_star: f64,
    rng: &RandomSource,
    n_samples: usize,
) -> Result<BetaEstimate> {
    check_dim("x_star", obj.dim(), x_star.len())?;
    if n_samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let mu = g_strong_convexity(obj, set)?;
    let ratios: Vec<Option<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|s| -> Result<Option<f64>> {
            let mut local = rng.child(s as u64);
            let target = random_feasible_point(set, &mut local);
            let t = 10f64.powf(local.uniform(-3.0, 0.0));
            let mut x: Vec<f64> = x_star
                .iter()
                .zip(&target)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            set.project_in_place(&mut x);
            let gap = obj.value(&x)? - f_star;
            if gap <= 1e-12 {
                return Ok(None);
            }
            let nearest = run_reference_from(obj, set, NEAREST_OPTIMUM_TOL, &x)?;
            Ok(Some(mu * dist_sq(&x, &nearest.x_star) / (2.0 * gap)))
        })
        .collect::<Result<_>>()?;
    let valid: Vec<f64> = ratios.into_iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::Estimation("no sample had a gap above 1e-12".into()));
    }
    let beta = valid.iter().copied().fold(0.0, f64::max);
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Estimation(format!("degenerate estimate {beta}")));
    }
    Ok(BetaEstimate {
        beta,
        mu,
        samples_used: valid.len(),
    })
}

/// A random point of `set`: uniform for boxes, and for the L1 ball a uniform
/// direction on the cross-polytope scaled by a uniform radius.
pub fn random_feasible_point(set: &ConstraintSet, rng: &mut RandomSource) -> Vec<f64> {
    match set {
        ConstraintSet::L1Ball { dim, radius } => {
            let raw: Vec<f64> = (0..*dim)
                .map(|_| {
                    let e = -(1.0 - rng.unit()).ln();
                    if rng.unit() < 0.5 {
                        -e
                    } else {
                        e
                    }
                })
                .collect();
            let l1: f64 = raw.iter().map(|v| v.abs()).sum();
            let scale = radius * rng.unit() / l1;
            raw.iter().map(|v| v * scale).collect()
        }
        _ => {
            let (lo, hi) = set.bounding_box();
            lo.iter()
                .zip(&hi)
                .map(|(l, h)| rng.uniform(*l, *h))
                .collect()
        }
    }
}
