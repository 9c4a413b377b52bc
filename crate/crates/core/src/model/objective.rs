use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, dot, CompensatedSum};
use crate::model::{LabeledDataset, SparseMatrix};
use crate::projections::ConstraintSet;

/// Scalar loss family `g_i` applied to the margin `t = a_iᵀx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `g_i(t) = log(1 + exp(-b_i t))`
    Logistic,
    /// `g_i(t) = ½ (t - b_i)²`
    Squared,
    /// `g_s(t) = (N/2) t²` over the label-weighted feature rows of an SVM dual.
    SvmDualQuadratic,
}

impl Loss {
    pub const ALL: [Loss; 3] = [Loss::Logistic, Loss::Squared, Loss::SvmDualQuadratic];

    pub fn name(self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::Squared => "squared",
            Loss::SvmDualQuadratic => "svm-dual",
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "squared" | "least-squares" | "lsq" => Ok(Loss::Squared),
            "svm-dual" | "svm_dual" | "svm_dual_quadratic" => Ok(Loss::SvmDualQuadratic),
            other => Err(Error::arg(format!(
                "unknown loss '{other}' (expected logistic, squared or svm-dual)"
            ))),
        }
    }
}

/// `log(1 + exp(-m))` without overflow.
fn log1p_exp_neg(m: f64) -> f64 {
    (-m).max(0.0) + (-m.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(m))` without overflow.
fn sigmoid_neg(m: f64) -> f64 {
    if m >= 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

/// Finite-sum objective `F(x) = (1/N) Σ_i [g_i(a_iᵀx) + qᵀx]`.
///
/// `rows` holds one row `a_i` per component function. For primal (Type I)
/// problems those are the examples; for the SVM dual they are the
/// label-weighted feature rows and the decision variable lives in ℝⁿ.
#[derive(Debug, Clone)]
pub struct CompositeObjective {
    rows: SparseMatrix,
    targets: Vec<f64>,
    loss: Loss,
    linear_term: Vec<f64>,
    lipschitz: f64,
}

impl CompositeObjective {
    /// Primal objective over the examples of `dataset` with `q = 0` and
    /// `L = max_i L_i`.
    pub fn primal(dataset: &LabeledDataset, loss: Loss) -> Result<Self> {
        match loss {
            Loss::SvmDualQuadratic => {
                return Err(Error::arg(
                    "svm-dual objectives are built with build_svm_dual",
                ))
            }
            Loss::Logistic if !dataset.has_binary_labels() => {
                return Err(Error::arg("logistic loss needs labels in {-1, +1}"))
            }
            _ => {}
        }
        let lipschitz = lipschitz_constant(dataset, loss)?;
        Ok(CompositeObjective {
            rows: dataset.features().clone(),
            targets: dataset.labels().to_vec(),
            loss,
            linear_term: vec![0.0; dataset.n_features()],
            lipschitz,
        })
    }

    pub fn with_linear_term(mut self, q: Vec<f64>) -> Result<Self> {
        check_dim("linear term", self.dim(), q.len())?;
        if !all_finite(&q) {
            return Err(Error::arg("linear term must be finite"));
        }
        self.linear_term = q;
        Ok(self)
    }

    /// Overrides `L`. It may only be raised above the analytic `max_i L_i`.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        let floor = self.max_component_lipschitz();
        if !(lipschitz.is_finite() && lipschitz > 0.0 && lipschitz >= floor) {
            return Err(Error::arg(format!(
                "lipschitz constant {lipschitz} below analytic bound {floor}"
            )));
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn rows(&self) -> &SparseMatrix {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.linear_term
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Number of component functions `N` in the average.
    pub fn n_components(&self) -> usize {
        self.rows.n_rows()
    }

    /// Dimension of the decision variable.
    pub fn dim(&self) -> usize {
        self.rows.n_cols()
    }

    pub fn component_lipschitz(&self, i: usize) -> f64 {
        let norm_sq = self.rows.row_norm_sq(i);
        match self.loss {
            Loss::Logistic => norm_sq / 4.0,
            Loss::Squared => norm_sq,
            Loss::SvmDualQuadratic => self.n_components() as f64 * norm_sq,
        }
    }

    fn max_component_lipschitz(&self) -> f64 {
        (0..self.n_components())
            .map(|i| self.component_lipschitz(i))
            .fold(0.0, f64::max)
    }

    /// `a_iᵀx`.
    #[inline]
    pub fn margin(&self, i: usize, x: &[f64]) -> f64 {
        self.rows.row(i).dot(x)
    }

    /// `g_i(t)`.
    #[inline]
    pub fn scalar_loss(&self, i: usize, t: f64) -> f64 {
        match self.loss {
            Loss::Logistic => log1p_exp_neg(self.targets[i] * t),
            Loss::Squared => {
                let r = t - self.targets[i];
                0.5 * r * r
            }
            Loss::SvmDualQuadratic => 0.5 * self.n_components() as f64 * t * t,
        }
    }

    /// `g_i'(t)`.
    #[inline]
    pub fn scalar_derivative(&self, i: usize, t: f64) -> f64 {
        match self.loss {
            Loss::Logistic => {
                let b = self.targets[i];
                -b * sigmoid_neg(b * t)
            }
            Loss::Squared => t - self.targets[i],
            Loss::SvmDualQuadratic => self.n_components() as f64 * t,
        }
    }

    /// `g_i''(t)`.
    pub fn scalar_curvature(&self, i: usize, t: f64) -> f64 {
        match self.loss {
            Loss::Logistic => {
                let s = sigmoid_neg(self.targets[i] * t);
                s * (1.0 - s)
            }
            Loss::Squared => 1.0,
            Loss::SvmDualQuadratic => self.n_components() as f64,
        }
    }

    /// `F(x) = (1/N) Σ_i f_i(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim("value", self.dim(), x.len())?;
        let mut acc = CompensatedSum::default();
        for i in 0..self.n_components() {
            acc.add(self.scalar_loss(i, self.margin(i, x)));
        }
        let value = acc.value() / self.n_components() as f64 + dot(&self.linear_term, x);
        if !value.is_finite() {
            return Err(Error::numeric("objective value is not finite"));
        }
        Ok(value)
    }

    /// `∇f_i(x) = g_i'(a_iᵀx) a_i + q`, dense.
    pub fn component_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        if i >= self.n_components() {
            return Err(Error::arg(format!(
                "component index {i} out of range ({} components)",
                self.n_components()
            )));
        }
        check_dim("component_gradient", self.dim(), x.len())?;
        let mut grad = self.linear_term.clone();
        let coef = self.scalar_derivative(i, self.margin(i, x));
        self.rows.row(i).axpy(coef, &mut grad);
        if !all_finite(&grad) {
            return Err(Error::numeric(format!(
                "gradient of component {i} is not finite"
            )));
        }
        Ok(grad)
    }

    /// `∇F(x) = (1/N) Σ_i ∇f_i(x)` with per-coordinate compensated accumulation.
    pub fn full_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("full_gradient", self.dim(), x.len())?;
        let mut acc = vec![CompensatedSum::default(); self.dim()];
        for i in 0..self.n_components() {
            let row = self.rows.row(i);
            let coef = self.scalar_derivative(i, row.dot(x));
            for (&j, &v) in row.indices.iter().zip(row.values) {
                acc[j].add(coef * v);
            }
        }
        let inv_n = 1.0 / self.n_components() as f64;
        let grad: Vec<f64> = acc
            .iter()
            .zip(&self.linear_term)
            .map(|(s, q)| s.value() * inv_n + q)
            .collect();
        if !all_finite(&grad) {
            return Err(Error::numeric("full gradient is not finite"));
        }
        Ok(grad)
    }
}

/// `max_i L_i` for the given loss family.
///
/// For [`Loss::SvmDualQuadratic`] the components are the label-weighted
/// feature rows, so the constant is `d'·max_s ‖a_s‖²` with `d'` the number
/// of features that occur at all.
pub fn lipschitz_constant(dataset: &LabeledDataset, loss: Loss) -> Result<f64> {
    let features = dataset.features();
    if features.n_rows() == 0 {
        return Err(Error::arg("empty dataset"));
    }
    let max_norm_sq = |m: &SparseMatrix| {
        (0..m.n_rows())
            .map(|i| m.row_norm_sq(i))
            .fold(0.0, f64::max)
    };
    Ok(match loss {
        Loss::Logistic => max_norm_sq(features) / 4.0,
        Loss::Squared => max_norm_sq(features),
        Loss::SvmDualQuadratic => {
            let rows = svm_feature_rows(dataset)?;
            rows.n_rows() as f64 * max_norm_sq(&rows)
        }
    })
}

/// Rows `a_s^(c) = (b_1 a_1s, …, b_n a_ns)` for every feature `s` that occurs.
fn svm_feature_rows(dataset: &LabeledDataset) -> Result<SparseMatrix> {
    if !dataset.has_binary_labels() {
        return Err(Error::arg("svm dual needs labels in {-1, +1}"));
    }
    let signed = dataset.features().scale_rows(dataset.labels())?;
    let columns = signed.transpose();
    let used: Vec<usize> = (0..columns.n_rows())
        .filter(|&s| columns.row(s).nnz() > 0)
        .collect();
    if used.is_empty() {
        return Err(Error::arg("dataset has no nonzero features"));
    }
    Ok(columns.select_rows(&used))
}

/// Dual of the hinge-loss SVM, `min ½‖Ay‖² − 1ᵀy` over `y ∈ [0, λn]ⁿ`, as a
/// finite sum over feature rows. Features that never occur are dropped.
pub fn build_svm_dual(
    dataset: &LabeledDataset,
    lambda: f64,
) -> Result<(CompositeObjective, ConstraintSet)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::arg(format!("lambda must be positive, got {lambda}")));
    }
    let rows = svm_feature_rows(dataset)?;
    let n = dataset.n_examples();
    let mut obj = CompositeObjective {
        targets: vec![0.0; rows.n_rows()],
        loss: Loss::SvmDualQuadratic,
        linear_term: vec![-1.0; n],
        lipschitz: 0.0,
        rows,
    };
    obj.lipschitz = obj.max_component_lipschitz();
    let upper = lambda * n as f64;
    let set = ConstraintSet::uniform_box(n, 0.0, upper)?;
    Ok((obj, set))
}
