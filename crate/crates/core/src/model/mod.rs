//! Datasets, loss families and the finite-sum composite objective
//! `F(x) = g(Ax) + qᵀx = (1/N) Σ_i f_i(x)`.

mod objective;
mod sparse;

pub use objective::{build_svm_dual, lipschitz_constant, CompositeObjective, Loss};
pub use sparse::{SparseMatrix, SparseRow};

use crate::error::{Error, Result};

/// Feature matrix (one row per example) plus one label per example.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: SparseMatrix,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(features: SparseMatrix, labels: Vec<f64>) -> Result<Self> {
        if features.n_rows() == 0 || features.n_cols() == 0 {
            return Err(Error::arg(
                "dataset needs at least one example and one feature",
            ));
        }
        if labels.len() != features.n_rows() {
            return Err(Error::arg(format!(
                "{} labels for {} examples",
                labels.len(),
                features.n_rows()
            )));
        }
        if labels.iter().any(|b| !b.is_finite()) {
            return Err(Error::arg("labels must be finite"));
        }
        Ok(LabeledDataset { features, labels })
    }

    pub fn features(&self) -> &SparseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn n_examples(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn has_binary_labels(&self) -> bool {
        self.labels.iter().all(|&b| b == 1.0 || b == -1.0)
    }
}

/// Rescales every example to unit Euclidean norm. Labels and the sparsity
/// pattern are untouched.
pub fn scale_rows_to_unit_norm(dataset: &LabeledDataset) -> Result<LabeledDataset> {
    let features = dataset.features();
    let mut factors = Vec::with_capacity(features.n_rows());
    for i in 0..features.n_rows() {
        let norm = features.row_norm_sq(i).sqrt();
        if norm == 0.0 {
            return Err(Error::arg(format!(
                "row {i} is all zeros and cannot be normalized"
            )));
        }
        factors.push(1.0 / norm);
    }
    LabeledDataset::new(features.scale_rows(&factors)?, dataset.labels().to_vec())
}
