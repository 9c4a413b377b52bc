//! Dataset summaries: size, sparsity and the smoothness constant of the loss.

use std::fmt;

use crate::error::Result;
use crate::model::{lipschitz_constant, scale_rows_to_unit_norm, LabeledDataset, Loss};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSummary {
    pub n: usize,
    pub d: usize,
    /// Fraction of nonzero entries, in (0, 1].
    pub sparsity: f64,
    pub lipschitz: f64,
}

impl DatasetSummary {
    pub const HEADER: &'static str = "n,d,sparsity_percent,L";

    /// Comma-separated row matching [`DatasetSummary::HEADER`].
    pub fn table_row(&self) -> String {
        format!(
            "{},{},{:.4},{:.4}",
            self.n,
            self.d,
            100.0 * self.sparsity,
            self.lipschitz
        )
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n = {}, d = {}, sparsity = {:.4}%, L = {:.4}",
            self.n,
            self.d,
            100.0 * self.sparsity,
            self.lipschitz
        )
    }
}

/// With `scale_rows` set, `L` is measured after normalizing every row.
pub fn summarize(dataset: &LabeledDataset, loss: Loss, scale_rows: bool) -> Result<DatasetSummary> {
    let n = dataset.n_examples();
    let d = dataset.n_features();
    let lipschitz = if scale_rows {
        lipschitz_constant(&scale_rows_to_unit_norm(dataset)?, loss)?
    } else {
        lipschitz_constant(dataset, loss)?
    };
    Ok(DatasetSummary {
        n,
        d,
        sparsity: dataset.features().nnz() as f64 / (n as f64 * d as f64),
        lipschitz,
    })
}
