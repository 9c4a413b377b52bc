//! LIBSVM / svmlight text format.
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ... [# comment]
//! ```
//!
//! Indices are 1-based and strictly increasing within a line. Blank lines are
//! skipped. Labels in `{-1, +1}` are kept; a file labelled `{0, 1}` is mapped
//! to `{-1, +1}` with a warning. Anything else is rejected.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use log::warn;

use crate::error::{Error, Result};
use crate::model::{LabeledDataset, SparseMatrix};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Feature count override. Must be at least the largest index seen.
    pub n_features: Option<usize>,
}

pub fn parse_libsvm<R: BufRead>(reader: R, opts: ParseOptions) -> Result<LabeledDataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels: Vec<(usize, f64)> = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| perr(format!("bad label '{label_tok}'")))?;
        if !label.is_finite() {
            return Err(perr(format!("non-finite label '{label_tok}'")));
        }

        let mut row = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            if tok.starts_with("qid:") {
                continue;
            }
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| perr(format!("malformed token '{tok}' (expected index:value)")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| perr(format!("bad feature index '{idx_s}'")))?;
            if idx == 0 {
                return Err(perr("feature index 0 (indices are 1-based)".into()));
            }
            if idx <= last {
                return Err(perr(format!(
                    "feature index {idx} does not increase (previous {last})"
                )));
            }
            let value: f64 = val_s
                .parse()
                .map_err(|_| perr(format!("bad feature value '{val_s}'")))?;
            if !value.is_finite() {
                return Err(perr(format!("non-finite feature value '{val_s}'")));
            }
            last = idx;
            if value != 0.0 {
                row.push((idx - 1, value));
            }
        }
        max_index = max_index.max(last);
        rows.push(row);
        labels.push((lineno, label));
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no records".into(),
        });
    }
    let n_features = match opts.n_features {
        Some(d) if d < max_index => {
            return Err(Error::arg(format!(
                "feature count override {d} is below the largest index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index,
    };
    let labels = normalize_labels(&labels)?;
    let features = SparseMatrix::from_rows(n_features, rows)?;
    LabeledDataset::new(features, labels)
}

fn normalize_labels(labels: &[(usize, f64)]) -> Result<Vec<f64>> {
    if let Some(&(line, b)) = labels
        .iter()
        .find(|(_, b)| !matches!(*b, v if v == 1.0 || v == -1.0 || v == 0.0))
    {
        return Err(Error::Parse {
            line,
            message: format!("label {b} is not in {{-1, +1}} or {{0, 1}}"),
        });
    }
    let has_zero = labels.iter().any(|&(_, b)| b == 0.0);
    if !has_zero {
        return Ok(labels.iter().map(|&(_, b)| b).collect());
    }
    let first = |v: f64| labels.iter().find(|&&(_, b)| b == v).map(|&(line, _)| line);
    if let (Some(zero), Some(minus)) = (first(0.0), first(-1.0)) {
        return Err(Error::Parse {
            line: zero.max(minus),
            message: "labels mix -1 with 0".into(),
        });
    }
    warn!("labels in {{0, 1}} mapped to {{-1, +1}}");
    Ok(labels
        .iter()
        .map(|&(_, b)| if b == 0.0 { -1.0 } else { 1.0 })
        .collect())
}

/// Opens `path`, transparently decompressing files ending in `.gz`.
pub fn read_libsvm_file(path: impl AsRef<Path>, opts: ParseOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_libsvm(BufReader::new(reader), opts)
}

pub fn write_libsvm<W: Write>(dataset: &LabeledDataset, mut out: W) -> Result<()> {
    let features = dataset.features();
    for (row, label) in features.rows().zip(dataset.labels()) {
        if *label == 1.0 {
            write!(out, "+1")?;
        } else {
            write!(out, "{label}")?;
        }
        for (&j, &v) in row.indices.iter().zip(row.values) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
