//! Building an objective and feasible set from command-line options.

use std::path::{Path, PathBuf};

use clap::Args;
use log::{info, warn};

use crate::data_io::{
    read_libsvm_file, summarize, DatasetSummary, Metadata, ParseOptions, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::model::{
    build_svm_dual, scale_rows_to_unit_norm, CompositeObjective, LabeledDataset, Loss,
};
use crate::projections::{ConstraintSet, ConstraintSpec};
use crate::solvers::{run_reference, Reference};

use super::settings::Settings;

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// LIBSVM file (optionally .gz).
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Synthetic problem, e.g. lsq:n=200,d=50,rank=20 or logistic:n=500,d=20.
    #[arg(long, value_name = "SPEC")]
    pub synthetic: Option<SyntheticSpec>,
    /// logistic, squared or svm-dual.
    #[arg(long)]
    pub loss: Option<Loss>,
    /// linf:R, l1:R, box:LO:HI or none. Ignored for svm-dual.
    #[arg(long, value_name = "SPEC")]
    pub constraint: Option<ConstraintSpec>,
    /// Regularization for svm-dual; the box is [0, λn]. Default 1/n.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Keep file rows as they are instead of normalizing them.
    #[arg(long)]
    pub no_scale: bool,
    /// Feature count override for LIBSVM input.
    #[arg(long, value_name = "D")]
    pub features: Option<usize>,
    /// Optimal value for gaps: `none`, `auto` (solve now) or a key=value file
    /// with an `f_star` entry.
    #[arg(long, value_name = "auto|none|PATH")]
    pub reference: Option<String>,
    /// Gradient-mapping tolerance for `--reference auto`.
    #[arg(long)]
    pub reference_tol: Option<f64>,
    /// Write the computed reference solution here.
    #[arg(long, value_name = "PATH")]
    pub save_reference: Option<PathBuf>,
    /// Write the synthetic generator's metadata here.
    #[arg(long, value_name = "PATH")]
    pub save_metadata: Option<PathBuf>,
}

pub struct Problem {
    pub name: String,
    pub dataset: LabeledDataset,
    pub obj: CompositeObjective,
    pub set: ConstraintSet,
    pub summary: DatasetSummary,
    pub constraint: String,
    reference_mode: String,
    reference_tol: f64,
    save_reference: Option<PathBuf>,
}

impl ProblemArgs {
    pub fn load(&self, settings: &Settings) -> Result<Problem> {
        let data: Option<PathBuf> = settings.pick(self.data.clone(), "data")?;
        let synthetic: Option<SyntheticSpec> =
            settings.pick(self.synthetic.clone(), "synthetic")?;
        let (mut dataset, name, natural_loss) = match (data, synthetic) {
            (Some(_), Some(_)) => {
                return Err(Error::arg("give either --data or --synthetic, not both"))
            }
            (None, None) => {
                return Err(Error::arg(
                    "no problem given: use --data PATH or --synthetic SPEC",
                ))
            }
            (Some(path), None) => {
                let features = settings.pick(self.features, "features")?;
                let ds = read_libsvm_file(
                    &path,
                    ParseOptions {
                        n_features: features,
                    },
                )?;
                let name = path.file_name().map_or_else(
                    || path.display().to_string(),
                    |f| f.to_string_lossy().into_owned(),
                );
                (ds, name, Loss::Logistic)
            }
            (None, Some(spec)) => {
                let (ds, meta) = spec.generate()?;
                if let Some(path) = settings.pick(self.save_metadata.clone(), "save-metadata")? {
                    meta.write(path)?;
                }
                (ds, spec.to_string(), spec.natural_loss())
            }
        };
        // Synthetic generators already normalize their rows.
        if self.data_given(settings)? && !settings.switch(self.no_scale, "no-scale")? {
            dataset = scale_rows_to_unit_norm(&dataset)?;
        }
        let loss = settings.pick_or(self.loss, "loss", natural_loss)?;
        let constraint_spec: Option<ConstraintSpec> =
            settings.pick(self.constraint, "constraint")?;
        let (obj, set, constraint) = match loss {
            Loss::SvmDualQuadratic => {
                if constraint_spec.is_some() {
                    warn!("--constraint is ignored for svm-dual; the box comes from --lambda");
                }
                let lambda =
                    settings.pick_or(self.lambda, "lambda", 1.0 / dataset.n_examples() as f64)?;
                let (obj, set) = build_svm_dual(&dataset, lambda)?;
                let upper = lambda * dataset.n_examples() as f64;
                (obj, set, format!("box:0:{upper}"))
            }
            _ => {
                let spec = constraint_spec.unwrap_or(ConstraintSpec::Linf(0.1));
                let obj = CompositeObjective::primal(&dataset, loss)?;
                let set = spec.build(obj.dim())?;
                (obj, set, spec.to_string())
            }
        };
        let mut summary = summarize(&dataset, loss, false)?;
        summary.lipschitz = obj.lipschitz();
        Ok(Problem {
            name,
            dataset,
            obj,
            set,
            summary,
            constraint,
            reference_mode: settings.pick_or(
                self.reference.clone(),
                "reference",
                "none".to_string(),
            )?,
            reference_tol: settings.pick_or(self.reference_tol, "reference-tol", 1e-10)?,
            save_reference: settings.pick(self.save_reference.clone(), "save-reference")?,
        })
    }

    fn data_given(&self, settings: &Settings) -> Result<bool> {
        Ok(settings.pick(self.data.clone(), "data")?.is_some())
    }
}

impl Problem {
    /// Overrides the reference mode when the caller needs gaps regardless.
    pub fn default_reference(&mut self, mode: &str) {
        if self.reference_mode == "none" {
            self.reference_mode = mode.to_string();
        }
    }

    /// Resolves `--reference`. Returns `None` for `none`.
    pub fn reference(&self) -> Result<Option<Reference>> {
        let reference = match self.reference_mode.as_str() {
            "none" => return Ok(None),
            "auto" => {
                info!(
                    "solving for the reference optimum (tol {:e})",
                    self.reference_tol
                );
                run_reference(&self.obj, &self.set, self.reference_tol)?
            }
            path => read_reference(Path::new(path), self.obj.dim())?,
        };
        if let Some(path) = &self.save_reference {
            write_reference(path, &reference, self.reference_tol)?;
        }
        Ok(Some(reference))
    }

    /// Key=value lines describing the problem, for trace sidecars.
    pub fn describe(&self, meta: &mut Metadata) {
        meta.push("problem", &self.name);
        meta.push("loss", self.obj.loss());
        meta.push("constraint", &self.constraint);
        meta.push("n", self.summary.n);
        meta.push("d", self.summary.d);
        meta.push("sparsity", self.summary.sparsity);
        meta.push("L", self.summary.lipschitz);
        meta.push("components", self.obj.n_components());
        meta.push("dim", self.obj.dim());
    }
}

fn read_reference(path: &Path, dim: usize) -> Result<Reference> {
    let meta = Metadata::read(path)?;
    let f_star: f64 = meta
        .get("f_star")
        .ok_or_else(|| Error::arg(format!("{}: no f_star entry", path.display())))?
        .parse()
        .map_err(|_| Error::arg(format!("{}: bad f_star", path.display())))?;
    let x_star = meta.get_list("x_star").unwrap_or_default();
    if !x_star.is_empty() && x_star.len() != dim {
        return Err(Error::arg(format!(
            "{}: x_star has {} entries, problem has dimension {dim}",
            path.display(),
            x_star.len()
        )));
    }
    Ok(Reference {
        x_star,
        f_star,
        iterations: 0,
        mapping_norm: f64::NAN,
    })
}

fn write_reference(path: &Path, r: &Reference, tol: f64) -> Result<()> {
    let mut meta = Metadata::default();
    meta.push("f_star", format!("{:e}", r.f_star));
    meta.push("tol", tol);
    meta.push("iterations", r.iterations);
    meta.push_list("x_star", &r.x_star);
    meta.write(path)
}
