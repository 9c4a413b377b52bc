use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use log::info;

use crate::data_io::{DatasetSummary, Metadata};
use crate::error::{Error, Result};
use crate::model::CompositeObjective;
use crate::sampling::RandomSource;
use crate::solvers::{run, safe_ps2gd_stepsize, tune_stepsize, SolverConfig, SolverKind, Trace};
use crate::theory::{
    alpha, estimate_beta, g_strong_convexity, plan, rho, rho_strongly_convex, RateInputs,
};
use crate::verify::{run_verification, Suite, VerifyOptions};

use super::output::{write_long, write_trace, Columns};
use super::problem::{Problem, ProblemArgs};
use super::settings::{InnerLength, List, Settings};
use super::{EXIT_FAILURE, EXIT_OK};

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// ps2gd, sgd, sgd+ or fista.
    #[arg(long)]
    pub solver: Option<SolverKind>,
    /// Stepsize (initial stepsize for sgd+). Defaults: the safe PS2GD bound,
    /// 1/(10L) for sgd, 1/L for sgd+ and fista.
    #[arg(long)]
    pub h: Option<f64>,
    /// Inner loop bound: a count or a multiple of n such as 2n or n/2.
    #[arg(long = "M", value_name = "M")]
    pub inner: Option<InnerLength>,
    /// Mini-batch size.
    #[arg(long = "b", value_name = "B")]
    pub batch: Option<usize>,
    /// Epochs (ps2gd), passes (sgd, sgd+) or iterations (fista).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Stop once this many effective passes are spent.
    #[arg(long)]
    pub max_passes: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: $PS2GD_THREADS or 1).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Trace CSV path; stdout when omitted. A `.meta` sidecar is written next to it.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Add a passes_parallel column.
    #[arg(long)]
    pub ideal_parallel: bool,
}

fn default_stepsize(kind: SolverKind, obj: &CompositeObjective, batch: usize) -> Result<f64> {
    let l = obj.lipschitz();
    Ok(match kind {
        SolverKind::Ps2gd => safe_ps2gd_stepsize(obj, batch)?,
        SolverKind::Sgd => 0.1 / l,
        SolverKind::SgdPlus | SolverKind::Fista => 1.0 / l,
    })
}

fn print_summary(summary: &DatasetSummary, to_stdout: bool) {
    let text = format!("{}\n{}", DatasetSummary::HEADER, summary.table_row());
    if to_stdout {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn describe_trace(meta: &mut Metadata, trace: &Trace) {
    let cfg = &trace.metadata.config;
    meta.push("solver", cfg.kind);
    meta.push("h", cfg.stepsize);
    if cfg.kind == SolverKind::Ps2gd {
        meta.push("M", cfg.inner_max);
        meta.push("b", cfg.batch);
    }
    meta.push("epochs", cfg.epochs);
    if let Some(p) = cfg.max_passes {
        meta.push("max_passes", p);
    }
    meta.push("seed", cfg.seed);
    meta.push("threads", trace.metadata.threads);
    meta.push("records", trace.records.len());
    if cfg.kind == SolverKind::Fista {
        meta.push("restarts", trace.metadata.restarts);
    }
    for note in &trace.metadata.notes {
        meta.push("note", note);
    }
}

pub fn cmd_run(args: &RunArgs, settings: &Settings) -> Result<i32> {
    let problem = args.problem.load(settings)?;
    let obj = &problem.obj;
    let kind = settings.pick_or(args.solver, "solver", SolverKind::Ps2gd)?;
    let batch = settings.pick_or(args.batch, "b", 1)?;
    let inner = settings
        .pick_or(
            args.inner,
            "M",
            InnerLength::PerComponent { num: 2, den: 1 },
        )?
        .resolve(obj.n_components())?;
    let h = match settings.pick(args.h, "h")? {
        Some(h) => h,
        None => default_stepsize(kind, obj, batch)?,
    };
    let mut cfg = match kind {
        SolverKind::Ps2gd => SolverConfig::ps2gd(h, inner, batch),
        SolverKind::Sgd => SolverConfig::sgd(h),
        SolverKind::SgdPlus => SolverConfig::sgd_plus(h),
        SolverKind::Fista => SolverConfig::fista(h),
    }
    .epochs(settings.pick_or(args.epochs, "epochs", 30)?)
    .seed(settings.pick_or(args.seed, "seed", 0)?)
    .threads(settings.threads(args.threads)?);
    if let Some(p) = settings.pick(args.max_passes, "max-passes")? {
        cfg = cfg.max_passes(p);
    }
    let output: Option<PathBuf> = settings.pick(args.output.clone(), "output")?;
    print_summary(&problem.summary, output.is_some());

    let reference = problem.reference()?;
    let f_star = reference.as_ref().map(|r| r.f_star);
    info!("running {kind} with h = {h:e}");
    let trace = run(obj, &problem.set, &cfg)?;
    let cols = Columns {
        parallel: settings.switch(args.ideal_parallel, "ideal-parallel")?,
        seconds: true,
    };
    match &output {
        Some(path) => {
            write_trace(create(path)?, &trace, f_star, cols)?;
            let mut meta = Metadata::default();
            problem.describe(&mut meta);
            describe_trace(&mut meta, &trace);
            if let Some(f) = f_star {
                meta.push("f_star", format!("{f:e}"));
            }
            meta.write(sidecar(path))?;
        }
        None => write_trace(io::stdout().lock(), &trace, f_star, cols)?,
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Effective-pass budget per solver.
    #[arg(long)]
    pub passes: Option<usize>,
    /// Inner loop bound for both PS2GD runs.
    #[arg(long = "M", value_name = "M")]
    pub inner: Option<InnerLength>,
    /// Mini-batch size of the second PS2GD run.
    #[arg(long = "b", value_name = "B")]
    pub batch: Option<usize>,
    /// PS2GD stepsize (default: the safe bound for each mini-batch size).
    #[arg(long)]
    pub h_ps2gd: Option<f64>,
    /// Constant SGD stepsize (default 1/(10L)).
    #[arg(long)]
    pub h_sgd: Option<f64>,
    /// Initial SGD+ stepsize (default 1/L).
    #[arg(long)]
    pub h_sgd_plus: Option<f64>,
    /// Pick each stochastic solver's stepsize from a grid 2^k/L by best objective.
    #[arg(long)]
    pub tune: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory for the per-solver CSVs and the merged all.csv.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Add a passes_parallel column.
    #[arg(long)]
    pub ideal_parallel: bool,
    /// Add wall-clock seconds (output is then no longer reproducible byte for byte).
    #[arg(long)]
    pub timing: bool,
}

/// Stepsize grid `2^k / L` for `k = -10..=1`.
fn stepsize_grid(l: f64) -> Vec<f64> {
    (-10..=1).map(|k| 2f64.powi(k) / l).collect()
}

pub fn cmd_compare(args: &CompareArgs, settings: &Settings) -> Result<i32> {
    let mut problem = args.problem.load(settings)?;
    problem.default_reference("auto");
    let Problem { obj, set, .. } = &problem;
    let n = obj.n_components();
    let l = obj.lipschitz();
    let passes = settings.pick_or(args.passes, "passes", 30)?;
    let inner = settings
        .pick_or(
            args.inner,
            "M",
            InnerLength::PerComponent { num: 2, den: 1 },
        )?
        .resolve(n)?;
    let big_batch = settings.pick_or(args.batch, "b", 4)?.min(n);
    let seed = settings.pick_or(args.seed, "seed", 0)?;
    let threads = settings.threads(args.threads)?;
    let tune = settings.switch(args.tune, "tune")?;
    let out_dir = settings.pick_or(
        args.out_dir.clone(),
        "out-dir",
        PathBuf::from("compare_out"),
    )?;
    let cols = Columns {
        parallel: settings.switch(args.ideal_parallel, "ideal-parallel")?,
        seconds: settings.switch(args.timing, "timing")?,
    };
    print_summary(&problem.summary, true);
    let reference = problem.reference()?;
    let f_star = reference.as_ref().map(|r| r.f_star);

    let budget = |cfg: SolverConfig| {
        cfg.epochs(passes)
            .max_passes(passes as f64)
            .seed(seed)
            .threads(threads)
    };
    let h_ps2gd = settings.pick(args.h_ps2gd, "h-ps2gd")?;
    let mut runs: Vec<(String, SolverConfig, bool)> = Vec::new();
    for b in [1, big_batch] {
        let h = match h_ps2gd {
            Some(h) => h,
            None => safe_ps2gd_stepsize(obj, b)?,
        };
        runs.push((
            format!("ps2gd_b{b}"),
            budget(SolverConfig::ps2gd(h, inner, b)),
            h_ps2gd.is_none(),
        ));
    }
    let h_sgd = settings.pick(args.h_sgd, "h-sgd")?;
    runs.push((
        "sgd".into(),
        budget(SolverConfig::sgd(h_sgd.unwrap_or(0.1 / l))),
        h_sgd.is_none(),
    ));
    let h_plus = settings.pick(args.h_sgd_plus, "h-sgd-plus")?;
    runs.push((
        "sgd_plus".into(),
        budget(SolverConfig::sgd_plus(h_plus.unwrap_or(1.0 / l))),
        h_plus.is_none(),
    ));
    runs.push(("fista".into(), budget(SolverConfig::fista(1.0 / l)), false));

    let mut traces: Vec<(String, Trace)> = Vec::new();
    for (label, cfg, tunable) in runs {
        let trace = if tune && tunable {
            let (h, trace) = tune_stepsize(obj, set, &cfg, &stepsize_grid(l))?;
            info!("{label}: tuned h = {h:e}");
            trace
        } else {
            run(obj, set, &cfg)?
        };
        traces.push((label, trace));
    }

    fs::create_dir_all(&out_dir)?;
    for (label, trace) in &traces {
        let path = out_dir.join(format!("{label}.csv"));
        write_trace(create(&path)?, trace, f_star, cols)?;
        let mut meta = Metadata::default();
        problem.describe(&mut meta);
        describe_trace(&mut meta, trace);
        if let Some(f) = f_star {
            meta.push("f_star", format!("{f:e}"));
        }
        meta.write(sidecar(&path))?;
    }
    write_long(create(&out_dir.join("all.csv"))?, &traces, f_star, cols)?;

    println!("solver,h,passes,final_objective,final_gap");
    for (label, trace) in &traces {
        let last = trace
            .records
            .last()
            .expect("traces hold the initial record");
        let gap = f_star.map_or_else(String::new, |f| format!("{:e}", last.objective - f));
        println!(
            "{label},{:e},{},{:e},{gap}",
            trace.metadata.config.stepsize, last.effective_passes, last.objective
        );
    }
    Ok(EXIT_OK)
}

/// Problem constants for `plan` and `rates`: given directly or measured on a problem.
#[derive(Debug, Clone, Default, Args)]
pub struct ConstantsArgs {
    /// Strong convexity of g.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Weak-strong-convexity constant.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Smoothness constant.
    #[arg(long = "L", value_name = "L")]
    pub lipschitz: Option<f64>,
    /// Number of components.
    #[arg(long)]
    pub n: Option<usize>,
    /// Samples for the empirical beta estimate when --beta is not given.
    #[arg(long)]
    pub beta_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub problem: ProblemArgs,
}

struct Constants {
    mu: f64,
    beta: f64,
    lipschitz: f64,
    n: usize,
}

impl ConstantsArgs {
    fn resolve(&self, settings: &Settings) -> Result<Constants> {
        let mu = settings.pick(self.mu, "mu")?;
        let beta = settings.pick(self.beta, "beta")?;
        let lipschitz = settings.pick(self.lipschitz, "L")?;
        let n = settings.pick(self.n, "n")?;
        if let (Some(mu), Some(beta), Some(lipschitz), Some(n)) = (mu, beta, lipschitz, n) {
            return Ok(Constants {
                mu,
                beta,
                lipschitz,
                n,
            });
        }
        let has_problem = settings.pick(self.problem.data.clone(), "data")?.is_some()
            || settings
                .pick(self.problem.synthetic.clone(), "synthetic")?
                .is_some();
        if !has_problem {
            return Err(Error::arg(
                "give --mu, --beta, --L and --n, or a problem (--data/--synthetic) to measure them on",
            ));
        }
        let mut problem = self.problem.load(settings)?;
        problem.default_reference("auto");
        let obj = &problem.obj;
        let mu = match mu {
            Some(v) => v,
            None => g_strong_convexity(obj, &problem.set)?,
        };
        let beta = match beta {
            Some(v) => v,
            None => {
                let reference = problem.reference()?.expect("reference mode is not none");
                let samples = settings.pick_or(self.beta_samples, "beta-samples", 100)?;
                let rng = RandomSource::new(settings.pick_or(self.seed, "seed", 0)?);
                let est = estimate_beta(
                    obj,
                    &problem.set,
                    &reference.x_star,
                    reference.f_star,
                    &rng,
                    samples,
                )?;
                eprintln!(
                    "# beta estimated from {} samples: {:e}",
                    est.samples_used, est.beta
                );
                est.beta
            }
        };
        Ok(Constants {
            mu,
            beta,
            lipschitz: lipschitz.unwrap_or(obj.lipschitz()),
            n: n.unwrap_or(obj.n_components()),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Target per-epoch contraction in (0, 1).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Mini-batch sizes, comma-separated.
    #[arg(long = "b", value_name = "LIST")]
    pub batches: Option<List<usize>>,
    #[command(flatten)]
    pub constants: ConstantsArgs,
}

pub fn cmd_plan(args: &PlanArgs, settings: &Settings) -> Result<i32> {
    let rho_star = settings.pick_or(args.rho, "rho", 0.5)?;
    let batches = settings
        .pick_or(args.batches.clone(), "b", List(vec![1, 2, 4, 8, 16, 32]))?
        .0;
    let c = args.constants.resolve(settings)?;
    eprintln!(
        "# mu = {:e}, beta = {:e}, L = {:e}, n = {}, kappa = {:e}, target rho = {rho_star}",
        c.mu,
        c.beta,
        c.lipschitz,
        c.n,
        c.beta * c.lipschitz / c.mu
    );
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record([
        "b",
        "alpha",
        "regime",
        "h_star",
        "m_star",
        "m_star_b",
        "rho_verified",
        "status",
    ])?;
    for b in batches {
        let row = match plan(rho_star, c.mu, c.beta, c.lipschitz, b, c.n) {
            Ok(p) => {
                let m = p.m_star.ceil() as usize;
                let verified = rho(&RateInputs {
                    mu: c.mu,
                    beta: c.beta,
                    lipschitz: c.lipschitz,
                    stepsize: p.h_star,
                    inner_max: m,
                    batch: b,
                    n: c.n,
                })?;
                let status = if verified <= rho_star + 1e-9 {
                    "ok"
                } else {
                    "violated"
                };
                vec![
                    b.to_string(),
                    p.alpha.to_string(),
                    p.regime.name().to_string(),
                    format!("{:e}", p.h_star),
                    format!("{:e}", p.m_star),
                    format!("{:e}", p.m_star * b as f64),
                    verified.to_string(),
                    status.to_string(),
                ]
            }
            Err(e @ (Error::Planning(_) | Error::Argument(_))) => {
                let a = alpha(c.n, b).map_or_else(|_| String::new(), |a| a.to_string());
                let mut row = vec![b.to_string(), a];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(format!("infeasible: {e}"));
                row
            }
            Err(e) => return Err(e),
        };
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "M", value_name = "M")]
    pub inner: Option<InnerLength>,
    #[arg(long = "b", value_name = "B")]
    pub batch: Option<usize>,
    /// Strong convexity of F itself; adds the strongly convex rate.
    #[arg(long)]
    pub mu_f: Option<f64>,
    #[command(flatten)]
    pub constants: ConstantsArgs,
}

pub fn cmd_rates(args: &RatesArgs, settings: &Settings) -> Result<i32> {
    let c = args.constants.resolve(settings)?;
    let b = settings.pick_or(args.batch, "b", 1)?;
    let inner = settings
        .pick_or(
            args.inner,
            "M",
            InnerLength::PerComponent { num: 2, den: 1 },
        )?
        .resolve(c.n)?;
    let h = settings
        .pick(args.h, "h")?
        .ok_or_else(|| Error::arg("--h is required"))?;
    let a = alpha(c.n, b)?;
    let inputs = RateInputs {
        mu: c.mu,
        beta: c.beta,
        lipschitz: c.lipschitz,
        stepsize: h,
        inner_max: inner,
        batch: b,
        n: c.n,
    };
    let mut out = io::stdout().lock();
    writeln!(out, "alpha={a}")?;
    writeln!(out, "M={inner}")?;
    writeln!(
        out,
        "safe_h={}",
        (1.0 / c.lipschitz).min(if a > 0.0 {
            1.0 / (4.0 * c.lipschitz * a)
        } else {
            f64::INFINITY
        })
    )?;
    writeln!(out, "rho={}", rho(&inputs)?)?;
    if let Some(mu_f) = settings.pick(args.mu_f, "mu-f")? {
        writeln!(
            out,
            "rho_strongly_convex={}",
            rho_strongly_convex(mu_f, c.lipschitz, h, inner, b, c.n)?
        )?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only these suites (repeatable): projection, sampling, variance,
    /// gradient, smoothness, weak-convexity.
    #[arg(long = "suite", value_name = "NAME")]
    pub suites: Vec<Suite>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random pairs per set kind in the projection suite.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Flip the sign of the estimator correction (the variance suite must fail).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

pub fn cmd_verify(args: &VerifyArgs, settings: &Settings) -> Result<i32> {
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        seed: settings.pick_or(args.seed, "seed", defaults.seed)?,
        projection_pairs: settings.pick_or(args.pairs, "pairs", defaults.projection_pairs)?,
        inject_fault: args.inject_fault,
        ..defaults
    };
    let reports = run_verification(&args.suites, &opts)?;
    let mut all = true;
    for r in &reports {
        println!("{r}");
        all &= r.passed();
    }
    Ok(if all { EXIT_OK } else { EXIT_FAILURE })
}
