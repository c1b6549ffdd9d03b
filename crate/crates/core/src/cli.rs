//! The `mkmc` command line.
//!
//! Exit codes: 0 success (including a run that hit `max_iters`), 2 IO, parse
//! or argument error, 3 shape or mask mismatch, 4 non-positive-definite
//! visible block, 1 other numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engines::{
    run_completion, Baselines, CompletionConfig, Method, RankCriterion, RankPolicy,
    DEFAULT_MAX_ITERS, DEFAULT_REG_EPSILON, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::eval::recovery_report;
use crate::io::{read_json, read_kernel, write_json, write_matrix, MatrixFormat, RunConfigFile, TraceFile};
use crate::matrix::SymmetricMatrix;
use crate::views::{apply_mask, random_mask_with, Fill, MaskScheme, VisibilityPattern};

pub const MASK_FILE: &str = "mask.json";
pub const TRACE_FILE: &str = "trace.json";

#[derive(Debug, Parser)]
#[command(name = "mkmc", version, about = "Mutual completion of incomplete kernel matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide random objects per view and write the mask and masked kernels.
    Mask(MaskArgs),
    /// Complete masked kernels.
    Complete(CompleteArgs),
    /// Score completed kernels against the ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Complete kernels, one per view (CSV or MKMC binary).
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Fraction of objects hidden in each view.
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Value written into hidden entries.
    #[arg(long, value_enum, default_value_t = Fill::Zero)]
    pub fill: Fill,
    /// Hide the same objects in every view.
    #[arg(long)]
    pub shared: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// JSON run configuration; its keys override the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, conflicts_with = "rank_criterion")]
    pub rank: Option<usize>,
    #[arg(long, value_enum)]
    pub rank_criterion: Option<RankCriterion>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub reg_epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for per-view imputation.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub truth: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    pub completed: Vec<PathBuf>,
    #[arg(long)]
    pub mask: PathBuf,
    /// Trace JSON from `mkmc complete`, copied into the report.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Method label recorded in the report.
    #[arg(long, default_value = "completed")]
    pub label: String,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mask(args) => cmd_mask(&args),
        Command::Complete(args) => cmd_complete(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
    }
}

fn read_kernels(paths: &[PathBuf]) -> Result<(Vec<SymmetricMatrix>, MatrixFormat)> {
    let mut kernels = Vec::with_capacity(paths.len());
    let mut format = MatrixFormat::Csv;
    for (k, path) in paths.iter().enumerate() {
        let (m, f) = read_kernel(path)?;
        if k == 0 {
            format = f;
        } else if m.dim() != kernels.first().map_or(0, SymmetricMatrix::dim) {
            return Err(Error::Dimension(format!(
                "{} is {1}x{1}, expected {2}x{2}",
                path.display(),
                m.dim(),
                kernels.first().map_or(0, SymmetricMatrix::dim)
            )));
        }
        kernels.push(m);
    }
    if kernels.is_empty() {
        return Err(Error::InvalidArgument("no input kernels".into()));
    }
    Ok((kernels, format))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn masked_path(dir: &Path, view: usize, format: MatrixFormat) -> PathBuf {
    dir.join(format!("masked_{view}.{}", format.extension()))
}

pub fn completed_path(dir: &Path, view: usize, format: MatrixFormat) -> PathBuf {
    dir.join(format!("completed_{view}.{}", format.extension()))
}

pub fn cmd_mask(args: &MaskArgs) -> Result<()> {
    let (kernels, format) = read_kernels(&args.inputs)?;
    let ell = kernels[0].dim();
    let scheme = if args.shared {
        MaskScheme::Shared
    } else {
        MaskScheme::Independent
    };
    let pattern = random_mask_with(ell, kernels.len(), args.fraction, args.seed, scheme)?;
    create_dir(&args.out_dir)?;
    write_json(&args.out_dir.join(MASK_FILE), &pattern)?;
    for (k, q) in kernels.iter().enumerate() {
        let masked = apply_mask(q, pattern.hidden(k), args.fill)?;
        write_matrix(&masked_path(&args.out_dir, k, format), masked.as_matrix(), format)?;
    }
    println!(
        "masked {} views of {ell} objects: hidden counts {:?}",
        kernels.len(),
        pattern.hidden_sets().iter().map(Vec::len).collect::<Vec<_>>()
    );
    Ok(())
}

/// Fully resolved `complete` invocation.
#[derive(Debug)]
pub struct CompletePlan {
    pub config: CompletionConfig,
    pub inputs: Vec<PathBuf>,
    pub mask: PathBuf,
    pub output_dir: PathBuf,
}

/// Merges flags with the optional config file and validates the result.
pub fn resolve_complete(args: &CompleteArgs) -> Result<CompletePlan> {
    let file: RunConfigFile = match &args.config {
        Some(path) => read_json(path)?,
        None => RunConfigFile::default(),
    };
    let missing = |what: &str| Error::InvalidArgument(format!("missing required setting `{what}`"));

    let method = file.method.or(args.method).ok_or_else(|| missing("method"))?;
    let rank = match (file.rank, args.rank, args.rank_criterion) {
        (Some(r), _, _) => r.into(),
        (None, Some(q), _) => RankPolicy::Fixed(q),
        (None, None, Some(c)) => RankPolicy::Criterion(c),
        (None, None, None) => RankPolicy::Criterion(RankCriterion::Gk),
    };
    let config = CompletionConfig {
        method,
        rank,
        tol: file.tol.or(args.tol).unwrap_or(DEFAULT_TOL),
        max_iters: file.max_iters.or(args.max_iters).unwrap_or(DEFAULT_MAX_ITERS),
        reg_epsilon: file.reg_epsilon.or(args.reg_epsilon).unwrap_or(DEFAULT_REG_EPSILON),
        seed: file.seed.or(args.seed).unwrap_or(0),
        baselines: Baselines::default(),
        threads: args.threads.max(1),
    };
    config.validate()?;

    let inputs = file.inputs.unwrap_or_else(|| args.inputs.clone());
    if inputs.is_empty() {
        return Err(missing("inputs"));
    }
    Ok(CompletePlan {
        config,
        inputs,
        mask: file.mask.or_else(|| args.mask.clone()).ok_or_else(|| missing("mask"))?,
        output_dir: file
            .output_dir
            .or_else(|| args.output_dir.clone())
            .ok_or_else(|| missing("output_dir"))?,
    })
}

pub fn cmd_complete(args: &CompleteArgs) -> Result<()> {
    let plan = resolve_complete(args)?;
    let (kernels, format) = read_kernels(&plan.inputs)?;
    let pattern: VisibilityPattern = read_json(&plan.mask)?;
    if pattern.views() != kernels.len() || pattern.ell() != kernels[0].dim() {
        return Err(Error::Dimension(format!(
            "mask covers {} views of {} objects; got {} kernels of {} objects",
            pattern.views(),
            pattern.ell(),
            kernels.len(),
            kernels[0].dim()
        )));
    }

    let result = run_completion(&kernels, &pattern, &plan.config)?;

    create_dir(&plan.output_dir)?;
    for (k, q) in result.completed.iter().enumerate() {
        write_matrix(&completed_path(&plan.output_dir, k, format), q.as_matrix(), format)?;
    }
    let trace = TraceFile {
        objective: result.trace.clone(),
        iterations: result.iterations,
        converged: result.converged,
        dof: result.dof,
        rank: result.rank,
        wall_clock_ms: result.wall_clock_ms.clone(),
    };
    write_json(&plan.output_dir.join(TRACE_FILE), &trace)?;

    println!("method      {}", plan.config.method);
    match result.rank {
        Some(q) => println!("rank        {q}"),
        None => println!("rank        full"),
    }
    println!("dof         {}", result.dof);
    println!("iterations  {}", result.iterations);
    println!("converged   {}", result.converged);
    if let Some(j) = result.trace.last() {
        println!("objective   {j:.12e}");
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let (truth, _) = read_kernels(&args.truth)?;
    let (completed, _) = read_kernels(&args.completed)?;
    let pattern: VisibilityPattern = read_json(&args.mask)?;
    if truth.len() != completed.len() || truth[0].dim() != completed[0].dim() {
        return Err(Error::Dimension(format!(
            "{} truth kernels of {} objects vs {} completed kernels of {} objects",
            truth.len(),
            truth[0].dim(),
            completed.len(),
            completed[0].dim()
        )));
    }
    if pattern.views() != truth.len() || pattern.ell() != truth[0].dim() {
        return Err(Error::Dimension("mask does not match the kernels".into()));
    }
    let (objective, iterations) = match &args.trace {
        Some(path) => {
            let t: TraceFile = read_json(path)?;
            (t.objective, t.iterations)
        }
        None => (Vec::new(), 0),
    };
    let report = recovery_report(
        &args.label,
        &truth,
        &completed,
        &pattern,
        objective,
        iterations,
        Baselines::default(),
    )?;
    write_json(&args.out, &report)?;

    println!("{:<12} mean relative error {:.6}", report.method, report.mean_relative_error);
    for (name, err) in &report.baseline_errors {
        println!("{name:<12} mean relative error {err:.6}");
    }
    Ok(())
}
