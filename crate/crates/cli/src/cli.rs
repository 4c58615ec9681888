//! Command-line interface.
//!
//! Exit codes: 0 on success (for solvers: converged), 2 when a solver
//! stopped at `--max-iters` without converging, 1 on any error including
//! usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use tubal_core::metrics::MetricReport;
use tubal_core::solvers::{DEFAULT_EPSILON, DEFAULT_MAX_ITERS};
use tubal_core::synth::{
    self, corrupt_sparse, gen_low_tubal_rank, run_trial_lenient, sample_mask, GridSpec, Method, SolverOverrides,
    SuccessGrid, Task, TrialOutcome,
};
use tubal_core::talgebra::{multi_rank, pstnn, tnn, RankTarget};
use tubal_core::{complete, rpca, identity_tensor, SolverConfig, Tensor3};

use crate::args::{parse_dims, parse_grid, parse_target, target_json};
use crate::io::{load_any, load_mask, load_tensor, save_image_stack, save_mask, save_tensor, write_atomic};
use crate::report::{MetricsJson, RunManifest, RunReport};

#[derive(Debug, Parser)]
#[command(name = "tubal", version, about = "Low-rank tensor completion and robust PCA under the t-product")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fill in the unobserved entries of a tensor.
    Complete(CompleteArgs),
    /// Split a tensor into low-rank and sparse parts.
    Rpca(RpcaArgs),
    /// Success-ratio grids for PSTNN and TNN on synthetic problems.
    Bench(BenchArgs),
    /// Write seeded synthetic fixtures.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Print dims, ranks and nuclear norms of a tensor.
    Info(InfoArgs),
    /// Compare an estimate with a reference tensor.
    Metrics(MetricsArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// ADMM penalty (default 0.05 for completion, 1.0 for rpca).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Stopping tolerance on the infinity-norm criteria.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Rank target N: one number for every Fourier slice, or a
    /// comma-separated list with one per slice. 0 gives the TNN baseline.
    #[arg(long, value_parser = parse_target)]
    pub n_target: RankTarget,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// Observed tensor (.t3b, or a directory of PGM images).
    #[arg(long)]
    pub input: PathBuf,
    /// Observation mask (.t3b, nonzero = observed).
    #[arg(long)]
    pub mask: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Seed of the random fill of unobserved entries.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Completed tensor (default: <input>.completed.t3b).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the completed tensor as a PGM stack into this directory.
    #[arg(long)]
    pub output_images: Option<PathBuf>,
    /// Ground truth for the quality metrics in the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RpcaArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Weight of the sparse term (default 1/sqrt(max(n1, n2) n3)).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Low-rank part (default: <input>.low.t3b).
    #[arg(long)]
    pub output_l: Option<PathBuf>,
    /// Sparse part (default: <input>.sparse.t3b).
    #[arg(long)]
    pub output_e: Option<PathBuf>,
    /// Ground truth of the low-rank part.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchTask {
    Tc,
    Rpca,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub task: BenchTask,
    /// Grid as `dims=30x30x20;ranks=1,2,4;levels=0.1,0.5` (missing keys
    /// keep the default grid of the task).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parallel trials; 0 uses every core. Results do not depend on it.
    #[arg(long, env = "TUBAL_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// PSTNN grid CSV. The TNN and PSTNN-minus-TNN grids go next to it as
    /// `<stem>.tnn.csv` and `<stem>.delta.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Success threshold on the relative squared error.
    #[arg(long, default_value_t = tubal_core::metrics::SUCCESS_RSE)]
    pub threshold: f64,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Random tensor of tubal rank r (t-product of Gaussian factors).
    Lowrank {
        #[arg(long, value_parser = parse_dims)]
        dims: tubal_core::Dims,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mask observing round(rate * n1 n2 n3) entries.
    Mask {
        #[arg(long, value_parser = parse_dims)]
        dims: tubal_core::Dims,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add uniform noise to round(sparsity * n1 n2 n3) entries.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sparsity: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        low: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        high: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the set of corrupted entries as a 0/1 tensor.
        #[arg(long)]
        support: Option<PathBuf>,
    },
    /// The t-product identity, n x n x n3.
    Identity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        n3: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub path: PathBuf,
    /// Also print the PSTNN for this rank target.
    #[arg(long, value_parser = parse_target)]
    pub n_target: Option<RankTarget>,
    /// Singular values above this count towards the ranks (default
    /// max(n1, n2) * machine epsilon * largest singular value).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Estimate.
    #[arg(long)]
    pub a: PathBuf,
    /// Reference.
    #[arg(long)]
    pub b: PathBuf,
}

/// Parses `argv` (program name first), runs the command and maps the
/// result to an exit code, printing errors to stderr.
pub fn main_with(argv: &[String]) -> ExitCode {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli, argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Runs a parsed command. `Ok(false)` means a solver did not converge.
pub fn run(cli: Cli, argv: &[String]) -> Result<bool> {
    match cli.command {
        Command::Complete(a) => run_complete(a, argv),
        Command::Rpca(a) => run_rpca(a, argv),
        Command::Bench(a) => run_bench(a, argv).map(|()| true),
        Command::Gen(g) => run_gen(g, argv).map(|()| true),
        Command::Info(a) => run_info(a).map(|()| true),
        Command::Metrics(a) => run_metrics(a).map(|()| true),
        Command::Replay { manifest } => {
            let m = RunManifest::read(&manifest)?;
            if m.argv.get(1).map(String::as_str) == Some("replay") {
                bail!("manifest records a replay");
            }
            let cli = Cli::try_parse_from(&m.argv).context("manifest arguments no longer parse")?;
            run(cli, &m.argv)
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn solver_config(flags: &SolverFlags, base: SolverConfig) -> SolverConfig {
    let cfg = base.with_target(flags.n_target.clone()).with_epsilon(flags.eps).with_max_iters(flags.max_iters);
    match flags.beta {
        Some(b) => cfg.with_beta(b),
        None => cfg,
    }
}

fn emit_report(report: &RunReport, path: Option<&Path>, manifest: &mut RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match path {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            manifest.outputs.push(p.to_path_buf());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_complete(a: CompleteArgs, argv: &[String]) -> Result<bool> {
    let start = Instant::now();
    let o = load_any(&a.input)?;
    let mask = load_mask(&a.mask)?;
    if mask.dims() != o.dims() {
        bail!("mask dims {} do not match input dims {}", mask.dims(), o.dims());
    }
    let cfg = solver_config(&a.solver, SolverConfig::completion(0)).with_seed(a.seed);
    let truth = a.truth.as_deref().map(load_any).transpose()?;

    let result = complete(&o, &mask, &cfg)?;
    let output = a.output.clone().unwrap_or_else(|| sibling(&a.input, "completed.t3b"));
    let mut manifest = RunManifest::new(
        "complete",
        argv,
        cfg.seed,
        json!({
            "beta": cfg.beta,
            "epsilon": cfg.epsilon,
            "max_iters": cfg.max_iters,
            "n_target": target_json(&cfg.target),
            "seed": cfg.seed,
        }),
    );
    manifest.inputs = [Some(a.input.clone()), Some(a.mask.clone()), a.truth.clone()].into_iter().flatten().collect();

    save_tensor(result.estimate(), &output)?;
    manifest.outputs.push(output.clone());
    if let Some(dir) = &a.output_images {
        manifest.outputs.extend(save_image_stack(result.estimate(), dir)?);
    }
    let metrics = truth.map(|t| MetricReport::compute(result.estimate(), &t)).transpose()?;
    emit_report(&RunReport::new(metrics, result.iterations, result.converged), a.report.as_deref(), &mut manifest)?;
    manifest.finish(start.elapsed());
    manifest.write(&RunManifest::path_for(&output))?;
    if !result.converged {
        eprintln!("warning: not converged after {} iterations", result.iterations);
    }
    Ok(result.converged)
}

fn run_rpca(a: RpcaArgs, argv: &[String]) -> Result<bool> {
    let start = Instant::now();
    let o = load_any(&a.input)?;
    let mut cfg = solver_config(&a.solver, SolverConfig::rpca(0));
    cfg.lambda = Some(a.lambda.unwrap_or_else(|| cfg.lambda_for(o.dims())));
    let truth = a.truth.as_deref().map(load_any).transpose()?;

    let result = rpca(&o, &cfg)?;
    let out_l = a.output_l.clone().unwrap_or_else(|| sibling(&a.input, "low.t3b"));
    let out_e = a.output_e.clone().unwrap_or_else(|| sibling(&a.input, "sparse.t3b"));
    let mut manifest = RunManifest::new(
        "rpca",
        argv,
        0,
        json!({
            "beta": cfg.beta,
            "lambda": cfg.lambda,
            "epsilon": cfg.epsilon,
            "max_iters": cfg.max_iters,
            "n_target": target_json(&cfg.target),
        }),
    );
    manifest.inputs = [Some(a.input.clone()), a.truth.clone()].into_iter().flatten().collect();

    save_tensor(result.estimate(), &out_l)?;
    save_tensor(result.sparse().expect("rpca output has a sparse part"), &out_e)?;
    manifest.outputs.extend([out_l.clone(), out_e]);
    let metrics = truth.map(|t| MetricReport::compute(result.estimate(), &t)).transpose()?;
    emit_report(&RunReport::new(metrics, result.iterations, result.converged), a.report.as_deref(), &mut manifest)?;
    manifest.finish(start.elapsed());
    manifest.write(&RunManifest::path_for(&out_l))?;
    if !result.converged {
        eprintln!("warning: not converged after {} iterations", result.iterations);
    }
    Ok(result.converged)
}

/// Runs one method over the grid on `jobs` threads (1 = this thread).
/// Each trial seeds its own streams, so the grid does not depend on `jobs`.
pub fn run_grid(spec: &GridSpec, method: Method, jobs: usize) -> Result<SuccessGrid> {
    spec.validate()?;
    let trials = spec.trials(method);
    let outcomes: Vec<TrialOutcome> = if jobs == 1 {
        trials.iter().map(run_trial_lenient).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(|| trials.par_iter().map(run_trial_lenient).collect())
    };
    Ok(SuccessGrid::tally(spec, &outcomes)?)
}

fn run_bench(a: BenchArgs, argv: &[String]) -> Result<()> {
    let start = Instant::now();
    let task = match a.task {
        BenchTask::Tc => Task::Completion,
        BenchTask::Rpca => Task::Rpca,
    };
    let mut spec = match &a.grid {
        Some(g) => parse_grid(g, task)?,
        None => crate::args::default_grid(task),
    };
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.threshold = a.threshold;
    spec.overrides = SolverOverrides { beta: a.beta, lambda: a.lambda, epsilon: a.eps, max_iters: a.max_iters };
    spec.validate()?;

    let pst = run_grid(&spec, Method::Pstnn, a.jobs)?;
    let tn = run_grid(&spec, Method::Tnn, a.jobs)?;
    let corner = match task {
        Task::Completion => "rank\\rate",
        Task::Rpca => "rank\\sparsity",
    };
    let (tnn_path, delta_path) = (sibling(&a.out, "tnn.csv"), sibling(&a.out, "delta.csv"));
    write_atomic(&a.out, pst.to_csv(corner).as_bytes())?;
    write_atomic(&tnn_path, tn.to_csv(corner).as_bytes())?;
    let delta = synth::grid_csv(corner, &spec.ranks, &spec.levels, &pst.difference(&tn));
    write_atomic(&delta_path, delta.as_bytes())?;

    let cfg = spec.overrides.config(task, RankTarget::Uniform(0));
    let mut manifest = RunManifest::new(
        "bench",
        argv,
        spec.seed,
        json!({
            "task": match task { Task::Completion => "tc", Task::Rpca => "rpca" },
            "dims": [spec.dims.n1, spec.dims.n2, spec.dims.n3],
            "ranks": spec.ranks,
            "levels": spec.levels,
            "trials": spec.trials,
            "threshold": spec.threshold,
            "beta": cfg.beta,
            "lambda": cfg.lambda.unwrap_or_else(|| cfg.lambda_for(spec.dims)),
            "epsilon": cfg.epsilon,
            "max_iters": cfg.max_iters,
            "jobs": a.jobs,
        }),
    );
    manifest.outputs = vec![a.out.clone(), tnn_path, delta_path];
    manifest.finish(start.elapsed());
    manifest.write(&RunManifest::path_for(&a.out))?;
    println!("pstnn total {} tnn total {} ({} cells x {} trials)", pst.total(), tn.total(), pst.cells.len(), spec.trials);
    Ok(())
}

fn run_gen(g: GenCommand, argv: &[String]) -> Result<()> {
    let start = Instant::now();
    let (name, seed, config, outputs, inputs) = match g {
        GenCommand::Lowrank { dims, rank, seed, out } => {
            save_tensor(&gen_low_tubal_rank(dims, rank, seed)?, &out)?;
            let cfg = json!({"dims": [dims.n1, dims.n2, dims.n3], "rank": rank});
            ("gen lowrank", seed, cfg, vec![out], vec![])
        }
        GenCommand::Mask { dims, rate, seed, out } => {
            save_mask(&sample_mask(dims, rate, seed)?, &out)?;
            ("gen mask", seed, json!({"dims": [dims.n1, dims.n2, dims.n3], "rate": rate}), vec![out], vec![])
        }
        GenCommand::Corrupt { input, sparsity, low, high, seed, out, support } => {
            let a = load_tensor(&input)?;
            let (o, hit) = corrupt_sparse(&a, sparsity, (low, high), seed)?;
            save_tensor(&o, &out)?;
            let mut outputs = vec![out];
            if let Some(s) = support {
                save_mask(&hit, &s)?;
                outputs.push(s);
            }
            ("gen corrupt", seed, json!({"sparsity": sparsity, "range": [low, high]}), outputs, vec![input])
        }
        GenCommand::Identity { n, n3, out } => {
            save_tensor(&identity_tensor(n, n3)?, &out)?;
            ("gen identity", 0, json!({"n": n, "n3": n3}), vec![out], vec![])
        }
    };
    let mut manifest = RunManifest::new(name, argv, seed, config);
    manifest.inputs = inputs;
    manifest.outputs = outputs;
    manifest.finish(start.elapsed());
    manifest.write(&RunManifest::path_for(&manifest.outputs[0]))?;
    Ok(())
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Text block printed by `tubal info`.
pub fn info_text(t: &Tensor3, target: Option<&RankTarget>, tol: Option<f64>) -> Result<String> {
    let ranks = multi_rank(t, tol)?;
    let mut s = format!(
        "dims: {}\ntubal-rank: {}\nmulti-rank: {}\ntnn: {}\n",
        t.dims(),
        ranks.tubal_rank(),
        join(&ranks.ranks),
        tnn(t)?
    );
    if let Some(target) = target {
        let label = match target {
            RankTarget::Uniform(n) => n.to_string(),
            RankTarget::PerSlice(v) => join(v),
        };
        s.push_str(&format!("pstnn(N={label}): {}\n", pstnn(t, target)?));
    }
    Ok(s)
}

fn run_info(a: InfoArgs) -> Result<()> {
    let t = load_any(&a.path)?;
    print!("{}", info_text(&t, a.n_target.as_ref(), a.tol)?);
    Ok(())
}

fn run_metrics(a: MetricsArgs) -> Result<()> {
    let (x, y) = (load_any(&a.a)?, load_any(&a.b)?);
    let report: MetricsJson = MetricReport::compute(&x, &y)?.into();
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
