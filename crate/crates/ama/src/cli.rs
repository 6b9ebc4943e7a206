//! Command-line front end.
//!
//! Three subcommands cover the full workflow:
//!
//! * `solve`  — run a scheme on a problem file, write the iteration trace;
//! * `bench`  — generate a seeded instance, solve it exactly, run the
//!   requested variants, certify every bound, write the report;
//! * `verify` — replay an existing trace against a reference file.
//!
//! Exit codes are a stable contract: 0 pass, 1 certification failure,
//! 2 input error, 3 runtime failure. Every output file gets a
//! `<name>.manifest.json` sidecar carrying the command echo and wall time,
//! so the outputs themselves stay byte-identical across reruns.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{generate, oracle_solve, run_experiment, run_variant, ExperimentConfig, InstanceRecipe};
use crate::certificates::{check_trace, CheckOptions};
use crate::error::{Error, Result};
use crate::io::{write_json, ProblemFile, ReferenceFile, RunManifest, TraceFile};
use crate::solver::{
    run, Algorithm, GammaPolicy, MomentumMode, Smoothness, SolverConfig, StepPolicy,
};

#[derive(Debug, Parser)]
#[command(
    name = "ama",
    version,
    about = "Certified alternating-minimization solver for box-coupled quadratic programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and write the per-iteration trace.
    Solve(SolveArgs),
    /// Generate a seeded instance, oracle-solve it, run and certify variants.
    Bench(BenchArgs),
    /// Certify an existing trace against a reference file.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    /// Basic scheme.
    Ama,
    /// Accelerated scheme.
    Fama,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Ama => Algorithm::Ama,
            AlgoArg::Fama => Algorithm::AmaAccel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentumArg {
    Hat,
    Classic,
}

impl From<MomentumArg> for MomentumMode {
    fn from(m: MomentumArg) -> Self {
        match m {
            MomentumArg::Hat => MomentumMode::Hat,
            MomentumArg::Classic => MomentumMode::Classic,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file (JSON: D, q, A, a, b, r).
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Fama)]
    pub algo: AlgoArg,
    /// Target accuracy driving the auto-γ policy (and early stop if f* is
    /// known).
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Backtracking step sizes instead of the fixed 1/L.
    #[arg(long)]
    pub line_search: bool,
    /// Explicit smoothing parameter, overriding the auto policy.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = MomentumArg::Hat)]
    pub momentum: MomentumArg,
    /// Run the unsmoothed variant (requires a strictly positive diagonal D).
    #[arg(long)]
    pub strongly_convex: bool,
    /// Exchange the two sides first when V has the smaller prox-diameter.
    #[arg(long)]
    pub swap_sides: bool,
    /// Known optimal value; enables the ε-solution stopping test.
    #[arg(long)]
    pub f_star: Option<f64>,
    /// Line-search curvature floor.
    #[arg(long)]
    pub lower_l: Option<f64>,
    /// Trace output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows of A (dimension of v).
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Columns of A (dimension of u).
    #[arg(long, default_value_t = 3)]
    pub p1: usize,
    /// Generate a strongly convex instance (free u, shifted diagonal).
    #[arg(long)]
    pub strongly_convex: bool,
    /// Which schemes to run.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![AlgoArg::Ama, AlgoArg::Fama])]
    pub variants: Vec<AlgoArg>,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long)]
    pub line_search: bool,
    #[arg(long, value_enum, default_value_t = MomentumArg::Hat)]
    pub momentum: MomentumArg,
    /// Report output path (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-variant trace and reference files into this directory
    /// (inputs for `verify`).
    #[arg(long)]
    pub emit_files: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Trace file written by `solve` or `bench --emit-files`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Reference file carrying f*, λ*, and the certificate constants.
    #[arg(long)]
    pub reference: PathBuf,
    /// Target accuracy for the predicted iteration counts.
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
    /// Cross-check: fail (exit 2) unless the trace header names this scheme.
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Optional report output path (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command and translates errors into the exit-code contract.
pub fn dispatch(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn argv() -> Vec<String> {
    std::env::args().collect()
}

/// Solve a problem file; writes the trace and prints a short summary.
pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let started = Instant::now();
    let problem = ProblemFile::load(&args.problem)?;
    let spec = problem.to_spec()?;

    let algorithm: Algorithm = args.algo.into();
    let smoothness = if args.strongly_convex {
        Smoothness::StronglyConvex
    } else {
        Smoothness::Smoothed
    };
    let mut config = SolverConfig::new(algorithm, smoothness);
    config.epsilon = args.eps;
    if let Some(g) = args.gamma {
        config.gamma = GammaPolicy::Explicit(g);
    }
    config.step = if args.line_search {
        StepPolicy::LineSearch
    } else {
        StepPolicy::Fixed
    };
    config.max_iter = args.max_iter;
    config.momentum = args.momentum.into();
    config.swap_sides = args.swap_sides;
    config.f_star = args.f_star;
    config.lower_l = args.lower_l;

    let out = run(&spec, &config)?;
    TraceFile {
        mode: out.mode.clone(),
        rows: out.trace.clone(),
    }
    .write(&args.out)?;
    let timing_ms = started.elapsed().as_secs_f64() * 1e3;
    RunManifest::new(
        argv(),
        None,
        serde_json::to_value(&config).unwrap_or_default(),
        timing_ms,
    )
    .write_for(&args.out)?;

    println!("variant: {}", out.mode.summary());
    if out.swapped {
        println!("sides swapped: smoothing ran on the smaller-diameter block");
    }
    match out.trace.last() {
        Some(last) => {
            println!("iterations: {}", out.trace.len());
            println!("f(x_bar) = {}", last.f_avg);
            println!("feasibility gap = {}", last.feas);
        }
        None => println!("iterations: 0 (empty budget)"),
    }
    println!("wall time: {timing_ms:.1} ms");
    println!("trace: {}", args.out.display());
    Ok(0)
}

/// Generate + oracle-solve + run + certify; exit 0 only if every requested
/// guarantee held.
pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let started = Instant::now();
    let recipe = InstanceRecipe::standard(args.seed, args.n, args.p1, args.strongly_convex);
    let config = ExperimentConfig {
        eps: args.eps,
        max_iter: args.max_iter,
        variants: args.variants.iter().map(|&v| v.into()).collect(),
        step: if args.line_search {
            StepPolicy::LineSearch
        } else {
            StepPolicy::Fixed
        },
        momentum: args.momentum.into(),
        series_points: 256,
    };
    let report = run_experiment(&recipe, &config)?;
    write_json(&report, &args.out)?;

    if let Some(dir) = &args.emit_files {
        std::fs::create_dir_all(dir)?;
        let spec = generate(&recipe).to_spec()?;
        let reference = oracle_solve(&spec)?;
        for &algorithm in &config.variants {
            let (out, inputs) = run_variant(&spec, &reference, algorithm, report.smoothness, &config)?;
            let tag = out.mode.algorithm.to_string();
            TraceFile {
                mode: out.mode.clone(),
                rows: out.trace.clone(),
            }
            .write(&dir.join(format!("trace_{tag}.csv")))?;
            ReferenceFile::new(&inputs, &out.mode).save(&dir.join(format!("reference_{tag}.json")))?;
        }
    }

    let timing_ms = started.elapsed().as_secs_f64() * 1e3;
    RunManifest::new(
        argv(),
        Some(args.seed),
        serde_json::to_value(&config).unwrap_or_default(),
        timing_ms,
    )
    .write_for(&args.out)?;

    println!(
        "instance: seed={} n={} p1={} strongly_convex={} | oracle f* = {}",
        recipe.seed, recipe.n, recipe.p1, recipe.strongly_convex, report.oracle.f_star
    );
    for v in &report.variants {
        let verdict = if v.cert.passed { "PASS" } else { "FAIL" };
        print!(
            "{}: {} ({} rows, final |f-f*| = {:.3e}, feas = {:.3e}",
            v.mode.summary(),
            verdict,
            v.cert.rows_checked,
            (v.final_f_avg - report.oracle.f_star).abs(),
            v.final_feas
        );
        if let Some(k) = v.achieved_at {
            print!(", eps-solution at k = {k}");
        }
        if let Some(p) = v.predicted {
            print!(", predicted k = {p}");
        }
        println!(")");
        if let Some(first) = &v.cert.first_violation {
            println!(
                "  first violation: k = {}, {:?}, value = {}, bound = {}",
                first.k, first.kind, first.value, first.bound
            );
        }
    }
    println!("report: {}", args.out.display());
    Ok(if report.all_passed { 0 } else { 1 })
}

/// Certify an existing trace; exit 0 on pass, 1 on any violation.
pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let started = Instant::now();
    let trace = TraceFile::read(&args.trace)?;
    let reference = ReferenceFile::load(&args.reference)?;

    if let Some(algo) = args.algo {
        let want: Algorithm = algo.into();
        if trace.mode.algorithm != want {
            return Err(Error::TraceVariantMismatch {
                expected: want.to_string(),
                found: trace.mode.algorithm.to_string(),
            });
        }
    }
    if !reference.mode.matches(&trace.mode) || reference.mode.gamma != trace.mode.gamma {
        return Err(Error::TraceVariantMismatch {
            expected: reference.mode.summary(),
            found: trace.mode.summary(),
        });
    }

    let inputs = reference.to_inputs();
    let opts = CheckOptions {
        eps: args.eps,
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
    };
    let report = check_trace(&trace.rows, &inputs, &trace.mode, &opts)?;

    println!(
        "{}: {}",
        trace.mode.summary(),
        if report.passed { "PASS" } else { "FAIL" }
    );
    println!("rows checked: {}", report.rows_checked);
    if let Some(first) = &report.first_violation {
        println!(
            "first violation: k = {}, {:?}, value = {}, bound = {}",
            first.k, first.kind, first.value, first.bound
        );
    }
    let fmt = |p: Option<u64>| p.map_or_else(|| "n/a".to_string(), |k| k.to_string());
    println!(
        "predicted iterations to eps = {}: basic {}, accelerated {}, strongly convex accelerated {}",
        report.eps,
        fmt(report.predicted.basic),
        fmt(report.predicted.accelerated),
        fmt(report.predicted.strong_accel),
    );

    if let Some(out) = &args.out {
        write_json(&report, out)?;
        let timing_ms = started.elapsed().as_secs_f64() * 1e3;
        RunManifest::new(argv(), None, serde_json::json!({"options": opts}), timing_ms)
            .write_for(out)?;
    }
    Ok(if report.passed { 0 } else { 1 })
}
