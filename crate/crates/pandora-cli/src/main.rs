//! Command-line driver.
//!
//! Subcommands cover the whole toolkit: exact solving, index-policy
//! simulation, structured-policy search and evaluation, the Partition
//! reduction generator, randomized verification suites, the approximation
//! pipeline, and a small benchmark harness.  Machine-readable output is
//! always exact rational strings; `--pretty` adds decimal approximations.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input errors.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pandora::exact::{
    best_structured_policy, classic_optimal_value, optimal_value, StructuredPolicy,
};
use pandora::index::max_kappa_expectation;
use pandora::instance::PnoiInstance;
use pandora::lclrs3::{h_diagnostics, partition_answer, reduce_partition, ReductionMeta};
use pandora::policies::{
    half_approx, run_index_policy, summarize_traces, support01_optimal, SimulationConfig,
};
use pandora::ptas::ptas_pipeline;
use pandora::scalar::Scalar;
use pandora::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "pandora",
    about = "Exact solvers, hardness reductions, and approximation pipeline for search with optional inspection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance exactly by dynamic programming.
    Solve(SolveArgs),
    /// Shortcut for `solve --mode classic`.
    Classic(ClassicArgs),
    /// Simulate the index policy with a reproducible seed.
    Index(IndexArgs),
    /// Evaluate a structured policy file exactly.
    Eval(EvalArgs),
    /// Exhaustive structured-policy search.
    Structured(StructuredArgs),
    /// Generate the Partition reduction instance.
    Reduce(ReduceArgs),
    /// Run a randomized verification suite.
    Verify(VerifyArgs),
    /// Run the approximation pipeline.
    Ptas(PtasArgs),
    /// Evaluate methods over a directory of instances.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Pnoi)]
    mode: Mode,
    /// Write the full value table as JSON.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct ClassicArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    pretty: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Pnoi,
    Classic,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Write one JSON trace per line.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Write a CSV summary: policy,trials,seed,mean,stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Structured policy JSON: { "sigma": [...], "thresholds": [...] }.
    #[arg(long)]
    policy: PathBuf,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct StructuredArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Write the best policy as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct ReduceArgs {
    /// Comma-separated positive integers, e.g. "1,1,2".
    #[arg(long)]
    partition: String,
    /// Write the instance JSON here; sidecar metadata goes next to it
    /// with a .meta.json extension unless --meta overrides the path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Also answer the Partition question via the optimal permutation
    /// (guarded at 3 source elements).
    #[arg(long)]
    answer: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: index-identity, structure, normal, eq1, reduction,
    /// sandwich, discretization, lift.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    cases: u64,
}

#[derive(Args)]
struct PtasArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Accuracy parameter in (0, 1/2], e.g. "1/10".
    #[arg(long)]
    epsilon: String,
    /// Write the solved policy as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a one-row CSV report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance JSON files.
    #[arg(long)]
    dir: PathBuf,
    /// Comma-separated: half-approx,index,support01,structured-search,dp,ptas@<eps>.
    #[arg(long, default_value = "half-approx,index,dp")]
    methods: String,
    /// Write the CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add wall-clock milliseconds (breaks byte-for-byte stability).
    #[arg(long)]
    times: bool,
}

struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() {
    if let Ok(spec) = std::env::var("PANDORA_THREADS") {
        if let Ok(threads) = spec.trim().parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Classic(args) => cmd_solve(SolveArgs {
            instance: args.instance,
            mode: Mode::Classic,
            table: None,
            pretty: args.pretty,
        }),
        Command::Index(args) => cmd_index(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Structured(args) => cmd_structured(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Ptas(args) => cmd_ptas(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn load_instance(path: &Path) -> Result<PnoiInstance, CliError> {
    PnoiInstance::from_json_file(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn print_value(value: &Scalar, pretty: bool) {
    if pretty {
        println!("{value} (~{})", value.to_f64());
    } else {
        println!("{value}");
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    match args.mode {
        Mode::Pnoi => {
            let (value, table) = optimal_value(&inst)?;
            print_value(&value, args.pretty);
            if let Some(path) = args.table {
                fs::write(&path, table.to_json_string())?;
            }
        }
        Mode::Classic => {
            if args.table.is_some() {
                return Err(CliError("--table is only available in pnoi mode".into()));
            }
            let value = classic_optimal_value(&inst)?;
            print_value(&value, args.pretty);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_index(args: IndexArgs) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let cfg = SimulationConfig {
        seed: args.seed,
        trials: args.trials,
    };
    let traces = run_index_policy(&inst, &cfg);
    let summary = summarize_traces(&traces);
    if let Some(path) = &args.traces {
        let mut lines = String::new();
        for t in &traces {
            lines.push_str(&t.to_json_line());
            lines.push('\n');
        }
        fs::write(path, lines)?;
    }
    if let Some(path) = &args.summary {
        let csv = format!(
            "policy,trials,seed,mean,stderr\nindex,{},{},{},{:.12e}\n",
            summary.trials, args.seed, summary.mean, summary.stderr
        );
        fs::write(path, csv)?;
    }
    if args.pretty {
        println!(
            "mean {} (~{}), stderr {:.3e}, exact index payoff {}",
            summary.mean,
            summary.mean.to_f64(),
            summary.stderr,
            max_kappa_expectation(&inst)
        );
    } else {
        println!("{}", summary.mean);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let text = fs::read_to_string(&args.policy)?;
    let policy = StructuredPolicy::from_json_str(&text)?;
    let value = pandora::exact::evaluate_structured_policy(&inst, &policy)?;
    print_value(&value, args.pretty);
    Ok(ExitCode::SUCCESS)
}

fn cmd_structured(args: StructuredArgs) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let (policy, value) = best_structured_policy(&inst)?;
    print_value(&value, args.pretty);
    if let Some(path) = args.out {
        fs::write(&path, policy.to_json_string())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_multiset(spec: &str) -> Result<Vec<u64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError(format!("bad multiset element `{}`", s.trim())))
        })
        .collect()
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode, CliError> {
    let source = parse_multiset(&args.partition)?;
    let red = reduce_partition(&source)?;
    if let Some(out) = &args.out {
        fs::write(out, red.instance().inner().to_json_string())?;
        // constants are permutation-independent; any permutation works here
        let sigma: Vec<usize> = (0..red.n_source() + 2).collect();
        let diag = h_diagnostics(&red, &sigma, &Scalar::pow2(-64))?;
        let meta = ReductionMeta {
            source: red.source().to_vec(),
            gamma: red.gamma().clone(),
            delta: red.delta().clone(),
            y: red.y().clone(),
            t: red.t().clone(),
            t_err_bound: red.t_err_bound().clone(),
            tau_h: red.tau_h().clone(),
            tau_l: red.tau_l().clone(),
            k1: diag.k1.clone(),
            k2: diag.k2.clone(),
            c_const: diag.c_const.clone(),
        };
        let meta_path = args
            .meta
            .clone()
            .unwrap_or_else(|| out.with_extension("meta.json"));
        fs::write(
            &meta_path,
            serde_json::to_string_pretty(&meta).expect("serializable"),
        )?;
        eprintln!(
            "wrote {} and {} ({} boxes)",
            out.display(),
            meta_path.display(),
            red.n_source() + 2
        );
    }
    if args.answer {
        if red.n_source() > 3 {
            return Err(CliError(format!(
                "--answer is guarded at 3 source elements (got {}); \
                 the factorial sweep over {}! permutations of exact rationals is desk-scale only",
                red.n_source(),
                red.n_source() + 2
            )));
        }
        let yes = partition_answer(&red)?;
        println!("{}", if yes { "yes" } else { "no" });
    } else if args.out.is_none() {
        return Err(CliError("nothing to do: pass --out and/or --answer".into()));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let suite: Suite = args.suite.parse()?;
    let report = run_suite(suite, args.seed, args.cases);
    if report.passed() {
        println!(
            "PASS {} ({} cases, seed {})",
            suite, report.cases_run, args.seed
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "FAIL {} ({} of {} cases failed, seed {})",
            suite,
            report.failures.len(),
            report.cases_run,
            args.seed
        );
        let first = &report.failures[0];
        eprintln!("first failure: case {}: {}", first.case, first.message);
        if let Some(json) = &first.instance_json {
            eprintln!("{json}");
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_ptas(args: PtasArgs) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let epsilon: Scalar = args
        .epsilon
        .parse()
        .map_err(|e| CliError(format!("bad epsilon: {e}")))?;
    let result = ptas_pipeline(&inst, &epsilon)?;
    print_value(&result.lifted_payoff, args.pretty);
    if let Some(path) = &args.out {
        fs::write(path, result.policy.to_json_string())?;
    }
    if let Some(path) = &args.report {
        let opt_exact = optimal_value(&inst).ok().map(|(v, _)| v);
        let (opt_cell, ratio_cell) = match &opt_exact {
            Some(opt) if opt.is_positive() => {
                (opt.to_string(), (&result.lifted_payoff / opt).to_string())
            }
            Some(opt) => (opt.to_string(), String::new()),
            None => (String::new(), String::new()),
        };
        let csv = format!(
            "theta,m,opt_lower,opt_exact,opt_L,lifted_payoff,ratio\n{},{},{},{},{},{},{}\n",
            result.theta.value,
            result.m(),
            result.theta.alg_payoff,
            opt_cell,
            result.discretized_value,
            result.lifted_payoff,
            ratio_cell
        );
        fs::write(path, csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Clone)]
enum BenchMethod {
    HalfApprox,
    Index,
    Support01,
    StructuredSearch,
    Dp,
    Ptas(Scalar),
}

impl BenchMethod {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "half-approx" => Ok(BenchMethod::HalfApprox),
            "index" => Ok(BenchMethod::Index),
            "support01" => Ok(BenchMethod::Support01),
            "structured-search" => Ok(BenchMethod::StructuredSearch),
            "dp" => Ok(BenchMethod::Dp),
            other => match other.strip_prefix("ptas@") {
                Some(eps) => Ok(BenchMethod::Ptas(eps.parse().map_err(|e| {
                    CliError(format!("bad epsilon in `{other}`: {e}"))
                })?)),
                None => Err(CliError(format!("unknown method `{other}`"))),
            },
        }
    }

    fn name(&self) -> String {
        match self {
            BenchMethod::HalfApprox => "half-approx".into(),
            BenchMethod::Index => "index".into(),
            BenchMethod::Support01 => "support01".into(),
            BenchMethod::StructuredSearch => "structured-search".into(),
            BenchMethod::Dp => "dp".into(),
            BenchMethod::Ptas(eps) => format!("ptas@{eps}"),
        }
    }

    fn evaluate(&self, inst: &PnoiInstance) -> Result<Scalar, String> {
        match self {
            BenchMethod::HalfApprox => Ok(half_approx(inst)),
            BenchMethod::Index => Ok(max_kappa_expectation(inst)),
            BenchMethod::Support01 => support01_optimal(inst)
                .map(|(_, v)| v)
                .map_err(|e| e.to_string()),
            BenchMethod::StructuredSearch => best_structured_policy(inst)
                .map(|(_, v)| v)
                .map_err(|e| e.to_string()),
            BenchMethod::Dp => optimal_value(inst)
                .map(|(v, _)| v)
                .map_err(|e| e.to_string()),
            BenchMethod::Ptas(eps) => ptas_pipeline(inst, eps)
                .map(|r| r.lifted_payoff)
                .map_err(|e| e.to_string()),
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    use rayon::prelude::*;

    let methods: Vec<BenchMethod> = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| BenchMethod::parse(s.trim()))
        .collect::<Result<_, _>>()?;

    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    files.sort();

    let rows: Vec<String> = files
        .par_iter()
        .flat_map(|path| {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            let inst = match PnoiInstance::from_json_file(path) {
                Ok(inst) => inst,
                Err(e) => {
                    eprintln!("skipping {}: {e}", path.display());
                    return Vec::new();
                }
            };
            methods
                .iter()
                .filter_map(|method| {
                    let started = Instant::now();
                    match method.evaluate(&inst) {
                        Ok(value) => {
                            let mut row = format!("{id},{},{value}", method.name());
                            if args.times {
                                row.push_str(&format!(",{}", started.elapsed().as_millis()));
                            }
                            Some(row)
                        }
                        Err(e) => {
                            eprintln!("{id}/{}: {e}", method.name());
                            None
                        }
                    }
                })
                .collect::<Vec<String>>()
        })
        .collect();

    let mut sorted = rows;
    sorted.sort();
    let header = if args.times {
        "instance,method,value,wall_ms"
    } else {
        "instance,method,value"
    };
    let mut csv = String::from(header);
    csv.push('\n');
    for row in sorted {
        csv.push_str(&row);
        csv.push('\n');
    }
    match args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
