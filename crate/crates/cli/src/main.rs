//! `cogx`: run, compare and validate exploration benchmark episodes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cogx_core::harness::{
    compare_reasoners, format_comparison, render_svg, run_trials, write_jsonl, write_summary_csv, EpisodeConfig,
    HarnessError, Suite,
};
use cogx_core::llm_bridge::{ChatBackend, HttpBackend};
use cogx_core::reasoning::ReasonerKind;
use cogx_core::world::{resolve_environment, EnvError};
use cogx_core::ExperimentParams;

const USAGE: u8 = 1;
const VALIDATION: u8 = 2;
const RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "cogx", version, about = "Deterministic benchmark for map-guided object search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials of one task with one reasoner.
    Run(RunArgs),
    /// Run every suite entry with every reasoner and print a table.
    Compare(CompareArgs),
    /// Check an environment file and print its summary.
    Validate {
        /// Environment file, or the name of a bundled environment.
        #[arg(long)]
        env: String,
    },
}

#[derive(Args)]
struct Common {
    /// Step budget per episode.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "cogx-out")]
    out: PathBuf,
    /// Send language-model calls to the endpoint in COGX_LLM_BASE_URL.
    #[arg(long)]
    live: bool,
    /// Model name for --live.
    #[arg(long)]
    model: Option<String>,
    /// Run trials one at a time.
    #[arg(long)]
    serial: bool,
    /// JSON file overriding experiment parameters.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Environment file, or the name of a bundled environment.
    #[arg(long)]
    env: String,
    #[arg(long)]
    task: String,
    #[arg(long, value_parser = parse_reasoner)]
    reasoner: ReasonerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of trials; seeds run from --seed upward.
    #[arg(long)]
    trials: Option<usize>,
    /// Store every detection in the episode log.
    #[arg(long)]
    detections: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CompareArgs {
    /// Suite file; every bundled task when absent.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

fn parse_reasoner(s: &str) -> Result<ReasonerKind, String> {
    s.parse()
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Self { code, message: message.to_string() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = match e {
            HarnessError::Env(_) => VALIDATION,
            HarnessError::Config(_) => USAGE,
            _ => RUNTIME,
        };
        Self::new(code, e)
    }
}

fn env_failure(e: EnvError) -> Failure {
    let code = match e {
        EnvError::Io { .. } => USAGE,
        _ => VALIDATION,
    };
    Failure::new(code, e)
}

fn params(common: &Common) -> Result<ExperimentParams, Failure> {
    let mut p = match &common.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::new(VALIDATION, format!("{}: {e}", path.display())))?
        }
        None => ExperimentParams::default(),
    };
    if let Some(n) = common.max_steps {
        p.max_steps = n;
    }
    if let Some(m) = &common.model {
        p.llm.model = m.clone();
    }
    p.validate().map_err(|e| Failure::new(VALIDATION, e))?;
    Ok(p)
}

fn backend(common: &Common, p: &ExperimentParams) -> Result<Option<Arc<dyn ChatBackend>>, Failure> {
    if !common.live {
        return Ok(None);
    }
    let mut b = HttpBackend::from_env(p.llm.endpoint.clone(), None, &p.llm.model, p.llm.temperature)
        .map_err(|e| Failure::new(USAGE, e))?;
    b.template.max_retries = p.llm.max_retries;
    b.template.timeout = p.llm.timeout;
    Ok(Some(Arc::new(b)))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::new(RUNTIME, format!("{}: {e}", dir.display())))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let env = resolve_environment(&args.env).map_err(env_failure)?;
    if env.task(&args.task).is_none() {
        return Err(env_failure(EnvError::UnknownTask(args.task)));
    }
    let p = params(&args.common)?;
    let trials = args.trials.unwrap_or(p.trials);
    let mut cfg = EpisodeConfig::new(env, &args.task, args.reasoner, args.seed);
    cfg.backend = backend(&args.common, &p)?;
    cfg.params = p;
    cfg.record_detections = args.detections;
    let (summary, results) = run_trials(&cfg, trials, !args.common.serial)?;

    let out = &args.common.out;
    create_dir(out)?;
    let stem = format!("{}-{}-{}", cfg.env.name, args.task, args.reasoner.as_str());
    write_jsonl(&out.join(format!("{stem}.jsonl")), &results)?;
    write_summary_csv(&out.join(format!("{stem}.csv")), std::slice::from_ref(&summary))?;
    for r in &results {
        let path = out.join(format!("{stem}-seed{}.svg", r.seed));
        fs::write(&path, render_svg(&cfg.env, r)).map_err(|e| Failure::new(RUNTIME, format!("{}: {e}", path.display())))?;
    }
    let mean = summary.path.map_or("-".to_string(), |s| format!("{:.2}", s.mean));
    println!(
        "{} {} {}: {}/{} found, {} timeouts, mean path {mean} m, direct {:.2} m",
        summary.env,
        summary.task,
        summary.reasoner.as_str(),
        summary.successes,
        summary.trials,
        summary.timeouts,
        summary.direct_path
    );
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let mut suite = match &args.suite {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
            serde_json::from_str::<Suite>(&text).map_err(|e| Failure::new(VALIDATION, format!("{}: {e}", path.display())))?
        }
        None => Suite::bundled(),
    };
    if let Some(t) = args.trials {
        suite.trials = t;
    }
    if let Some(s) = args.seed {
        suite.seed = s;
    }
    let p = params(&args.common)?;
    let backend = backend(&args.common, &p)?;
    let (rows, results) = compare_reasoners(&suite, !args.common.serial, &|cfg| {
        cfg.params = p.clone();
        cfg.backend = backend.clone();
    })?;

    let out = &args.common.out;
    create_dir(out)?;
    write_jsonl(&out.join("compare.jsonl"), &results)?;
    let summaries: Vec<_> = rows.iter().flat_map(|r| r.summaries.iter().cloned()).collect();
    write_summary_csv(&out.join("compare.csv"), &summaries)?;
    print!("{}", format_comparison(&rows));
    Ok(())
}

fn validate(env: &str) -> Result<(), Failure> {
    let env = resolve_environment(env).map_err(env_failure)?;
    let tasks: Vec<&str> = env.tasks().map(|t| t.id.as_str()).collect();
    println!(
        "{}: {}x{} cells of {} m, {:.1} m2, {} objects, tasks {}",
        env.name,
        env.width,
        env.height,
        env.cell_size,
        env.area_m2(),
        env.objects.len(),
        tasks.join(" ")
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Validate { env } => validate(&env),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
