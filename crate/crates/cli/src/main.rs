//! `scenario-forge`: the pipeline as composable subcommands over files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use scenario_forge::codegen::Target;
use scenario_forge::eval::InjectKind;

/// Exit code classes. Usage errors exit with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Pipeline(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Pipeline(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Pipeline(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scenario-forge", version, about = "Compile traffic descriptions and images into simulator scenarios")]
pub struct Cli {
    /// TOML file with seed, jobs, out_dir, catalog, [provider] and [vision].
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for defaults, placement, mutation and injection [default: 20240513].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for fuzzing and evaluation [default: 1].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory that receives output files [default: .].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Map catalog JSON; the built-in catalog otherwise.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Replay canned model responses from this directory.
    #[arg(long, global = true)]
    pub mock_responses: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Agent {
    Naive,
    Noop,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Description text to textual scenario IR.
    ExtractText {
        description: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Detections JSON to visual scenario IR.
    ExtractVision {
        detections: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Merge a textual and a visual IR.
    Align {
        text: PathBuf,
        visual: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Full pipeline: extract-text, extract-vision, align.
    Compose {
        description: PathBuf,
        detections: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Lower a scenario IR to a simulator script.
    Codegen {
        ir: PathBuf,
        #[arg(long, default_value = "minisim")]
        target: Target,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a minisim scenario and report failures.
    Simulate {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "naive")]
        agent: Agent,
    },
    /// Mutation-based fuzzing from a directory of seed scenarios.
    Fuzz {
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        iters: usize,
        #[arg(long, value_enum, default_value = "naive")]
        agent: Agent,
    },
    /// Score the pipeline on a benchmark directory.
    Evaluate {
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Field path to leave out of scoring; repeatable.
        #[arg(long)]
        mask: Vec<String>,
        /// Leave every lane index out of scoring.
        #[arg(long)]
        lane_mask: bool,
    },
    /// Corrupt one input file, or evaluate a benchmark under corruption.
    Inject {
        #[arg(long)]
        kind: InjectKind,
        /// One rate, or a comma-separated sweep with --benchmark.
        #[arg(long, required = true, value_delimiter = ',')]
        rate: Vec<f64>,
        /// Textual IR (kind text) or detections JSON (kind detect).
        #[arg(required_unless_present = "benchmark", conflicts_with = "benchmark")]
        input: Option<PathBuf>,
        #[arg(long)]
        benchmark: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
