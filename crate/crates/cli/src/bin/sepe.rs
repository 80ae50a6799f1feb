use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use sepe_cli::commands::check::{cmd_check, CheckSelection};
use sepe_cli::commands::library::cmd_library;
use sepe_cli::commands::report::cmd_report;
use sepe_cli::commands::synth::{cmd_synth, Algorithm};
use sepe_cli::commands::transform::cmd_transform;
use sepe_cli::config::RunConfig;
use sepe_core::qed::CheckMode;

/// Instruction-equivalence synthesis and QED-style self-consistency checking
/// for an RV32IM-subset machine model.
#[derive(Debug, Parser)]
#[command(name = "sepe", version, about)]
struct Cli {
    /// Flat key=value configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// SMT solver binary (SMT-LIB2 on stdin/stdout). Defaults to
    /// $SEPE_SMT_SOLVER, then the bundled sepe-qfbv.
    #[arg(long, global = true)]
    solver: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Per-query solver timeout in milliseconds.
    #[arg(long, global = true)]
    timeout: Option<u64>,

    /// Comma-separated instruction set.
    #[arg(long, global = true, value_delimiter = ',')]
    instr: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Early-stop threshold: stop a goal once more than K programs of at
    /// least --min-len components are stored.
    #[arg(long)]
    k: Option<usize>,

    /// Programs shorter than this do not count toward K.
    #[arg(long = "min-len")]
    min_len: Option<usize>,

    /// Largest multiset size.
    #[arg(long = "n-max")]
    n_max: Option<usize>,

    /// Name-match penalty in the priority formula.
    #[arg(long)]
    alpha: Option<u64>,

    /// Weight increment.
    #[arg(long)]
    delta: Option<u64>,

    /// Scheduling algorithm.
    #[arg(long, default_value = "hpf", value_parser = ["hpf", "iterative"])]
    baseline: String,

    /// Shuffle seed (required for the iterative baseline).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TransformArgs {
    /// Correspondence database produced by `sepe synth`.
    #[arg(long, default_value = "correspondences.json")]
    correspondences: PathBuf,

    /// Destination register of the original instruction.
    #[arg(long, default_value_t = 1)]
    rd: u8,

    /// Source registers of the original instruction.
    #[arg(long, value_delimiter = ',', default_values_t = [2u8, 3u8])]
    rs: Vec<u8>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Correspondence database produced by `sepe synth`.
    #[arg(long, default_value = "correspondences.json")]
    correspondences: PathBuf,

    /// Mutation ids (comma-separated), `none` for the bug-free control;
    /// omit for the whole catalog.
    #[arg(long, value_delimiter = ',')]
    mutation: Vec<String>,

    /// Which transformation to check.
    #[arg(long, default_value = "both", value_parser = ["edsep", "eddi", "both"])]
    mode: String,

    /// Maximum unrolling depth (slots); bounds 1..=N are swept.
    #[arg(long, default_value_t = 2)]
    bound: usize,

    /// Dispatch order of originals and equivalents.
    #[arg(long, default_value = "sequential", value_parser = ["sequential", "interleaved"])]
    policy: String,

    /// Which stored correspondence the checker deploys per mnemonic.
    #[arg(long = "program-index", default_value_t = 0)]
    program_index: usize,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// synth_bench.csv files.
    #[arg(long = "bench")]
    bench: Vec<PathBuf>,

    /// results.csv files.
    #[arg(long = "detect")]
    detect: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize semantically equivalent programs for the enabled set.
    Synth(SynthArgs),
    /// Emit EDSEP-V pair blocks from a correspondence database.
    Transform(TransformArgs),
    /// Run bounded self-consistency checks with injected mutations.
    Check(CheckArgs),
    /// Aggregate benchmark/detection CSVs into summary tables.
    Report(ReportArgs),
    /// Dump the component library description.
    Library,
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path).map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    if let Some(solver) = &cli.solver {
        config.solver = Some(solver.clone());
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(timeout) = cli.timeout {
        config.timeout_ms = timeout;
    }
    if !cli.instr.is_empty() {
        config.instructions = cli.instr.iter().map(|s| s.to_uppercase()).collect();
    }
    Ok(config)
}

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    let mut config = build_config(&cli)?;

    match &cli.command {
        Command::Synth(args) => {
            if let Some(k) = args.k {
                config.k = k;
            }
            if let Some(v) = args.min_len {
                config.min_len = v;
            }
            if let Some(v) = args.n_max {
                config.n_max = v;
            }
            if let Some(v) = args.alpha {
                config.alpha = v;
            }
            if let Some(v) = args.delta {
                config.delta = v;
            }
            if let Some(v) = args.seed {
                config.seed = Some(v);
            }
            let algorithm = if args.baseline == "iterative" {
                Algorithm::Iterative
            } else {
                Algorithm::Hpf
            };
            cmd_synth(&config, algorithm)
        }
        Command::Transform(args) => cmd_transform(&config, &args.correspondences, args.rd, &args.rs),
        Command::Check(args) => {
            config.program_index = args.program_index;
            config.policy = match args.policy.as_str() {
                "interleaved" => sepe_core::qed::SchedulingPolicy::Interleaved,
                _ => sepe_core::qed::SchedulingPolicy::Sequential,
            };
            let modes = match args.mode.as_str() {
                "edsep" => vec![CheckMode::EdsepV],
                "eddi" => vec![CheckMode::EddiV],
                _ => vec![CheckMode::EdsepV, CheckMode::EddiV],
            };
            let selection = CheckSelection {
                mutations: args.mutation.clone(),
                modes,
                max_bound: args.bound,
            };
            cmd_check(&config, &args.correspondences, &selection)
        }
        Command::Report(args) => cmd_report(&config, &args.bench, &args.detect),
        Command::Library => cmd_library(&config),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
