use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyphase_cs::experiments::{load_bundled, parse_config, run_stage, ExperimentConfig, Stage};

#[derive(Parser)]
#[command(name = "polyphase-cs", version, about = "Sparse polynomial-phase signal recovery from random samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct RunFlags {
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's output_dir, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the clean (and noisy, if configured) signal.
    Synth(Common),
    /// Write the sampled measurements.
    Sample(Common),
    /// Sweep the parameter grid and write the scores.
    Sweep(Common),
    /// Sweep, recover and reconstruct.
    Recover(Common),
    /// Windowed sweep and piecewise reconstruction.
    Lpft(Common),
    /// Monte-Carlo output SNR table.
    SnrTable(Common),
    /// Success-rate map over component and sample counts.
    PhaseTransition(Common),
    /// Run a bundled experiment (ex1..ex5).
    Example {
        id: String,
        #[command(flatten)]
        run: RunFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let (stage, cfg, flags) = match cli.command {
        Command::Synth(c) => (Stage::Synth, parse_config(&c.config), c.run),
        Command::Sample(c) => (Stage::Sample, parse_config(&c.config), c.run),
        Command::Sweep(c) => (Stage::Sweep, parse_config(&c.config), c.run),
        Command::Recover(c) => (Stage::Recover, parse_config(&c.config), c.run),
        Command::Lpft(c) => (Stage::Lpft, parse_config(&c.config), c.run),
        Command::SnrTable(c) => (Stage::SnrTable, parse_config(&c.config), c.run),
        Command::PhaseTransition(c) => (Stage::PhaseTransition, parse_config(&c.config), c.run),
        Command::Example { id, run } => (Stage::Full, load_bundled(&id), run),
    };
    match cfg.and_then(|cfg| execute(cfg, stage, flags)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(mut cfg: ExperimentConfig, stage: Stage, flags: RunFlags) -> polyphase_cs::Result<()> {
    if let Some(seed) = flags.seed {
        cfg = cfg.with_seed(seed);
    }
    let dir = flags
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| polyphase_cs::Error::Io {
        path: dir.clone(),
        source,
    })?;
    let report = run_stage(&cfg, stage, &dir)?;
    for line in &report.summary {
        println!("{line}");
    }
    Ok(())
}
