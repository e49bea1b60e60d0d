use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use egoharness_cli::{config::RunConfig, report, runner};
use egoharness_core::user::InteractionMode;

#[derive(Parser)]
#[command(name = "egoharness", about = "Deterministic evaluation environment for interactive tool-using agents", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes for every (task, mode) in the configuration.
    Run {
        /// Path to the run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the configured modes (easy|hard|static, repeatable).
        #[arg(long = "mode")]
        modes: Vec<String>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the parallelism degree.
        #[arg(long)]
        parallel: Option<usize>,
        /// Override the run directory name (defaults to a timestamp).
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Aggregate a run directory into metrics, error histograms, and
    /// efficiency statistics.
    Report {
        /// Run directory produced by `run`.
        run_dir: PathBuf,
    },
    /// Load and validate one scenario database file.
    ValidateScenario {
        /// Path to a scenario database (JSON).
        path: PathBuf,
    },
    /// Replay each task's ground-truth calls on a pristine database and
    /// print the resulting state digests.
    ReplayGt {
        /// Path to a task file (JSON array of tasks).
        task_file: PathBuf,
        /// Scenario pack directory.
        #[arg(long)]
        pack: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            modes,
            seed,
            parallel,
            run_id,
        } => {
            let mut run_config = RunConfig::load(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if !modes.is_empty() {
                let parsed: Option<Vec<InteractionMode>> =
                    modes.iter().map(|m| InteractionMode::parse(m)).collect();
                run_config.modes = parsed
                    .with_context(|| format!("unknown mode in {modes:?} (easy|hard|static)"))?;
            }
            if let Some(seed) = seed {
                run_config.seed = seed;
            }
            if let Some(parallel) = parallel {
                run_config.parallelism = parallel;
            }
            if run_id.is_some() {
                run_config.run_id = run_id;
            }
            let run_dir = runner::run(&run_config).context("run failed")?;
            println!("run directory: {}", run_dir.display());
            let manifest_path = run_dir.join("manifest.json");
            let manifest = std::fs::read_to_string(manifest_path)?;
            let manifest: runner::RunManifest = serde_json::from_str(&manifest)?;
            println!(
                "episodes: {} total, {} failed",
                manifest.episodes_total, manifest.episodes_failed
            );
            for error in &manifest.task_errors {
                eprintln!("task error: {error}");
            }
            Ok(())
        }
        Command::Report { run_dir } => {
            let result = report::report_and_write(&run_dir)
                .with_context(|| format!("reporting {}", run_dir.display()))?;
            print!("{}", result.summary_table());
            if result.corrupt_logs > 0 {
                eprintln!("skipped {} corrupt log(s)", result.corrupt_logs);
            }
            println!("full report: {}", run_dir.join("report.json").display());
            Ok(())
        }
        Command::ValidateScenario { path } => {
            let summary = runner::validate_scenario(&path)
                .with_context(|| format!("validating {}", path.display()))?;
            print!("{summary}");
            Ok(())
        }
        Command::ReplayGt { task_file, pack } => {
            let out = runner::replay_gt(&task_file, &pack)
                .with_context(|| format!("replaying {}", task_file.display()))?;
            print!("{out}");
            Ok(())
        }
    }
}
