use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use hexevo_cli::analyze::analyze_run;
use hexevo_cli::config::RunConfig;
use hexevo_cli::error::CliError;
use hexevo_cli::runner::{
    run_course, run_evolution, run_single_trial, EvolveRequest, RunStatus,
};

/// Deterministic hexapod gait evolution workbench.
#[derive(Parser)]
#[command(name = "hexevo", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve gaits over the obstacle course and record every generation.
    Evolve {
        /// TOML run configuration; built-in desk-scale defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the evolutionary master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory for manifest, generation files, and summaries.
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Continue a partial run in the output directory.
        #[arg(long)]
        resume: bool,
        /// Write a body trace for each generation's best individual.
        #[arg(long)]
        telemetry: bool,
        /// Worker threads for trial evaluation; 0 uses all hardware threads.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one genome file through a single trial and report the outcome.
    Trial {
        /// Genome file: 24 whitespace-separated values.
        genome: PathBuf,
        /// TOML run configuration; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the body trace as trace.tsv.
        #[arg(long)]
        telemetry: bool,
        /// Directory for telemetry output.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate the obstacle course and export its height grid.
    Course {
        /// TOML run configuration; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the terrain seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Course grid output file.
        #[arg(long, default_value = "course.txt")]
        out: PathBuf,
    },
    /// Derive analysis tables from a recorded run directory.
    Analyze {
        /// Run directory produced by `evolve`.
        run_dir: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<(Option<RunConfig>, Option<PathBuf>), CliError> {
    match path {
        None => Ok((None, None)),
        Some(p) => {
            let config = RunConfig::load(p)?;
            let dir = p.parent().map(Path::to_path_buf);
            Ok((Some(config), dir))
        }
    }
}

fn cmd_evolve(
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
    resume: bool,
    telemetry: bool,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let (config, config_dir) = load_config(config.as_deref())?;
    let request = EvolveRequest {
        config,
        config_dir,
        seed_override: seed,
        workers_override: workers,
        out,
        resume,
        telemetry,
    };

    let interrupt = Arc::new(AtomicBool::new(false));
    let handler_flag = Arc::clone(&interrupt);
    let handler = ctrlc::set_handler(move || {
        eprintln!("interrupt received; finishing the current generation");
        handler_flag.store(true, Ordering::Relaxed);
    });
    if let Err(e) = handler {
        eprintln!("warning: no interrupt handler installed: {e}");
    }

    let status = run_evolution(&request, &interrupt, |generation| {
        let best = generation.best();
        println!(
            "generation {:>4}  best fitness {:.4}  distance {:.3} m  mean fitness {:.4}",
            generation.index,
            best.fitness,
            best.result.distance,
            generation.mean_fitness()
        );
    })?;

    match status {
        RunStatus::Complete { generations } => {
            println!("run complete: {generations} generations in {}", request.out.display());
            Ok(())
        }
        RunStatus::Interrupted { completed } => Err(CliError::NeedsResume(format!(
            "run interrupted after {completed} generation(s); \
             rerun with --resume --out {} to continue",
            request.out.display()
        ))),
    }
}

fn cmd_trial(
    genome: PathBuf,
    config: Option<PathBuf>,
    telemetry: bool,
    out: PathBuf,
) -> Result<(), CliError> {
    let (config, config_dir) = load_config(config.as_deref())?;
    let config = config.unwrap_or_default();
    let report = run_single_trial(&config, config_dir.as_deref(), &genome, telemetry, &out)?;
    println!("distance        {:.4} m", report.distance);
    println!("stability score {:.4} (raw {:.4})", report.stability_score, report.stability_raw);
    println!("termination     {}", report.termination.name());
    println!("elapsed         {:.2} s", report.elapsed);
    println!("fitness         {:.4}", report.fitness);
    if let Some(path) = report.trace_file {
        println!("trace           {}", path.display());
    }
    Ok(())
}

fn cmd_course(
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<(), CliError> {
    let (config, _) = load_config(config.as_deref())?;
    let mut config = config.unwrap_or_default();
    if let Some(seed) = seed {
        config.terrain.seed = seed;
    }
    let summary = run_course(&config, &out)?;
    for line in summary.lines {
        println!("{line}");
    }
    println!("course written to {}", out.display());
    Ok(())
}

fn cmd_analyze(run_dir: PathBuf) -> Result<(), CliError> {
    let report = analyze_run(&run_dir)?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    for path in &report.written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve { config, seed, out, resume, telemetry, workers } => {
            cmd_evolve(config, seed, out, resume, telemetry, workers)
        }
        Command::Trial { genome, config, telemetry, out } => {
            cmd_trial(genome, config, telemetry, out)
        }
        Command::Course { config, seed, out } => cmd_course(config, seed, out),
        Command::Analyze { run_dir } => cmd_analyze(run_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
