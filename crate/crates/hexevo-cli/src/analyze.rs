//! Post-run analysis: reads the files a finished (or partial) run left
//! behind and derives summary tables from them. Everything here is a pure
//! function of the run directory; no trials are ever re-simulated, so
//! rerunning analysis on the same directory reproduces the same bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hexevo_core::analysis::{
    compare_gaits, covariance_with_distance, generation_curves, joint_waveforms,
};
use hexevo_core::{EvolutionHistory, GaitGenome};
use std::f64::consts::TAU;

use crate::error::CliError;
use crate::formats;
use crate::manifest::{manifest_hash, RunManifest};
use crate::runner::SEED_EVAL_FILE;

pub const ANALYSIS_DIR: &str = "analysis";
pub const CURVES_FILE: &str = "curves.tsv";
pub const COVARIANCE_FILE: &str = "covariance.tsv";
pub const COMPARISON_FILE: &str = "comparison.tsv";
pub const TRAJECTORY_FILE: &str = "trajectory.tsv";

const LEG_NAMES: [&str; 6] = [
    "front_left",
    "middle_left",
    "rear_left",
    "front_right",
    "middle_right",
    "rear_right",
];

/// What an analysis pass produced.
#[derive(Debug)]
pub struct AnalyzeReport {
    pub written: Vec<PathBuf>,
    /// Tables that could not be produced, with the reason.
    pub notes: Vec<String>,
}

/// Seed-trial statistics recorded at launch time, if present.
struct SeedEval {
    fitness: f64,
    distance: f64,
}

fn read_seed_eval(dir: &Path) -> Option<SeedEval> {
    let text = std::fs::read_to_string(dir.join(SEED_EVAL_FILE)).ok()?;
    let values = text.lines().nth(1)?;
    let mut fields = values.split('\t');
    let fitness = fields.next()?.parse().ok()?;
    let distance = fields.next()?.parse().ok()?;
    Some(SeedEval { fitness, distance })
}

fn load_history(dir: &Path, stability_norm: f64) -> Result<EvolutionHistory, CliError> {
    let found = formats::list_generation_files(dir)?;
    if found.is_empty() {
        return Err(CliError::runtime(format!(
            "{} contains no generation files to analyze",
            dir.display()
        )));
    }
    let missing = formats::missing_generations(&found);
    if !missing.is_empty() {
        let names: Vec<String> =
            missing.iter().map(|i| formats::generation_file_name(*i)).collect();
        return Err(CliError::runtime(format!(
            "run directory is missing generation files: {}",
            names.join(", ")
        )));
    }
    let mut history = EvolutionHistory::default();
    for (index, path) in &found {
        history.generations.push(formats::read_generation(path, *index, stability_norm)?);
    }
    Ok(history)
}

/// Every table opens with the run identity (a hash of the manifest) and
/// the convention that per-generation statistics follow the generation's
/// best individual.
fn preamble(hash: u64) -> String {
    format!("# manifest_hash {hash:016x}\n# construction best_of_generation\n")
}

fn curves_table(hash: u64, history: &EvolutionHistory) -> Result<String, CliError> {
    let points = generation_curves(history)
        .map_err(|e| CliError::runtime(format!("fitness curves: {e}")))?;
    let mut text = preamble(hash);
    text.push_str("generation\tbest_fitness\tmean_fitness\tbest_distance\tbest_stability\n");
    for p in points {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}",
            p.generation, p.best_fitness, p.mean_fitness, p.best_distance, p.best_stability
        );
    }
    Ok(text)
}

fn covariance_table(hash: u64, history: &EvolutionHistory) -> Result<String, CliError> {
    let report = covariance_with_distance(history)
        .map_err(|e| CliError::runtime(format!("gene covariance: {e}")))?;
    let mut text = preamble(hash);
    let _ = writeln!(text, "# samples {}", report.samples);
    text.push_str("rank\tgene\tname\tcovariance\n");
    for (rank, entry) in report.ranking.iter().enumerate() {
        let _ =
            writeln!(text, "{}\t{}\t{}\t{}", rank, entry.gene, entry.name, entry.covariance);
    }
    Ok(text)
}

fn comparison_table(
    hash: u64,
    seed: &GaitGenome,
    best: &GaitGenome,
    seed_eval: Option<&SeedEval>,
    best_fitness: f64,
    best_distance: f64,
) -> String {
    let mut text = preamble(hash);
    if let Some(eval) = seed_eval {
        let _ = writeln!(text, "# seed_fitness {}", eval.fitness);
        let _ = writeln!(text, "# seed_distance {}", eval.distance);
        let _ = writeln!(text, "# fitness_gain {}", best_fitness - eval.fitness);
        let _ = writeln!(text, "# distance_gain {}", best_distance - eval.distance);
    }
    let _ = writeln!(text, "# best_fitness {best_fitness}");
    let _ = writeln!(text, "# best_distance {best_distance}");
    text.push_str("gene\tname\tseed\tbest\tdifference\tpercent_of_range\n");
    for row in compare_gaits(seed, best) {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.gene, row.name, row.value_a, row.value_b, row.difference, row.percent_of_range
        );
    }
    text
}

fn trajectory_table(
    hash: u64,
    best: &GaitGenome,
    manifest: &RunManifest,
) -> Result<String, CliError> {
    let gait = manifest.config.gait_config();
    let sim = manifest.config.sim_config();
    // Two full cycles of the base clock, sampled at the telemetry stride.
    let duration = 2.0 * TAU / gait.omega0;
    let stride = if sim.trace_stride == 0 { 10 } else { sim.trace_stride };
    let dt = sim.dt * stride as f64;
    let samples = joint_waveforms(best, &gait, duration, dt)
        .map_err(|e| CliError::runtime(format!("joint waveforms: {e}")))?;

    let mut text = preamble(hash);
    text.push_str("time");
    for leg in LEG_NAMES {
        let _ = write!(text, "\t{leg}_coxa\t{leg}_femur\t{leg}_tibia");
    }
    text.push('\n');
    for sample in samples {
        let _ = write!(text, "{}", sample.time);
        for joints in sample.joints {
            let _ = write!(text, "\t{}\t{}\t{}", joints.coxa, joints.femur, joints.tibia);
        }
        text.push('\n');
    }
    Ok(text)
}

/// Derive all analysis tables for a run directory into `<dir>/analysis/`.
pub fn analyze_run(dir: &Path) -> Result<AnalyzeReport, CliError> {
    let manifest = RunManifest::read(dir)?;
    manifest.config.validate()?;
    let hash = manifest_hash(dir)?;
    let history = load_history(dir, manifest.config.sim_config().stability_norm)?;

    let out_dir = dir.join(ANALYSIS_DIR);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut report = AnalyzeReport { written: Vec::new(), notes: Vec::new() };
    let mut emit = |name: &str, text: String| -> Result<(), CliError> {
        let path = out_dir.join(name);
        formats::write_atomic(&path, &text)?;
        report.written.push(path);
        Ok(())
    };

    emit(CURVES_FILE, curves_table(hash, &history)?)?;

    if history.generations.len() < 2 {
        report.notes.push(format!(
            "skipping {COVARIANCE_FILE}: needs at least 2 generations, run has {}",
            history.generations.len()
        ));
    } else {
        emit(COVARIANCE_FILE, covariance_table(hash, &history)?)?;
    }

    let seed = manifest.seed_genome()?;
    let best = history.best_overall().expect("non-empty history");
    emit(
        COMPARISON_FILE,
        comparison_table(
            hash,
            &seed,
            &best.genome,
            read_seed_eval(dir).as_ref(),
            best.fitness,
            best.result.distance,
        ),
    )?;

    emit(TRAJECTORY_FILE, trajectory_table(hash, &best.genome, &manifest)?)?;
    Ok(report)
}
