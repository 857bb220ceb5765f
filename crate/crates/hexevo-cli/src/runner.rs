//! Drives experiments end to end: parallel population evaluation, run
//! directories with per-generation files, resume of partial runs, and
//! interrupt-safe shutdown.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

use hexevo_core::evolution::{init_population, next_generation, score_population};
use hexevo_core::rng::{reproduction_stream, stream_rng, STREAM_INIT};
use hexevo_core::sim::run_trial;
use hexevo_core::terrain::HeightField;
use hexevo_core::{
    fitness_from_trial, stability_score, EvolutionHistory, GaitGenome, GenerationRecord,
    SimConfig, Termination, TrialResult,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::formats;
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub const SUMMARY_FILE: &str = "summary.tsv";
pub const BEST_GENOME_FILE: &str = "best.genome.txt";
pub const SEED_EVAL_FILE: &str = "seed_eval.tsv";

/// How an evolve invocation was assembled from the command line.
pub struct EvolveRequest {
    /// Parsed config file, if one was given.
    pub config: Option<RunConfig>,
    /// Directory of the config file, anchoring relative paths inside it.
    pub config_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub workers_override: Option<usize>,
    pub out: PathBuf,
    pub resume: bool,
    pub telemetry: bool,
}

#[derive(Debug)]
pub enum RunStatus {
    Complete { generations: u32 },
    Interrupted { completed: u32 },
}

/// Build the trial worker pool; 0 workers means one per hardware thread.
pub fn make_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::runtime(format!("cannot start worker pool: {e}")))
}

fn diverged_placeholder() -> TrialResult {
    TrialResult {
        distance: 0.0,
        stability_raw: f64::INFINITY,
        termination: Termination::Diverged,
        elapsed: 0.0,
        trace: Vec::new(),
    }
}

/// Evaluate every genome on the course, gathering results positionally so
/// the outcome is identical for any worker count. Population trials never
/// record traces (telemetry re-runs the one trial it needs).
pub fn evaluate_population(
    pool: &rayon::ThreadPool,
    genomes: &[GaitGenome],
    field: &HeightField,
    sim: &SimConfig,
) -> Vec<TrialResult> {
    let sim = SimConfig { trace_stride: 0, ..*sim };
    pool.install(|| {
        genomes
            .par_iter()
            .map(|g| run_trial(g, field, &sim).unwrap_or_else(|_| diverged_placeholder()))
            .collect()
    })
}

/// Make paths inside the config absolute so the manifest snapshot stays
/// valid from any working directory.
fn absolutize_paths(config: &mut RunConfig, base_dir: Option<&Path>) {
    let fix = |file: &mut String| {
        let p = Path::new(file.as_str());
        if !p.is_absolute() {
            let joined = base_dir.unwrap_or(Path::new(".")).join(p);
            if let Ok(abs) = std::path::absolute(&joined) {
                *file = abs.display().to_string();
            }
        }
    };
    if let Some(f) = config.terrain.course_file.as_mut() {
        fix(f);
    }
    if let Some(f) = config.evolution.seed_genome.as_mut() {
        fix(f);
    }
}

/// The effective config for a fresh run: file values (or defaults) plus
/// command-line overrides, with paths made absolute.
pub fn effective_config(request: &EvolveRequest) -> RunConfig {
    let mut config = request.config.clone().unwrap_or_default();
    if let Some(seed) = request.seed_override {
        config.run.master_seed = seed;
    }
    if let Some(workers) = request.workers_override {
        config.run.workers = workers;
    }
    absolutize_paths(&mut config, request.config_dir.as_deref());
    config
}

fn write_seed_eval(
    dir: &Path,
    seed: &GaitGenome,
    field: &HeightField,
    config: &RunConfig,
) -> Result<(), CliError> {
    let sim = SimConfig { trace_stride: 0, ..config.sim_config() };
    let trial = run_trial(seed, field, &sim)
        .map_err(|e| CliError::config(format!("seed genome: {e}")))?;
    let fitness = fitness_from_trial(&trial, &config.evolution_config(), &sim);
    let text = format!(
        "fitness\tdistance\tstability_raw\tstability_score\telapsed\ttermination\n{}\t{}\t{}\t{}\t{}\t{}\n",
        fitness,
        trial.distance,
        trial.stability_raw,
        stability_score(trial.stability_raw, sim.stability_norm),
        trial.elapsed,
        trial.termination.name()
    );
    formats::write_atomic(&dir.join(SEED_EVAL_FILE), &text)
}

struct PreparedRun {
    config: RunConfig,
    seed: GaitGenome,
    history: EvolutionHistory,
    genomes: Vec<GaitGenome>,
}

fn has_run_files(dir: &Path) -> bool {
    dir.join(MANIFEST_FILE).exists()
        || formats::list_generation_files(dir).map(|f| !f.is_empty()).unwrap_or(false)
}

fn dir_is_empty(dir: &Path) -> bool {
    match std::fs::read_dir(dir) {
        Ok(mut entries) => entries.next().is_none(),
        Err(_) => false,
    }
}

fn prepare_fresh(request: &EvolveRequest) -> Result<PreparedRun, CliError> {
    let dir = &request.out;
    if dir.exists() {
        if has_run_files(dir) {
            return Err(CliError::NeedsResume(format!(
                "{} already contains a run; pass --resume to continue it",
                dir.display()
            )));
        }
        if !dir_is_empty(dir) {
            return Err(CliError::config(format!(
                "{} exists and is not empty; refusing to mix outputs into it",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;

    let config = effective_config(request);
    config.validate()?;
    let seed = config.seed_genome(None)?;
    let field = config.load_field(None)?;

    RunManifest::new(&config, &seed).write(dir)?;
    write_seed_eval(dir, &seed, &field, &config)?;

    let genomes = init_population(
        &seed,
        &config.evolution_config(),
        &mut stream_rng(config.run.master_seed, STREAM_INIT),
    );
    Ok(PreparedRun { config, seed, history: EvolutionHistory::default(), genomes })
}

fn prepare_resume(request: &EvolveRequest) -> Result<PreparedRun, CliError> {
    let dir = &request.out;
    let manifest = RunManifest::read(dir)?;
    let mut config = manifest.config.clone();

    // A config given alongside --resume must agree with the recorded one;
    // only the worker count may differ (it cannot change results).
    if request.config.is_some() || request.seed_override.is_some() {
        let mut provided = effective_config(request);
        provided.run.workers = config.run.workers;
        if provided != config {
            return Err(CliError::config(format!(
                "provided configuration differs from the one recorded in {}; \
                 resume always uses the recorded configuration",
                dir.join(MANIFEST_FILE).display()
            )));
        }
    }
    if let Some(workers) = request.workers_override {
        config.run.workers = workers;
    }
    config.validate()?;

    let seed = manifest.seed_genome()?;
    let found = formats::list_generation_files(dir)?;
    let missing = formats::missing_generations(&found);
    if !missing.is_empty() {
        let names: Vec<String> =
            missing.iter().map(|i| formats::generation_file_name(*i)).collect();
        return Err(CliError::runtime(format!(
            "run directory is missing generation files: {}",
            names.join(", ")
        )));
    }

    let norm = config.sim_config().stability_norm;
    let mut history = EvolutionHistory::default();
    for (index, path) in &found {
        history.generations.push(formats::read_generation(path, *index, norm)?);
    }

    let genomes = match history.generations.last() {
        None => init_population(
            &seed,
            &config.evolution_config(),
            &mut stream_rng(config.run.master_seed, STREAM_INIT),
        ),
        Some(last) => next_generation(
            &last.population,
            &config.evolution_config(),
            &mut stream_rng(config.run.master_seed, reproduction_stream(last.index + 1)),
        ),
    };
    Ok(PreparedRun { config, seed, history, genomes })
}

/// Run (or continue) an evolution experiment, writing each generation's
/// files as soon as it completes. Checks `interrupt` between generations;
/// when set, the in-flight generation is finished and written first.
pub fn run_evolution(
    request: &EvolveRequest,
    interrupt: &AtomicBool,
    mut progress: impl FnMut(&GenerationRecord),
) -> Result<RunStatus, CliError> {
    let prepared = if request.resume {
        prepare_resume(request)?
    } else {
        prepare_fresh(request)?
    };
    let PreparedRun { config, seed, mut history, mut genomes } = prepared;
    let _ = seed;
    let dir = &request.out;

    let evo = config.evolution_config();
    let sim = config.sim_config();
    let field = config.load_field(None)?;
    let target = evo.generations;

    if history.generations.len() as u32 >= target {
        return Ok(RunStatus::Complete { generations: history.generations.len() as u32 });
    }

    let pool = make_pool(config.run.workers)?;
    loop {
        let index = history.generations.len() as u32;
        let results = evaluate_population(&pool, &genomes, &field, &sim);
        let population =
            score_population(std::mem::take(&mut genomes), results, &evo, &sim)
                .map_err(|e| CliError::runtime(e.to_string()))?;
        let record = GenerationRecord { index, population };
        formats::write_generation(dir, &record)?;
        history.generations.push(record);
        formats::write_summary(&dir.join(SUMMARY_FILE), &history)?;
        let best_overall = history.best_overall().expect("non-empty history");
        formats::write_genome(&dir.join(BEST_GENOME_FILE), &best_overall.genome)?;

        let generation = history.generations.last().expect("just pushed");
        if request.telemetry {
            write_best_trace(dir, generation, &field, &sim)?;
        }
        progress(generation);

        if index + 1 >= target {
            return Ok(RunStatus::Complete { generations: target });
        }
        if interrupt.load(Ordering::Relaxed) {
            return Ok(RunStatus::Interrupted { completed: index + 1 });
        }
        genomes = next_generation(
            &generation.population,
            &evo,
            &mut stream_rng(config.run.master_seed, reproduction_stream(index + 1)),
        );
    }
}

/// Re-run the generation's best trial with tracing on and export it.
fn write_best_trace(
    dir: &Path,
    generation: &GenerationRecord,
    field: &HeightField,
    sim: &SimConfig,
) -> Result<(), CliError> {
    let stride = if sim.trace_stride == 0 { 10 } else { sim.trace_stride };
    let traced = SimConfig { trace_stride: stride, ..*sim };
    let trial = run_trial(&generation.best().genome, field, &traced)
        .map_err(|e| CliError::runtime(format!("telemetry trial: {e}")))?;
    let name = format!("gen_{:04}.trace.tsv", generation.index);
    formats::write_trace(&dir.join(name), &trial.trace)
}

/// Outcome of a single-genome trial, ready for printing.
pub struct TrialReport {
    pub distance: f64,
    pub stability_score: f64,
    pub stability_raw: f64,
    pub termination: Termination,
    pub elapsed: f64,
    pub fitness: f64,
    pub trace_file: Option<PathBuf>,
}

/// Evaluate one genome file on the configured course.
pub fn run_single_trial(
    config: &RunConfig,
    config_dir: Option<&Path>,
    genome_path: &Path,
    telemetry: bool,
    out: &Path,
) -> Result<TrialReport, CliError> {
    config.validate()?;
    let genome = formats::read_genome(genome_path)?;
    let field = config.load_field(config_dir)?;
    let mut sim = config.sim_config();
    if telemetry && sim.trace_stride == 0 {
        sim.trace_stride = 10;
    }
    let trial = run_trial(&genome, &field, &sim)
        .map_err(|e| CliError::config(format!("{}: {e}", genome_path.display())))?;
    let fitness = fitness_from_trial(&trial, &config.evolution_config(), &sim);

    let trace_file = if telemetry {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))?;
        let path = out.join("trace.tsv");
        formats::write_trace(&path, &trial.trace)?;
        Some(path)
    } else {
        None
    };

    Ok(TrialReport {
        distance: trial.distance,
        stability_score: stability_score(trial.stability_raw, sim.stability_norm),
        stability_raw: trial.stability_raw,
        termination: trial.termination,
        elapsed: trial.elapsed,
        fitness,
        trace_file,
    })
}

/// Human-readable layout summary for a generated course.
pub struct CourseSummary {
    pub lines: Vec<String>,
}

/// Generate the configured course and write it as a portable grid file.
pub fn run_course(
    config: &RunConfig,
    out_path: &Path,
) -> Result<CourseSummary, CliError> {
    let layout = config.course_layout();
    layout
        .validate()
        .map_err(|e| CliError::config(format!("terrain layout: {e}")))?;
    let field = hexevo_core::terrain::build_course(
        &layout,
        &mut stream_rng(config.terrain.seed, hexevo_core::rng::STREAM_TERRAIN),
    );
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::runtime(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    formats::write_course(out_path, &field, Some(config.terrain.seed))?;

    let mut lines = vec![
        format!(
            "footprint {} x {} m at {} m resolution ({} x {} cells)",
            layout.length,
            layout.width,
            layout.resolution,
            field.nx(),
            field.ny()
        ),
        format!("seed {}", config.terrain.seed),
    ];
    if config.terrain.flat {
        lines.push("flat override: no obstacles".to_string());
    } else {
        lines.push(format!(
            "stepping fields {:?} and {:?} m, heights up to {} m",
            layout.steps1, layout.steps2, layout.step_height_max
        ));
        lines.push(format!(
            "beams at {} m and {} m / {} m (gap {:.2} m), cross-section {} m",
            layout.beam1,
            layout.beam2a,
            layout.beam2b,
            layout.beam2b - (layout.beam2a + layout.beam_size),
            layout.beam_size
        ));
        lines.push(format!(
            "incline from {} m at grade {}",
            layout.incline_start, layout.incline_grade
        ));
    }
    Ok(CourseSummary { lines })
}
