//! Genetic search over gait genomes.
//!
//! The population is scored by a caller-supplied batch evaluator (the CLI
//! parallelizes it; [`evolve`] runs trials serially), then each new
//! generation is bred from two parents: the best of the first half and the
//! best of the second half of the population. Every child is either a
//! gaussian mutation of the fitter parent or a two-point crossover of both,
//! decided by a fair coin.
//!
//! Randomness is drawn from dedicated counter-mode streams — one for the
//! initial population and one per breeding step — so a run can be resumed
//! mid-way, or re-evaluated with any number of workers, and still produce
//! bit-identical populations.

use alloc::vec::Vec;

use rand::Rng;

use crate::gait::{
    validate_genome, GaitGenome, GeneKind, GenomeError, AMPLITUDE_MAX, GENE_COUNT, PHASE_MAX,
    SHIFT_MAX, SHIFT_MIN,
};
use crate::math::standard_normal;
use crate::rng::{reproduction_stream, stream_rng, STREAM_INIT};
use crate::sim::{stability_score, SimConfig, Termination, TrialResult};

/// Mutation step sizes, one per continuous gene family (a tenth of each
/// parameter's usable range).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MutationSigma {
    pub amplitude: f64,
    pub phase: f64,
    pub shift: f64,
}

impl Default for MutationSigma {
    fn default() -> Self {
        MutationSigma {
            amplitude: AMPLITUDE_MAX / 10.0,
            phase: PHASE_MAX / 10.0,
            shift: (SHIFT_MAX - SHIFT_MIN) / 10.0,
        }
    }
}

impl MutationSigma {
    /// Step size for a gene family; period genes are resampled rather than
    /// perturbed, so they carry no sigma.
    pub fn for_kind(&self, kind: GeneKind) -> f64 {
        match kind {
            GeneKind::Period => 0.0,
            GeneKind::Phase => self.phase,
            GeneKind::Amplitude => self.amplitude,
            GeneKind::Shift => self.shift,
        }
    }
}

/// Knobs of the genetic search.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvolutionConfig {
    /// Number of genomes per generation; must be even and at least 2.
    pub population_size: usize,
    /// Total number of generations to run (including generation zero).
    pub generations: u32,
    /// Probability that a child is a mutation of the fitter parent rather
    /// than a crossover of both.
    pub mutate_vs_crossover: f64,
    /// Per-gene probability that mutation touches the gene.
    pub mutation_prob: f64,
    pub sigma: MutationSigma,
    /// Weight of trial distance in the fitness.
    pub distance_weight: f64,
    /// Weight of the stability score (scaled by course length so both
    /// fitness terms are in meters).
    pub stability_weight: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 200,
            generations: 23,
            mutate_vs_crossover: 0.5,
            mutation_prob: 0.4,
            sigma: MutationSigma::default(),
            distance_weight: 0.95,
            stability_weight: 0.05,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return Err(EvolveError::InvalidConfig(
                "population_size must be even and at least 2",
            ));
        }
        if self.generations == 0 {
            return Err(EvolveError::InvalidConfig("generations must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mutate_vs_crossover) {
            return Err(EvolveError::InvalidConfig("mutate_vs_crossover must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(EvolveError::InvalidConfig("mutation_prob must lie in [0, 1]"));
        }
        let sigmas_ok = self.sigma.amplitude >= 0.0 && self.sigma.phase >= 0.0
            && self.sigma.shift >= 0.0;
        if !sigmas_ok {
            return Err(EvolveError::InvalidConfig("mutation sigmas must be nonnegative"));
        }
        let weights_ok = self.distance_weight.is_finite()
            && self.stability_weight.is_finite()
            && self.distance_weight >= 0.0
            && self.stability_weight >= 0.0;
        if !weights_ok {
            return Err(EvolveError::InvalidConfig("fitness weights must be nonnegative"));
        }
        Ok(())
    }
}

/// Why evolution could not run.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolveError {
    InvalidSeed(GenomeError),
    InvalidConfig(&'static str),
    /// The evaluator returned the wrong number of results.
    EvaluatorMismatch { expected: usize, got: usize },
    /// Resuming requires at least one completed generation.
    EmptyHistory,
}

impl core::fmt::Display for EvolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvolveError::InvalidSeed(e) => write!(f, "invalid seed genome: {e}"),
            EvolveError::InvalidConfig(msg) => write!(f, "invalid evolution config: {msg}"),
            EvolveError::EvaluatorMismatch { expected, got } => {
                write!(f, "evaluator returned {got} results for {expected} genomes")
            }
            EvolveError::EmptyHistory => {
                write!(f, "cannot resume from an empty history")
            }
        }
    }
}

/// One scored genome.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: GaitGenome,
    pub fitness: f64,
    /// Stability score of the trial, in [0, 1].
    pub stability: f64,
    pub result: TrialResult,
}

/// A full scored generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    /// Zero-based generation number.
    pub index: u32,
    pub population: Vec<Individual>,
}

impl GenerationRecord {
    /// Index of the fittest individual (ties resolved to the lowest index).
    pub fn best_index(&self) -> usize {
        argmax_fitness(&self.population, 0, self.population.len())
    }

    pub fn best(&self) -> &Individual {
        &self.population[self.best_index()]
    }

    pub fn mean_fitness(&self) -> f64 {
        if self.population.is_empty() {
            return 0.0;
        }
        self.population.iter().map(|i| i.fitness).sum::<f64>() / self.population.len() as f64
    }
}

/// The complete record of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionHistory {
    pub generations: Vec<GenerationRecord>,
}

impl EvolutionHistory {
    /// Fittest individual across all generations (earliest on ties).
    pub fn best_overall(&self) -> Option<&Individual> {
        self.generations
            .iter()
            .map(|g| g.best())
            .reduce(|best, cand| if cand.fitness > best.fitness { cand } else { best })
    }
}

/// Combine a trial outcome into a scalar fitness: weighted forward distance
/// plus weighted stability score scaled by course length. A diverged trial
/// scores zero outright.
pub fn fitness_from_trial(trial: &TrialResult, evo: &EvolutionConfig, sim: &SimConfig) -> f64 {
    if trial.termination == Termination::Diverged {
        return 0.0;
    }
    let stability = stability_score(trial.stability_raw, sim.stability_norm);
    evo.distance_weight * trial.distance + evo.stability_weight * stability * sim.course_length
}

fn argmax_fitness(pop: &[Individual], from: usize, to: usize) -> usize {
    let mut best = from;
    for i in from + 1..to {
        if pop[i].fitness > pop[best].fitness {
            best = i;
        }
    }
    best
}

/// Pick the two breeding parents: the fittest of the first half and the
/// fittest of the second half of the population, ties resolved to the
/// lowest index. The population length must be even and at least 2.
pub fn select_parents(pop: &[Individual]) -> (usize, usize) {
    debug_assert!(pop.len() >= 2 && pop.len() % 2 == 0);
    let half = pop.len() / 2;
    (argmax_fitness(pop, 0, half), argmax_fitness(pop, half, pop.len()))
}

/// Splice `b`'s genes over the span `[lo, hi)` of `a`, in the flat gene
/// order. Periods transfer whole, never interpolated.
pub fn crossover_at(a: &GaitGenome, b: &GaitGenome, lo: usize, hi: usize) -> GaitGenome {
    debug_assert!(lo < hi && hi <= GENE_COUNT);
    let fa = a.to_flat();
    let fb = b.to_flat();
    let mut child = fa;
    child[lo..hi].copy_from_slice(&fb[lo..hi]);
    GaitGenome::from_flat(&child)
}

/// Exchange the gene span between two distinct uniformly drawn cut points:
/// the child takes `a`'s genes outside `[i, j)` and `b`'s genes inside it.
pub fn two_point_crossover(a: &GaitGenome, b: &GaitGenome, rng: &mut impl Rng) -> GaitGenome {
    let (lo, hi) = draw_distinct_cuts(rng);
    crossover_at(a, b, lo, hi)
}

fn draw_distinct_cuts(rng: &mut impl Rng) -> (usize, usize) {
    loop {
        let i = rng.gen_range(0..=GENE_COUNT);
        let j = rng.gen_range(0..=GENE_COUNT);
        if i != j {
            return (i.min(j), i.max(j));
        }
    }
}

/// Perturb each gene independently with probability `prob`: continuous
/// genes take a gaussian step (clamped to their bounds), period genes are
/// resampled uniformly from the allowed multipliers.
pub fn gaussian_mutate(
    genome: &GaitGenome,
    prob: f64,
    sigma: &MutationSigma,
    rng: &mut impl Rng,
) -> GaitGenome {
    let mut flat = genome.to_flat();
    for (i, v) in flat.iter_mut().enumerate() {
        if rng.gen::<f64>() >= prob {
            continue;
        }
        match GeneKind::of(i) {
            GeneKind::Period => *v = rng.gen_range(1..=2) as f64,
            kind => {
                let stepped = *v + standard_normal(rng) * sigma.for_kind(kind);
                *v = match kind {
                    GeneKind::Phase => stepped.clamp(0.0, PHASE_MAX),
                    GeneKind::Amplitude => stepped.clamp(0.0, AMPLITUDE_MAX),
                    GeneKind::Shift => stepped.clamp(SHIFT_MIN, SHIFT_MAX),
                    GeneKind::Period => unreachable!(),
                };
            }
        }
    }
    GaitGenome::from_flat(&flat)
}

/// Spread the starting population around a seed genome by mutating every
/// gene once (mutation probability one). The seed itself is not included.
pub fn init_population(
    seed: &GaitGenome,
    cfg: &EvolutionConfig,
    rng: &mut impl Rng,
) -> Vec<GaitGenome> {
    (0..cfg.population_size).map(|_| gaussian_mutate(seed, 1.0, &cfg.sigma, rng)).collect()
}

/// Breed the next generation from a scored population.
pub fn next_generation(
    pop: &[Individual],
    cfg: &EvolutionConfig,
    rng: &mut impl Rng,
) -> Vec<GaitGenome> {
    let (ia, ib) = select_parents(pop);
    let fitter =
        if pop[ib].fitness > pop[ia].fitness { &pop[ib].genome } else { &pop[ia].genome };
    (0..cfg.population_size)
        .map(|_| {
            if rng.gen::<f64>() < cfg.mutate_vs_crossover {
                gaussian_mutate(fitter, cfg.mutation_prob, &cfg.sigma, rng)
            } else {
                two_point_crossover(&pop[ia].genome, &pop[ib].genome, rng)
            }
        })
        .collect()
}

/// Pair genomes with their trial results into scored individuals; errors
/// if the counts disagree.
pub fn score_population(
    genomes: Vec<GaitGenome>,
    results: Vec<TrialResult>,
    evo: &EvolutionConfig,
    sim: &SimConfig,
) -> Result<Vec<Individual>, EvolveError> {
    if results.len() != genomes.len() {
        return Err(EvolveError::EvaluatorMismatch {
            expected: genomes.len(),
            got: results.len(),
        });
    }
    Ok(genomes
        .into_iter()
        .zip(results)
        .map(|(genome, result)| Individual {
            fitness: fitness_from_trial(&result, evo, sim),
            stability: stability_score(result.stability_raw, sim.stability_norm),
            genome,
            result,
        })
        .collect())
}

/// Run the full evolutionary loop with a caller-supplied batch evaluator.
///
/// The evaluator receives each generation's genomes in order and must
/// return one trial result per genome, positionally. Populations depend
/// only on `master_seed`, the seed genome, and the recorded fitness values,
/// never on evaluator timing, so any parallel evaluator that preserves
/// order reproduces the serial run bit for bit.
pub fn evolve_with<F>(
    seed: &GaitGenome,
    evo: &EvolutionConfig,
    sim: &SimConfig,
    master_seed: u64,
    mut evaluate: F,
) -> Result<EvolutionHistory, EvolveError>
where
    F: FnMut(&[GaitGenome]) -> Vec<TrialResult>,
{
    validate_genome(seed).map_err(EvolveError::InvalidSeed)?;
    evo.validate()?;
    let mut history = EvolutionHistory::default();
    let mut genomes =
        init_population(seed, evo, &mut stream_rng(master_seed, STREAM_INIT));
    loop {
        let index = history.generations.len() as u32;
        let results = evaluate(&genomes);
        let population = score_population(genomes, results, evo, sim)?;
        history.generations.push(GenerationRecord { index, population });
        if index + 1 >= evo.generations {
            return Ok(history);
        }
        let stream = reproduction_stream(index + 1);
        genomes = next_generation(
            &history.generations.last().unwrap().population,
            evo,
            &mut stream_rng(master_seed, stream),
        );
    }
}

/// Continue a partial run until `evo.generations` generations exist.
///
/// Breeding for generation `g` always draws from the same stream keyed by
/// `g`, so resuming produces exactly the generations a single uninterrupted
/// run would have produced.
pub fn resume_with<F>(
    mut history: EvolutionHistory,
    evo: &EvolutionConfig,
    sim: &SimConfig,
    master_seed: u64,
    mut evaluate: F,
) -> Result<EvolutionHistory, EvolveError>
where
    F: FnMut(&[GaitGenome]) -> Vec<TrialResult>,
{
    evo.validate()?;
    if history.generations.is_empty() {
        return Err(EvolveError::EmptyHistory);
    }
    while (history.generations.len() as u32) < evo.generations {
        let index = history.generations.len() as u32;
        let genomes = next_generation(
            &history.generations.last().unwrap().population,
            evo,
            &mut stream_rng(master_seed, reproduction_stream(index)),
        );
        let results = evaluate(&genomes);
        let population = score_population(genomes, results, evo, sim)?;
        history.generations.push(GenerationRecord { index, population });
    }
    Ok(history)
}

/// Serial convenience wrapper: evaluate every genome with [`crate::sim::run_trial`]
/// on the given terrain.
pub fn evolve(
    seed: &GaitGenome,
    field: &impl crate::terrain::HeightQuery,
    evo: &EvolutionConfig,
    sim: &SimConfig,
    master_seed: u64,
) -> Result<EvolutionHistory, EvolveError> {
    evolve_with(seed, evo, sim, master_seed, |genomes| {
        genomes
            .iter()
            .map(|g| {
                crate::sim::run_trial(g, field, sim).unwrap_or_else(|_| TrialResult {
                    distance: 0.0,
                    stability_raw: f64::INFINITY,
                    termination: Termination::Diverged,
                    elapsed: 0.0,
                    trace: Vec::new(),
                })
            })
            .collect()
    })
}
