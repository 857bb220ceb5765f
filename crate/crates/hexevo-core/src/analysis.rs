//! Post-run analysis: learning curves, gene-distance covariance ranking,
//! side-by-side gait comparison, and joint-command waveform sampling.

use alloc::vec::Vec;

use crate::evolution::EvolutionHistory;
use crate::gait::{
    joint_commands, GaitConfig, GaitGenome, GeneKind, GenomeError, LegJoints, GENE_COUNT,
    GENE_NAMES, PHASE_MAX,
};

/// Why an analysis could not be produced.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    EmptyHistory,
    /// The statistic needs more generations than the history holds.
    InsufficientData { needed: usize, got: usize },
    /// Sampling step or duration is not a positive finite number.
    InvalidSampling,
    InvalidGenome(GenomeError),
}

impl core::fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnalysisError::EmptyHistory => write!(f, "history holds no generations"),
            AnalysisError::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} generations, history holds {got}")
            }
            AnalysisError::InvalidSampling => {
                write!(f, "sampling step and duration must be positive and finite")
            }
            AnalysisError::InvalidGenome(e) => write!(f, "invalid genome: {e}"),
        }
    }
}

/// Per-generation summary row for learning curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationCurvePoint {
    pub generation: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Forward distance of the generation's best individual.
    pub best_distance: f64,
    /// Stability score of the generation's best individual.
    pub best_stability: f64,
}

/// Summarize each generation by its best individual and population mean.
pub fn generation_curves(
    history: &EvolutionHistory,
) -> Result<Vec<GenerationCurvePoint>, AnalysisError> {
    if history.generations.is_empty() {
        return Err(AnalysisError::EmptyHistory);
    }
    Ok(history
        .generations
        .iter()
        .map(|gen| {
            let best = gen.best();
            GenerationCurvePoint {
                generation: gen.index,
                best_fitness: best.fitness,
                mean_fitness: gen.mean_fitness(),
                best_distance: best.result.distance,
                best_stability: best.stability,
            }
        })
        .collect())
}

/// Covariance of one continuous gene with trial distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneCovariance {
    /// Flat-encoding index of the gene.
    pub gene: usize,
    pub name: &'static str,
    pub covariance: f64,
}

/// Continuous genes ranked by how strongly they covary with distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    /// One entry per non-period gene, ordered by |covariance| descending;
    /// ties keep flat gene order.
    pub ranking: Vec<GeneCovariance>,
    /// Number of generations the statistic was computed over.
    pub samples: usize,
}

/// Sample covariance (n-1 divisor) between each continuous gene and trial
/// distance, taken across the best individual of every generation. Period
/// multipliers are categorical and excluded.
pub fn covariance_with_distance(
    history: &EvolutionHistory,
) -> Result<CovarianceReport, AnalysisError> {
    let n = history.generations.len();
    if n < 2 {
        return Err(AnalysisError::InsufficientData { needed: 2, got: n });
    }
    let genomes: Vec<[f64; GENE_COUNT]> =
        history.generations.iter().map(|g| g.best().genome.to_flat()).collect();
    let distances: Vec<f64> =
        history.generations.iter().map(|g| g.best().result.distance).collect();
    let d_mean = distances.iter().sum::<f64>() / n as f64;
    let mut ranking = Vec::new();
    for gene in 0..GENE_COUNT {
        if GeneKind::of(gene) == GeneKind::Period {
            continue;
        }
        let v_mean = genomes.iter().map(|g| g[gene]).sum::<f64>() / n as f64;
        let covariance = genomes
            .iter()
            .zip(&distances)
            .map(|(g, d)| (g[gene] - v_mean) * (d - d_mean))
            .sum::<f64>()
            / (n - 1) as f64;
        ranking.push(GeneCovariance { gene, name: GENE_NAMES[gene], covariance });
    }
    ranking.sort_by(|a, b| {
        b.covariance
            .abs()
            .partial_cmp(&a.covariance.abs())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.gene.cmp(&b.gene))
    });
    Ok(CovarianceReport { ranking, samples: n })
}

/// One row of a side-by-side gait comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneComparison {
    /// Flat-encoding index of the gene.
    pub gene: usize,
    pub name: &'static str,
    pub value_a: f64,
    pub value_b: f64,
    /// Absolute difference; phases compare circularly (the shorter way
    /// around the cycle).
    pub difference: f64,
    /// Difference as a percentage of the gene's legal range.
    pub percent_of_range: f64,
}

/// Compare two gaits gene by gene. Periods are categorical and excluded;
/// the 18 continuous genes are reported in flat order.
pub fn compare_gaits(a: &GaitGenome, b: &GaitGenome) -> Vec<GeneComparison> {
    let fa = a.to_flat();
    let fb = b.to_flat();
    (0..GENE_COUNT)
        .filter(|&i| GeneKind::of(i) != GeneKind::Period)
        .map(|gene| {
            let kind = GeneKind::of(gene);
            let raw = (fa[gene] - fb[gene]).abs();
            let difference =
                if kind == GeneKind::Phase { raw.min(PHASE_MAX - raw) } else { raw };
            GeneComparison {
                gene,
                name: GENE_NAMES[gene],
                value_a: fa[gene],
                value_b: fb[gene],
                difference,
                percent_of_range: 100.0 * difference / kind.range_width(),
            }
        })
        .collect()
}

/// Joint commands for all six legs at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSample {
    pub time: f64,
    pub joints: [LegJoints; 6],
}

/// Sample the commanded joint angles on a regular time grid from zero
/// through `duration` (both endpoints included).
pub fn joint_waveforms(
    genome: &GaitGenome,
    config: &GaitConfig,
    duration: f64,
    dt: f64,
) -> Result<Vec<WaveformSample>, AnalysisError> {
    if !(dt > 0.0) || !dt.is_finite() || !(duration >= 0.0) || !duration.is_finite() {
        return Err(AnalysisError::InvalidSampling);
    }
    let steps = (duration / dt) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let time = k as f64 * dt;
        let joints =
            joint_commands(genome, config, time).map_err(AnalysisError::InvalidGenome)?;
        out.push(WaveformSample { time, joints });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{EvolutionHistory, GenerationRecord, Individual};
    use crate::sim::{Termination, TrialResult};
    use core::f64::consts::TAU;

    fn individual_with(genome: GaitGenome, fitness: f64, distance: f64) -> Individual {
        Individual {
            genome,
            fitness,
            stability: 0.5,
            result: TrialResult {
                distance,
                stability_raw: 0.005,
                termination: Termination::TimeLimit,
                elapsed: 90.0,
                trace: Vec::new(),
            },
        }
    }

    /// History whose generation-k best has gene 1 (front femur phase) at
    /// `0.5 * k` and distance `k`; every other individual is strictly less
    /// fit.
    fn ramp_history(generations: usize) -> EvolutionHistory {
        let mut history = EvolutionHistory::default();
        for k in 0..generations {
            let mut flat = GaitGenome::hand_tuned_seed().to_flat();
            flat[1] = 0.5 * k as f64;
            let best = individual_with(GaitGenome::from_flat(&flat), 10.0 + k as f64, k as f64);
            let filler = individual_with(GaitGenome::hand_tuned_seed(), 1.0, 0.1);
            history.generations.push(GenerationRecord {
                index: k as u32,
                population: alloc::vec![filler, best],
            });
        }
        history
    }

    #[test]
    fn curves_report_best_and_mean_per_generation() {
        let history = ramp_history(3);
        let curves = generation_curves(&history).unwrap();
        assert_eq!(curves.len(), 3);
        assert_eq!(curves[2].generation, 2);
        assert!((curves[2].best_fitness - 12.0).abs() < 1e-12);
        assert!((curves[2].mean_fitness - (1.0 + 12.0) / 2.0).abs() < 1e-12);
        assert!((curves[2].best_distance - 2.0).abs() < 1e-12);
        assert!((curves[2].best_stability - 0.5).abs() < 1e-12);
        assert_eq!(generation_curves(&EvolutionHistory::default()),
            Err(AnalysisError::EmptyHistory));
    }

    #[test]
    fn covariance_matches_a_hand_computation() {
        // Gene 1 takes values 0, 0.5, 1.0, 1.5 while distance runs 0..4;
        // all other genes are constant across bests.
        let history = ramp_history(4);
        let report = covariance_with_distance(&history).unwrap();
        assert_eq!(report.samples, 4);
        assert_eq!(report.ranking.len(), 18);
        // cov = sum (v - 0.75)(d - 1.5) / 3 with v = d / 2.
        let expected = (0.75 * 1.5 + 0.25 * 0.5 + 0.25 * 0.5 + 0.75 * 1.5) / 3.0;
        let top = report.ranking[0];
        assert_eq!(top.gene, 1);
        assert_eq!(top.name, "front femur phase");
        assert!((top.covariance - expected).abs() < 1e-12);
        // Everything else is exactly zero and keeps flat gene order.
        for w in report.ranking[1..].windows(2) {
            assert_eq!(w[0].covariance, 0.0);
            assert!(w[0].gene < w[1].gene);
        }
    }

    #[test]
    fn covariance_needs_two_generations() {
        let history = ramp_history(1);
        assert_eq!(
            covariance_with_distance(&history),
            Err(AnalysisError::InsufficientData { needed: 2, got: 1 })
        );
    }

    #[test]
    fn comparison_reports_continuous_genes_with_circular_phases() {
        let a = GaitGenome::hand_tuned_seed();
        let mut flat = a.to_flat();
        flat[1] = 0.1; // front femur phase
        flat[2] = 0.8; // front femur range
        let a = GaitGenome::from_flat(&flat);
        flat[1] = TAU - 0.1;
        flat[2] = 0.3;
        let b = GaitGenome::from_flat(&flat);
        let rows = compare_gaits(&a, &b);
        assert_eq!(rows.len(), 18);
        assert!(rows.iter().all(|r| GeneKind::of(r.gene) != GeneKind::Period));
        let phase = rows.iter().find(|r| r.gene == 1).unwrap();
        assert!((phase.difference - 0.2).abs() < 1e-12, "wrap the short way around");
        assert!((phase.percent_of_range - 100.0 * 0.2 / TAU).abs() < 1e-9);
        let amp = rows.iter().find(|r| r.gene == 2).unwrap();
        assert!((amp.difference - 0.5).abs() < 1e-12);
        assert!((amp.percent_of_range - 100.0 * 0.5 / 1.7).abs() < 1e-9);
    }

    #[test]
    fn comparison_of_identical_gaits_is_all_zero() {
        let seed = GaitGenome::hand_tuned_seed();
        for row in compare_gaits(&seed, &seed) {
            assert_eq!(row.difference, 0.0);
            assert_eq!(row.percent_of_range, 0.0);
        }
    }

    #[test]
    fn waveforms_sample_the_command_functions() {
        let genome = GaitGenome::hand_tuned_seed();
        let config = GaitConfig::default();
        let rows = joint_waveforms(&genome, &config, 2.0, 0.1).unwrap();
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[0].time, 0.0);
        assert!((rows[20].time - 2.0).abs() < 1e-12);
        let direct = joint_commands(&genome, &config, 0.0).unwrap();
        assert_eq!(rows[0].joints, direct);
    }

    #[test]
    fn waveform_sampling_rejects_bad_steps() {
        let genome = GaitGenome::hand_tuned_seed();
        let config = GaitConfig::default();
        assert!(matches!(
            joint_waveforms(&genome, &config, 2.0, 0.0),
            Err(AnalysisError::InvalidSampling)
        ));
        assert!(matches!(
            joint_waveforms(&genome, &config, -1.0, 0.1),
            Err(AnalysisError::InvalidSampling)
        ));
    }
}
