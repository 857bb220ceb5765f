//! Core library for evolving open-loop hexapod walking gaits.
//!
//! The crate is `no_std`-compatible (with `alloc`) and contains:
//!
//! - [`gait`]: the 24-parameter sinusoidal gait model and its bounds;
//! - [`terrain`]: the procedural obstacle course (steps, beams, incline);
//! - [`sim`]: a kinematic trial simulator scoring distance and stability;
//! - [`evolution`]: the genetic search loop over gait genomes;
//! - [`analysis`]: post-run statistics (gene covariance, gait comparison);
//! - [`math`]: small geometry and statistics helpers;
//! - [`rng`]: seed/stream plumbing that makes every stage replayable.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod evolution;
pub mod gait;
pub mod math;
pub mod rng;
pub mod sim;
pub mod terrain;

pub use analysis::{
    compare_gaits, covariance_with_distance, generation_curves, joint_waveforms, AnalysisError,
    CovarianceReport, GeneComparison, GeneCovariance, GenerationCurvePoint, WaveformSample,
};
pub use evolution::{
    crossover_at, evolve, evolve_with, fitness_from_trial, gaussian_mutate, init_population,
    next_generation, resume_with, score_population, select_parents, two_point_crossover,
    EvolutionConfig, EvolutionHistory, EvolveError, GenerationRecord, Individual, MutationSigma,
};

pub use gait::{GaitConfig, GaitGenome, JointWaveParams, LegId, LegPairParams};
pub use sim::{
    run_trial, stability_score, RobotGeometry, RobotState, SimConfig, Termination, TraceSample,
    TrialResult,
};
pub use terrain::{CourseLayout, HeightField, HeightQuery, TerrainSample};
