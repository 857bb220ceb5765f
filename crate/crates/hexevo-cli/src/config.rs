//! Declarative run configuration: a sectioned TOML file covering every
//! tunable of a run, with built-in defaults at desk scale.
//!
//! Angles that humans edit (termination limits) are written in degrees and
//! converted to radians at the core boundary; everything else uses SI units
//! directly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hexevo_core::terrain::{build_course, CourseLayout, HeightField};
use hexevo_core::rng::{stream_rng, STREAM_TERRAIN};
use hexevo_core::{EvolutionConfig, GaitConfig, GaitGenome, MutationSigma, SimConfig};

use crate::error::CliError;
use crate::formats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub gait: GaitSection,
    pub sim: SimSection,
    pub terrain: TerrainSection,
    pub evolution: EvolutionSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run: RunSection::default(),
            gait: GaitSection::default(),
            sim: SimSection::default(),
            terrain: TerrainSection::default(),
            evolution: EvolutionSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Seed for the evolutionary search (initial population and breeding).
    pub master_seed: u64,
    /// Worker threads for trial evaluation; 0 means all hardware threads.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { master_seed: 42, workers: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSection {
    /// Base gait clock, rad/s.
    pub omega0: f64,
    /// Fore/aft coxa swing amplitude, radians.
    pub coxa_amplitude: f64,
}

impl Default for GaitSection {
    fn default() -> Self {
        let d = GaitConfig::default();
        GaitSection { omega0: d.omega0, coxa_amplitude: d.coxa_amplitude }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub trial_duration: f64,
    pub course_length: f64,
    pub roll_limit_deg: f64,
    pub pitch_limit_deg: f64,
    pub yaw_limit_deg: f64,
    /// Meters of backward displacement that abort a trial.
    pub reverse_limit: f64,
    pub contact_tolerance: f64,
    pub release_tolerance: f64,
    pub settle_rate: f64,
    pub tip_rate: f64,
    pub stability_norm: f64,
    /// Telemetry sampling stride in steps; 0 disables tracing.
    pub trace_stride: u32,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSection {
            dt: d.dt,
            trial_duration: d.trial_duration,
            course_length: d.course_length,
            roll_limit_deg: d.roll_limit.to_degrees(),
            pitch_limit_deg: d.pitch_limit.to_degrees(),
            yaw_limit_deg: d.yaw_limit.to_degrees(),
            reverse_limit: d.reverse_limit,
            contact_tolerance: d.contact_tolerance,
            release_tolerance: d.release_tolerance,
            settle_rate: d.settle_rate,
            tip_rate: d.tip_rate,
            stability_norm: d.stability_norm,
            trace_stride: d.trace_stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerrainSection {
    /// Seed for course generation, independent of the evolution seed.
    pub seed: u64,
    /// Replace the course with a flat field of the same footprint.
    pub flat: bool,
    /// Load the course from a grid file instead of generating it
    /// (relative paths resolve against the config file's directory).
    pub course_file: Option<String>,
    /// Layout overrides; unset fields keep the standard course values.
    pub steps1_end: Option<f64>,
    pub beam1: Option<f64>,
    pub steps2_start: Option<f64>,
    pub steps2_end: Option<f64>,
    pub beam2a: Option<f64>,
    pub beam2b: Option<f64>,
    pub incline_start: Option<f64>,
    pub incline_grade: Option<f64>,
    pub step_block: Option<f64>,
    pub step_height_max: Option<f64>,
}

impl Default for TerrainSection {
    fn default() -> Self {
        TerrainSection {
            seed: 7,
            flat: false,
            course_file: None,
            steps1_end: None,
            beam1: None,
            steps2_start: None,
            steps2_end: None,
            beam2a: None,
            beam2b: None,
            incline_start: None,
            incline_grade: None,
            step_block: None,
            step_height_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub population_size: usize,
    pub generations: u32,
    pub mutate_vs_crossover: f64,
    pub mutation_prob: f64,
    pub sigma_amplitude: f64,
    pub sigma_phase: f64,
    pub sigma_shift: f64,
    pub distance_weight: f64,
    pub stability_weight: f64,
    /// Path to the seed gait genome file; built-in seed when unset
    /// (relative paths resolve against the config file's directory).
    pub seed_genome: Option<String>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let sigma = MutationSigma::default();
        // Desk-scale defaults: small enough to run in seconds.
        EvolutionSection {
            population_size: 20,
            generations: 10,
            mutate_vs_crossover: 0.5,
            mutation_prob: 0.4,
            sigma_amplitude: sigma.amplitude,
            sigma_phase: sigma.phase,
            sigma_shift: sigma.shift,
            distance_weight: 0.95,
            stability_weight: 0.05,
            seed_genome: None,
        }
    }
}

impl RunConfig {
    /// Parse a config file; parse errors carry the TOML position and field.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn gait_config(&self) -> GaitConfig {
        GaitConfig { omega0: self.gait.omega0, coxa_amplitude: self.gait.coxa_amplitude }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.sim.dt,
            trial_duration: self.sim.trial_duration,
            gait: self.gait_config(),
            course_length: self.sim.course_length,
            roll_limit: self.sim.roll_limit_deg.to_radians(),
            pitch_limit: self.sim.pitch_limit_deg.to_radians(),
            yaw_limit: self.sim.yaw_limit_deg.to_radians(),
            reverse_limit: self.sim.reverse_limit,
            contact_tolerance: self.sim.contact_tolerance,
            release_tolerance: self.sim.release_tolerance,
            settle_rate: self.sim.settle_rate,
            tip_rate: self.sim.tip_rate,
            stability_norm: self.sim.stability_norm,
            trace_stride: self.sim.trace_stride,
            ..SimConfig::default()
        }
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.evolution.population_size,
            generations: self.evolution.generations,
            mutate_vs_crossover: self.evolution.mutate_vs_crossover,
            mutation_prob: self.evolution.mutation_prob,
            sigma: MutationSigma {
                amplitude: self.evolution.sigma_amplitude,
                phase: self.evolution.sigma_phase,
                shift: self.evolution.sigma_shift,
            },
            distance_weight: self.evolution.distance_weight,
            stability_weight: self.evolution.stability_weight,
        }
    }

    /// Course layout with overrides applied; `flat = true` wins over all
    /// other overrides.
    pub fn course_layout(&self) -> CourseLayout {
        if self.terrain.flat {
            return CourseLayout::flat();
        }
        let mut layout = CourseLayout::standard();
        let t = &self.terrain;
        if let Some(v) = t.steps1_end {
            layout.steps1.1 = v;
        }
        if let Some(v) = t.beam1 {
            layout.beam1 = v;
        }
        if let Some(v) = t.steps2_start {
            layout.steps2.0 = v;
        }
        if let Some(v) = t.steps2_end {
            layout.steps2.1 = v;
        }
        if let Some(v) = t.beam2a {
            layout.beam2a = v;
        }
        if let Some(v) = t.beam2b {
            layout.beam2b = v;
        }
        if let Some(v) = t.incline_start {
            layout.incline_start = v;
        }
        if let Some(v) = t.incline_grade {
            layout.incline_grade = v;
        }
        if let Some(v) = t.step_block {
            layout.step_block = v;
        }
        if let Some(v) = t.step_height_max {
            layout.step_height_max = v;
        }
        layout
    }

    /// Build or load the course. `base_dir` anchors relative file paths
    /// (normally the config file's directory).
    pub fn load_field(&self, base_dir: Option<&Path>) -> Result<HeightField, CliError> {
        if let Some(file) = &self.terrain.course_file {
            let path = resolve(base_dir, file);
            return formats::read_course(&path);
        }
        let layout = self.course_layout();
        layout
            .validate()
            .map_err(|e| CliError::config(format!("terrain layout: {e}")))?;
        Ok(build_course(&layout, &mut stream_rng(self.terrain.seed, STREAM_TERRAIN)))
    }

    /// The seed gait: loaded from the configured genome file, or the
    /// built-in hand-tuned gait when none is set.
    pub fn seed_genome(&self, base_dir: Option<&Path>) -> Result<GaitGenome, CliError> {
        match &self.evolution.seed_genome {
            None => Ok(GaitGenome::hand_tuned_seed()),
            Some(file) => {
                let path = resolve(base_dir, file);
                formats::read_genome(&path)
            }
        }
    }

    /// Check every section; returns the first offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        self.sim_config()
            .validate()
            .map_err(|e| CliError::config(format!("sim: {}", e.message())))?;
        self.evolution_config()
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        if self.run.workers > 512 {
            return Err(CliError::config("run.workers: more than 512 threads"));
        }
        if self.terrain.course_file.is_none() {
            self.course_layout()
                .validate()
                .map_err(|e| CliError::config(format!("terrain layout: {e}")))?;
        }
        Ok(())
    }
}

fn resolve(base_dir: Option<&Path>, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.unwrap_or(Path::new(".")).join(p)
    }
}
