//! The run manifest: a snapshot of everything needed to reproduce a run
//! bit for bit, written into the run directory before the first trial.

use std::hash::Hasher;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use hexevo_core::GaitGenome;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::formats;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Software version the run was produced with.
    pub version: String,
    /// Wall-clock creation time (Unix seconds); informational only.
    pub created_unix: u64,
    /// The resolved seed gait as a genome record, so later analysis never
    /// depends on the original seed file still existing.
    pub seed_genome_record: String,
    /// Files a completed run directory contains.
    pub layout: Vec<String>,
    /// Effective configuration after command-line overrides.
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(config: &RunConfig, seed_genome: &GaitGenome) -> RunManifest {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            seed_genome_record: formats::genome_record(seed_genome),
            layout: vec![
                MANIFEST_FILE.to_string(),
                "seed_eval.tsv".to_string(),
                "gen_NNNN.tsv (one per generation)".to_string(),
                "summary.tsv".to_string(),
                "best.genome.txt".to_string(),
            ],
            config: config.clone(),
        }
    }

    pub fn seed_genome(&self) -> Result<GaitGenome, CliError> {
        formats::parse_genome_record(&self.seed_genome_record, "manifest seed_genome_record")
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| CliError::runtime(format!("cannot serialize manifest: {e}")))?;
        formats::write_atomic(&dir.join(MANIFEST_FILE), &text)
    }

    pub fn read(dir: &Path) -> Result<RunManifest, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::runtime(format!("cannot read {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
    }
}

/// FNV-1a hash of the manifest file bytes; stamped into analysis outputs
/// so every table is traceable to the run that produced it.
pub fn manifest_hash(dir: &Path) -> Result<u64, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = std::fs::read(&path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = fnv::FnvHasher::default();
    hasher.write(&bytes);
    Ok(hasher.finish())
}
