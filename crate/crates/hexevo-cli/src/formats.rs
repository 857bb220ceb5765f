//! Text file formats: genome records, per-generation population files,
//! run summary tables, telemetry traces, and portable course grids.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so a
//! parsed file reproduces the original values bit for bit and repeated
//! runs yield byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hexevo_core::gait::validate_genome;
use hexevo_core::sim::TraceSample;
use hexevo_core::terrain::HeightField;
use hexevo_core::{
    stability_score, EvolutionHistory, GaitGenome, GenerationRecord, Individual, Termination,
    TrialResult,
};

use crate::error::{io_err, CliError};

/// Column names of the genome record: the 18 continuous parameters as
/// (phase, range, shift) per joint — front femur, front tibia, middle
/// femur, middle tibia, rear femur, rear tibia — then the six period
/// multipliers in the same joint order.
pub const GENOME_COLUMNS: [&str; 24] = [
    "front_femur_phase",
    "front_femur_range",
    "front_femur_shift",
    "front_tibia_phase",
    "front_tibia_range",
    "front_tibia_shift",
    "middle_femur_phase",
    "middle_femur_range",
    "middle_femur_shift",
    "middle_tibia_phase",
    "middle_tibia_range",
    "middle_tibia_shift",
    "rear_femur_phase",
    "rear_femur_range",
    "rear_femur_shift",
    "rear_tibia_phase",
    "rear_tibia_range",
    "rear_tibia_shift",
    "front_femur_period",
    "front_tibia_period",
    "middle_femur_period",
    "middle_tibia_period",
    "rear_femur_period",
    "rear_tibia_period",
];

/// Map a record column to its index in the flat gene encoding
/// (pair-major, each joint as period/phase/range/shift).
fn flat_index(column: usize) -> usize {
    if column < 18 {
        let joint = column / 3; // 0..6 over (front f, front t, middle f, ...)
        let param = column % 3; // phase, range, shift
        joint * 4 + 1 + param
    } else {
        (column - 18) * 4
    }
}

fn genome_record_with(genome: &GaitGenome, separator: char) -> String {
    let flat = genome.to_flat();
    let mut out = String::new();
    for column in 0..24 {
        if column > 0 {
            out.push(separator);
        }
        let _ = write!(out, "{}", flat[flat_index(column)]);
    }
    out
}

/// Serialize a genome as one whitespace-separated 24-value record.
pub fn genome_record(genome: &GaitGenome) -> String {
    genome_record_with(genome, ' ')
}

/// Parse a 24-value genome record; `what` names the source in errors.
pub fn parse_genome_record(text: &str, what: &str) -> Result<GaitGenome, CliError> {
    let tokens: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .collect();
    if tokens.len() != 24 {
        return Err(CliError::config(format!(
            "{what}: expected 24 genome values, found {}",
            tokens.len()
        )));
    }
    let mut flat = [0.0_f64; 24];
    for (column, token) in tokens.iter().enumerate() {
        let value: f64 = token.parse().map_err(|_| {
            CliError::config(format!(
                "{what}: column {} ({}) is not a number: {token:?}",
                column + 1,
                GENOME_COLUMNS[column]
            ))
        })?;
        flat[flat_index(column)] = value;
    }
    let genome = GaitGenome::from_flat(&flat);
    validate_genome(&genome)
        .map_err(|e| CliError::config(format!("{what}: {e}")))?;
    Ok(genome)
}

pub fn read_genome(path: &Path) -> Result<GaitGenome, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_genome_record(&text, &path.display().to_string())
}

pub fn write_genome(path: &Path, genome: &GaitGenome) -> Result<(), CliError> {
    let mut text = format!("# columns: {}\n", GENOME_COLUMNS.join(" "));
    text.push_str(&genome_record(genome));
    text.push('\n');
    write_atomic(path, &text)
}

/// Write text to `path` via a temporary file and rename, so a partial file
/// never masquerades as a completed one.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| io_err("cannot write", &tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err("cannot rename into", path, e))
}

pub fn generation_file_name(index: u32) -> String {
    format!("gen_{index:04}.tsv")
}

const GENERATION_EVAL_COLUMNS: &str = "fitness distance stability_raw elapsed termination";

/// Write one generation: a genome record per line followed by the
/// evaluation columns, in population order.
pub fn write_generation(dir: &Path, record: &GenerationRecord) -> Result<(), CliError> {
    let mut text = format!("# generation {}\n", record.index);
    let _ = writeln!(
        text,
        "# columns: {} {}",
        GENOME_COLUMNS.join(" "),
        GENERATION_EVAL_COLUMNS
    );
    for ind in &record.population {
        let r = &ind.result;
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}",
            genome_record_with(&ind.genome, '\t'),
            ind.fitness,
            r.distance,
            r.stability_raw,
            r.elapsed,
            r.termination.name()
        );
    }
    write_atomic(&dir.join(generation_file_name(record.index)), &text)
}

/// Parse a generation file back into scored individuals. Traces are not
/// persisted, so `result.trace` comes back empty.
pub fn read_generation(
    path: &Path,
    index: u32,
    stability_norm: f64,
) -> Result<GenerationRecord, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut population = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let data = line.split('#').next().unwrap_or("").trim();
        if data.is_empty() {
            continue;
        }
        let what = format!("{} line {}", path.display(), lineno + 1);
        let tokens: Vec<&str> = data.split_whitespace().collect();
        if tokens.len() != 29 {
            return Err(CliError::runtime(format!(
                "{what}: expected 29 columns, found {}",
                tokens.len()
            )));
        }
        let genome = parse_genome_record(&tokens[..24].join(" "), &what)?;
        let number = |i: usize, name: &str| -> Result<f64, CliError> {
            tokens[i].parse().map_err(|_| {
                CliError::runtime(format!("{what}: bad {name}: {:?}", tokens[i]))
            })
        };
        let fitness = number(24, "fitness")?;
        let distance = number(25, "distance")?;
        let stability_raw = number(26, "stability_raw")?;
        let elapsed = number(27, "elapsed")?;
        let termination = Termination::from_name(tokens[28]).ok_or_else(|| {
            CliError::runtime(format!("{what}: unknown termination {:?}", tokens[28]))
        })?;
        population.push(Individual {
            genome,
            fitness,
            stability: stability_score(stability_raw, stability_norm),
            result: TrialResult {
                distance,
                stability_raw,
                termination,
                elapsed,
                trace: Vec::new(),
            },
        });
    }
    Ok(GenerationRecord { index, population })
}

/// Generation files present in a run directory, sorted by index.
pub fn list_generation_files(dir: &Path) -> Result<Vec<(u32, PathBuf)>, CliError> {
    let mut found = Vec::new();
    let entries =
        fs::read_dir(dir).map_err(|e| io_err("cannot list", dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| io_err("cannot list", dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_prefix("gen_").and_then(|s| s.strip_suffix(".tsv")) {
            if let Ok(index) = stem.parse::<u32>() {
                found.push((index, entry.path()));
            }
        }
    }
    found.sort_by_key(|(i, _)| *i);
    Ok(found)
}

/// Indices missing from a contiguous 0..=max run of generation files.
pub fn missing_generations(found: &[(u32, PathBuf)]) -> Vec<u32> {
    match found.last() {
        None => Vec::new(),
        Some((max, _)) => {
            let present: std::collections::BTreeSet<u32> =
                found.iter().map(|(i, _)| *i).collect();
            (0..=*max).filter(|i| !present.contains(i)).collect()
        }
    }
}

/// Rewrite the whole summary table: one row per generation with best/mean
/// fitness, the best individual's distance and stability score, and a
/// histogram of termination reasons.
pub fn write_summary(path: &Path, history: &EvolutionHistory) -> Result<(), CliError> {
    let mut text = String::from(
        "generation\tbest_fitness\tmean_fitness\tbest_distance\tbest_stability",
    );
    for t in Termination::ALL {
        let _ = write!(text, "\t{}", snake_case(t.name()));
    }
    text.push('\n');
    for gen in &history.generations {
        let best = gen.best();
        let _ = write!(
            text,
            "{}\t{}\t{}\t{}\t{}",
            gen.index,
            best.fitness,
            gen.mean_fitness(),
            best.result.distance,
            best.stability
        );
        for t in Termination::ALL {
            let count =
                gen.population.iter().filter(|i| i.result.termination == t).count();
            let _ = write!(text, "\t{count}");
        }
        text.push('\n');
    }
    write_atomic(path, &text)
}

fn snake_case(name: &str) -> String {
    let mut out = String::new();
    for (i, ch) in name.chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

/// Export a telemetry trace as tab-separated rows.
pub fn write_trace(path: &Path, trace: &[TraceSample]) -> Result<(), CliError> {
    let mut text = String::from("time\tx\ty\tz\tqw\tqx\tqy\tqz\tended\n");
    for s in trace {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.time,
            s.position.x,
            s.position.y,
            s.position.z,
            s.orientation.w,
            s.orientation.x,
            s.orientation.y,
            s.orientation.z,
            u8::from(s.ended)
        );
    }
    write_atomic(path, &text)
}

/// Write a course as a portable grid: a header (resolution, origin, cell
/// counts, seed) followed by row-major heights, one y-row per line. Wall
/// cells line the two long edges by construction and are re-derived on
/// load.
pub fn write_course(path: &Path, field: &HeightField, seed: Option<u64>) -> Result<(), CliError> {
    let (x0, y0) = field.origin();
    let mut text = String::from("# course grid\n");
    let _ = writeln!(text, "resolution {}", field.resolution());
    let _ = writeln!(text, "origin {} {}", x0, y0);
    let _ = writeln!(text, "dims {} {}", field.nx(), field.ny());
    match seed {
        Some(s) => {
            let _ = writeln!(text, "seed {s}");
        }
        None => {
            let _ = writeln!(text, "seed none");
        }
    }
    for j in 0..field.ny() {
        for i in 0..field.nx() {
            if i > 0 {
                text.push(' ');
            }
            let _ = write!(text, "{}", field.cell(i, j));
        }
        text.push('\n');
    }
    write_atomic(path, &text)
}

pub fn read_course(path: &Path) -> Result<HeightField, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let what = path.display();
    let mut resolution = None;
    let mut origin = None;
    let mut dims = None;
    let mut heights: Vec<f64> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let data = line.split('#').next().unwrap_or("").trim();
        if data.is_empty() {
            continue;
        }
        let bad = |msg: &str| CliError::config(format!("{what} line {}: {msg}", lineno + 1));
        let mut tokens = data.split_whitespace();
        match tokens.next() {
            Some("resolution") => {
                resolution = Some(
                    tokens
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or_else(|| bad("bad resolution"))?,
                );
            }
            Some("origin") => {
                let x = tokens.next().and_then(|t| t.parse::<f64>().ok());
                let y = tokens.next().and_then(|t| t.parse::<f64>().ok());
                origin = Some((
                    x.ok_or_else(|| bad("bad origin"))?,
                    y.ok_or_else(|| bad("bad origin"))?,
                ));
            }
            Some("dims") => {
                let nx = tokens.next().and_then(|t| t.parse::<usize>().ok());
                let ny = tokens.next().and_then(|t| t.parse::<usize>().ok());
                dims = Some((
                    nx.ok_or_else(|| bad("bad dims"))?,
                    ny.ok_or_else(|| bad("bad dims"))?,
                ));
            }
            Some("seed") => {
                // Informational; the grid itself is authoritative.
            }
            Some(first) => {
                if dims.is_none() {
                    return Err(bad("height rows before the dims header"));
                }
                let row = std::iter::once(first).chain(tokens);
                for t in row {
                    heights.push(
                        t.parse::<f64>().map_err(|_| bad("bad height value"))?,
                    );
                }
            }
            None => {}
        }
    }
    let resolution = resolution
        .ok_or_else(|| CliError::config(format!("{what}: missing resolution header")))?;
    let (x0, y0) =
        origin.ok_or_else(|| CliError::config(format!("{what}: missing origin header")))?;
    let (nx, ny) =
        dims.ok_or_else(|| CliError::config(format!("{what}: missing dims header")))?;
    if heights.len() != nx * ny {
        return Err(CliError::config(format!(
            "{what}: expected {} heights ({nx} x {ny}), found {}",
            nx * ny,
            heights.len()
        )));
    }
    let wall = (0..nx * ny).map(|k| k / nx == 0 || k / nx == ny - 1).collect();
    Ok(HeightField::from_parts(resolution, x0, y0, nx, ny, heights, wall))
}
