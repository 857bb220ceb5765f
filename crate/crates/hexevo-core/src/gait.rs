//! Open-loop sinusoidal gait model.
//!
//! Every joint follows `amplitude * cos(period * w0 * t + phase) + shift`.
//! A genome holds femur and tibia wave parameters for the three leg pairs
//! (front, middle, rear); the right side replays the left side half a base
//! period later, and the coxa joints run a fixed alternating-tripod schedule.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use crate::math::scalar;

/// Inclusive amplitude bound in radians (servo travel limit).
pub const AMPLITUDE_MAX: f64 = 1.7;
/// Inclusive vertical shift bounds in radians.
pub const SHIFT_MIN: f64 = -1.0;
pub const SHIFT_MAX: f64 = 1.0;
/// Phases live on [0, 2*pi].
pub const PHASE_MAX: f64 = TAU;
/// Number of genes in the flat encoding.
pub const GENE_COUNT: usize = 24;

/// Base angular frequency and coxa swing shared by every gait.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaitConfig {
    /// Base clock in rad/s; the default completes one gait cycle in 2 s.
    pub omega0: f64,
    /// Fixed fore/aft coxa swing amplitude in radians.
    pub coxa_amplitude: f64,
}

impl Default for GaitConfig {
    fn default() -> Self {
        GaitConfig { omega0: TAU / 2.0, coxa_amplitude: 0.7 }
    }
}

/// One joint's sinusoid: `amplitude * cos(period * w0 * t + phase) + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointWaveParams {
    /// Frequency multiplier, restricted to 1 or 2.
    pub period: u8,
    /// Phase offset in radians, in [0, 2*pi].
    pub phase: f64,
    /// Amplitude ("range") in radians, in [0, 1.7].
    pub amplitude: f64,
    /// Vertical shift in radians, in [-1, 1].
    pub shift: f64,
}

/// Femur and tibia waves for one left/right leg pair.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LegPairParams {
    pub femur: JointWaveParams,
    pub tibia: JointWaveParams,
}

/// The 24-parameter gait genome (3 pairs x 2 joints x 4 parameters).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaitGenome {
    pub front: LegPairParams,
    pub middle: LegPairParams,
    pub rear: LegPairParams,
}

/// Leg identifiers; indices match telemetry and joint-command order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegId {
    FrontLeft = 0,
    MiddleLeft = 1,
    RearLeft = 2,
    FrontRight = 3,
    MiddleRight = 4,
    RearRight = 5,
}

impl LegId {
    pub const ALL: [LegId; 6] = [
        LegId::FrontLeft,
        LegId::MiddleLeft,
        LegId::RearLeft,
        LegId::FrontRight,
        LegId::MiddleRight,
        LegId::RearRight,
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub const fn is_right_side(self) -> bool {
        (self as usize) >= 3
    }

    /// Tripod A is front+rear left plus middle right; tripod B is the rest.
    #[inline]
    pub const fn in_tripod_a(self) -> bool {
        matches!(self, LegId::FrontLeft | LegId::RearLeft | LegId::MiddleRight)
    }
}

/// Commanded joint angles for one leg, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LegJoints {
    pub coxa: f64,
    pub femur: f64,
    pub tibia: f64,
}

/// The trajectory primitive: `amplitude * cos(period * w0 * t + phase) + shift`.
#[inline]
pub fn gamma(
    amplitude: f64,
    period: u8,
    omega0: f64,
    time: f64,
    phase: f64,
    shift: f64,
) -> f64 {
    amplitude * scalar::cos(period as f64 * omega0 * time + phase) + shift
}

/// Coxa angle for `leg` at `time`; positive swings the leg forward.
///
/// Tripod A runs on the base clock, tripod B half a base period behind.
pub fn coxa_angle(config: &GaitConfig, time: f64, leg: LegId) -> f64 {
    let tripod_phase = if leg.in_tripod_a() { 0.0 } else { PI };
    config.coxa_amplitude * scalar::cos(config.omega0 * time + tripod_phase)
}

/// Which parameter slot a flat-encoding index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneKind {
    Period,
    Phase,
    Amplitude,
    Shift,
}

impl GeneKind {
    pub const fn of(index: usize) -> GeneKind {
        match index % 4 {
            0 => GeneKind::Period,
            1 => GeneKind::Phase,
            2 => GeneKind::Amplitude,
            _ => GeneKind::Shift,
        }
    }

    /// Width of the legal interval, used for mutation scale and gait diffs.
    pub const fn range_width(self) -> f64 {
        match self {
            GeneKind::Period => 1.0,
            GeneKind::Phase => TAU,
            GeneKind::Amplitude => AMPLITUDE_MAX,
            GeneKind::Shift => SHIFT_MAX - SHIFT_MIN,
        }
    }
}

/// Human-readable gene names in flat-encoding order.
pub const GENE_NAMES: [&str; GENE_COUNT] = [
    "front femur period",
    "front femur phase",
    "front femur range",
    "front femur shift",
    "front tibia period",
    "front tibia phase",
    "front tibia range",
    "front tibia shift",
    "middle femur period",
    "middle femur phase",
    "middle femur range",
    "middle femur shift",
    "middle tibia period",
    "middle tibia phase",
    "middle tibia range",
    "middle tibia shift",
    "rear femur period",
    "rear femur phase",
    "rear femur range",
    "rear femur shift",
    "rear tibia period",
    "rear tibia phase",
    "rear tibia range",
    "rear tibia shift",
];

/// One out-of-bounds genome parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsViolation {
    pub gene: usize,
    pub name: &'static str,
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

impl fmt::Display for BoundsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} outside [{}, {}]",
            self.name, self.value, self.min, self.max
        )
    }
}

/// Validation failure listing every offending parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GenomeError {
    pub violations: Vec<BoundsViolation>,
}

impl fmt::Display for GenomeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid gait genome:")?;
        for v in &self.violations {
            write!(f, " [{v}]")?;
        }
        Ok(())
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GenomeError {}

impl GaitGenome {
    /// Flatten to the canonical 24-gene order: for each pair (front, middle,
    /// rear), femur period/phase/range/shift then tibia period/phase/range/
    /// shift. Periods are carried as 1.0 or 2.0.
    pub fn to_flat(&self) -> [f64; GENE_COUNT] {
        let mut out = [0.0; GENE_COUNT];
        for (p, pair) in [self.front, self.middle, self.rear].iter().enumerate() {
            for (j, wave) in [pair.femur, pair.tibia].iter().enumerate() {
                let base = p * 8 + j * 4;
                out[base] = wave.period as f64;
                out[base + 1] = wave.phase;
                out[base + 2] = wave.amplitude;
                out[base + 3] = wave.shift;
            }
        }
        out
    }

    /// Rebuild from the flat encoding. Values are taken as-is; call
    /// [`validate_genome`] to check bounds.
    pub fn from_flat(flat: &[f64; GENE_COUNT]) -> GaitGenome {
        let wave = |base: usize| JointWaveParams {
            period: flat[base] as u8,
            phase: flat[base + 1],
            amplitude: flat[base + 2],
            shift: flat[base + 3],
        };
        let pair = |base: usize| LegPairParams { femur: wave(base), tibia: wave(base + 4) };
        GaitGenome { front: pair(0), middle: pair(8), rear: pair(16) }
    }

    /// Wave parameters for the pair a leg belongs to.
    pub fn pair_for(&self, leg: LegId) -> &LegPairParams {
        match leg {
            LegId::FrontLeft | LegId::FrontRight => &self.front,
            LegId::MiddleLeft | LegId::MiddleRight => &self.middle,
            LegId::RearLeft | LegId::RearRight => &self.rear,
        }
    }

    /// Hand-tuned alternating-tripod walking gait used as the default
    /// evolution seed: femur swing 0.8, tibia swing 0.4 (positive commands
    /// raise the joint), timed against the coxa schedule so each tripod's
    /// feet press the ground through its backward coxa sweep. The wave
    /// shifts hold the mean posture low enough that at tripod crossover
    /// all six feet touch down together.
    pub fn hand_tuned_seed() -> GaitGenome {
        let pair = |phase: f64| LegPairParams {
            femur: JointWaveParams { period: 1, phase, amplitude: 0.8, shift: 0.0 },
            tibia: JointWaveParams { period: 1, phase, amplitude: 0.4, shift: -0.5 },
        };
        // Front and rear pairs reach their lowest point mid-stance of the
        // base clock; the middle pair belongs to the opposite tripod and
        // presses half a period later.
        GaitGenome {
            front: pair(PI / 2.0),
            middle: pair(3.0 * PI / 2.0),
            rear: pair(PI / 2.0),
        }
    }
}

/// Check every parameter against its bounds; collects all violations.
pub fn validate_genome(genome: &GaitGenome) -> Result<(), GenomeError> {
    let flat = genome.to_flat();
    let mut violations = Vec::new();
    for (i, &v) in flat.iter().enumerate() {
        let (min, max) = match GeneKind::of(i) {
            GeneKind::Period => (1.0, 2.0),
            GeneKind::Phase => (0.0, PHASE_MAX),
            GeneKind::Amplitude => (0.0, AMPLITUDE_MAX),
            GeneKind::Shift => (SHIFT_MIN, SHIFT_MAX),
        };
        let ok = if GeneKind::of(i) == GeneKind::Period {
            v == 1.0 || v == 2.0
        } else {
            v >= min && v <= max
        };
        if !ok {
            violations.push(BoundsViolation { gene: i, name: GENE_NAMES[i], value: v, min, max });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(GenomeError { violations })
    }
}

/// Joint commands for all six legs at `time`.
///
/// Left legs evaluate their pair's waves on the base clock; right legs
/// evaluate them half a base period later (phase plus `period * pi`), which
/// mirrors the gait. Errors if the genome is out of bounds.
pub fn joint_commands(
    genome: &GaitGenome,
    config: &GaitConfig,
    time: f64,
) -> Result<[LegJoints; 6], GenomeError> {
    validate_genome(genome)?;
    Ok(joint_commands_unchecked(genome, config, time))
}

/// As [`joint_commands`] but skips bounds validation; used on the hot path
/// once a genome has been validated at trial start.
pub fn joint_commands_unchecked(
    genome: &GaitGenome,
    config: &GaitConfig,
    time: f64,
) -> [LegJoints; 6] {
    let mut out = [LegJoints::default(); 6];
    for leg in LegId::ALL {
        let pair = genome.pair_for(leg);
        let mirror = |w: &JointWaveParams| {
            let phase = if leg.is_right_side() { w.phase + w.period as f64 * PI } else { w.phase };
            gamma(w.amplitude, w.period, config.omega0, time, phase, w.shift)
        };
        out[leg.index()] = LegJoints {
            coxa: coxa_angle(config, time, leg),
            femur: mirror(&pair.femur),
            tibia: mirror(&pair.tibia),
        };
    }
    out
}

/// Summarize a violation list for error messages naming each field.
pub fn describe_violations(err: &GenomeError) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, v) in err.violations.iter().enumerate() {
        if i > 0 {
            let _ = write!(s, "; ");
        }
        let _ = write!(s, "{v}");
    }
    s
}
