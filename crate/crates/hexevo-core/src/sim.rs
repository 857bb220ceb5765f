//! Quasi-kinematic trial simulator.
//!
//! A full rigid-body physics engine is out of scope; instead each step:
//!
//! 1. commands the 18 joints for the new time and computes candidate foot
//!    positions under the current body pose;
//! 2. updates the set of grounded ("anchored") feet — a free foot anchors
//!    when it reaches the terrain, an anchored foot releases once it is
//!    commanded clearly above its ground (hysteresis keeps stance feet from
//!    chattering);
//! 3. solves the planar (x, y, yaw) rigid motion that best keeps anchored
//!    feet at their ground points while the joints move, scales it down when
//!    walking up a grade (slip), and blocks translation into terrain faces
//!    taller than the belly;
//! 4. settles the body vertically so the lowest anchored foot just touches
//!    its ground and the belly never tunnels into terrain;
//! 5. relaxes pitch/roll toward the support plane of the anchored feet (or
//!    tips the body when the center of mass leaves the support polygon);
//! 6. renormalizes the orientation quaternion, keeping hemisphere
//!    continuity so the stability metric sees smooth w values.
//!
//! The model is deterministic, fast enough for thousands of trials per
//! minute, and preserves what the fitness function measures: terrain-
//! dependent progress, obstacle blocking, and pitch/roll excursions.

use alloc::vec::Vec;

use crate::gait::{
    joint_commands_unchecked, validate_genome, GaitConfig, GaitGenome, GenomeError, LegId,
    LegJoints,
};
use crate::math::{
    planar_rigid_fit, scalar, support_plane, support_query, Quat, SupportQuery, Vec3,
};
use crate::terrain::HeightQuery;

/// Fixed body and leg dimensions of the simulated hexapod.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobotGeometry {
    /// Thorax extent along the walking axis, meters.
    pub thorax_length: f64,
    /// Thorax extent across the walking axis, meters.
    pub thorax_width: f64,
    /// Thorax extent vertically, meters.
    pub thorax_height: f64,
    /// Body mass in kilograms (the surrogate treats the thorax as the
    /// only mass; legs are massless).
    pub mass: f64,
    pub coxa_len: f64,
    pub femur_len: f64,
    pub tibia_len: f64,
    /// Belly height above ground in the neutral stance, meters.
    pub ground_clearance: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        RobotGeometry {
            thorax_length: 0.20,
            thorax_width: 0.09,
            thorax_height: 0.05,
            mass: 2.5,
            coxa_len: 0.05,
            femur_len: 0.08,
            tibia_len: 0.11,
            ground_clearance: 0.05,
        }
    }
}

impl RobotGeometry {
    /// Total leg length when fully extended.
    pub fn leg_reach(&self) -> f64 {
        self.coxa_len + self.femur_len + self.tibia_len
    }

    /// Sanity-check dimensions: positive segments summing to the stated
    /// reach of 0.24 m, positive thorax extents.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = self.coxa_len > 0.0
            && self.femur_len > 0.0
            && self.tibia_len > 0.0
            && self.thorax_length > 0.0
            && self.thorax_width > 0.0
            && self.thorax_height > 0.0
            && self.mass > 0.0;
        if !positive {
            return Err(GeometryError::NonPositiveDimension);
        }
        if (self.leg_reach() - 0.24).abs() > 1e-9 {
            return Err(GeometryError::LegReachMismatch);
        }
        Ok(())
    }

    /// Hip socket position in the body frame (x forward, y left, z up,
    /// origin at the thorax center).
    pub fn hip_offset(&self, leg: LegId) -> Vec3 {
        let half_l = self.thorax_length / 2.0;
        let half_w = self.thorax_width / 2.0;
        let x = match leg {
            LegId::FrontLeft | LegId::FrontRight => half_l,
            LegId::MiddleLeft | LegId::MiddleRight => 0.0,
            LegId::RearLeft | LegId::RearRight => -half_l,
        };
        let y = if leg.is_right_side() { -half_w } else { half_w };
        Vec3::new(x, y, 0.0)
    }

    /// Coxa mounting angle from the +x body axis: front legs point 45
    /// degrees outward, middle 90, rear 135; right side mirrored negative.
    pub fn mount_angle(&self, leg: LegId) -> f64 {
        use core::f64::consts::FRAC_PI_4;
        let magnitude = match leg {
            LegId::FrontLeft | LegId::FrontRight => FRAC_PI_4,
            LegId::MiddleLeft | LegId::MiddleRight => 2.0 * FRAC_PI_4,
            LegId::RearLeft | LegId::RearRight => 3.0 * FRAC_PI_4,
        };
        if leg.is_right_side() {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Sign applied to the coxa command so that positive always swings the
    /// foot toward the front of the body on both sides.
    pub fn coxa_sign(&self, leg: LegId) -> f64 {
        if leg.is_right_side() {
            1.0
        } else {
            -1.0
        }
    }

    /// Forward kinematics for one foot in the body frame. All joints zero
    /// lays the leg fully extended and horizontal along its mount
    /// direction; positive femur/tibia commands raise the segments.
    pub fn foot_body_offset(&self, leg: LegId, joints: &LegJoints) -> Vec3 {
        let polar = self.mount_angle(leg) + self.coxa_sign(leg) * joints.coxa;
        let femur_angle = joints.femur;
        let tibia_angle = joints.femur + joints.tibia;
        let radial = self.coxa_len
            + self.femur_len * scalar::cos(femur_angle)
            + self.tibia_len * scalar::cos(tibia_angle);
        let rise =
            self.femur_len * scalar::sin(femur_angle) + self.tibia_len * scalar::sin(tibia_angle);
        let hip = self.hip_offset(leg);
        Vec3::new(
            hip.x + scalar::cos(polar) * radial,
            hip.y + scalar::sin(polar) * radial,
            hip.z + rise,
        )
    }

    /// Joint angles of the neutral stance: femur horizontal, tibia angled
    /// down so the belly sits at the nominal ground clearance.
    pub fn neutral_stance_joints(&self) -> LegJoints {
        let drop = self.ground_clearance + self.thorax_height / 2.0;
        LegJoints { coxa: 0.0, femur: 0.0, tibia: -scalar::asin(drop / self.tibia_len) }
    }
}

/// Invalid robot geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    NonPositiveDimension,
    LegReachMismatch,
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            GeometryError::NonPositiveDimension => "robot dimensions must be positive",
            GeometryError::LegReachMismatch => "leg segments must sum to the 0.24 m reach",
        };
        f.write_str(msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeometryError {}

/// Why a trial ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    /// Ran the full trial duration.
    TimeLimit,
    /// Reached the far end of the course.
    CourseComplete,
    /// Roll exceeded the limit (body falling sideways).
    Rollover,
    /// Pitch exceeded the limit (body falling end over end).
    PitchOver,
    /// Yaw exceeded the limit (turned away from the course).
    YawOut,
    /// Walked backward past the reverse limit.
    Reverse,
    /// Simulation state became non-finite; scored as a failed trial.
    Diverged,
}

impl Termination {
    pub const ALL: [Termination; 7] = [
        Termination::TimeLimit,
        Termination::CourseComplete,
        Termination::Rollover,
        Termination::PitchOver,
        Termination::YawOut,
        Termination::Reverse,
        Termination::Diverged,
    ];

    /// Stable name used in result files.
    pub fn name(self) -> &'static str {
        match self {
            Termination::TimeLimit => "TimeLimit",
            Termination::CourseComplete => "CourseComplete",
            Termination::Rollover => "Rollover",
            Termination::PitchOver => "PitchOver",
            Termination::YawOut => "YawOut",
            Termination::Reverse => "Reverse",
            Termination::Diverged => "Diverged",
        }
    }

    /// Inverse of [`Termination::name`].
    pub fn from_name(name: &str) -> Option<Termination> {
        Termination::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl core::fmt::Display for Termination {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Simulation parameters; defaults give the standard 90 s trial.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Step size in seconds (50 Hz default, a typical servo command rate).
    pub dt: f64,
    /// Trial length in seconds.
    pub trial_duration: f64,
    pub gait: GaitConfig,
    pub geometry: RobotGeometry,
    /// Forward displacement that completes the course, meters.
    pub course_length: f64,
    /// Trial aborts when |roll| exceeds this, radians (45 degrees).
    pub roll_limit: f64,
    /// Trial aborts when |pitch| exceeds this, radians (70 degrees).
    pub pitch_limit: f64,
    /// Trial aborts when |yaw| exceeds this, radians (90 degrees).
    pub yaw_limit: f64,
    /// Trial aborts when displacement drops below minus this, meters.
    pub reverse_limit: f64,
    /// A free foot this close above terrain counts as touching, meters.
    pub contact_tolerance: f64,
    /// An anchored foot releases once commanded this far above its ground,
    /// meters. Larger than `contact_tolerance` so stance feet do not
    /// chatter while the body settles between steps.
    pub release_tolerance: f64,
    /// First-order relaxation rate of pitch/roll toward the support
    /// attitude, per step.
    pub settle_rate: f64,
    /// Tipping rate applied (before relaxation) when the center of mass
    /// leaves the support polygon, radians per step.
    pub tip_rate: f64,
    /// Normalization constant for the stability score: a mean per-step |Δw|
    /// of this much scores zero.
    pub stability_norm: f64,
    /// Record every Nth step into the telemetry trace; 0 disables tracing.
    pub trace_stride: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.02,
            trial_duration: 90.0,
            gait: GaitConfig::default(),
            geometry: RobotGeometry::default(),
            course_length: 8.2,
            roll_limit: 45f64.to_radians(),
            pitch_limit: 70f64.to_radians(),
            yaw_limit: 90f64.to_radians(),
            reverse_limit: 0.2,
            contact_tolerance: 0.004,
            release_tolerance: 0.025,
            settle_rate: 0.3,
            tip_rate: 0.12,
            stability_norm: 0.01,
            trace_stride: 10,
        }
    }
}

impl SimConfig {
    /// Check parameters are usable.
    pub fn validate(&self) -> Result<(), SimConfigError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimConfigError::BadField("dt must be positive"));
        }
        if !(self.trial_duration > 0.0) || !self.trial_duration.is_finite() {
            return Err(SimConfigError::BadField("trial_duration must be positive"));
        }
        if !(self.gait.omega0 > 0.0) {
            return Err(SimConfigError::BadField("omega0 must be positive"));
        }
        if self.gait.coxa_amplitude < 0.0 {
            return Err(SimConfigError::BadField("coxa_amplitude must be nonnegative"));
        }
        if !(self.course_length > 0.0) {
            return Err(SimConfigError::BadField("course_length must be positive"));
        }
        let limits_ok = self.roll_limit > 0.0
            && self.pitch_limit > 0.0
            && self.yaw_limit > 0.0
            && self.reverse_limit > 0.0;
        if !limits_ok {
            return Err(SimConfigError::BadField("termination limits must be positive"));
        }
        if !(self.contact_tolerance > 0.0) || !(self.release_tolerance >= self.contact_tolerance) {
            return Err(SimConfigError::BadField(
                "release_tolerance must be at least contact_tolerance, both positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.settle_rate) {
            return Err(SimConfigError::BadField("settle_rate must lie in [0, 1]"));
        }
        if self.tip_rate < 0.0 {
            return Err(SimConfigError::BadField("tip_rate must be nonnegative"));
        }
        if !(self.stability_norm > 0.0) {
            return Err(SimConfigError::BadField("stability_norm must be positive"));
        }
        self.geometry.validate().map_err(|_| SimConfigError::BadField("invalid robot geometry"))
    }
}

/// Invalid simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfigError {
    field: &'static str,
}

impl SimConfigError {
    #[allow(non_snake_case)]
    fn BadField(field: &'static str) -> SimConfigError {
        SimConfigError { field }
    }

    pub fn message(&self) -> &'static str {
        self.field
    }
}

impl core::fmt::Display for SimConfigError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid simulation config: {}", self.field)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SimConfigError {}

/// Full simulation state between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    /// Body center in world coordinates.
    pub position: Vec3,
    /// Body orientation (unit quaternion).
    pub orientation: Quat,
    /// Commanded joint angles for all six legs.
    pub joints: [LegJoints; 6],
    /// Simulation clock in seconds.
    pub time: f64,
    /// Ground point each foot currently pushes against, if grounded.
    pub anchors: [Option<Vec3>; 6],
}

impl RobotState {
    /// Number of grounded feet.
    pub fn contact_count(&self) -> usize {
        self.anchors.iter().filter(|a| a.is_some()).count()
    }

    /// Initial pose at the start line: level body dropped onto the terrain
    /// under the genome's t = 0 joint commands, touching feet anchored.
    pub fn initial(genome: &GaitGenome, field: &impl HeightQuery, config: &SimConfig) -> Self {
        let geometry = &config.geometry;
        let joints = joint_commands_unchecked(genome, &config.gait, 0.0);
        let offsets: [Vec3; 6] =
            core::array::from_fn(|i| geometry.foot_body_offset(LegId::ALL[i], &joints[i]));

        // Drop a level body at (0, 0) until a foot or the belly touches.
        let mut z = f64::NEG_INFINITY;
        for (i, o) in offsets.iter().enumerate() {
            if !field.is_wall(o.x, o.y) {
                z = z.max(field.height_at(o.x, o.y) - o.z);
            }
            let _ = i;
        }
        z = z.max(field.height_at(0.0, 0.0) + geometry.thorax_height / 2.0);

        let mut anchors = [None; 6];
        for (i, o) in offsets.iter().enumerate() {
            let h = field.height_at(o.x, o.y);
            if !field.is_wall(o.x, o.y) && z + o.z <= h + config.contact_tolerance {
                anchors[i] = Some(Vec3::new(o.x, o.y, h));
            }
        }

        RobotState {
            position: Vec3::new(0.0, 0.0, z),
            orientation: Quat::IDENTITY,
            joints,
            time: 0.0,
            anchors,
        }
    }

    fn is_finite(&self) -> bool {
        self.position.is_finite() && self.orientation.is_finite()
    }
}

/// One telemetry row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub position: Vec3,
    pub orientation: Quat,
    /// Set on the final sample of a trial.
    pub ended: bool,
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Maximum forward displacement reached, capped at the course length.
    pub distance: f64,
    /// Mean per-step |Δw| of the orientation quaternion.
    pub stability_raw: f64,
    pub termination: Termination,
    /// Simulated seconds until termination.
    pub elapsed: f64,
    /// Sampled pose telemetry (empty when tracing is disabled).
    pub trace: Vec<TraceSample>,
}

/// Map the raw orientation-change metric to a [0, 1] stability score:
/// perfectly rigid orientation scores 1, a mean |Δw| of `norm` or worse
/// scores 0, linear in between.
pub fn stability_score(stability_raw: f64, norm: f64) -> f64 {
    (1.0 - stability_raw / norm).max(0.0)
}

/// World-frame foot positions for a state.
pub fn foot_positions(state: &RobotState, geometry: &RobotGeometry) -> [Vec3; 6] {
    core::array::from_fn(|i| {
        let offset = geometry.foot_body_offset(LegId::ALL[i], &state.joints[i]);
        state.position.add(state.orientation.rotate(offset))
    })
}

/// How far ahead terrain grade is probed when scaling slip, meters.
const GRADE_LOOKAHEAD: f64 = 0.2;
/// Extra probe distance past the commanded translation for face blocking.
const FACE_PROBE_MARGIN: f64 = 0.02;
/// A face may exceed the belly by this much before it blocks, meters.
const FACE_CLIMB_TOLERANCE: f64 = 0.005;

/// Advance the simulation by one step. Pure: identical inputs give
/// bit-identical outputs. The genome must already be validated.
pub fn step(
    state: &RobotState,
    genome: &GaitGenome,
    field: &impl HeightQuery,
    config: &SimConfig,
) -> RobotState {
    let geometry = &config.geometry;
    let time = state.time + config.dt;
    let joints = joint_commands_unchecked(genome, &config.gait, time);
    let offsets: [Vec3; 6] =
        core::array::from_fn(|i| geometry.foot_body_offset(LegId::ALL[i], &joints[i]));
    let candidates: [Vec3; 6] =
        core::array::from_fn(|i| state.position.add(state.orientation.rotate(offsets[i])));

    // Contact update: release anchored feet commanded clearly above their
    // ground; ground free feet that reached the terrain. Feet never anchor
    // inside boundary walls, but an existing anchor survives a sweep past
    // the wall base (the foot keeps pressing at its last ground point).
    let mut anchors = state.anchors;
    for i in 0..6 {
        let w = candidates[i];
        match anchors[i] {
            Some(a) => {
                if w.z > a.z + config.release_tolerance {
                    anchors[i] = None;
                }
            }
            None => {
                if !field.is_wall(w.x, w.y) {
                    let h = field.height_at(w.x, w.y);
                    if w.z <= h + config.contact_tolerance {
                        anchors[i] = Some(Vec3::new(w.x, w.y, h));
                    }
                }
            }
        }
    }

    // Planar rigid motion keeping anchored feet at their ground points.
    let pairs: Vec<((f64, f64), (f64, f64))> = (0..6)
        .filter_map(|i| anchors[i].map(|a| ((candidates[i].x, candidates[i].y), (a.x, a.y))))
        .collect();
    let fit = planar_rigid_fit(&pairs);
    let target = fit.apply((state.position.x, state.position.y));
    let mut delta = (target.0 - state.position.x, target.1 - state.position.y);

    // Slip: climbing a grade scales the translation down; at a 45 degree
    // rise (or steeper) the feet lose grip entirely.
    let delta_len = scalar::sqrt(delta.0 * delta.0 + delta.1 * delta.1);
    if delta_len > 1e-12 {
        let dir = (delta.0 / delta_len, delta.1 / delta_len);
        let here = field.height_at(state.position.x, state.position.y);
        let ahead = field.height_at(
            state.position.x + dir.0 * GRADE_LOOKAHEAD,
            state.position.y + dir.1 * GRADE_LOOKAHEAD,
        );
        let grade = (ahead - here) / GRADE_LOOKAHEAD;
        let slip = (1.0 - grade.max(0.0)).clamp(0.0, 1.0);
        delta.0 *= slip;
        delta.1 *= slip;
    }

    // Face blocking: translation into terrain standing taller than the
    // belly is zeroed (the body cannot push through a vertical face).
    let half_l = geometry.thorax_length / 2.0;
    let half_w = geometry.thorax_width / 2.0;
    let belly = state.position.z - geometry.thorax_height / 2.0;
    if delta.0.abs() > 1e-12 {
        let (x0, x1) = if delta.0 > 0.0 {
            (state.position.x + half_l, state.position.x + half_l + delta.0 + FACE_PROBE_MARGIN)
        } else {
            (state.position.x - half_l + delta.0 - FACE_PROBE_MARGIN, state.position.x - half_l)
        };
        let wall_ahead = field.max_height_in(
            x0,
            x1,
            state.position.y - half_w,
            state.position.y + half_w,
        );
        if wall_ahead > belly + FACE_CLIMB_TOLERANCE {
            delta.0 = 0.0;
        }
    }
    // Boundary walls block sideways drift early enough that no foot can
    // land inside the wall band (the body grinds along instead of losing
    // its wall-side supports).
    if delta.1.abs() > 1e-12 {
        let keep_in = half_w + geometry.leg_reach();
        let side = state.position.y + delta.1 + keep_in.copysign(delta.1);
        if field.is_wall(state.position.x, side) {
            delta.1 = 0.0;
        }
    }

    let (mut yaw, pitch, roll) = state.orientation.to_zyx();
    yaw += fit.theta;
    let new_xy = (state.position.x + delta.0, state.position.y + delta.1);

    // Recompute feet under the planar-updated pose, then re-pin anchors to
    // where the feet actually ended up (least-squares residual and slip
    // become physical foot slide rather than accumulating strain).
    let q_planar = Quat::from_zyx(yaw, pitch, roll);
    let planar_feet: [Vec3; 6] = core::array::from_fn(|i| {
        Vec3::new(new_xy.0, new_xy.1, state.position.z).add(q_planar.rotate(offsets[i]))
    });
    for i in 0..6 {
        if anchors[i].is_some() {
            let w = planar_feet[i];
            if !field.is_wall(w.x, w.y) {
                anchors[i] = Some(Vec3::new(w.x, w.y, field.height_at(w.x, w.y)));
            }
        }
    }

    // Vertical settling: the deepest anchored foot rests exactly on its
    // ground; with no anchors the body drops until a foot or the belly
    // touches. The belly floor guarantees the body never tunnels.
    let belly_floor =
        field.height_at(new_xy.0, new_xy.1) + geometry.thorax_height / 2.0;
    let mut z = belly_floor;
    let any_anchor = anchors.iter().any(|a| a.is_some());
    for i in 0..6 {
        let foot_drop = planar_feet[i].z - state.position.z;
        match anchors[i] {
            Some(a) => z = z.max(a.z - foot_drop),
            None if !any_anchor => {
                if !field.is_wall(planar_feet[i].x, planar_feet[i].y) {
                    let h = field.height_at(planar_feet[i].x, planar_feet[i].y);
                    z = z.max(h - foot_drop);
                }
            }
            None => {}
        }
    }

    // Attitude: with three or more grounded feet follow their best-fit
    // plane; otherwise tip when the center of mass overhangs the support.
    let support: Vec<Vec3> = anchors.iter().flatten().copied().collect();
    let (pitch_target, roll_target) = attitude_targets(&support, new_xy, pitch, roll, config);
    let new_pitch = pitch + config.settle_rate * (pitch_target - pitch);
    let new_roll = roll + config.settle_rate * (roll_target - roll);

    let mut orientation = Quat::from_zyx(yaw, new_pitch, new_roll).normalized();
    if orientation.dot(state.orientation) < 0.0 {
        orientation = orientation.neg();
    }

    RobotState {
        position: Vec3::new(new_xy.0, new_xy.1, z),
        orientation,
        joints,
        time,
        anchors,
    }
}

/// Pitch/roll the body is drawn toward given the supporting feet.
fn attitude_targets(
    support: &[Vec3],
    com_xy: (f64, f64),
    pitch: f64,
    roll: f64,
    config: &SimConfig,
) -> (f64, f64) {
    if support.len() >= 3 {
        if let Some((sx, sy)) = support_plane(support) {
            // Ground rising along +x pushes the nose up (negative pitch);
            // ground rising along +y lifts the left side (positive roll).
            return (-scalar::atan(sx), scalar::atan(sy));
        }
    }
    let points: Vec<(f64, f64)> = support.iter().map(|p| (p.x, p.y)).collect();
    match support_query(&points, com_xy) {
        SupportQuery::Inside | SupportQuery::Empty => (pitch, roll),
        SupportQuery::Outside(dx, dy) => {
            let len = scalar::sqrt(dx * dx + dy * dy);
            if len < 1e-12 {
                (pitch, roll)
            } else {
                // Overhang ahead dips the nose (positive pitch); overhang
                // to the left (+y) dips the left side (negative roll).
                (pitch + config.tip_rate * dx / len, roll - config.tip_rate * dy / len)
            }
        }
    }
}

/// Run a full trial from the standard start pose.
///
/// Terminates on course completion, excessive roll/pitch/yaw, walking
/// backward past the reverse limit, non-finite state, or the time limit.
pub fn run_trial(
    genome: &GaitGenome,
    field: &impl HeightQuery,
    config: &SimConfig,
) -> Result<TrialResult, GenomeError> {
    validate_genome(genome)?;
    let steps = scalar::round(config.trial_duration / config.dt) as u32;
    let mut state = RobotState::initial(genome, field, config);
    let mut trace = Vec::new();
    let record =
        |trace: &mut Vec<TraceSample>, s: &RobotState, ended: bool| {
            trace.push(TraceSample {
                time: s.time,
                position: s.position,
                orientation: s.orientation,
                ended,
            });
        };
    if config.trace_stride > 0 {
        record(&mut trace, &state, false);
    }

    let mut max_x = state.position.x.max(0.0);
    let mut dw_sum = 0.0;
    let mut termination = Termination::TimeLimit;
    let mut steps_taken = 0u32;

    for k in 1..=steps {
        let next = step(&state, genome, field, config);
        steps_taken = k;
        dw_sum += (next.orientation.w - state.orientation.w).abs();
        state = next;

        let mut ended = true;
        if !state.is_finite() {
            termination = Termination::Diverged;
        } else {
            max_x = max_x.max(state.position.x);
            let (yaw, pitch, roll) = state.orientation.to_zyx();
            if state.position.x >= config.course_length {
                termination = Termination::CourseComplete;
            } else if roll.abs() > config.roll_limit {
                termination = Termination::Rollover;
            } else if pitch.abs() > config.pitch_limit {
                termination = Termination::PitchOver;
            } else if yaw.abs() > config.yaw_limit {
                termination = Termination::YawOut;
            } else if state.position.x < -config.reverse_limit {
                termination = Termination::Reverse;
            } else {
                ended = k == steps;
            }
        }

        if config.trace_stride > 0 && (ended || k % config.trace_stride == 0) {
            record(&mut trace, &state, ended);
        }
        if ended {
            break;
        }
    }

    Ok(TrialResult {
        distance: max_x.min(config.course_length),
        stability_raw: if steps_taken > 0 { dw_sum / steps_taken as f64 } else { 0.0 },
        termination,
        elapsed: state.time,
        trace,
    })
}
