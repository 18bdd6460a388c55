//! Guidance channels derived from the world each tick: stereo haptics from
//! the nearest obstacle, clock-bearing and event speech cues, and the path
//! line drawn on screen.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{point_convex_distance, Pose, Vec2};

#[derive(Debug, Error, PartialEq)]
pub enum FeedbackError {
    #[error("direction target coincides with the robot position")]
    ZeroDirection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackConfig {
    /// Haptic detection perimeter, m.
    pub d_max: f64,
    /// Half-width of the centre zone, m.
    pub center_range: f64,
    pub shelf_audio_radius: f64,
    pub direction_announce_period: f64,
    /// Minimum spacing between two cues of the same kind, s.
    pub cue_refractory: f64,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            d_max: 5.0,
            center_range: 1.0,
            shelf_audio_radius: 1.0,
            direction_announce_period: 5.0,
            cue_refractory: 2.0,
        }
    }
}

impl FeedbackConfig {
    /// Maps the raw log-decay range `[0, ln 2]` onto motor range `[0, 1]`.
    pub fn intensity_scale(&self) -> f64 {
        1.0 / LN_2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Left,
    Center,
    Right,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObstacleShape {
    Disc { radius: f64 },
    Polygon { footprint: Vec<Vec2> },
}

/// Anything the haptic channel reacts to. `center` is what gets placed in
/// the robot frame for zone classification; distance comes from the shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HapticObstacle {
    pub id: String,
    pub center: Vec2,
    pub shape: ObstacleShape,
}

impl HapticObstacle {
    pub fn disc(id: impl Into<String>, center: Vec2, radius: f64) -> Self {
        Self { id: id.into(), center, shape: ObstacleShape::Disc { radius } }
    }

    /// Gap between the robot disc and the obstacle, floored at 0.
    pub fn surface_distance(&self, robot_pos: Vec2, robot_radius: f64) -> f64 {
        let d = match &self.shape {
            ObstacleShape::Disc { radius } => self.center.distance(robot_pos) - radius,
            ObstacleShape::Polygon { footprint } => point_convex_distance(footprint, robot_pos),
        };
        (d - robot_radius).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestObstacle {
    pub id: String,
    pub distance: f64,
    /// Obstacle centre in the robot frame (x lateral, z forward).
    pub local: Vec2,
}

/// Closest obstacle inside the detection perimeter; ties keep the earlier one.
pub fn nearest_obstacle(
    pose: &Pose,
    robot_radius: f64,
    obstacles: &[HapticObstacle],
    config: &FeedbackConfig,
) -> Option<NearestObstacle> {
    let mut best: Option<(f64, &HapticObstacle)> = None;
    for ob in obstacles {
        let d = ob.surface_distance(pose.position(), robot_radius);
        if d < config.d_max && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, ob));
        }
    }
    best.map(|(distance, ob)| NearestObstacle {
        id: ob.id.clone(),
        distance,
        local: pose.inverse_transform_point(ob.center),
    })
}

pub fn classify_zone(local_x: f64, config: &FeedbackConfig) -> Zone {
    if local_x < -config.center_range {
        Zone::Left
    } else if local_x > config.center_range {
        Zone::Right
    } else {
        Zone::Center
    }
}

/// `ln(1 + (1 - d/d_max))` with `d` clamped to `[0, d_max]`.
pub fn intensity_raw(d: f64, config: &FeedbackConfig) -> f64 {
    let d = d.clamp(0.0, config.d_max);
    (1.0 + (1.0 - d / config.d_max)).ln()
}

/// Motor intensity in `[0, 1]`: 1 at contact, 0 at the perimeter.
pub fn intensity(d: f64, config: &FeedbackConfig) -> f64 {
    (intensity_raw(d, config) * config.intensity_scale()).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HapticCommand {
    pub left: f64,
    pub right: f64,
    pub zone: Zone,
}

impl HapticCommand {
    pub const OFF: Self = Self { left: 0.0, right: 0.0, zone: Zone::None };

    pub fn route(zone: Zone, level: f64) -> Self {
        match zone {
            Zone::Left => Self { left: level, right: 0.0, zone },
            Zone::Right => Self { left: 0.0, right: level, zone },
            Zone::Center => Self { left: level, right: level, zone },
            Zone::None => Self::OFF,
        }
    }
}

pub fn haptic_command(
    pose: &Pose,
    robot_radius: f64,
    obstacles: &[HapticObstacle],
    config: &FeedbackConfig,
) -> HapticCommand {
    match nearest_obstacle(pose, robot_radius, obstacles, config) {
        Some(n) => HapticCommand::route(classify_zone(n.local.x, config), intensity(n.distance, config)),
        None => HapticCommand::OFF,
    }
}

/// Clock hour for a bearing in degrees (0 = ahead, 90 = right). Rounds half
/// up; 0 and 12 both read as 12.
pub fn hour_from_bearing(theta_deg: f64) -> u8 {
    let norm = (theta_deg + 360.0).rem_euclid(360.0);
    let hour = (norm / 30.0 + 0.5).floor() as u8;
    if hour == 0 || hour >= 12 {
        12
    } else {
        hour
    }
}

/// Clock hour of `target` as seen from the robot.
pub fn clock_direction(pose: &Pose, target: Vec2) -> Result<u8, FeedbackError> {
    let dir = (target - pose.position()).normalized().ok_or(FeedbackError::ZeroDirection)?;
    let local = pose.inverse_transform_direction(dir);
    Ok(hour_from_bearing(local.x.atan2(local.z).to_degrees()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CueKind {
    Direction { hour: u8 },
    ShelfProximity,
    Stuck,
    GoalReached,
}

impl CueKind {
    fn slot(self) -> usize {
        match self {
            Self::Direction { .. } => 0,
            Self::ShelfProximity => 1,
            Self::Stuck => 2,
            Self::GoalReached => 3,
        }
    }

    /// Phrase a text-to-speech front end would say.
    pub fn phrase(self) -> String {
        match self {
            Self::Direction { hour } => format!("{hour} o'clock"),
            Self::ShelfProximity => "Shelf nearby".into(),
            Self::Stuck => "Stuck".into(),
            Self::GoalReached => "Destination reached".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioCue {
    #[serde(flatten)]
    pub kind: CueKind,
    pub t: f64,
}

/// Per-tick facts the cue scheduler reacts to.
#[derive(Clone, Copy, Debug)]
pub struct CueInputs {
    pub now: f64,
    pub pose: Pose,
    /// Robot surface within the shelf audio radius of some shelf.
    pub near_shelf: bool,
    pub stuck: bool,
    pub goal_reached: bool,
    /// Point the direction cue refers to; `None` when there is no route.
    pub direction_target: Option<Vec2>,
    /// A replan other than the periodic refresh happened this tick.
    pub replanned: bool,
}

/// Edge-triggered speech cues with a refractory period per cue kind.
#[derive(Clone, Debug, Default)]
pub struct AudioCueManager {
    last_emitted: [Option<f64>; 4],
    near_shelf: bool,
    stuck: bool,
    goal_announced: bool,
    last_direction: Option<f64>,
}

impl AudioCueManager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn goal_announced(&self) -> bool {
        self.goal_announced
    }

    fn try_emit(&mut self, kind: CueKind, now: f64, config: &FeedbackConfig, out: &mut Vec<AudioCue>) -> bool {
        let slot = kind.slot();
        if let Some(last) = self.last_emitted[slot] {
            if now - last < config.cue_refractory - 1e-9 {
                return false;
            }
        }
        self.last_emitted[slot] = Some(now);
        out.push(AudioCue { kind, t: now });
        true
    }

    pub fn update(&mut self, input: &CueInputs, config: &FeedbackConfig) -> Vec<AudioCue> {
        let mut out = Vec::new();
        if self.goal_announced {
            return out;
        }
        let now = input.now;
        if input.goal_reached {
            self.goal_announced = true;
            self.last_emitted[CueKind::GoalReached.slot()] = Some(now);
            out.push(AudioCue { kind: CueKind::GoalReached, t: now });
            return out;
        }
        if input.stuck && !self.stuck {
            self.try_emit(CueKind::Stuck, now, config, &mut out);
        }
        self.stuck = input.stuck;
        if input.near_shelf && !self.near_shelf {
            self.try_emit(CueKind::ShelfProximity, now, config, &mut out);
        }
        self.near_shelf = input.near_shelf;

        let Some(target) = input.direction_target else {
            self.last_direction = None;
            return out;
        };
        let due = match self.last_direction {
            None if !input.replanned => {
                self.last_direction = Some(now);
                false
            }
            None => true,
            Some(last) => input.replanned || now - last >= config.direction_announce_period - 1e-9,
        };
        if due {
            if let Ok(hour) = clock_direction(&input.pose, target) {
                if self.try_emit(CueKind::Direction { hour }, now, config, &mut out) {
                    self.last_direction = Some(now);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleReport {
    pub id: String,
    pub distance: f64,
    pub zone: Zone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackFrame {
    pub haptic: HapticCommand,
    /// Unnormalised log-decay value behind `haptic`.
    pub haptic_raw: f64,
    pub cues: Vec<AudioCue>,
    pub path_polyline: Vec<Vec2>,
    pub nearest_obstacle: Option<ObstacleReport>,
}

impl FeedbackFrame {
    pub fn empty() -> Self {
        Self {
            haptic: HapticCommand::OFF,
            haptic_raw: 0.0,
            cues: Vec::new(),
            path_polyline: Vec::new(),
            nearest_obstacle: None,
        }
    }
}

/// Haptics and path line for one tick; cues come from [`AudioCueManager`].
pub fn compose_frame(
    pose: &Pose,
    robot_radius: f64,
    obstacles: &[HapticObstacle],
    remaining_path: Option<&[Vec2]>,
    cues: Vec<AudioCue>,
    config: &FeedbackConfig,
) -> FeedbackFrame {
    let nearest = nearest_obstacle(pose, robot_radius, obstacles, config);
    let (haptic, haptic_raw, report) = match nearest {
        Some(n) => {
            let zone = classify_zone(n.local.x, config);
            let cmd = HapticCommand::route(zone, intensity(n.distance, config));
            let raw = intensity_raw(n.distance, config);
            (cmd, raw, Some(ObstacleReport { id: n.id, distance: n.distance, zone }))
        }
        None => (HapticCommand::OFF, 0.0, None),
    };
    let path_polyline = match remaining_path {
        Some(rest) => std::iter::once(pose.position()).chain(rest.iter().copied()).collect(),
        None => Vec::new(),
    };
    FeedbackFrame { haptic, haptic_raw, cues, path_polyline, nearest_obstacle: report }
}
