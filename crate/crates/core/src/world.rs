//! Warehouse scene model: static footprints, scripted agents, robot and goal.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{orient, polygon_signed_area, Pose, Rect, Vec2};

pub const SCENE_VERSION: &str = "navvi-scene/1";
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.35;
pub const DEFAULT_GOAL_THRESHOLD: f64 = 1.0;
pub const DEFAULT_V_MAX: f64 = 1.5;
pub const DEFAULT_YAW_RATE_MAX: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaticCategory {
    Shelf,
    Wall,
    Box,
    Pedestal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObstacle {
    pub id: String,
    pub category: StaticCategory,
    /// Convex, counter-clockwise.
    pub footprint: Vec<Vec2>,
    #[serde(default)]
    pub height: f64,
}

impl StaticObstacle {
    pub fn centroid(&self) -> Vec2 {
        let n = self.footprint.len() as f64;
        let sum = self.footprint.iter().fold(Vec2::ZERO, |acc, &p| acc + p);
        sum * (1.0 / n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Forklift,
    PalletRobot,
    Worker,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptPoint {
    pub at: Vec2,
    /// Speed used on the leg that starts at this waypoint.
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicAgent {
    pub id: String,
    pub kind: AgentKind,
    pub radius: f64,
    pub script: Vec<ScriptPoint>,
    #[serde(rename = "loop", default)]
    pub looping: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    #[serde(default = "default_robot_radius")]
    pub radius: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_yaw_rate_max")]
    pub yaw_rate_max: f64,
    pub spawn: Pose,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            radius: DEFAULT_ROBOT_RADIUS,
            v_max: DEFAULT_V_MAX,
            yaw_rate_max: DEFAULT_YAW_RATE_MAX,
            spawn: Pose::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub position: Vec2,
    #[serde(default = "default_goal_threshold")]
    pub threshold: f64,
}

impl GoalSpec {
    pub fn at(position: Vec2) -> Self {
        Self { position, threshold: DEFAULT_GOAL_THRESHOLD }
    }
}

fn default_robot_radius() -> f64 {
    DEFAULT_ROBOT_RADIUS
}
fn default_v_max() -> f64 {
    DEFAULT_V_MAX
}
fn default_yaw_rate_max() -> f64 {
    DEFAULT_YAW_RATE_MAX
}
fn default_goal_threshold() -> f64 {
    DEFAULT_GOAL_THRESHOLD
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneDescription {
    pub floor: Rect,
    pub statics: Vec<StaticObstacle>,
    pub agents: Vec<DynamicAgent>,
    pub robot: RobotConfig,
    pub goal: GoalSpec,
}

/// On-disk layout; the version tag is checked and then dropped.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    version: String,
    floor: Rect,
    #[serde(default)]
    statics: Vec<StaticObstacle>,
    #[serde(default)]
    agents: Vec<DynamicAgent>,
    robot: RobotConfig,
    goal: GoalSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Obstacle or agent id, or a field name for scene-level problems.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("malformed scene at `{field}`: {message}")]
    Malformed { field: String, message: String },
    #[error("unsupported scene version `{0}` (expected {SCENE_VERSION})")]
    Version(String),
    #[error("invalid scene: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn load_scene<R: Read>(mut source: R) -> Result<SceneDescription, SceneError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: SceneFile = serde_path_to_error::deserialize(de).map_err(|err| {
        let field = err.path().to_string();
        SceneError::Malformed { field, message: err.into_inner().to_string() }
    })?;
    if file.version != SCENE_VERSION {
        return Err(SceneError::Version(file.version));
    }
    let scene = SceneDescription {
        floor: file.floor,
        statics: file.statics,
        agents: file.agents,
        robot: file.robot,
        goal: file.goal,
    };
    let violations = validate_scene(&scene);
    if violations.is_empty() {
        Ok(scene)
    } else {
        Err(SceneError::Invalid(violations))
    }
}

pub fn scene_to_json(scene: &SceneDescription) -> String {
    let file = SceneFile {
        version: SCENE_VERSION.to_string(),
        floor: scene.floor,
        statics: scene.statics.clone(),
        agents: scene.agents.clone(),
        robot: scene.robot,
        goal: scene.goal,
    };
    serde_json::to_string_pretty(&file).expect("scene serialization is infallible")
}

pub fn validate_scene(scene: &SceneDescription) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject: &str, message: String| out.push(Violation { subject: subject.to_string(), message });
    let floor = scene.floor;
    let floor_ok = floor.min.is_finite() && floor.max.is_finite() && floor.width() > 0.0 && floor.depth() > 0.0;
    if !floor_ok {
        push("floor", "floor must have strictly positive width and depth".into());
    }
    let inside = |p: Vec2| p.is_finite() && (!floor_ok || floor.contains(p));

    let mut seen: HashMap<&str, usize> = HashMap::new();
    let ids = scene.statics.iter().map(|s| s.id.as_str()).chain(scene.agents.iter().map(|a| a.id.as_str()));
    for id in ids {
        let count = seen.entry(id).or_default();
        *count += 1;
        if *count > 1 {
            push(id, "duplicate obstacle id".into());
        }
    }

    for s in &scene.statics {
        let fp = &s.footprint;
        if fp.len() < 3 {
            push(&s.id, format!("footprint needs at least 3 vertices, got {}", fp.len()));
            continue;
        }
        if let Some(p) = fp.iter().find(|p| !inside(**p)) {
            push(&s.id, format!("footprint vertex ({}, {}) lies outside the floor", p.x, p.z));
        }
        let area = polygon_signed_area(fp);
        if !(area > 0.0) {
            push(&s.id, "footprint must be counter-clockwise with positive area".into());
        } else {
            let n = fp.len();
            let convex = (0..n).all(|i| orient(fp[i], fp[(i + 1) % n], fp[(i + 2) % n]) >= 0.0);
            if !convex {
                push(&s.id, "footprint must be convex".into());
            }
        }
        if !(s.height >= 0.0) {
            push(&s.id, "height must be non-negative".into());
        }
    }

    for a in &scene.agents {
        if !(a.radius > 0.0) {
            push(&a.id, format!("radius must be positive, got {}", a.radius));
        }
        if a.script.is_empty() {
            push(&a.id, "script needs at least one waypoint".into());
        }
        if a.script.iter().any(|w| !(w.speed > 0.0) || !w.speed.is_finite()) {
            push(&a.id, "script speeds must be positive".into());
        }
        if let Some(w) = a.script.iter().find(|w| !inside(w.at)) {
            push(&a.id, format!("script waypoint ({}, {}) lies outside the floor", w.at.x, w.at.z));
        }
    }

    let r = &scene.robot;
    if !(r.radius > 0.0) {
        push("robot.radius", "must be positive".into());
    }
    if !(r.v_max > 0.0) {
        push("robot.v_max", "must be positive".into());
    }
    if !(r.yaw_rate_max > 0.0) {
        push("robot.yaw_rate_max", "must be positive".into());
    }
    if !inside(r.spawn.position()) || !r.spawn.heading.is_finite() {
        push("robot.spawn", "spawn pose must lie on the floor".into());
    }
    if !(scene.goal.threshold > 0.0) {
        push("goal.threshold", "must be positive".into());
    }
    if !inside(scene.goal.position) {
        push("goal.position", "goal must lie on the floor".into());
    }
    out
}

impl DynamicAgent {
    fn legs(&self) -> impl Iterator<Item = (Vec2, Vec2, f64)> + '_ {
        let n = self.script.len();
        let count = if self.looping && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| {
            let from = self.script[i];
            let to = self.script[(i + 1) % n];
            (from.at, to.at, from.speed)
        })
    }

    /// Total time of one pass over the script (one lap when looping).
    pub fn period(&self) -> f64 {
        self.legs().map(|(a, b, v)| a.distance(b) / v).sum()
    }

    pub fn max_speed(&self) -> f64 {
        self.script.iter().map(|w| w.speed).fold(0.0, f64::max)
    }
}

/// Where a scripted agent is at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: String,
    pub kind: AgentKind,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

/// Every agent of the scene at time `t`, in scene order.
pub fn agent_states(scene: &SceneDescription, t: f64) -> Vec<AgentState> {
    scene
        .agents
        .iter()
        .map(|a| {
            let (position, velocity) = agent_pose_at(a, t);
            AgentState { id: a.id.clone(), kind: a.kind, position, velocity, radius: a.radius }
        })
        .collect()
}

/// Position and velocity of a scripted agent at time `t` (clamped to `t >= 0`).
pub fn agent_pose_at(agent: &DynamicAgent, t: f64) -> (Vec2, Vec2) {
    let Some(first) = agent.script.first() else {
        return (Vec2::ZERO, Vec2::ZERO);
    };
    let period = agent.period();
    if !(period > 0.0) {
        return (first.at, Vec2::ZERO);
    }
    let mut t = t.max(0.0);
    if agent.looping {
        t %= period;
    } else if t >= period {
        let last = agent.script.last().map_or(first.at, |w| w.at);
        return (last, Vec2::ZERO);
    }
    for (a, b, speed) in agent.legs() {
        let len = a.distance(b);
        if len == 0.0 {
            continue;
        }
        let dur = len / speed;
        if t < dur {
            let dir = (b - a) * (1.0 / len);
            return (a + dir * (speed * t), dir * speed);
        }
        t -= dur;
    }
    // Only reachable through rounding at the very end of a lap.
    let (a, b, speed) =
        agent.legs().filter(|(a, b, _)| a.distance(*b) > 0.0).last().expect("positive period implies a non-empty leg");
    let dir = (b - a) * (1.0 / a.distance(b));
    (b, if agent.looping { dir * speed } else { Vec2::ZERO })
}
