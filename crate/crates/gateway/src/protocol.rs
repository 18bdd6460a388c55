//! "navvi-wire/1": JSON text frames, one message per frame. Every message
//! carries `v` (the schema version) and a `type` tag.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use navvi_core::feedback::{AudioCue, HapticCommand, ObstacleReport};
use navvi_core::geom::{Rect, Vec2};
use navvi_core::planner::PlanStats;
use navvi_core::sim::{SimState, SimStatus};
use navvi_core::world::{AgentKind, GoalSpec, StaticCategory};

pub const WIRE_VERSION: &str = "navvi-wire/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientCommand {
    Axes { axis_x: f64, axis_y: f64 },
    LoadScene { name: String },
    Start,
    Reset,
    SetGoal { x: f64, z: f64 },
}

impl ClientCommand {
    pub fn to_json(&self) -> String {
        envelope(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    MalformedMessage,
    UnsupportedVersion,
    NotDriver,
    UnknownScene,
    InvalidScene,
    NoScene,
    InvalidGoal,
    SessionFinished,
    SimFault,
}

/// A rejected frame, ready to send back as an `error` message.
#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    pub code: ErrorCode,
    pub message: String,
}

impl Rejection {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn into_message(self) -> ServerMessage {
        ServerMessage::Error { code: self.code, message: self.message }
    }
}

/// Decodes one client frame. Axes come back already clamped.
pub fn parse_client(text: &str) -> Result<ClientCommand, Rejection> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Rejection::new(ErrorCode::MalformedMessage, format!("not JSON: {e}")))?;
    let Value::Object(mut map) = value else {
        return Err(Rejection::new(ErrorCode::MalformedMessage, "expected a JSON object"));
    };
    match map.remove("v") {
        Some(Value::String(v)) if v == WIRE_VERSION => {}
        Some(Value::String(v)) => {
            return Err(Rejection::new(ErrorCode::UnsupportedVersion, format!("version {v:?} is not {WIRE_VERSION:?}")))
        }
        _ => return Err(Rejection::new(ErrorCode::MalformedMessage, "missing string field `v`")),
    }
    let command: ClientCommand = serde_json::from_value(Value::Object(map))
        .map_err(|e| Rejection::new(ErrorCode::MalformedMessage, e.to_string()))?;
    Ok(match command {
        ClientCommand::Axes { axis_x, axis_y } => {
            ClientCommand::Axes { axis_x: axis_x.clamp(-1.0, 1.0), axis_y: axis_y.clamp(-1.0, 1.0) }
        }
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Driver,
    Observer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome { client_id: u64, role: Role, tick_hz: f64, snapshot_hz: f64 },
    Role { role: Role },
    Scene(SceneInfo),
    Snapshot(Snapshot),
    Error { code: ErrorCode, message: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        envelope(self)
    }

    pub fn from_json(text: &str) -> Result<Self, Rejection> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Rejection::new(ErrorCode::MalformedMessage, e.to_string()))?;
        let Value::Object(mut map) = value else {
            return Err(Rejection::new(ErrorCode::MalformedMessage, "expected a JSON object"));
        };
        if map.remove("v") != Some(Value::String(WIRE_VERSION.into())) {
            return Err(Rejection::new(ErrorCode::UnsupportedVersion, "bad or missing `v`"));
        }
        serde_json::from_value(Value::Object(map))
            .map_err(|e| Rejection::new(ErrorCode::MalformedMessage, e.to_string()))
    }
}

fn envelope<T: Serialize>(body: &T) -> String {
    let mut value = serde_json::to_value(body).expect("wire messages always serialize");
    if let Value::Object(map) = &mut value {
        map.insert("v".into(), Value::String(WIRE_VERSION.into()));
    }
    value.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticView {
    pub id: String,
    pub category: StaticCategory,
    pub footprint: Vec<Vec2>,
}

/// Sent once per scene load: everything that does not change between ticks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneInfo {
    pub name: String,
    pub floor: Rect,
    pub statics: Vec<StaticView>,
    pub robot_radius: f64,
    pub goal: GoalSpec,
}

impl SceneInfo {
    pub fn of(name: &str, state: &SimState) -> Self {
        Self {
            name: name.into(),
            floor: state.scene.floor,
            statics: state
                .scene
                .statics
                .iter()
                .map(|s| StaticView { id: s.id.clone(), category: s.category, footprint: s.footprint.clone() })
                .collect(),
            robot_radius: state.robot_radius(),
            goal: state.scene.goal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotView {
    pub x: f64,
    pub z: f64,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: String,
    pub kind: AgentKind,
    pub x: f64,
    pub z: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CueView {
    #[serde(flatten)]
    pub cue: AudioCue,
    pub phrase: String,
}

impl From<AudioCue> for CueView {
    fn from(cue: AudioCue) -> Self {
        Self { phrase: cue.kind.phrase(), cue }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub shelf_collisions: u32,
    pub obstacle_collisions: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanView {
    pub nodes_expanded: usize,
    pub query_ms: f64,
}

impl From<PlanStats> for PlanView {
    fn from(s: PlanStats) -> Self {
        Self { nodes_expanded: s.nodes_expanded, query_ms: s.query_time * 1e3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seq: u64,
    pub tick: u64,
    pub clock: f64,
    pub status: SimStatus,
    /// Whether the session is ticking (after `start`).
    pub running: bool,
    pub robot: RobotView,
    pub agents: Vec<AgentView>,
    pub path_polyline: Vec<Vec2>,
    pub haptic: HapticCommand,
    pub haptic_raw: f64,
    pub nearest_obstacle: Option<ObstacleReport>,
    pub cues: Vec<CueView>,
    pub counters: Counters,
    pub goal: GoalSpec,
    pub last_plan: Option<PlanView>,
}
