//! Contact, proximity and goal detection plus the per-session CSV log.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{point_convex_distance, Vec2};
use crate::world::{AgentKind, AgentState, GoalSpec, StaticCategory, StaticObstacle};

/// Slack on the contact test so a robot parked exactly on an obstacle
/// boundary by the collision response still counts as touching it.
pub const CONTACT_SKIN: f64 = 1e-6;

pub const CSV_HEADER: [&str; 7] =
    ["t_s", "event_kind", "robot_x_m", "robot_z_m", "detail", "shelf_collisions_cum", "obstacle_collisions_cum"];

#[derive(Debug, Error)]
pub enum EventsError {
    #[error("event at t={t} precedes the previous event at t={last}")]
    OutOfOrder { t: f64, last: f64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad log row {row}: {message}")]
    Parse { row: usize, message: String },
}

/// Collision layer: shelves versus everything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Shelf,
    Obstacle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "kind")]
pub enum EntityKind {
    Static(StaticCategory),
    Agent(AgentKind),
}

impl EntityKind {
    pub fn category(self) -> Category {
        match self {
            Self::Static(StaticCategory::Shelf) => Category::Shelf,
            _ => Category::Obstacle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Contact {
    pub id: String,
    pub category: Category,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proximity {
    pub id: String,
    /// Surface-to-surface gap, m.
    pub distance: f64,
    pub category: Category,
    pub kind: EntityKind,
}

/// Entities touching a robot disc at `pos`.
pub fn detect_contacts(pos: Vec2, radius: f64, statics: &[StaticObstacle], agents: &[AgentState]) -> Vec<Contact> {
    let mut out = Vec::new();
    for s in statics {
        if point_convex_distance(&s.footprint, pos) < radius + CONTACT_SKIN {
            out.push(Contact { id: s.id.clone(), category: EntityKind::Static(s.category).category() });
        }
    }
    for a in agents {
        if a.position.distance(pos) < radius + a.radius + CONTACT_SKIN {
            out.push(Contact { id: a.id.clone(), category: Category::Obstacle });
        }
    }
    out
}

/// Everything whose surface lies within `search_radius` of the robot's
/// surface, nearest first (ties by id).
pub fn detect_proximity(
    pos: Vec2,
    robot_radius: f64,
    statics: &[StaticObstacle],
    agents: &[AgentState],
    search_radius: f64,
) -> Vec<Proximity> {
    let mut out = Vec::new();
    for s in statics {
        let d = (point_convex_distance(&s.footprint, pos) - robot_radius).max(0.0);
        if d < search_radius {
            let kind = EntityKind::Static(s.category);
            out.push(Proximity { id: s.id.clone(), distance: d, category: kind.category(), kind });
        }
    }
    for a in agents {
        let d = (a.position.distance(pos) - a.radius - robot_radius).max(0.0);
        if d < search_radius {
            let kind = EntityKind::Agent(a.kind);
            out.push(Proximity { id: a.id.clone(), distance: d, category: kind.category(), kind });
        }
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.id.cmp(&b.id)));
    out
}

pub fn check_goal(robot_pos: Vec2, goal: &GoalSpec) -> bool {
    robot_pos.distance(goal.position) < goal.threshold
}

/// Reports a set member once when it appears and again only after it has
/// been absent for at least one update.
#[derive(Clone, Debug, Default)]
pub struct EdgeTrigger<K: Ord + Clone> {
    active: BTreeSet<K>,
}

impl<K: Ord + Clone> EdgeTrigger<K> {
    pub fn new() -> Self {
        Self { active: BTreeSet::new() }
    }

    pub fn update(&mut self, current: impl IntoIterator<Item = K>) -> Vec<K> {
        let current: BTreeSet<K> = current.into_iter().collect();
        let fresh = current.difference(&self.active).cloned().collect();
        self.active = current;
        fresh
    }

    pub fn is_active(&self, key: &K) -> bool {
        self.active.contains(key)
    }
}

pub type ContactTracker = EdgeTrigger<Contact>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ProximityObstacle,
    ProximityShelf,
    CollisionObstacle,
    CollisionShelf,
    GoalReached,
    Replan,
    CueEmitted,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        Self::ProximityObstacle,
        Self::ProximityShelf,
        Self::CollisionObstacle,
        Self::CollisionShelf,
        Self::GoalReached,
        Self::Replan,
        Self::CueEmitted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ProximityObstacle => "proximity_obstacle",
            Self::ProximityShelf => "proximity_shelf",
            Self::CollisionObstacle => "collision_obstacle",
            Self::CollisionShelf => "collision_shelf",
            Self::GoalReached => "goal_reached",
            Self::Replan => "replan",
            Self::CueEmitted => "cue_emitted",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub t: f64,
    pub kind: EventKind,
    pub robot_pos: Vec2,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub events: Vec<InteractionEvent>,
    pub shelf_collision_count: u32,
    pub obstacle_collision_count: u32,
    pub start_time: f64,
    pub goal_time: Option<f64>,
    /// Final run status written to the summary row.
    pub status: String,
}

impl SessionLog {
    pub fn new(start_time: f64) -> Self {
        Self { start_time, status: "running".into(), ..Default::default() }
    }

    pub fn elapsed(&self) -> Option<f64> {
        self.goal_time.map(|g| g - self.start_time)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Appends an event, bumping the collision counters. Edge triggering is
    /// the caller's job (see [`ContactTracker`]).
    pub fn record(&mut self, event: InteractionEvent) -> Result<(), EventsError> {
        if let Some(last) = self.events.last() {
            if event.t < last.t {
                return Err(EventsError::OutOfOrder { t: event.t, last: last.t });
            }
        }
        match event.kind {
            EventKind::CollisionShelf => self.shelf_collision_count += 1,
            EventKind::CollisionObstacle => self.obstacle_collision_count += 1,
            EventKind::GoalReached if self.goal_time.is_none() => self.goal_time = Some(event.t),
            _ => {}
        }
        self.events.push(event);
        Ok(())
    }

    /// CSV with one row per event and a trailing `summary` row carrying the
    /// elapsed time (empty without a goal) and the final status.
    pub fn finalize(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory csv");
        let (mut shelf, mut obstacle) = (0u32, 0u32);
        for e in &self.events {
            match e.kind {
                EventKind::CollisionShelf => shelf += 1,
                EventKind::CollisionObstacle => obstacle += 1,
                _ => {}
            }
            w.write_record([
                format!("{:.3}", e.t),
                e.kind.to_string(),
                format!("{:.3}", e.robot_pos.x),
                format!("{:.3}", e.robot_pos.z),
                e.detail.clone(),
                shelf.to_string(),
                obstacle.to_string(),
            ])
            .expect("in-memory csv");
        }
        w.write_record([
            self.elapsed().map(|v| format!("{v:.3}")).unwrap_or_default(),
            "summary".into(),
            String::new(),
            String::new(),
            self.status.clone(),
            self.shelf_collision_count.to_string(),
            self.obstacle_collision_count.to_string(),
        ])
        .expect("in-memory csv");
        w.into_inner().expect("in-memory csv")
    }
}

/// A log read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedLog {
    pub events: Vec<InteractionEvent>,
    pub elapsed: Option<f64>,
    pub status: String,
    pub shelf_collision_count: u32,
    pub obstacle_collision_count: u32,
}

impl ParsedLog {
    /// Rebuilds a [`SessionLog`] (start time 0) so it can be re-finalized.
    pub fn into_session(self) -> SessionLog {
        let goal_time = self.elapsed;
        SessionLog {
            events: self.events,
            shelf_collision_count: self.shelf_collision_count,
            obstacle_collision_count: self.obstacle_collision_count,
            start_time: 0.0,
            goal_time,
            status: self.status,
        }
    }
}

pub fn parse_csv(bytes: &[u8]) -> Result<ParsedLog, EventsError> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(EventsError::Parse { row: 0, message: "unexpected header".into() });
    }
    let num = |row: usize, s: &str| -> Result<f64, EventsError> {
        s.parse().map_err(|_| EventsError::Parse { row, message: format!("`{s}` is not a number") })
    };
    let count = |row: usize, s: &str| -> Result<u32, EventsError> {
        s.parse().map_err(|_| EventsError::Parse { row, message: format!("`{s}` is not a count") })
    };
    let mut events = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if &rec[1] == "summary" {
            return Ok(ParsedLog {
                events,
                elapsed: if rec[0].is_empty() { None } else { Some(num(row, &rec[0])?) },
                status: rec[4].to_string(),
                shelf_collision_count: count(row, &rec[5])?,
                obstacle_collision_count: count(row, &rec[6])?,
            });
        }
        let kind = rec[1].parse().map_err(|message| EventsError::Parse { row, message })?;
        events.push(InteractionEvent {
            t: num(row, &rec[0])?,
            kind,
            robot_pos: Vec2::new(num(row, &rec[2])?, num(row, &rec[3])?),
            detail: rec[4].to_string(),
        });
    }
    Err(EventsError::Parse { row: events.len() + 1, message: "missing summary row".into() })
}
