//! Fixed-step simulation loop, the waypoint-following autopilot and the
//! headless runner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{
    check_goal, detect_contacts, detect_proximity, Category, ContactTracker, EdgeTrigger, EntityKind, EventKind,
    EventsError, InteractionEvent, SessionLog,
};
use crate::feedback::{
    classify_zone, compose_frame, AudioCue, AudioCueManager, CueInputs, CueKind, FeedbackConfig, FeedbackFrame,
    HapticObstacle, ObstacleShape, Zone,
};
use crate::geom::{point_convex_distance, segment_intersects_disc, wrap_angle, Pose, Vec2};
use crate::navmesh::{BakeSource, BuildConfig, CarveVolume, NavMeshError, NavMeshRuntime};
use crate::planner::{
    advance_waypoint, plan, Path, PlanStats, PlannerConfig, ReplanMonitor, ReplanReason, RobotMotion, TrackedObstacle,
};
use crate::world::{agent_states, AgentState, SceneDescription, StaticCategory, DEFAULT_V_MAX, DEFAULT_YAW_RATE_MAX};

pub const CONTROL_VERSION: &str = "navvi-control/1";

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    NavMesh(#[from] NavMeshError),
    #[error(transparent)]
    Events(#[from] EventsError),
    #[error("the session already reached its goal")]
    Finished,
    #[error("control script: {0}")]
    Script(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub axis_x: f64,
    pub axis_y: f64,
    #[serde(default)]
    pub t: f64,
}

impl ControlInput {
    pub const IDLE: ControlInput = ControlInput { axis_x: 0.0, axis_y: 0.0, t: 0.0 };

    /// Clamps both axes to [-1, 1]; NaN becomes 0.
    pub fn new(axis_x: f64, axis_y: f64) -> Self {
        Self { axis_x: clamp_axis(axis_x), axis_y: clamp_axis(axis_y), t: 0.0 }
    }

    pub fn clamped(self) -> Self {
        Self { t: self.t, ..Self::new(self.axis_x, self.axis_y) }
    }
}

fn clamp_axis(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TickConfig {
    pub dt: f64,
    pub v_max: f64,
    pub yaw_rate_max: f64,
    pub seed: u64,
    /// Sim-time limit for headless runs, s.
    pub time_cap: f64,
    pub planner: PlannerConfig,
    pub feedback: FeedbackConfig,
}

impl Default for TickConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            v_max: DEFAULT_V_MAX,
            yaw_rate_max: DEFAULT_YAW_RATE_MAX,
            seed: 0,
            time_cap: 300.0,
            planner: PlannerConfig::default(),
            feedback: FeedbackConfig::default(),
        }
    }
}

impl TickConfig {
    /// Defaults with the kinematic limits taken from the scene's robot.
    pub fn for_scene(scene: &SceneDescription) -> Self {
        Self { v_max: scene.robot.v_max, yaw_rate_max: scene.robot.yaw_rate_max, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    Running,
    GoalReached,
    Stuck,
}

impl SimStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Running => "running",
            Self::GoalReached => "goal_reached",
            Self::Stuck => "stuck",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose,
    /// Signed linear speed achieved over the last tick, m/s.
    pub speed: f64,
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub scene: SceneDescription,
    pub tick: u64,
    pub clock: f64,
    pub robot: RobotState,
    pub agents: Vec<AgentState>,
    pub navmesh: NavMeshRuntime,
    pub path: Option<Path>,
    /// Bumped on every successful plan.
    pub plan_seq: u64,
    pub last_plan_stats: Option<PlanStats>,
    pub log: SessionLog,
    pub rng_seed: u64,
    pub status: SimStatus,
    monitor: ReplanMonitor,
    cues: AudioCueManager,
    contacts: ContactTracker,
    near_obstacles: EdgeTrigger<String>,
    near_shelves: EdgeTrigger<String>,
    plan_failing_since: Option<f64>,
}

/// What happened inside one tick, beyond the state change itself.
#[derive(Clone, Debug, PartialEq)]
pub struct TickOutcome {
    pub frame: FeedbackFrame,
    pub rebuilt: bool,
    pub replan: Option<ReplanReason>,
    pub replan_succeeded: bool,
    /// Contacts that began this tick.
    pub new_contacts: Vec<(String, Category)>,
    /// The commanded motion was cut short by a contact.
    pub motion_blocked: bool,
}

impl SimState {
    pub fn new(scene: SceneDescription, cfg: &TickConfig) -> Result<Self, SimError> {
        let source = BakeSource::from_scene(&scene, BuildConfig::for_scene(&scene));
        let navmesh = NavMeshRuntime::from_source(source)?;
        let agents = agent_states(&scene, 0.0);
        let spawn = scene.robot.spawn;
        Ok(Self {
            scene,
            tick: 0,
            clock: 0.0,
            robot: RobotState { pose: Pose::new(spawn.x, spawn.z, wrap_angle(spawn.heading)), speed: 0.0 },
            agents,
            navmesh,
            path: None,
            plan_seq: 0,
            last_plan_stats: None,
            log: SessionLog::new(0.0),
            rng_seed: cfg.seed,
            status: SimStatus::Running,
            monitor: ReplanMonitor::new(),
            cues: AudioCueManager::new(),
            contacts: ContactTracker::new(),
            near_obstacles: EdgeTrigger::new(),
            near_shelves: EdgeTrigger::new(),
            plan_failing_since: None,
        })
    }

    /// Moves the goal; the next tick plans a fresh route to it.
    pub fn set_goal(&mut self, position: Vec2) -> Result<(), SimError> {
        if self.status == SimStatus::GoalReached {
            return Err(SimError::Finished);
        }
        self.scene.goal.position = position;
        self.path = None;
        self.monitor = ReplanMonitor::new();
        self.plan_failing_since = None;
        Ok(())
    }

    pub fn robot_radius(&self) -> f64 {
        self.scene.robot.radius
    }

    /// Entities the haptic channel and obstacle proximity react to: moving
    /// agents plus boxes and pedestals.
    pub fn haptic_obstacles(&self) -> Vec<HapticObstacle> {
        let mut out: Vec<HapticObstacle> = self
            .scene
            .statics
            .iter()
            .filter(|s| matches!(s.category, StaticCategory::Box | StaticCategory::Pedestal))
            .map(|s| HapticObstacle {
                id: s.id.clone(),
                center: s.centroid(),
                shape: ObstacleShape::Polygon { footprint: s.footprint.clone() },
            })
            .collect();
        out.extend(self.agents.iter().map(|a| HapticObstacle::disc(a.id.clone(), a.position, a.radius)));
        out
    }

    fn log_event(&mut self, kind: EventKind, detail: String) -> Result<(), SimError> {
        let robot_pos = self.robot.pose.position();
        self.log.record(InteractionEvent { t: self.clock, kind, robot_pos, detail })?;
        Ok(())
    }
}

/// Unicycle step with stop-at-contact. Returns whether the motion was cut
/// short.
pub fn apply_control(state: &mut SimState, input: ControlInput, cfg: &TickConfig) -> bool {
    let input = input.clamped();
    let pose = state.robot.pose;
    let heading = wrap_angle(pose.heading + input.axis_x * cfg.yaw_rate_max * cfg.dt);
    let commanded = input.axis_y * cfg.v_max;
    let start = pose.position();
    let turned = Pose::new(start.x, start.z, heading);
    let delta = turned.forward() * (commanded * cfg.dt);

    let radius = state.robot_radius();
    let acceptable = |p: Vec2| motion_allowed(&state.scene, &state.agents, radius, start, p);
    let mut fraction = 1.0;
    if delta != Vec2::ZERO && !acceptable(start + delta) {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if acceptable(start + delta * mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        fraction = lo;
    }
    let end = start + delta * fraction;
    state.robot = RobotState { pose: Pose::new(end.x, end.z, heading), speed: commanded * fraction };
    fraction < 1.0
}

/// A move is allowed when, for every obstacle, it either ends clear of it
/// or does not get any closer to it.
fn motion_allowed(scene: &SceneDescription, agents: &[AgentState], radius: f64, from: Vec2, to: Vec2) -> bool {
    for s in &scene.statics {
        let d = point_convex_distance(&s.footprint, to);
        if d < radius && d < point_convex_distance(&s.footprint, from) {
            return false;
        }
    }
    for a in agents {
        let d = a.position.distance(to);
        if d < radius + a.radius && d < a.position.distance(from) {
            return false;
        }
    }
    let f = scene.floor;
    let edge = |p: Vec2| (p.x - f.min.x).min(f.max.x - p.x).min(p.z - f.min.z).min(f.max.z - p.z);
    let d = edge(to);
    !(d < radius && d < edge(from))
}

pub fn tick(state: &mut SimState, input: ControlInput, cfg: &TickConfig) -> Result<TickOutcome, SimError> {
    tick_with(state, cfg, |_| input)
}

/// One tick; `control` is asked for the operator input right before the
/// kinematic update, so it sees the freshly replanned path.
pub fn tick_with(
    state: &mut SimState,
    cfg: &TickConfig,
    control: impl FnOnce(&SimState) -> ControlInput,
) -> Result<TickOutcome, SimError> {
    if state.status == SimStatus::GoalReached {
        return Err(SimError::Finished);
    }
    let pcfg = &cfg.planner;

    // 1. clock
    state.tick += 1;
    state.clock = state.tick as f64 * cfg.dt;
    let now = state.clock;

    // 2. agents and their carves
    state.agents = agent_states(&state.scene, now);
    state.navmesh.set_carves(state.agents.iter().map(|a| CarveVolume {
        center: a.position,
        radius: a.radius,
        owner: a.id.clone(),
    }));

    // 3. rebuild
    let rebuilt = match state.navmesh.rebuild_if_due(now) {
        Ok(r) => r,
        Err(e) => {
            state.status = SimStatus::Stuck;
            state.log_event(EventKind::Replan, format!("reason=rebuild failed: {e}"))?;
            false
        }
    };
    let robot_pos = state.robot.pose.position();
    let radius = state.robot_radius();
    // a rebuild bakes carve discs into the mesh, where the blocked-triangle
    // check no longer sees them
    let baked_hole_on_path = rebuilt
        && state.path.as_ref().is_some_and(|p| {
            p.remaining_segments().any(|(a, b)| {
                state.navmesh.carves().any(|c| segment_intersects_disc(a, b, c.center, c.radius + radius))
            })
        });

    // 4. replan
    let tracked: Vec<TrackedObstacle> = state
        .agents
        .iter()
        .map(|a| TrackedObstacle { id: a.id.clone(), center: a.position, radius: a.radius })
        .collect();
    let motion = RobotMotion { position: robot_pos, speed: state.robot.speed, radius };
    let mut reason = state.monitor.needs_replan(motion, &state.navmesh, state.path.as_ref(), &tracked, now, pcfg);
    if baked_hole_on_path {
        reason = Some(ReplanReason::PathInvalidated);
    }
    let mut replan_succeeded = false;
    if let Some(reason) = reason {
        match plan(&state.navmesh, robot_pos, &state.scene.goal, pcfg) {
            Ok((path, stats)) => {
                state.path = Some(path);
                state.plan_seq += 1;
                state.last_plan_stats = Some(stats);
                state.plan_failing_since = None;
                replan_succeeded = true;
                if reason != ReplanReason::Periodic {
                    state.log_event(EventKind::Replan, format!("reason={}", reason.as_str()))?;
                }
                if reason == ReplanReason::Stuck {
                    state.status = SimStatus::Stuck;
                }
            }
            Err(e) => {
                let since = *state.plan_failing_since.get_or_insert(now);
                if since == now {
                    state.log_event(EventKind::Replan, format!("reason={} failed: {e}", reason.as_str()))?;
                }
                if now - since >= pcfg.replan_period - 1e-9 {
                    state.path = None;
                    state.status = SimStatus::Stuck;
                }
            }
        }
        state.monitor.mark_planned(now);
    }

    // 5. kinematics
    let input = control(state);
    let motion_blocked = apply_control(state, input, cfg);
    let robot_pos = state.robot.pose.position();
    if state.status == SimStatus::Stuck && state.path.is_some() && state.robot.speed.abs() >= pcfg.stuck_speed {
        state.status = SimStatus::Running;
    }

    // 6. waypoint tracking
    if let Some(path) = state.path.as_mut() {
        advance_waypoint(path, robot_pos, pcfg.waypoint_radius);
    }

    // 8. events: contacts, proximity, goal
    let contacts = detect_contacts(robot_pos, radius, &state.scene.statics, &state.agents);
    let mut new_contacts = Vec::new();
    for c in state.contacts.update(contacts) {
        let kind = match c.category {
            Category::Shelf => EventKind::CollisionShelf,
            Category::Obstacle => EventKind::CollisionObstacle,
        };
        state.log_event(kind, format!("id={}", c.id))?;
        new_contacts.push((c.id, c.category));
    }

    let fcfg = &cfg.feedback;
    let pose = state.robot.pose;
    let haptic_set = state.haptic_obstacles();
    let nearby = detect_proximity(robot_pos, radius, &state.scene.statics, &state.agents, fcfg.d_max);
    let haptic_near: Vec<_> = nearby
        .iter()
        .filter(|p| {
            matches!(p.kind, EntityKind::Agent(_) | EntityKind::Static(StaticCategory::Box | StaticCategory::Pedestal))
        })
        .collect();
    for id in state.near_obstacles.update(haptic_near.iter().map(|p| p.id.clone())) {
        let p = haptic_near.iter().find(|p| p.id == id).expect("entered ids come from the current set");
        let center = haptic_set.iter().find(|h| h.id == id).map_or(robot_pos, |h| h.center);
        let zone = classify_zone(pose.inverse_transform_point(center).x, fcfg);
        state.log_event(
            EventKind::ProximityObstacle,
            format!("id={id} zone={} d={:.3}", zone_label(zone), p.distance),
        )?;
    }
    let shelves_near: Vec<_> =
        nearby.iter().filter(|p| p.category == Category::Shelf && p.distance < fcfg.shelf_audio_radius).collect();
    for id in state.near_shelves.update(shelves_near.iter().map(|p| p.id.clone())) {
        let p = shelves_near.iter().find(|p| p.id == id).expect("entered ids come from the current set");
        state.log_event(EventKind::ProximityShelf, format!("id={id} d={:.3}", p.distance))?;
    }

    let goal = state.scene.goal;
    let reached = check_goal(robot_pos, &goal);
    if reached {
        state.status = SimStatus::GoalReached;
        state.log.status = SimStatus::GoalReached.as_str().into();
        state.log_event(EventKind::GoalReached, format!("d={:.3}", robot_pos.distance(goal.position)))?;
    }

    // 7. feedback frame, with this tick's cues
    let cue_inputs = CueInputs {
        now,
        pose,
        near_shelf: !shelves_near.is_empty(),
        stuck: state.status == SimStatus::Stuck,
        goal_reached: reached,
        direction_target: state.path.as_ref().map(|p| p.next_waypoint()),
        replanned: replan_succeeded && reason.is_some_and(|r| r != ReplanReason::Periodic),
    };
    let cues = state.cues.update(&cue_inputs, fcfg);
    for cue in &cues {
        state.log_event(EventKind::CueEmitted, cue_label(cue))?;
    }
    let remaining = state.path.as_ref().map(|p| &p.waypoints[p.current_index..]);
    let mut frame = compose_frame(&pose, radius, &haptic_set, remaining, cues, fcfg);
    if reached {
        frame.path_polyline.clear();
        state.path = None;
    }

    Ok(TickOutcome { frame, rebuilt, replan: reason, replan_succeeded, new_contacts, motion_blocked })
}

fn zone_label(zone: Zone) -> &'static str {
    match zone {
        Zone::Left => "left",
        Zone::Center => "center",
        Zone::Right => "right",
        Zone::None => "none",
    }
}

fn cue_label(cue: &AudioCue) -> String {
    match cue.kind {
        CueKind::Direction { hour } => format!("direction:{hour}"),
        CueKind::ShelfProximity => "shelf_proximity".into(),
        CueKind::Stuck => "stuck".into(),
        CueKind::GoalReached => "goal_reached".into(),
    }
}

/// Steers toward the next waypoint: turn in place until the heading is
/// within one tick's turn of the bearing, then drive straight at it. Waits
/// while a scripted agent is predicted to cross the stretch just ahead.
#[derive(Clone, Debug)]
pub struct Autopilot {
    plan_seq: u64,
    index: usize,
    /// Distance at which a waypoint counts as reached, m.
    pub arrive_radius: f64,
    /// How far ahead along the path the yield check looks, m.
    pub lookahead: f64,
    /// How far ahead in time agent positions are extrapolated, s.
    pub horizon: f64,
    /// Extra gap kept to predicted agent positions, m.
    pub margin: f64,
}

impl Default for Autopilot {
    fn default() -> Self {
        Self { plan_seq: 0, index: 1, arrive_radius: 0.05, lookahead: 1.2, horizon: 3.0, margin: 0.3 }
    }
}

impl Autopilot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn control(&mut self, state: &SimState, cfg: &TickConfig) -> ControlInput {
        let Some(path) = state.path.as_ref() else {
            return ControlInput::IDLE;
        };
        if state.plan_seq != self.plan_seq {
            self.plan_seq = state.plan_seq;
            self.index = 1;
        }
        let pose = state.robot.pose;
        let pos = pose.position();
        let last = path.waypoints.len() - 1;
        self.index = self.index.min(last);
        while self.index < last && pos.distance(path.waypoints[self.index]) < self.arrive_radius {
            self.index += 1;
        }
        let target = path.waypoints[self.index];
        let to = target - pos;
        let dist = to.length();
        if dist < 1e-9 {
            return ControlInput::IDLE;
        }
        let err = wrap_angle(to.x.atan2(to.z) - pose.heading);
        let turn_step = cfg.yaw_rate_max * cfg.dt;
        let axis_x = (err / turn_step).clamp(-1.0, 1.0);
        if err.abs() > turn_step + 1e-12 {
            return ControlInput::new(axis_x, 0.0);
        }
        if self.must_yield(state, path) {
            return ControlInput::new(axis_x, 0.0);
        }
        ControlInput::new(axis_x, (dist / (cfg.v_max * cfg.dt)).min(1.0))
    }

    fn must_yield(&self, state: &SimState, path: &Path) -> bool {
        let pos = state.robot.pose.position();
        let mut ahead = vec![pos];
        let mut left = self.lookahead;
        let mut prev = pos;
        for &w in &path.waypoints[self.index..] {
            let len = prev.distance(w);
            if len >= left {
                ahead.push(prev.lerp(w, left / len));
                break;
            }
            ahead.push(w);
            left -= len;
            prev = w;
        }
        let steps = (self.horizon / 0.1).round() as usize;
        for a in &state.agents {
            if a.velocity == Vec2::ZERO {
                continue;
            }
            let clearance = a.radius + state.robot_radius() + self.margin;
            let mut here = false;
            let mut there = false;
            for k in 0..=steps {
                let p = a.position + a.velocity * (k as f64 * 0.1);
                here |= p.distance(pos) < clearance;
                there |= ahead.windows(2).any(|w| segment_intersects_disc(w[0], w[1], p, clearance));
            }
            // already in the sweep: keep moving to get out of it
            if there && !here {
                return true;
            }
        }
        false
    }
}

/// Headless control source: timed operator inputs, or the autopilot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlScript {
    pub version: String,
    #[serde(default)]
    pub autopilot: bool,
    #[serde(default)]
    pub inputs: Vec<ControlInput>,
}

impl ControlScript {
    pub fn autopilot() -> Self {
        Self { version: CONTROL_VERSION.into(), autopilot: true, inputs: Vec::new() }
    }

    pub fn timed(inputs: Vec<ControlInput>) -> Self {
        Self { version: CONTROL_VERSION.into(), autopilot: false, inputs }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let script: Self = serde_path_to_error::deserialize(de).map_err(|e| SimError::Script(e.to_string()))?;
        if script.version != CONTROL_VERSION {
            return Err(SimError::Script(format!("unsupported version `{}`", script.version)));
        }
        if script.inputs.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(SimError::Script("input times must be non-decreasing".into()));
        }
        if !script.autopilot && script.inputs.is_empty() {
            return Err(SimError::Script("a script needs inputs or the autopilot".into()));
        }
        Ok(script)
    }

    /// Latest input at or before `t`; idle before the first one.
    pub fn sample(&self, t: f64) -> ControlInput {
        let k = self.inputs.partition_point(|i| i.t <= t + 1e-9);
        if k == 0 {
            ControlInput::IDLE
        } else {
            self.inputs[k - 1].clamped()
        }
    }

    /// Time of the last timed input, which ends a non-autopilot run.
    pub fn end(&self) -> Option<f64> {
        if self.autopilot {
            None
        } else {
            self.inputs.last().map(|i| i.t)
        }
    }
}

/// Runs a whole session without a client. The returned log's status is
/// `goal_reached`, `completed` (timed script used up) or `timeout`.
pub fn run_headless(
    scene: &SceneDescription,
    script: &ControlScript,
    cfg: &TickConfig,
) -> Result<SessionLog, SimError> {
    let mut state = SimState::new(scene.clone(), cfg)?;
    let mut pilot = Autopilot::new();
    let max_ticks = (cfg.time_cap / cfg.dt).round() as u64;
    loop {
        if state.status == SimStatus::GoalReached {
            break;
        }
        if script.end().is_some_and(|end| state.clock >= end - 1e-9) {
            state.log.status = "completed".into();
            break;
        }
        if state.tick >= max_ticks {
            state.log.status = "timeout".into();
            break;
        }
        let t_next = (state.tick + 1) as f64 * cfg.dt;
        if script.autopilot {
            tick_with(&mut state, cfg, |s| pilot.control(s, cfg))?;
        } else {
            tick(&mut state, script.sample(t_next), cfg)?;
        }
    }
    Ok(state.log)
}
