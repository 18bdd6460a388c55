//! Transport-free session state: client roles, the inbound command queue,
//! the sim itself and snapshot decimation. The server drives it from a
//! single task; tests drive it directly.

use std::path::PathBuf;

use tracing::{debug, info, warn};

use navvi_core::feedback::{AudioCue, FeedbackFrame};
use navvi_core::geom::Vec2;
use navvi_core::sim::{tick, ControlInput, SimError, SimState, SimStatus, TickConfig};
use navvi_core::world::SceneDescription;

use crate::protocol::{
    AgentView, ClientCommand, Counters, CueView, ErrorCode, Rejection, RobotView, Role, SceneInfo, ServerMessage,
    Snapshot,
};
use crate::scenes::{load_named, LookupError};

pub type ClientId = u64;

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub scene_dir: PathBuf,
    pub tick_hz: f64,
    pub snapshot_hz: f64,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { scene_dir: PathBuf::from("scenes"), tick_hz: 50.0, snapshot_hz: 20.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outbound {
    To(ClientId, ServerMessage),
    All(ServerMessage),
}

struct Loaded {
    name: String,
    base: SceneDescription,
    state: SimState,
    cfg: TickConfig,
}

pub struct Session {
    config: SessionConfig,
    next_id: ClientId,
    /// Connection order; the first entry drives.
    clients: Vec<ClientId>,
    loaded: Option<Loaded>,
    running: bool,
    axes: ControlInput,
    queue: Vec<ClientCommand>,
    cues: Vec<AudioCue>,
    frame: FeedbackFrame,
    snapshot_credit: f64,
    seq: u64,
}

impl Session {
    pub fn new(config: SessionConfig) -> Self {
        Self {
            config,
            next_id: 1,
            clients: Vec::new(),
            loaded: None,
            running: false,
            axes: ControlInput::IDLE,
            queue: Vec::new(),
            cues: Vec::new(),
            frame: FeedbackFrame::empty(),
            snapshot_credit: 0.0,
            seq: 0,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn driver(&self) -> Option<ClientId> {
        self.clients.first().copied()
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn state(&self) -> Option<&SimState> {
        self.loaded.as_ref().map(|l| &l.state)
    }

    fn role_of(&self, id: ClientId) -> Role {
        if self.driver() == Some(id) {
            Role::Driver
        } else {
            Role::Observer
        }
    }

    pub fn connect(&mut self) -> (ClientId, Vec<Outbound>) {
        let id = self.next_id;
        self.next_id += 1;
        self.clients.push(id);
        let role = self.role_of(id);
        info!(client = id, ?role, "client connected");
        let mut out = vec![Outbound::To(
            id,
            ServerMessage::Welcome {
                client_id: id,
                role,
                tick_hz: self.config.tick_hz,
                snapshot_hz: self.config.snapshot_hz,
            },
        )];
        if let Some(l) = &self.loaded {
            out.push(Outbound::To(id, ServerMessage::Scene(SceneInfo::of(&l.name, &l.state))));
        }
        (id, out)
    }

    pub fn disconnect(&mut self, id: ClientId) -> Vec<Outbound> {
        let was_driver = self.driver() == Some(id);
        self.clients.retain(|&c| c != id);
        info!(client = id, "client disconnected");
        if !was_driver {
            return Vec::new();
        }
        self.axes = ControlInput::IDLE;
        self.queue.clear();
        match self.driver() {
            Some(next) => {
                info!(client = next, "promoted to driver");
                vec![Outbound::To(next, ServerMessage::Role { role: Role::Driver })]
            }
            None => Vec::new(),
        }
    }

    /// Accepts a decoded client message. Nothing touches the sim until the
    /// next [`Session::step`]; axes are latest-wins.
    pub fn receive(&mut self, id: ClientId, command: ClientCommand) -> Vec<Outbound> {
        if self.driver() != Some(id) {
            let msg = Rejection::new(ErrorCode::NotDriver, "only the driver may send control messages");
            return vec![Outbound::To(id, msg.into_message())];
        }
        match command {
            ClientCommand::Axes { axis_x, axis_y } => self.axes = ControlInput::new(axis_x, axis_y),
            other => self.queue.push(other),
        }
        Vec::new()
    }

    /// One tick boundary: queued commands, then the sim tick, then a
    /// snapshot if the decimation budget allows.
    pub fn step(&mut self) -> Vec<Outbound> {
        let mut out = Vec::new();
        for command in std::mem::take(&mut self.queue) {
            if let Err(rejection) = self.apply(command, &mut out) {
                if let Some(driver) = self.driver() {
                    out.push(Outbound::To(driver, rejection.into_message()));
                }
            }
        }

        if let (true, Some(l)) = (self.running, self.loaded.as_mut()) {
            match tick(&mut l.state, self.axes, &l.cfg) {
                Ok(outcome) => {
                    self.cues.extend(outcome.frame.cues.iter().copied());
                    self.frame = outcome.frame;
                    if l.state.status == SimStatus::GoalReached {
                        info!(clock = l.state.clock, "goal reached");
                        self.running = false;
                    }
                }
                Err(SimError::Finished) => self.running = false,
                Err(err) => {
                    warn!(%err, "tick failed; pausing");
                    self.running = false;
                    out.push(Outbound::All(Rejection::new(ErrorCode::SimFault, err.to_string()).into_message()));
                }
            }
        }

        if self.loaded.is_some() {
            self.snapshot_credit += (self.config.snapshot_hz / self.config.tick_hz).min(1.0);
            if self.snapshot_credit >= 1.0 - 1e-9 {
                self.snapshot_credit -= 1.0;
                let snapshot = self.snapshot();
                out.push(Outbound::All(ServerMessage::Snapshot(snapshot)));
            }
        }
        out
    }

    fn apply(&mut self, command: ClientCommand, out: &mut Vec<Outbound>) -> Result<(), Rejection> {
        debug!(?command, "applying");
        match command {
            ClientCommand::Axes { .. } => unreachable!("axes are never queued"),
            ClientCommand::LoadScene { name } => {
                let scene = load_named(&self.config.scene_dir, &name).map_err(|e| {
                    let code = match e {
                        LookupError::Invalid { .. } => ErrorCode::InvalidScene,
                        _ => ErrorCode::UnknownScene,
                    };
                    Rejection::new(code, e.to_string())
                })?;
                self.install(name, scene)?;
                info!(scene = %self.loaded.as_ref().unwrap().name, "scene loaded");
            }
            ClientCommand::Reset => {
                let l = self.loaded.as_ref().ok_or_else(no_scene)?;
                let (name, base) = (l.name.clone(), l.base.clone());
                self.install(name, base)?;
            }
            ClientCommand::Start => {
                let l = self.loaded.as_ref().ok_or_else(no_scene)?;
                if l.state.status == SimStatus::GoalReached {
                    return Err(finished());
                }
                self.running = true;
                return Ok(());
            }
            ClientCommand::SetGoal { x, z } => {
                let l = self.loaded.as_mut().ok_or_else(no_scene)?;
                let p = Vec2::new(x, z);
                if !p.is_finite() || !l.state.scene.floor.contains(p) {
                    return Err(Rejection::new(ErrorCode::InvalidGoal, format!("({x}, {z}) is off the floor")));
                }
                l.state.set_goal(p).map_err(|_| finished())?;
                self.frame.path_polyline.clear();
            }
        }
        let l = self.loaded.as_ref().expect("scene present after a successful command");
        out.push(Outbound::All(ServerMessage::Scene(SceneInfo::of(&l.name, &l.state))));
        Ok(())
    }

    fn install(&mut self, name: String, scene: SceneDescription) -> Result<(), Rejection> {
        let cfg = TickConfig { dt: 1.0 / self.config.tick_hz, seed: self.config.seed, ..TickConfig::for_scene(&scene) };
        let state =
            SimState::new(scene.clone(), &cfg).map_err(|e| Rejection::new(ErrorCode::InvalidScene, e.to_string()))?;
        self.loaded = Some(Loaded { name, base: scene, state, cfg });
        self.running = false;
        self.axes = ControlInput::IDLE;
        self.cues.clear();
        self.frame = FeedbackFrame::empty();
        Ok(())
    }

    fn snapshot(&mut self) -> Snapshot {
        let l = self.loaded.as_ref().expect("snapshots need a scene");
        let s = &l.state;
        self.seq += 1;
        Snapshot {
            seq: self.seq,
            tick: s.tick,
            clock: s.clock,
            status: s.status,
            running: self.running,
            robot: RobotView {
                x: s.robot.pose.x,
                z: s.robot.pose.z,
                heading: s.robot.pose.heading,
                speed: s.robot.speed,
            },
            agents: s
                .agents
                .iter()
                .map(|a| AgentView {
                    id: a.id.clone(),
                    kind: a.kind,
                    x: a.position.x,
                    z: a.position.z,
                    radius: a.radius,
                })
                .collect(),
            path_polyline: self.frame.path_polyline.clone(),
            haptic: self.frame.haptic,
            haptic_raw: self.frame.haptic_raw,
            nearest_obstacle: self.frame.nearest_obstacle.clone(),
            cues: self.cues.drain(..).map(CueView::from).collect(),
            counters: Counters {
                shelf_collisions: s.log.shelf_collision_count,
                obstacle_collisions: s.log.obstacle_collision_count,
            },
            goal: s.scene.goal,
            last_plan: s.last_plan_stats.map(Into::into),
        }
    }
}

fn no_scene() -> Rejection {
    Rejection::new(ErrorCode::NoScene, "load a scene first")
}

fn finished() -> Rejection {
    Rejection::new(ErrorCode::SessionFinished, "goal already reached; send reset")
}
