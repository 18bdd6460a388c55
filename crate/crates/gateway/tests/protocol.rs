use proptest::prelude::*;
use serde_json::{json, Value};

use navvi_core::feedback::{AudioCue, CueKind, HapticCommand, ObstacleReport, Zone};
use navvi_core::geom::Vec2;
use navvi_core::sim::SimStatus;
use navvi_core::world::{AgentKind, GoalSpec};
use navvi_gateway::protocol::{
    parse_client, AgentView, ClientCommand, Counters, CueView, ErrorCode, PlanView, RobotView, Role, ServerMessage,
    Snapshot, WIRE_VERSION,
};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE), Just(1e300), Just(0.1 + 0.2)]
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (finite(), finite()).prop_map(|(x, z)| Vec2::new(x, z))
}

fn zone() -> impl Strategy<Value = Zone> {
    prop_oneof![Just(Zone::None), Just(Zone::Left), Just(Zone::Center), Just(Zone::Right)]
}

fn cue() -> impl Strategy<Value = CueView> {
    let kind = prop_oneof![
        (1u8..=12).prop_map(|hour| CueKind::Direction { hour }),
        Just(CueKind::ShelfProximity),
        Just(CueKind::Stuck),
        Just(CueKind::GoalReached),
    ];
    (kind, finite()).prop_map(|(kind, t)| CueView::from(AudioCue { kind, t }))
}

fn agent() -> impl Strategy<Value = AgentView> {
    let kind = prop_oneof![Just(AgentKind::Forklift), Just(AgentKind::Worker), Just(AgentKind::PalletRobot)];
    ("[a-z_]{1,8}\\PC{0,3}", kind, finite(), finite(), 0.0..3.0f64).prop_map(|(id, kind, x, z, radius)| AgentView {
        id,
        kind,
        x,
        z,
        radius,
    })
}

fn snapshot() -> impl Strategy<Value = Snapshot> {
    let status = prop_oneof![Just(SimStatus::Running), Just(SimStatus::GoalReached), Just(SimStatus::Stuck)];
    let robot = (finite(), finite(), -3.2..3.2f64, -2.0..2.0f64).prop_map(|(x, z, heading, speed)| RobotView {
        x,
        z,
        heading,
        speed,
    });
    let haptic = (0.0..1.0f64, 0.0..1.0f64, zone()).prop_map(|(left, right, zone)| HapticCommand { left, right, zone });
    let near =
        proptest::option::of(("[a-z]{1,6}", 0.0..5.0f64, zone()).prop_map(|(id, distance, zone)| ObstacleReport {
            id,
            distance,
            zone,
        }));
    let plan = proptest::option::of(
        (0usize..5000, 0.0..10.0f64).prop_map(|(nodes_expanded, query_ms)| PlanView { nodes_expanded, query_ms }),
    );
    (
        (any::<u64>(), any::<u64>(), finite(), status, any::<bool>(), robot),
        (proptest::collection::vec(agent(), 0..4), proptest::collection::vec(vec2(), 0..6), haptic, finite(), near),
        (proptest::collection::vec(cue(), 0..4), any::<(u32, u32)>(), vec2(), 0.0..3.0f64, plan),
    )
        .prop_map(
            |(
                (seq, tick, clock, status, running, robot),
                (agents, path_polyline, haptic, haptic_raw, nearest_obstacle),
                (cues, counts, goal, threshold, last_plan),
            )| Snapshot {
                seq,
                tick,
                clock,
                status,
                running,
                robot,
                agents,
                path_polyline,
                haptic,
                haptic_raw,
                nearest_obstacle,
                cues,
                counters: Counters { shelf_collisions: counts.0, obstacle_collisions: counts.1 },
                goal: GoalSpec { position: goal, threshold },
                last_plan,
            },
        )
}

proptest! {
    #[test]
    fn snapshot_round_trips(snap in snapshot()) {
        let msg = ServerMessage::Snapshot(snap);
        let text = msg.to_json();
        let back = ServerMessage::from_json(&text).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn axes_are_clamped_on_receipt(x in -1e3..1e3f64, y in -1e3..1e3f64) {
        let text = json!({"v": WIRE_VERSION, "type": "axes", "axis_x": x, "axis_y": y}).to_string();
        let got = parse_client(&text).unwrap();
        prop_assert_eq!(got, ClientCommand::Axes { axis_x: x.clamp(-1.0, 1.0), axis_y: y.clamp(-1.0, 1.0) });
    }
}

#[test]
fn every_client_command_round_trips() {
    let all = [
        ClientCommand::Axes { axis_x: 0.25, axis_y: -1.0 },
        ClientCommand::LoadScene { name: "warehouse_a".into() },
        ClientCommand::Start,
        ClientCommand::Reset,
        ClientCommand::SetGoal { x: 3.5, z: 7.25 },
    ];
    for cmd in all {
        assert_eq!(parse_client(&cmd.to_json()).unwrap(), cmd);
    }
}

#[test]
fn client_wire_shapes() {
    let v: Value = serde_json::from_str(&ClientCommand::SetGoal { x: 1.0, z: 2.0 }.to_json()).unwrap();
    assert_eq!(v, json!({"v": "navvi-wire/1", "type": "set_goal", "x": 1.0, "z": 2.0}));
    let v: Value = serde_json::from_str(&ClientCommand::Start.to_json()).unwrap();
    assert_eq!(v, json!({"v": "navvi-wire/1", "type": "start"}));
}

#[test]
fn server_wire_shapes() {
    let v: Value = serde_json::from_str(&ServerMessage::Role { role: Role::Driver }.to_json()).unwrap();
    assert_eq!(v, json!({"v": "navvi-wire/1", "type": "role", "role": "driver"}));
    let err = ServerMessage::Error { code: ErrorCode::NotDriver, message: "m".into() };
    let v: Value = serde_json::from_str(&err.to_json()).unwrap();
    assert_eq!(v, json!({"v": "navvi-wire/1", "type": "error", "code": "not_driver", "message": "m"}));
    let cue = CueView::from(AudioCue { kind: CueKind::Direction { hour: 3 }, t: 5.0 });
    assert_eq!(
        serde_json::to_value(&cue).unwrap(),
        json!({"kind": "direction", "hour": 3, "t": 5.0, "phrase": "3 o'clock"})
    );
}

#[test]
fn bad_frames_get_machine_readable_codes() {
    let cases = [
        ("not json", ErrorCode::MalformedMessage),
        ("[1, 2]", ErrorCode::MalformedMessage),
        (r#"{"type": "start"}"#, ErrorCode::MalformedMessage),
        (r#"{"v": 1, "type": "start"}"#, ErrorCode::MalformedMessage),
        (r#"{"v": "navvi-wire/2", "type": "start"}"#, ErrorCode::UnsupportedVersion),
        (r#"{"v": "navvi-wire/1", "type": "jump"}"#, ErrorCode::MalformedMessage),
        (r#"{"v": "navvi-wire/1", "type": "axes", "axis_x": 0.5}"#, ErrorCode::MalformedMessage),
        (r#"{"v": "navvi-wire/1", "type": "axes", "axis_x": "fast", "axis_y": 0}"#, ErrorCode::MalformedMessage),
        (r#"{"v": "navvi-wire/1", "type": "load_scene"}"#, ErrorCode::MalformedMessage),
    ];
    for (text, code) in cases {
        assert_eq!(parse_client(text).unwrap_err().code, code, "{text}");
    }
}
