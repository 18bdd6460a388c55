use std::path::PathBuf;
use std::process::{Command, Output};

use navvi_core::events::{parse_csv, EventKind};
use navvi_core::navmesh::MeshDump;
use serde_json::Value;

fn scene_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn navvi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_navvi"))
        .args(args)
        .env("NAVVI_SCENE_DIR", scene_dir())
        .env("NAVVI_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_autopilot_writes_a_csv_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.csv");
    let out = navvi(&["run", "--scene", "warehouse_a", "--script", "autopilot", "--log-out", log.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = parse_csv(&std::fs::read(&log).unwrap()).unwrap();
    assert_eq!(parsed.status, "goal_reached");
    assert_eq!(parsed.events.iter().filter(|e| e.kind == EventKind::GoalReached).count(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("status=goal_reached"));
}

#[test]
fn run_with_a_script_file_and_time_cap() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("idle.json");
    std::fs::write(
        &script,
        r#"{"version":"navvi-control/1","inputs":[{"t":0,"axis_x":0,"axis_y":0},{"t":60,"axis_x":0,"axis_y":0}]}"#,
    )
    .unwrap();
    let out = navvi(&["run", "--scene", "empty_room", "--script", script.to_str().unwrap(), "--time-cap", "2"]);
    assert!(out.status.success());
    let parsed = parse_csv(stdout(&out).as_bytes()).unwrap();
    assert_eq!(parsed.status, "timeout");
    assert_eq!(parsed.shelf_collision_count + parsed.obstacle_collision_count, 0);
}

#[test]
fn run_reports_bad_inputs() {
    let out = navvi(&["run", "--scene", "no_such_scene", "--script", "autopilot"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_scene"));

    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("bad.json");
    std::fs::write(&script, r#"{"version":"navvi-control/9","autopilot":true}"#).unwrap();
    let out = navvi(&["run", "--scene", "empty_room", "--script", script.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn bake_empty_room_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.json");
    let out = navvi(&["bake", "--scene", "empty_room", "--mesh-out", mesh.to_str().unwrap()]);
    assert!(out.status.success());
    let got = std::fs::read_to_string(&mesh).unwrap();
    assert_eq!(got, std::fs::read_to_string(golden("empty_room.mesh.json")).unwrap());

    // walls 0.4 m thick, radius 0.35 rounded up to two 0.2 m cells: 10.4 m square
    let dump: MeshDump = serde_json::from_str(&got).unwrap();
    assert!((dump.total_area - 10.4 * 10.4).abs() < 1e-9);
    assert_eq!(dump.info.region_count, 1);
}

#[test]
fn bake_warehouse_carries_build_metadata() {
    let out = navvi(&["bake", "--scene", "warehouse_a"]);
    assert!(out.status.success());
    let dump: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let want: Value = serde_json::from_str(&std::fs::read_to_string(golden("warehouse_a.meta.json")).unwrap()).unwrap();
    for key in ["format", "info", "triangle_count", "portal_count"] {
        assert_eq!(dump[key], want[key], "{key}");
    }
    let area = dump["total_area"].as_f64().unwrap();
    assert!((area - want["total_area"].as_f64().unwrap()).abs() < 1e-6);

    let cell = dump["info"]["cell_size"].as_f64().unwrap();
    let cells = dump["info"]["walkable_cells"].as_f64().unwrap();
    assert!((area - cells * cell * cell).abs() < 1e-6, "mesh area should equal the walkable cell area");
    assert_eq!(dump["triangles"].as_array().unwrap().len(), 1300);
}

#[test]
fn bake_accepts_a_scene_path() {
    let path = scene_dir().join("empty_room.json");
    let out = navvi(&["bake", "--scene", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), std::fs::read_to_string(golden("empty_room.mesh.json")).unwrap());
}

#[test]
fn bench_prints_latency_and_nodes_expanded() {
    let out = navvi(&["bench", "--scene", "warehouse_a", "--queries", "1000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("triangles: 1300"), "{text}");
    assert!(text.contains("queries: 1000"));
    let latency = text.lines().find(|l| l.starts_with("latency_ms:")).unwrap();
    let nums: Vec<f64> = latency.split_whitespace().filter_map(|w| w.parse().ok()).collect();
    assert_eq!(nums.len(), 2);
    assert!(nums[0] <= nums[1]);
    assert!(text.lines().any(|l| l.starts_with("nodes_expanded: median")));
    assert!(text.contains("target: median < 1 ms"));
}

#[test]
fn unknown_subcommands_and_flags_print_usage() {
    for args in [&["frobnicate"][..], &["run", "--scene", "x", "--script", "autopilot", "--bogus"], &[]] {
        let out = navvi(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"), "{args:?}");
    }
}

#[test]
fn serve_fails_on_a_busy_port() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = navvi(&["serve", "--port", &port]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot listen"));
}
