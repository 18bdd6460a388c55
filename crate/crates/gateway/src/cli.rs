use std::io::Write;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use navvi_core::geom::Vec2;
use navvi_core::navmesh::{build_navmesh, BuildConfig, MeshDump, NavMesh, NavMeshRuntime};
use navvi_core::planner::{plan, PlannerConfig};
use navvi_core::sim::{run_headless, ControlScript, TickConfig};
use navvi_core::world::GoalSpec;

use crate::scenes::load_arg;
use crate::server::Server;
use crate::session::SessionConfig;

/// Per-query plan budget the bench reports against, ms.
pub const PLAN_BUDGET_MS: f64 = 1.0;

#[derive(Debug, Parser)]
#[command(name = "navvi", version, about = "Warehouse teleoperation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SceneDir {
    /// Directory holding `<name>.json` scene files.
    #[arg(long, env = "NAVVI_SCENE_DIR", default_value = "scenes")]
    pub scene_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the simulation over WebSocket ("navvi-wire/1").
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        /// Listen address.
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        host: IpAddr,
        #[command(flatten)]
        scenes: SceneDir,
        #[arg(long, default_value_t = 50.0)]
        tick_hz: f64,
        #[arg(long, default_value_t = 20.0)]
        snapshot_hz: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a session headless and write its event log.
    Run {
        /// Scene name under the scene directory, or a path to a scene file.
        #[arg(long)]
        scene: String,
        /// Control script file, or `autopilot`.
        #[arg(long)]
        script: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        log_out: Option<PathBuf>,
        /// Sim-time limit, s.
        #[arg(long, default_value_t = 300.0)]
        time_cap: f64,
        #[command(flatten)]
        scenes: SceneDir,
    },
    /// Bake a scene's navmesh and dump it as JSON.
    Bake {
        #[arg(long)]
        scene: String,
        /// Destination; stdout when omitted.
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        #[command(flatten)]
        scenes: SceneDir,
    },
    /// Time random plan queries on a scene's baked mesh.
    Bench {
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 1000)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        scenes: SceneDir,
    },
}

pub fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve { port, host, scenes, tick_hz, snapshot_hz, seed } => {
            let config = SessionConfig { scene_dir: scenes.scene_dir, tick_hz, snapshot_hz, seed };
            let runtime = tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
            runtime.block_on(async {
                let server = Server::bind(SocketAddr::new(host, port), config).await?;
                eprintln!("navvi: listening on ws://{}", server.local_addr()?);
                server.run().await
            })
        }
        Command::Run { scene, script, seed, log_out, time_cap, scenes } => {
            let scene = load_arg(&scenes.scene_dir, &scene)?;
            let script = if script == "autopilot" {
                ControlScript::autopilot()
            } else {
                let text = std::fs::read_to_string(&script).with_context(|| format!("cannot read {script}"))?;
                ControlScript::from_json(&text).with_context(|| format!("bad control script {script}"))?
            };
            if !(time_cap > 0.0 && time_cap.is_finite()) {
                bail!("--time-cap must be a positive number of seconds");
            }
            let cfg = TickConfig { seed, time_cap, ..TickConfig::for_scene(&scene) };
            let log = run_headless(&scene, &script, &cfg)?;
            let csv = log.finalize();
            match &log_out {
                Some(path) => std::fs::write(path, &csv).with_context(|| format!("cannot write {}", path.display()))?,
                None => std::io::stdout().write_all(&csv)?,
            }
            eprintln!(
                "status={} elapsed={} shelf_collisions={} obstacle_collisions={} events={}",
                log.status,
                log.elapsed().map_or("-".into(), |t| format!("{t:.2}")),
                log.shelf_collision_count,
                log.obstacle_collision_count,
                log.events.len()
            );
            Ok(())
        }
        Command::Bake { scene, mesh_out, scenes } => {
            let scene = load_arg(&scenes.scene_dir, &scene)?;
            let mesh = build_navmesh(&scene, BuildConfig::for_scene(&scene))?;
            let mut json = MeshDump::from_mesh(&mesh).to_json();
            json.push('\n');
            match &mesh_out {
                Some(path) => std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?,
                None => std::io::stdout().write_all(json.as_bytes())?,
            }
            eprintln!("baked {} triangles, {:.3} m² walkable", mesh.len(), mesh.total_area());
            Ok(())
        }
        Command::Bench { scene, queries, seed, scenes } => {
            if queries == 0 {
                bail!("--queries must be at least 1");
            }
            let scene = load_arg(&scenes.scene_dir, &scene)?;
            let mesh = build_navmesh(&scene, BuildConfig::for_scene(&scene))?;
            let report = bench(NavMeshRuntime::new(mesh, scene.robot.radius), queries, seed)?;
            println!("{report}");
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub triangles: usize,
    pub queries: usize,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub nodes_median: usize,
    pub nodes_mean: f64,
    pub nodes_max: usize,
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "triangles: {}", self.triangles)?;
        writeln!(f, "queries: {}", self.queries)?;
        writeln!(f, "latency_ms: median {:.4} p99 {:.4}", self.median_ms, self.p99_ms)?;
        writeln!(f, "nodes_expanded: median {} mean {:.1} max {}", self.nodes_median, self.nodes_mean, self.nodes_max)?;
        let verdict = if self.median_ms < PLAN_BUDGET_MS { "met" } else { "missed" };
        write!(f, "target: median < {PLAN_BUDGET_MS} ms per plan ({verdict})")
    }
}

/// Plans between uniformly random points of random triangles.
pub fn bench(rt: NavMeshRuntime, queries: usize, seed: u64) -> anyhow::Result<BenchReport> {
    let mesh = rt.mesh();
    if mesh.is_empty() {
        bail!("the scene has no walkable area");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = PlannerConfig::default();
    let mut times = Vec::with_capacity(queries);
    let mut nodes = Vec::with_capacity(queries);
    for _ in 0..queries {
        let a = rng.gen_range(0..mesh.len());
        let start = point_in(&mut rng, mesh, a);
        let b = rng.gen_range(0..mesh.len());
        let goal = point_in(&mut rng, mesh, b);
        let clock = Instant::now();
        let result = plan(&rt, start, &GoalSpec::at(goal), &cfg);
        times.push(clock.elapsed().as_secs_f64() * 1e3);
        match result {
            Ok((_, stats)) => nodes.push(stats.nodes_expanded),
            Err(err) if err.is_unreachable() => {}
            Err(err) => return Err(err.into()),
        }
    }
    times.sort_by(f64::total_cmp);
    nodes.sort_unstable();
    let quantile = |q: f64| times[((times.len() - 1) as f64 * q).round() as usize];
    Ok(BenchReport {
        triangles: mesh.len(),
        queries,
        median_ms: quantile(0.5),
        p99_ms: quantile(0.99),
        nodes_median: nodes.get(nodes.len() / 2).copied().unwrap_or(0),
        nodes_mean: if nodes.is_empty() { 0.0 } else { nodes.iter().sum::<usize>() as f64 / nodes.len() as f64 },
        nodes_max: nodes.last().copied().unwrap_or(0),
    })
}

fn point_in(rng: &mut ChaCha8Rng, mesh: &NavMesh, t: usize) -> Vec2 {
    let [a, b, c] = mesh.triangle(t);
    let (mut u, mut w): (f64, f64) = (rng.gen(), rng.gen());
    if u + w > 1.0 {
        u = 1.0 - u;
        w = 1.0 - w;
    }
    a + (b - a) * u + (c - a) * w
}
