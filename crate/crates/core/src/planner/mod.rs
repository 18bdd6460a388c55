//! Route planning over the navmesh: A* on the triangle graph, funnel
//! string-pulling, waypoint tracking and the replan policy.

mod funnel;
mod locate;
mod replan;
mod search;

pub use funnel::{advance_waypoint, funnel, Path};
pub use locate::{locate_triangle, Location};
pub use replan::{path_invalidated, ReplanMonitor, ReplanReason, RobotMotion, TrackedObstacle};
pub use search::{astar, NavGraph, PathCorridor, PlanStats};

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::navmesh::NavMeshRuntime;
use crate::world::GoalSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("navigation mesh is empty")]
    EmptyMesh,
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("planner contract violated: {0}")]
    Contract(String),
}

impl PlanError {
    pub fn is_unreachable(&self) -> bool {
        matches!(self, Self::Unreachable(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub heuristic_scale: f64,
    pub replan_period: f64,
    pub stuck_speed: f64,
    pub stuck_duration: f64,
    pub waypoint_radius: f64,
    pub obstacle_check_radius: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            heuristic_scale: 1.0,
            replan_period: 2.0,
            stuck_speed: 0.1,
            stuck_duration: 1.0,
            waypoint_radius: 1.0,
            obstacle_check_radius: 5.0,
        }
    }
}

/// Plans from `start` to the goal around every currently blocked triangle.
///
/// An off-mesh start snaps to the nearest unblocked triangle. An off-mesh
/// goal snaps too, but only when the snapped point is still within the
/// goal's completion threshold; otherwise the goal counts as unreachable.
pub fn plan(
    rt: &NavMeshRuntime,
    start: Vec2,
    goal: &GoalSpec,
    config: &PlannerConfig,
) -> Result<(Path, PlanStats), PlanError> {
    let clock = Instant::now();
    let mesh = rt.mesh();
    if mesh.is_empty() {
        return Err(PlanError::EmptyMesh);
    }
    let from = locate_triangle(mesh, Some(rt.blocked()), start)?;
    let to = locate_triangle(mesh, Some(rt.blocked()), goal.position)?;
    if to.off_mesh && to.point.distance(goal.position) >= goal.threshold {
        return Err(PlanError::Unreachable(format!(
            "goal is {:.2} m from the nearest walkable triangle",
            to.point.distance(goal.position)
        )));
    }
    let graph = NavGraph::new(mesh);
    let (corridor, mut stats) = astar(&graph, rt.blocked(), from.triangle, to.triangle, to.point, config)?;
    let path = funnel(mesh, &corridor, from.point, to.point)?;
    stats.query_time = clock.elapsed().as_secs_f64();
    Ok((path, stats))
}
