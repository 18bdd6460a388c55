use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geom::{point_segment_distance, segment_triangle_overlap, Vec2};
use crate::navmesh::NavMeshRuntime;

use super::{Path, PlannerConfig};

/// Overlap length below which a segment only grazes a blocked triangle.
const OVERLAP_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanReason {
    Periodic,
    PathInvalidated,
    Stuck,
    Proximity,
}

impl ReplanReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Periodic => "periodic",
            Self::PathInvalidated => "path_invalidated",
            Self::Stuck => "stuck",
            Self::Proximity => "proximity",
        }
    }
}

/// A moving obstacle as seen by the replan check.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedObstacle {
    pub id: String,
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct RobotMotion {
    pub position: Vec2,
    pub speed: f64,
    pub radius: f64,
}

/// Remembers what `needs_replan` has to know across ticks: when the last plan
/// was made, how long the robot has been slow, and which obstacles were
/// already close to the path.
#[derive(Clone, Debug, Default)]
pub struct ReplanMonitor {
    last_plan: Option<f64>,
    slow_since: Option<f64>,
    near_path: BTreeSet<String>,
}

impl ReplanMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_plan(&self) -> Option<f64> {
        self.last_plan
    }

    pub fn mark_planned(&mut self, now: f64) {
        self.last_plan = Some(now);
    }

    /// Updates the trackers and returns the highest-priority reason to
    /// replan, if any. Priority: invalidated path, stuck, proximity,
    /// periodic. A monitor that has never planned reports `Periodic`.
    pub fn needs_replan(
        &mut self,
        robot: RobotMotion,
        rt: &NavMeshRuntime,
        path: Option<&Path>,
        obstacles: &[TrackedObstacle],
        now: f64,
        config: &PlannerConfig,
    ) -> Option<ReplanReason> {
        // stuck timer
        if robot.speed.abs() < config.stuck_speed {
            self.slow_since.get_or_insert(now);
        } else {
            self.slow_since = None;
        }
        let stuck = match (path, self.slow_since) {
            (Some(_), Some(since)) => now - since > config.stuck_duration,
            _ => false,
        };
        if stuck {
            self.slow_since = Some(now);
        }

        // proximity: fire once per obstacle newly close to the path
        let mut near = BTreeSet::new();
        if let Some(path) = path {
            for ob in obstacles {
                if ob.center.distance(robot.position) >= config.obstacle_check_radius {
                    continue;
                }
                let clearance = ob.radius + robot.radius;
                if path.remaining_segments().any(|(a, b)| point_segment_distance(a, b, ob.center) < clearance) {
                    near.insert(ob.id.clone());
                }
            }
        }
        let proximity = near.iter().any(|id| !self.near_path.contains(id));
        self.near_path = near;

        let invalidated = path.is_some_and(|p| path_invalidated(rt, p));
        let periodic = self.last_plan.is_none_or(|last| now - last >= config.replan_period - 1e-9);

        if invalidated {
            Some(ReplanReason::PathInvalidated)
        } else if stuck {
            Some(ReplanReason::Stuck)
        } else if proximity {
            Some(ReplanReason::Proximity)
        } else if periodic {
            Some(ReplanReason::Periodic)
        } else {
            None
        }
    }
}

/// Whether any remaining segment of `path` passes through the interior of a
/// blocked triangle.
pub fn path_invalidated(rt: &NavMeshRuntime, path: &Path) -> bool {
    let mesh = rt.mesh();
    let blocked: Vec<usize> = (0..mesh.len()).filter(|&t| rt.is_blocked(t)).collect();
    if blocked.is_empty() {
        return false;
    }
    path.remaining_segments()
        .any(|(a, b)| blocked.iter().any(|&t| segment_triangle_overlap(mesh.triangle(t), a, b) > OVERLAP_EPS))
}
