use serde::{Deserialize, Serialize};

use crate::geom::{closest_point_on_triangle, polyline_length, Vec2};
use crate::navmesh::{NavMesh, Portal};

use super::{PathCorridor, PlanError};

/// Slack allowed when checking that an endpoint lies in its corridor triangle.
const ENDPOINT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec2>,
    /// Index of the waypoint currently being driven towards.
    pub current_index: usize,
    pub total_cost: f64,
}

impl Path {
    pub fn new(waypoints: Vec<Vec2>) -> Self {
        let total_cost = polyline_length(&waypoints);
        let current_index = usize::from(waypoints.len() > 1);
        Self { waypoints, current_index, total_cost }
    }

    pub fn goal(&self) -> Vec2 {
        *self.waypoints.last().expect("paths are never empty")
    }

    pub fn next_waypoint(&self) -> Vec2 {
        self.waypoints[self.current_index]
    }

    /// Segments still ahead, starting with the one being driven.
    pub fn remaining_segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let from = self.current_index.saturating_sub(1);
        self.waypoints[from..].windows(2).map(|w| (w[0], w[1]))
    }
}

/// String-pulls `start → goal` through the corridor's portals (simple stupid
/// funnel). Corner waypoints are always portal endpoints.
pub fn funnel(mesh: &NavMesh, corridor: &PathCorridor, start: Vec2, goal: Vec2) -> Result<Path, PlanError> {
    let tris = &corridor.triangles;
    let (Some(&first), Some(&last)) = (tris.first(), tris.last()) else {
        return Err(PlanError::Contract("empty corridor".into()));
    };
    if corridor.portals.len() + 1 != tris.len() {
        return Err(PlanError::Contract("portal count does not match corridor length".into()));
    }
    if tris.iter().any(|&t| t >= mesh.len()) {
        return Err(PlanError::Contract("corridor names a triangle outside the mesh".into()));
    }
    let near = |t: usize, p: Vec2| closest_point_on_triangle(mesh.triangle(t), p).distance(p) <= ENDPOINT_TOLERANCE;
    if !near(first, start) {
        return Err(PlanError::Contract("start is not in the first corridor triangle".into()));
    }
    if !near(last, goal) {
        return Err(PlanError::Contract("goal is not in the last corridor triangle".into()));
    }

    let mut portals = Vec::with_capacity(corridor.portals.len() + 2);
    portals.push(Portal { left: start, right: start });
    portals.extend_from_slice(&corridor.portals);
    portals.push(Portal { left: goal, right: goal });

    let mut points = vec![start];
    let (mut apex, mut left, mut right) = (start, start, start);
    let (mut left_idx, mut right_idx) = (0usize, 0usize);
    let mut i = 1;
    while i < portals.len() {
        let Portal { left: pl, right: pr } = portals[i];

        // right side: tighten when the new right edge swings left
        if (right - apex).cross(pr - apex) >= 0.0 {
            if apex == right || (left - apex).cross(pr - apex) < 0.0 {
                right = pr;
                right_idx = i;
            } else {
                points.push(left);
                apex = left;
                right = apex;
                right_idx = left_idx;
                i = left_idx + 1;
                continue;
            }
        }

        if (left - apex).cross(pl - apex) <= 0.0 {
            if apex == left || (right - apex).cross(pl - apex) > 0.0 {
                left = pl;
                left_idx = i;
            } else {
                points.push(right);
                apex = right;
                left = apex;
                left_idx = right_idx;
                i = right_idx + 1;
                continue;
            }
        }
        i += 1;
    }
    if points.len() == 1 || *points.last().unwrap() != goal {
        points.push(goal);
    }
    Ok(Path::new(drop_straight_corners(points)))
}

/// Removes repeated corners and corners where the path continues straight
/// on, which happens when it brushes several colinear portal endpoints.
fn drop_straight_corners(mut points: Vec<Vec2>) -> Vec<Vec2> {
    points.dedup();
    if points.len() == 1 {
        points.push(points[0]);
    }
    let mut out: Vec<Vec2> = Vec::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        if i + 1 < points.len() && !out.is_empty() {
            let prev = out[out.len() - 1];
            let (a, b) = (p - prev, points[i + 1] - p);
            if a.cross(b).abs() <= 1e-12 * a.length() * b.length() && a.dot(b) > 0.0 {
                continue;
            }
        }
        out.push(p);
    }
    out
}

/// Moves `current_index` past every waypoint closer than `radius`, never
/// past the final goal waypoint.
pub fn advance_waypoint(path: &mut Path, robot_pos: Vec2, radius: f64) {
    let last = path.waypoints.len().saturating_sub(1);
    while path.current_index < last && robot_pos.distance(path.waypoints[path.current_index]) < radius {
        path.current_index += 1;
    }
}
