use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::Vec2;
use crate::navmesh::{NavMesh, Portal};

use super::{PlanError, PlannerConfig};

/// Dual graph of a mesh: one node per triangle at its centroid, one edge per
/// portal, costed by the centroid-to-centroid distance.
#[derive(Clone, Copy, Debug)]
pub struct NavGraph<'a> {
    mesh: &'a NavMesh,
}

impl<'a> NavGraph<'a> {
    pub fn new(mesh: &'a NavMesh) -> Self {
        Self { mesh }
    }

    pub fn mesh(&self) -> &'a NavMesh {
        self.mesh
    }

    pub fn node_count(&self) -> usize {
        self.mesh.len()
    }

    pub fn position(&self, v: usize) -> Vec2 {
        self.mesh.centroid(v)
    }

    pub fn cost(&self, a: usize, b: usize) -> f64 {
        self.mesh.centroid(a).distance(self.mesh.centroid(b))
    }

    /// Neighbours of `v` with edge costs, in mesh edge order.
    pub fn edges(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mesh.neighbors_of(v).map(move |u| (u, self.cost(v, u)))
    }
}

/// Triangle sequence from start to goal with the portal crossed between
/// each consecutive pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCorridor {
    pub triangles: Vec<usize>,
    pub portals: Vec<Portal>,
    /// Summed edge cost along the corridor.
    pub cost: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanStats {
    /// Distinct nodes taken off the open list.
    pub nodes_expanded: usize,
    /// Wall-clock seconds spent in the query. Not part of the determinism
    /// contract.
    pub query_time: f64,
}

struct Open {
    f: f64,
    h: f64,
    node: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}

impl Ord for Open {
    // BinaryHeap is a max-heap: invert so the smallest (f, h, id) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.h.total_cmp(&self.h)).then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* over the triangle graph with `h(v) = α·‖p(v) − goal_point‖`. Blocked
/// triangles are never entered. Nodes whose cost improves after closing are
/// reopened, so the result matches Dijkstra on the same float edge costs.
pub fn astar(
    graph: &NavGraph<'_>,
    blocked: &[bool],
    start: usize,
    goal: usize,
    goal_point: Vec2,
    config: &PlannerConfig,
) -> Result<(PathCorridor, PlanStats), PlanError> {
    let n = graph.node_count();
    if start >= n || goal >= n {
        return Err(PlanError::Contract(format!("triangle out of range (mesh has {n})")));
    }
    if blocked[start] || blocked[goal] {
        return Err(PlanError::Unreachable("start or goal triangle is blocked".into()));
    }
    let h = |v: usize| config.heuristic_scale * graph.position(v).distance(goal_point);

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut expanded = 0usize;
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    open.push(Open { f: h(start), h: h(start), node: start });

    // After the goal is first closed, entries whose f is within rounding of
    // g(goal) are still expanded, so equal-length routes whose float sums
    // differ in the last bit settle on the smaller sum.
    let slack = |c: f64| 1e-9 * (1.0 + c);
    while let Some(Open { node, f, .. }) = open.pop() {
        if closed[goal] && f > g[goal] + slack(g[goal]) {
            break;
        }
        if f > g[node] + h(node) {
            continue; // stale entry
        }
        if !closed[node] {
            closed[node] = true;
            expanded += 1;
        }
        if node == goal {
            continue;
        }
        for (next, cost) in graph.edges(node) {
            if blocked[next] {
                continue;
            }
            let tentative = g[node] + cost;
            if tentative < g[next] {
                g[next] = tentative;
                parent[next] = node;
                let hn = h(next);
                open.push(Open { f: tentative + hn, h: hn, node: next });
            }
        }
    }
    if !g[goal].is_finite() {
        return Err(PlanError::Unreachable("no unblocked route to the goal".into()));
    }

    let mut triangles = vec![goal];
    while let Some(&last) = triangles.last() {
        if last == start {
            break;
        }
        triangles.push(parent[last]);
    }
    triangles.reverse();
    let mesh = graph.mesh();
    let portals = triangles
        .windows(2)
        .map(|w| mesh.portal(w[0], w[1]).expect("consecutive corridor triangles are adjacent"))
        .collect();
    Ok((PathCorridor { triangles, portals, cost: g[goal] }, PlanStats { nodes_expanded: expanded, query_time: 0.0 }))
}
