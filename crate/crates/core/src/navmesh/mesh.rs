use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geom::{convex_contains, orient, Vec2};

/// Parameters recorded alongside a baked mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub cell_size: f64,
    pub agent_radius: f64,
    pub erosion_cells: usize,
    pub region_count: u32,
    pub walkable_cells: usize,
    /// The floor is planar, so the 45° slope filter never rejects a cell.
    pub slope_filter: String,
}

/// Triangle mesh over the walkable floor. Triangles are counter-clockwise;
/// `neighbors[t][k]` is the triangle across edge `k`, which runs from vertex
/// `k` to vertex `k + 1` of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct NavMesh {
    pub vertices: Vec<Vec2>,
    pub triangles: Vec<[u32; 3]>,
    pub neighbors: Vec<[Option<u32>; 3]>,
    /// Watershed region each triangle was cut from.
    pub regions: Vec<u32>,
    pub info: BuildInfo,
    centroids: Vec<Vec2>,
    areas: Vec<f64>,
}

/// Shared edge between two triangles, seen from the first one looking into
/// the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Portal {
    pub left: Vec2,
    pub right: Vec2,
}

impl NavMesh {
    /// Assembles a mesh from counter-clockwise triangles, deriving adjacency.
    pub fn from_triangles(vertices: Vec<Vec2>, triangles: Vec<[u32; 3]>, regions: Vec<u32>, info: BuildInfo) -> Self {
        let mut edge_owner: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        let mut neighbors = vec![[None; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some((other, ok)) = edge_owner.remove(&key) {
                    neighbors[t][k] = Some(other);
                    neighbors[other as usize][ok] = Some(t as u32);
                } else {
                    edge_owner.insert(key, (t as u32, k));
                }
            }
        }
        let centroids = triangles
            .iter()
            .map(|t| (vertices[t[0] as usize] + vertices[t[1] as usize] + vertices[t[2] as usize]) * (1.0 / 3.0))
            .collect();
        let areas = triangles
            .iter()
            .map(|t| 0.5 * orient(vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]))
            .collect();
        Self { vertices, triangles, neighbors, regions, info, centroids, areas }
    }

    pub fn empty(info: BuildInfo) -> Self {
        Self::from_triangles(Vec::new(), Vec::new(), Vec::new(), info)
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Vec2; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0] as usize], self.vertices[tri[1] as usize], self.vertices[tri[2] as usize]]
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        self.centroids[t]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn contains(&self, t: usize, p: Vec2) -> bool {
        convex_contains(&self.triangle(t), p)
    }

    pub fn neighbors_of(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[t].iter().flatten().map(|&n| n as usize)
    }

    pub fn portal_count(&self) -> usize {
        self.neighbors.iter().flatten().flatten().count() / 2
    }

    /// Portal from `from` into `to`, or `None` if they are not adjacent.
    pub fn portal(&self, from: usize, to: usize) -> Option<Portal> {
        let k = self.neighbors[from].iter().position(|&n| n == Some(to as u32))?;
        let tri = self.triangles[from];
        // interior lies left of the directed edge, so looking across it the
        // edge start is on the right hand
        Some(Portal { left: self.vertices[tri[(k + 1) % 3] as usize], right: self.vertices[tri[k] as usize] })
    }
}
