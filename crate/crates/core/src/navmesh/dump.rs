use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::{BuildInfo, NavMesh};

pub const MESH_DUMP_FORMAT: &str = "navvi-mesh/1";

/// Text form of a baked mesh, used by `navvi bake` and golden tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshDump {
    pub format: String,
    pub info: BuildInfo,
    pub triangle_count: usize,
    pub portal_count: usize,
    pub total_area: f64,
    pub vertices: Vec<Vec2>,
    pub triangles: Vec<[u32; 3]>,
    pub portals: Vec<PortalRecord>,
}

/// Adjacency between triangles `from` and `to`; `left`/`right` are vertex
/// indices as seen from `from`. Each adjacency is listed once, `from < to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortalRecord {
    pub from: u32,
    pub to: u32,
    pub left: u32,
    pub right: u32,
}

impl MeshDump {
    pub fn from_mesh(mesh: &NavMesh) -> Self {
        let mut portals = Vec::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                if let Some(n) = mesh.neighbors[t][k] {
                    if (t as u32) < n {
                        portals.push(PortalRecord { from: t as u32, to: n, left: tri[(k + 1) % 3], right: tri[k] });
                    }
                }
            }
        }
        Self {
            format: MESH_DUMP_FORMAT.into(),
            info: mesh.info.clone(),
            triangle_count: mesh.len(),
            portal_count: portals.len(),
            total_area: mesh.total_area(),
            vertices: mesh.vertices.clone(),
            triangles: mesh.triangles.clone(),
            portals,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh dump serialization is infallible")
    }
}
