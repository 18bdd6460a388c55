//! Walkable-area navigation mesh.
//!
//! The bake pipeline is rasterize → erode → distance transform → watershed →
//! contour → triangulate. [`NavMeshRuntime`] layers dynamic carve volumes on
//! top of a baked mesh and re-bakes when enough area has changed.

mod distance;
mod dump;
mod grid;
mod mesh;
mod runtime;
mod triangulate;
mod watershed;

pub use distance::{distance_transform, DistanceField};
pub use dump::{MeshDump, PortalRecord, MESH_DUMP_FORMAT};
pub use grid::{
    erode, erosion_cells, frame_for_floor, rasterize, rasterize_obstacles, GridFrame, OccupancyGrid, DEFAULT_CELL_SIZE,
    DEFAULT_MAX_CELLS,
};
pub use mesh::{BuildInfo, NavMesh, Portal};
pub use runtime::{CarveVolume, NavMeshRuntime, REBUILD_CHANGE_THRESHOLD, REBUILD_PERIOD};
pub use triangulate::triangulate;
pub use watershed::{watershed_partition, RegionMap};

use thiserror::Error;

use crate::geom::{Rect, Vec2};
use crate::world::SceneDescription;

#[derive(Debug, Error)]
pub enum NavMeshError {
    #[error("scene needs {cells} cells, above the cap of {cap}")]
    Capacity { cells: u64, cap: usize },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildConfig {
    pub cell_size: f64,
    pub agent_radius: f64,
    pub max_cells: usize,
}

impl BuildConfig {
    pub fn for_scene(scene: &SceneDescription) -> Self {
        Self { cell_size: DEFAULT_CELL_SIZE, agent_radius: scene.robot.radius, max_cells: DEFAULT_MAX_CELLS }
    }
}

/// Static inputs needed to (re)bake a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BakeSource {
    pub floor: Rect,
    pub footprints: Vec<Vec<Vec2>>,
    pub config: BuildConfig,
}

impl BakeSource {
    pub fn from_scene(scene: &SceneDescription, config: BuildConfig) -> Self {
        Self { floor: scene.floor, footprints: scene.statics.iter().map(|s| s.footprint.clone()).collect(), config }
    }

    /// Runs the full pipeline with extra disc obstacles `(center, radius)`.
    pub fn bake(&self, discs: &[(Vec2, f64)]) -> Result<NavMesh, NavMeshError> {
        let cfg = self.config;
        let fps: Vec<&[Vec2]> = self.footprints.iter().map(|f| f.as_slice()).collect();
        let raw = rasterize_obstacles(self.floor, cfg.cell_size, cfg.max_cells, &fps, discs)?;
        let eroded = erode(&raw, cfg.agent_radius);
        mesh_from_grid(&eroded, cfg.agent_radius)
    }
}

/// Triangulates an already eroded walkable grid (distance transform,
/// watershed, contours, triangulation).
pub fn mesh_from_grid(grid: &OccupancyGrid, agent_radius: f64) -> Result<NavMesh, NavMeshError> {
    let field = distance_transform(grid);
    let regions = watershed_partition(&field);
    let info = BuildInfo {
        cell_size: grid.frame.cell_size,
        agent_radius,
        erosion_cells: erosion_cells(agent_radius, grid.frame.cell_size),
        region_count: regions.region_count,
        walkable_cells: grid.walkable_count(),
        slope_filter: "planar floor: every cell passes the 45 degree slope test".into(),
    };
    triangulate(&regions, info)
}

/// Bakes the scene's static geometry.
pub fn build_navmesh(scene: &SceneDescription, config: BuildConfig) -> Result<NavMesh, NavMeshError> {
    BakeSource::from_scene(scene, config).bake(&[])
}
