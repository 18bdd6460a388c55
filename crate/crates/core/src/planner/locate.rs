use crate::geom::{closest_point_on_triangle, Vec2};
use crate::navmesh::NavMesh;

use super::PlanError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub triangle: usize,
    /// `p` itself when on the mesh, otherwise its projection onto `triangle`.
    pub point: Vec2,
    pub off_mesh: bool,
}

/// Finds the lowest-id unblocked triangle containing `p`. Points outside the
/// mesh, or inside blocked triangles, snap to the nearest unblocked triangle
/// (ties to the lower id) with `off_mesh` set.
pub fn locate_triangle(mesh: &NavMesh, blocked: Option<&[bool]>, p: Vec2) -> Result<Location, PlanError> {
    if mesh.is_empty() {
        return Err(PlanError::EmptyMesh);
    }
    let is_blocked = |t: usize| blocked.is_some_and(|b| b[t]);
    if let Some(t) = (0..mesh.len()).find(|&t| !is_blocked(t) && mesh.contains(t, p)) {
        return Ok(Location { triangle: t, point: p, off_mesh: false });
    }
    let mut best: Option<(f64, usize, Vec2)> = None;
    for t in (0..mesh.len()).filter(|&t| !is_blocked(t)) {
        let q = closest_point_on_triangle(mesh.triangle(t), p);
        let d = q.distance(p);
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, t, q));
        }
    }
    let (_, triangle, point) = best.ok_or_else(|| PlanError::Unreachable("every triangle is blocked".into()))?;
    Ok(Location { triangle, point, off_mesh: true })
}
