use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::mesh::{BuildInfo, NavMesh};
use super::watershed::RegionMap;
use super::NavMeshError;

/// Lattice corner `(i, j)` must be kept as a contour vertex unless the four
/// cells around it are uniform or split into two halves by a straight line.
fn is_kept(map: &RegionMap, i: usize, j: usize) -> bool {
    let (i, j) = (i as isize, j as isize);
    let sw = map.label_at(i - 1, j - 1);
    let se = map.label_at(i, j - 1);
    let nw = map.label_at(i - 1, j);
    let ne = map.label_at(i, j);
    if sw == se && se == nw && nw == ne {
        return false;
    }
    let horizontal = sw == se && nw == ne;
    let vertical = sw == nw && se == ne;
    !(horizontal || vertical)
}

/// Boundary segments between differently labelled cells, merged into maximal
/// straight runs between kept corners. Returned in lattice coordinates.
fn trace_contours(map: &RegionMap) -> (Vec<(usize, usize)>, Vec<[usize; 2]>) {
    let f = map.frame;
    let (w, d) = (f.width, f.depth);
    let stride = w + 1;
    let mut vertex_of = vec![usize::MAX; (w + 1) * (d + 1)];
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<(usize, usize)>| {
        let slot = &mut vertex_of[j * stride + i];
        if *slot == usize::MAX {
            *slot = vertices.len();
            vertices.push((i, j));
        }
        *slot
    };

    let kept: Vec<bool> = (0..=d).flat_map(|j| (0..=w).map(move |i| (i, j))).map(|(i, j)| is_kept(map, i, j)).collect();
    let kept_at = |i: usize, j: usize| kept[j * stride + i];

    // horizontal unit edge (i, j)-(i+1, j) separates cells (i, j-1) and (i, j)
    for j in 0..=d {
        let mut open: Option<usize> = None;
        for i in 0..=w {
            let boundary = i < w && map.label_at(i as isize, j as isize - 1) != map.label_at(i as isize, j as isize);
            match (open, boundary) {
                (Some(start), true) if kept_at(i, j) => {
                    edges.push([vid(start, j, &mut vertices), vid(i, j, &mut vertices)]);
                    open = Some(i);
                }
                (Some(start), false) => {
                    edges.push([vid(start, j, &mut vertices), vid(i, j, &mut vertices)]);
                    open = None;
                }
                (None, true) => open = Some(i),
                _ => {}
            }
        }
    }
    // vertical unit edge (i, j)-(i, j+1) separates cells (i-1, j) and (i, j)
    for i in 0..=w {
        let mut open: Option<usize> = None;
        for j in 0..=d {
            let boundary = j < d && map.label_at(i as isize - 1, j as isize) != map.label_at(i as isize, j as isize);
            match (open, boundary) {
                (Some(start), true) if kept_at(i, j) => {
                    edges.push([vid(i, start, &mut vertices), vid(i, j, &mut vertices)]);
                    open = Some(j);
                }
                (Some(start), false) => {
                    edges.push([vid(i, start, &mut vertices), vid(i, j, &mut vertices)]);
                    open = None;
                }
                (None, true) => open = Some(j),
                _ => {}
            }
        }
    }
    (vertices, edges)
}

/// Traces region contours and triangulates them with a constrained Delaunay
/// triangulation whose constraints are every region and obstacle boundary, so
/// no triangle crosses a region boundary. Triangles over blocked cells are
/// discarded; adjacency across shared edges (within and between regions)
/// becomes the portal graph.
pub fn triangulate(map: &RegionMap, info: BuildInfo) -> Result<NavMesh, NavMeshError> {
    let f = map.frame;
    let (lattice, edges) = trace_contours(map);
    if lattice.len() < 3 {
        return Ok(NavMesh::empty(info));
    }
    let points: Vec<Point2<f64>> = lattice.iter().map(|&(i, j)| Point2::new(i as f64, j as f64)).collect();
    let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(points, edges)
        .map_err(|e| NavMeshError::Triangulation(format!("{e:?}")))?;
    if cdt.num_vertices() != lattice.len() {
        return Err(NavMeshError::Triangulation("duplicate contour vertices".into()));
    }

    let mut used = vec![u32::MAX; lattice.len()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let idx = vs.map(|v| v.fix().index());
        let pos = vs.map(|v| v.position());
        let cx = (pos[0].x + pos[1].x + pos[2].x) / 3.0;
        let cz = (pos[0].y + pos[1].y + pos[2].y) / 3.0;
        let label = map.label_at(cx.floor() as isize, cz.floor() as isize);
        if label == 0 {
            continue;
        }
        let twice_area = (pos[1].x - pos[0].x) * (pos[2].y - pos[0].y) - (pos[1].y - pos[0].y) * (pos[2].x - pos[0].x);
        if twice_area <= 0.0 {
            continue;
        }
        let tri = idx.map(|k| {
            if used[k] == u32::MAX {
                used[k] = vertices.len() as u32;
                let (i, j) = lattice[k];
                vertices.push(f.corner(i, j));
            }
            used[k]
        });
        triangles.push(tri);
        regions.push(label);
    }
    Ok(NavMesh::from_triangles(vertices, triangles, regions, info))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navmesh::grid::OccupancyGrid;

    fn info() -> BuildInfo {
        BuildInfo {
            cell_size: 1.0,
            agent_radius: 0.0,
            erosion_cells: 0,
            region_count: 0,
            walkable_cells: 0,
            slope_filter: String::new(),
        }
    }

    /// Region map straight from a character grid: `#` blocked, any other
    /// character is a region label (digits).
    fn regions(rows: &[&str]) -> RegionMap {
        let g = OccupancyGrid::from_ascii(rows, 1.0);
        let f = g.frame;
        let mut labels = vec![0; f.cell_count()];
        for (row_idx, row) in rows.iter().enumerate() {
            let j = f.depth - 1 - row_idx;
            for (i, ch) in row.chars().enumerate() {
                labels[f.index(i, j)] = ch.to_digit(10).unwrap_or(0);
            }
        }
        let region_count = labels.iter().copied().max().unwrap_or(0);
        RegionMap { frame: f, regions: labels, region_count }
    }

    #[test]
    fn rectangle_region_is_two_triangles_one_portal() {
        let mesh = triangulate(&regions(&["111", "111"]), info()).unwrap();
        assert_eq!(mesh.len(), 2);
        assert_eq!(mesh.portal_count(), 1);
        assert!((mesh.total_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn single_cell_region_is_kept() {
        let mesh = triangulate(&regions(&["###", "#1#", "###"]), info()).unwrap();
        assert_eq!(mesh.len(), 2);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l_shaped_region_area_matches_cells() {
        let mesh = triangulate(&regions(&["1##", "1##", "111"]), info()).unwrap();
        assert!(mesh.len() >= 3);
        assert!((mesh.total_area() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_regions_have_no_portal_between_them() {
        let mesh = triangulate(&regions(&["11#22", "11#22"]), info()).unwrap();
        for t in 0..mesh.len() {
            for n in mesh.neighbors_of(t) {
                assert_eq!(mesh.regions[t], mesh.regions[n]);
            }
        }
    }

    #[test]
    fn adjacent_regions_share_portals_and_respect_boundaries() {
        let mesh = triangulate(&regions(&["1122", "1122", "3333"]), info()).unwrap();
        assert!((mesh.total_area() - 12.0).abs() < 1e-12);
        let cross = (0..mesh.len())
            .flat_map(|t| mesh.neighbors_of(t).map(move |n| (t, n)))
            .filter(|&(t, n)| mesh.regions[t] != mesh.regions[n])
            .count();
        assert!(cross > 0);
        // each triangle lies inside cells of its own region
        let map = regions(&["1122", "1122", "3333"]);
        for t in 0..mesh.len() {
            let [a, b, c] = mesh.triangle(t);
            for (wa, wb, wc) in [(4.0, 1.0, 1.0), (1.0, 4.0, 1.0), (1.0, 1.0, 4.0), (1.0, 1.0, 1.0)] {
                let p = (a * wa + b * wb + c * wc) * (1.0 / (wa + wb + wc));
                assert_eq!(map.label_at(p.x.floor() as isize, p.z.floor() as isize), mesh.regions[t]);
            }
        }
    }
}
