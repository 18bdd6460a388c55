use crate::geom::{convex_contains, Rect, Vec2};
use crate::world::SceneDescription;

use super::NavMeshError;

pub const DEFAULT_CELL_SIZE: f64 = 0.20;
pub const DEFAULT_MAX_CELLS: usize = 4_000_000;

/// Shape and placement of a cell lattice. Cell `(i, j)` spans
/// `origin + [i, i+1) * cell_size` along x and `[j, j+1)` along z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridFrame {
    pub origin: Vec2,
    pub cell_size: f64,
    pub width: usize,
    pub depth: usize,
}

impl GridFrame {
    pub fn cell_count(&self) -> usize {
        self.width * self.depth
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin.x + (i as f64 + 0.5) * self.cell_size, self.origin.z + (j as f64 + 0.5) * self.cell_size)
    }

    /// World position of lattice corner `(i, j)`.
    pub fn corner(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin.x + i as f64 * self.cell_size, self.origin.z + j as f64 * self.cell_size)
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fz = ((p.z - self.origin.z) / self.cell_size).floor();
        (fx >= 0.0 && fz >= 0.0 && (fx as usize) < self.width && (fz as usize) < self.depth)
            .then_some((fx as usize, fz as usize))
    }

    /// 4-neighbours that fall inside the grid.
    pub fn neighbors4(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
        let (w, d) = (self.width as isize, self.depth as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .map(move |(di, dj)| (i as isize + di, j as isize + dj))
            .filter(move |&(x, z)| x >= 0 && z >= 0 && x < w && z < d)
            .map(|(x, z)| (x as usize, z as usize))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    pub frame: GridFrame,
    pub walkable: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new_filled(frame: GridFrame, walkable: bool) -> Self {
        Self { frame, walkable: vec![walkable; frame.cell_count()] }
    }

    /// Builds a grid from rows of `#` (blocked) and `.` (walkable); the first
    /// row is the highest `z`. Handy for tests and small fixtures.
    pub fn from_ascii(rows: &[&str], cell_size: f64) -> Self {
        let depth = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let frame = GridFrame { origin: Vec2::ZERO, cell_size, width, depth };
        let mut grid = Self::new_filled(frame, false);
        for (row_idx, row) in rows.iter().enumerate() {
            let j = depth - 1 - row_idx;
            for (i, ch) in row.chars().enumerate() {
                grid.walkable[frame.index(i, j)] = ch != '#';
            }
        }
        grid
    }

    pub fn is_walkable(&self, i: usize, j: usize) -> bool {
        self.walkable[self.frame.index(i, j)]
    }

    pub fn walkable_count(&self) -> usize {
        self.walkable.iter().filter(|&&w| w).count()
    }
}

/// Frame covering `floor` with square cells, failing past `max_cells`.
pub fn frame_for_floor(floor: Rect, cell_size: f64, max_cells: usize) -> Result<GridFrame, NavMeshError> {
    let cells_along = |extent: f64| ((extent / cell_size) - 1e-9).ceil().max(1.0);
    let (w, d) = (cells_along(floor.width()), cells_along(floor.depth()));
    if !(w * d <= max_cells as f64) {
        return Err(NavMeshError::Capacity { cells: (w * d) as u64, cap: max_cells });
    }
    Ok(GridFrame { origin: floor.min, cell_size, width: w as usize, depth: d as usize })
}

/// Rasterizes the scene's static footprints. A cell is blocked iff its center
/// lies inside (or on the edge of) some footprint, or outside the floor.
/// The floor is planar, so a slope filter would never reject a cell.
pub fn rasterize(scene: &SceneDescription, cell_size: f64, max_cells: usize) -> Result<OccupancyGrid, NavMeshError> {
    let footprints: Vec<&[Vec2]> = scene.statics.iter().map(|s| s.footprint.as_slice()).collect();
    rasterize_obstacles(scene.floor, cell_size, max_cells, &footprints, &[])
}

/// Same as [`rasterize`] over explicit footprints plus disc obstacles
/// `(center, radius)`.
pub fn rasterize_obstacles(
    floor: Rect,
    cell_size: f64,
    max_cells: usize,
    footprints: &[&[Vec2]],
    discs: &[(Vec2, f64)],
) -> Result<OccupancyGrid, NavMeshError> {
    let frame = frame_for_floor(floor, cell_size, max_cells)?;
    let mut grid = OccupancyGrid::new_filled(frame, true);
    for j in 0..frame.depth {
        for i in 0..frame.width {
            if !floor.contains(frame.cell_center(i, j)) {
                grid.walkable[frame.index(i, j)] = false;
            }
        }
    }

    let mut block_in_box = |lo: Vec2, hi: Vec2, test: &dyn Fn(Vec2) -> bool| {
        let to_cell = |v: f64, o: f64| ((v - o) / cell_size - 0.5).floor();
        let i0 = to_cell(lo.x, frame.origin.x).max(0.0) as usize;
        let j0 = to_cell(lo.z, frame.origin.z).max(0.0) as usize;
        let i1 = (to_cell(hi.x, frame.origin.x) + 1.0).max(0.0) as usize;
        let j1 = (to_cell(hi.z, frame.origin.z) + 1.0).max(0.0) as usize;
        for j in j0..=j1.min(frame.depth.saturating_sub(1)) {
            for i in i0..=i1.min(frame.width.saturating_sub(1)) {
                if test(frame.cell_center(i, j)) {
                    grid.walkable[frame.index(i, j)] = false;
                }
            }
        }
    };

    for fp in footprints {
        let lo = fp.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, p| Vec2::new(m.x.min(p.x), m.z.min(p.z)));
        let hi = fp
            .iter()
            .fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| Vec2::new(m.x.max(p.x), m.z.max(p.z)));
        block_in_box(lo, hi, &|c| convex_contains(fp, c));
    }
    for &(center, radius) in discs {
        let r = Vec2::new(radius, radius);
        block_in_box(center - r, center + r, &|c| c.distance(center) <= radius);
    }
    Ok(grid)
}

/// Erosion radius in cells for an agent radius.
pub fn erosion_cells(agent_radius: f64, cell_size: f64) -> usize {
    ((agent_radius / cell_size) - 1e-9).ceil().max(0.0) as usize
}

/// Square (Chebyshev) erosion: a cell stays walkable iff every cell within
/// `r = ceil(agent_radius / cell_size)` was walkable. Cells beyond the grid
/// count as blocked.
pub fn erode(grid: &OccupancyGrid, agent_radius: f64) -> OccupancyGrid {
    let r = erosion_cells(agent_radius, grid.frame.cell_size);
    if r == 0 {
        return grid.clone();
    }
    let f = grid.frame;
    let (w, d) = (f.width, f.depth);
    // Separable: a row pass then a column pass, each via run lengths.
    let pass = |src: &[bool], len: usize, count: usize, at: &dyn Fn(usize, usize) -> usize| {
        let mut out = vec![false; src.len()];
        for line in 0..count {
            // prefix count of blocked cells along the line
            let mut blocked = vec![0usize; len + 1];
            for k in 0..len {
                blocked[k + 1] = blocked[k] + usize::from(!src[at(line, k)]);
            }
            for k in 0..len {
                if k < r || k + r >= len {
                    continue;
                }
                out[at(line, k)] = blocked[k + r + 1] - blocked[k - r] == 0;
            }
        }
        out
    };
    let rows = pass(&grid.walkable, w, d, &|j, i| j * w + i);
    let both = pass(&rows, d, w, &|i, j| j * w + i);
    OccupancyGrid { frame: f, walkable: both }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_erode(grid: &OccupancyGrid, r: usize) -> Vec<bool> {
        let f = grid.frame;
        let mut out = vec![false; f.cell_count()];
        for j in 0..f.depth {
            for i in 0..f.width {
                let mut ok = true;
                for dj in -(r as isize)..=(r as isize) {
                    for di in -(r as isize)..=(r as isize) {
                        let (x, z) = (i as isize + di, j as isize + dj);
                        let inside = x >= 0 && z >= 0 && (x as usize) < f.width && (z as usize) < f.depth;
                        ok &= inside && grid.is_walkable(x as usize, z as usize);
                    }
                }
                out[f.index(i, j)] = ok;
            }
        }
        out
    }

    #[test]
    fn erosion_radius_matches_ceiling_rule() {
        assert_eq!(erosion_cells(0.35, 0.2), 2);
        assert_eq!(erosion_cells(0.4, 0.2), 2);
        assert_eq!(erosion_cells(0.0, 0.2), 0);
    }

    #[test]
    fn zero_radius_erosion_is_identity() {
        let g = OccupancyGrid::from_ascii(&["..#", "...", "#.."], 0.2);
        assert_eq!(erode(&g, 0.0), g);
    }

    #[test]
    fn open_ten_by_ten_keeps_six_by_six_core() {
        let g = OccupancyGrid::new_filled(GridFrame { origin: Vec2::ZERO, cell_size: 0.2, width: 10, depth: 10 }, true);
        let e = erode(&g, 0.35);
        assert_eq!(e.walkable, brute_erode(&g, 2));
        assert_eq!(e.walkable_count(), 36);
        for j in 2..8 {
            for i in 2..8 {
                assert!(e.is_walkable(i, j));
            }
        }
    }

    #[test]
    fn narrow_corridor_vanishes() {
        // two 5x7 rooms joined by a corridor three cells tall
        let rows = [
            "#################",
            "#.....#####.....#",
            "#.....#####.....#",
            "#...............#",
            "#...............#",
            "#...............#",
            "#.....#####.....#",
            "#.....#####.....#",
            "#################",
        ];
        let g = OccupancyGrid::from_ascii(&rows, 0.2);
        let e = erode(&g, 0.35);
        assert_eq!(e.walkable, brute_erode(&g, 2));
        for j in 0..9 {
            for i in 6..=10 {
                assert!(!e.is_walkable(i, j), "corridor cell ({i},{j}) survived");
            }
        }
        assert!(e.is_walkable(3, 4) && e.is_walkable(13, 4));
    }

    #[test]
    fn box_rasterizes_cells_with_centers_inside() {
        use crate::world::*;
        let b = 4.6;
        let scene = SceneDescription {
            floor: Rect { min: Vec2::ZERO, max: Vec2::new(10.0, 10.0) },
            statics: vec![StaticObstacle {
                id: "box".into(),
                category: StaticCategory::Box,
                footprint: vec![
                    Vec2::new(b, b),
                    Vec2::new(b + 1.0, b),
                    Vec2::new(b + 1.0, b + 1.0),
                    Vec2::new(b, b + 1.0),
                ],
                height: 1.0,
            }],
            agents: vec![],
            robot: RobotConfig::default(),
            goal: GoalSpec::at(Vec2::new(1.0, 1.0)),
        };
        let g = rasterize(&scene, 0.2, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!((g.frame.width, g.frame.depth), (50, 50));
        assert_eq!(g.walkable.iter().filter(|w| !**w).count(), 25);
    }

    #[test]
    fn capacity_cap_is_enforced() {
        let floor = Rect { min: Vec2::ZERO, max: Vec2::new(100.0, 100.0) };
        let err = rasterize_obstacles(floor, 0.2, 1000, &[], &[]).unwrap_err();
        assert!(matches!(err, NavMeshError::Capacity { .. }));
    }
}
