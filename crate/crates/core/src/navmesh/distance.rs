use super::grid::{GridFrame, OccupancyGrid};

/// Squared Euclidean distance, in cells², from each cell to the nearest
/// blocked cell. Cells beyond the grid do not count as blocked; a grid without
/// any blocked cell holds [`DistanceField::UNBOUNDED`] everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub frame: GridFrame,
    pub values: Vec<u32>,
}

impl DistanceField {
    pub const UNBOUNDED: u32 = u32::MAX;

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.values[self.frame.index(i, j)]
    }

    pub fn is_walkable(&self, i: usize, j: usize) -> bool {
        self.get(i, j) > 0
    }
}

const FAR: f64 = 1e20;

/// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), in place.
fn transform_line(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        let mut s;
        loop {
            let p = v[k] as f64;
            s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            // z[0] is -inf, so k never underflows
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        *slot = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance transform in two separable passes.
pub fn distance_transform(grid: &OccupancyGrid) -> DistanceField {
    let f = grid.frame;
    let (w, d) = (f.width, f.depth);
    let n = w.max(d);
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut line = vec![0f64; n];
    let mut out = vec![0f64; n];

    let mut field: Vec<f64> = grid.walkable.iter().map(|&wk| if wk { FAR } else { 0.0 }).collect();

    for j in 0..d {
        line[..w].copy_from_slice(&field[j * w..(j + 1) * w]);
        transform_line(&line[..w], &mut out[..w], &mut v, &mut z);
        field[j * w..(j + 1) * w].copy_from_slice(&out[..w]);
    }
    for i in 0..w {
        for j in 0..d {
            line[j] = field[j * w + i];
        }
        transform_line(&line[..d], &mut out[..d], &mut v, &mut z);
        for j in 0..d {
            field[j * w + i] = out[j];
        }
    }

    let values = field.into_iter().map(|x| if x >= FAR * 0.5 { DistanceField::UNBOUNDED } else { x as u32 }).collect();
    DistanceField { frame: f, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use proptest::prelude::*;

    fn brute(grid: &OccupancyGrid) -> Vec<u32> {
        let f = grid.frame;
        let blocked: Vec<(i64, i64)> = (0..f.depth)
            .flat_map(|j| (0..f.width).map(move |i| (i, j)))
            .filter(|&(i, j)| !grid.is_walkable(i, j))
            .map(|(i, j)| (i as i64, j as i64))
            .collect();
        (0..f.depth)
            .flat_map(|j| (0..f.width).map(move |i| (i as i64, j as i64)))
            .map(|(i, j)| {
                blocked
                    .iter()
                    .map(|&(x, z)| ((x - i).pow(2) + (z - j).pow(2)) as u32)
                    .min()
                    .unwrap_or(DistanceField::UNBOUNDED)
            })
            .collect()
    }

    fn frame(w: usize, d: usize) -> GridFrame {
        GridFrame { origin: Vec2::ZERO, cell_size: 0.2, width: w, depth: d }
    }

    #[test]
    fn single_obstacle_at_origin() {
        let mut g = OccupancyGrid::new_filled(frame(8, 8), true);
        g.walkable[0] = false;
        let df = distance_transform(&g);
        assert_eq!(df.get(3, 4), 25);
        assert_eq!(df.get(0, 0), 0);
        assert_eq!(df.values, brute(&g));
    }

    #[test]
    fn all_blocked_is_zero() {
        let g = OccupancyGrid::new_filled(frame(5, 3), false);
        assert!(distance_transform(&g).values.iter().all(|&v| v == 0));
    }

    #[test]
    fn obstacle_free_grid_is_unbounded() {
        let g = OccupancyGrid::new_filled(frame(4, 4), true);
        assert!(distance_transform(&g).values.iter().all(|&v| v == DistanceField::UNBOUNDED));
    }

    #[test]
    fn two_obstacles_take_the_minimum() {
        let mut g = OccupancyGrid::new_filled(frame(10, 6), true);
        let f = g.frame;
        g.walkable[f.index(1, 1)] = false;
        g.walkable[f.index(8, 4)] = false;
        let df = distance_transform(&g);
        for j in 0..6i64 {
            for i in 0..10i64 {
                let a = ((i - 1).pow(2) + (j - 1).pow(2)) as u32;
                let b = ((i - 8).pow(2) + (j - 4).pow(2)) as u32;
                assert_eq!(df.get(i as usize, j as usize), a.min(b));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_brute_force(w in 1usize..=64, d in 1usize..=64, density in 0.0f64..0.6, seed in any::<u64>()) {
            // cheap deterministic fill from the seed
            let mut state = seed | 1;
            let mut g = OccupancyGrid::new_filled(frame(w, d), true);
            for cell in g.walkable.iter_mut() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                *cell = (state % 10_000) as f64 / 10_000.0 >= density;
            }
            prop_assert_eq!(distance_transform(&g).values, brute(&g));
        }
    }
}
