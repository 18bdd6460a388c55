use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::distance::DistanceField;
use super::grid::GridFrame;

/// Region id per cell; 0 marks blocked cells.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionMap {
    pub frame: GridFrame,
    pub regions: Vec<u32>,
    pub region_count: u32,
}

impl RegionMap {
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.regions[self.frame.index(i, j)]
    }

    /// Region of a cell, 0 for blocked cells and out-of-grid coordinates.
    pub fn label_at(&self, i: isize, j: isize) -> u32 {
        if i < 0 || j < 0 || i as usize >= self.frame.width || j as usize >= self.frame.depth {
            0
        } else {
            self.get(i as usize, j as usize)
        }
    }
}

#[derive(PartialEq, Eq)]
struct Front {
    value: u32,
    region: Reverse<u32>,
    cell: Reverse<usize>,
}

impl Ord for Front {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.value, self.region, self.cell).cmp(&(other.value, other.region, other.cell))
    }
}

impl PartialOrd for Front {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority-flood watershed seeded at the regional maxima of the distance
/// field. Seeds are 4-connected plateaus with no higher 8-neighbour; they are
/// numbered by decreasing height, then by lowest cell index. The flood pops
/// the highest frontier cell first and breaks ties toward the lower region id.
pub fn watershed_partition(field: &DistanceField) -> RegionMap {
    let f = field.frame;
    let n = f.cell_count();
    let walk = |idx: usize| field.values[idx] > 0;
    let coords = |idx: usize| (idx % f.width, idx / f.width);

    // Plateau components (4-connected, equal value).
    let mut plateau = vec![u32::MAX; n];
    let mut seeds: Vec<(u32, usize, Vec<usize>)> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if !walk(start) || plateau[start] != u32::MAX {
            continue;
        }
        let value = field.values[start];
        let id = seeds.len() as u32;
        let mut cells = Vec::new();
        let mut is_max = true;
        plateau[start] = id;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            cells.push(idx);
            let (i, j) = coords(idx);
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (x, z) = (i as isize + di, j as isize + dj);
                    if x < 0 || z < 0 || x as usize >= f.width || z as usize >= f.depth {
                        continue;
                    }
                    let nidx = f.index(x as usize, z as usize);
                    let nv = field.values[nidx];
                    if nv > value {
                        is_max = false;
                    }
                    if nv == value && (di == 0 || dj == 0) && plateau[nidx] == u32::MAX {
                        plateau[nidx] = id;
                        stack.push(nidx);
                    }
                }
            }
        }
        if is_max {
            cells.sort_unstable();
            seeds.push((value, cells[0], cells));
        } else {
            // keep the id slot so plateau ids stay unique
            seeds.push((0, usize::MAX, Vec::new()));
        }
    }
    let mut maxima: Vec<(u32, usize, Vec<usize>)> = seeds.into_iter().filter(|s| s.1 != usize::MAX).collect();
    maxima.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut regions = vec![0u32; n];
    let mut heap = BinaryHeap::new();
    for (k, (_, _, cells)) in maxima.iter().enumerate() {
        let region = k as u32 + 1;
        for &idx in cells {
            regions[idx] = region;
            heap.push(Front { value: field.values[idx], region: Reverse(region), cell: Reverse(idx) });
        }
    }
    while let Some(Front { region: Reverse(region), cell: Reverse(idx), .. }) = heap.pop() {
        let (i, j) = coords(idx);
        for (x, z) in f.neighbors4(i, j) {
            let nidx = f.index(x, z);
            if walk(nidx) && regions[nidx] == 0 {
                regions[nidx] = region;
                heap.push(Front { value: field.values[nidx], region: Reverse(region), cell: Reverse(nidx) });
            }
        }
    }
    RegionMap { frame: f, regions, region_count: maxima.len() as u32 }
}
