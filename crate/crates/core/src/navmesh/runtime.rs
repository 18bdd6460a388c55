use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{triangle_intersects_disc, Vec2};

use super::{BakeSource, NavMesh, NavMeshError};

/// Seconds between rebuild checks.
pub const REBUILD_PERIOD: f64 = 2.0;
/// Fraction of walkable area that must have changed for a check to rebuild.
pub const REBUILD_CHANGE_THRESHOLD: f64 = 0.01;

const TIME_EPS: f64 = 1e-9;

/// Cylinder around a moving obstacle, projected to a disc on the floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarveVolume {
    pub center: Vec2,
    pub radius: f64,
    pub owner: String,
}

/// Baked mesh plus the carve volumes currently punched into it.
///
/// Carving blocks whole triangles that touch a carve disc inflated by the
/// agent radius; the exact hole shape only appears after a rebuild, which
/// bakes the carve discs in as static obstacles.
#[derive(Clone, Debug)]
pub struct NavMeshRuntime {
    base: NavMesh,
    source: Option<BakeSource>,
    inflate: f64,
    carves: BTreeMap<String, CarveVolume>,
    /// Carves as they were when last baked into `base`.
    baked: BTreeMap<String, CarveVolume>,
    blocked: Vec<bool>,
    changed_area_accumulator: f64,
    last_rebuild_check: f64,
    rebuilds: u64,
}

impl NavMeshRuntime {
    /// Runtime over a fixed mesh; a due rebuild only resets the accumulator.
    pub fn new(base: NavMesh, inflate: f64) -> Self {
        let blocked = vec![false; base.len()];
        Self {
            base,
            source: None,
            inflate,
            carves: BTreeMap::new(),
            baked: BTreeMap::new(),
            blocked,
            changed_area_accumulator: 0.0,
            last_rebuild_check: 0.0,
            rebuilds: 0,
        }
    }

    pub fn from_source(source: BakeSource) -> Result<Self, NavMeshError> {
        let base = source.bake(&[])?;
        let mut rt = Self::new(base, source.config.agent_radius);
        rt.source = Some(source);
        Ok(rt)
    }

    pub fn mesh(&self) -> &NavMesh {
        &self.base
    }

    pub fn is_blocked(&self, t: usize) -> bool {
        self.blocked[t]
    }

    pub fn blocked(&self) -> &[bool] {
        &self.blocked
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn carves(&self) -> impl Iterator<Item = &CarveVolume> {
        self.carves.values()
    }

    pub fn changed_area_accumulator(&self) -> f64 {
        self.changed_area_accumulator
    }

    pub fn last_rebuild_check(&self) -> f64 {
        self.last_rebuild_check
    }

    pub fn rebuild_count(&self) -> u64 {
        self.rebuilds
    }

    pub fn inflate_radius(&self) -> f64 {
        self.inflate
    }

    pub fn apply_carve(&mut self, carve: CarveVolume) {
        self.carves.insert(carve.owner.clone(), carve);
        self.refresh_blocked();
    }

    pub fn remove_carve(&mut self, owner: &str) {
        if self.carves.remove(owner).is_some() {
            self.refresh_blocked();
        }
    }

    /// Replaces the whole carve set in one step; change is measured against
    /// the previous blocked set.
    pub fn set_carves(&mut self, carves: impl IntoIterator<Item = CarveVolume>) {
        self.carves = carves.into_iter().map(|c| (c.owner.clone(), c)).collect();
        self.refresh_blocked();
    }

    fn refresh_blocked(&mut self) {
        let mesh = &self.base;
        let mut blocked = vec![false; mesh.len()];
        for carve in self.carves.values() {
            if self.baked.get(&carve.owner) == Some(carve) {
                continue;
            }
            let reach = carve.radius + self.inflate;
            for (t, slot) in blocked.iter_mut().enumerate() {
                if *slot {
                    continue;
                }
                let tri = mesh.triangle(t);
                let lo_x = tri[0].x.min(tri[1].x).min(tri[2].x);
                let hi_x = tri[0].x.max(tri[1].x).max(tri[2].x);
                let lo_z = tri[0].z.min(tri[1].z).min(tri[2].z);
                let hi_z = tri[0].z.max(tri[1].z).max(tri[2].z);
                if carve.center.x + reach < lo_x
                    || carve.center.x - reach > hi_x
                    || carve.center.z + reach < lo_z
                    || carve.center.z - reach > hi_z
                {
                    continue;
                }
                *slot = triangle_intersects_disc(tri, carve.center, reach);
            }
        }
        let total = mesh.total_area();
        if total > 0.0 {
            let changed: f64 = (0..mesh.len()).filter(|&t| blocked[t] != self.blocked[t]).map(|t| mesh.area(t)).sum();
            self.changed_area_accumulator = (self.changed_area_accumulator + changed / total).min(1.0);
        }
        self.blocked = blocked;
    }

    /// Fires a rebuild check every [`REBUILD_PERIOD`] seconds. The check
    /// rebuilds only when more than [`REBUILD_CHANGE_THRESHOLD`] of the area
    /// changed since the last rebuild; both conditions must hold.
    pub fn rebuild_if_due(&mut self, now: f64) -> Result<bool, NavMeshError> {
        if now - self.last_rebuild_check < REBUILD_PERIOD - TIME_EPS {
            return Ok(false);
        }
        self.last_rebuild_check = now;
        if self.changed_area_accumulator <= REBUILD_CHANGE_THRESHOLD {
            return Ok(false);
        }
        if let Some(source) = &self.source {
            let discs: Vec<(Vec2, f64)> = self.carves.values().map(|c| (c.center, c.radius)).collect();
            self.base = source.bake(&discs)?;
            self.baked = self.carves.clone();
        }
        self.rebuilds += 1;
        self.blocked = vec![false; self.base.len()];
        self.refresh_blocked();
        self.changed_area_accumulator = 0.0;
        Ok(true)
    }
}
