//! Helpers shared by the integration tests: seeded instances and an
//! all-pairs oracle written independently of the library's own scan.

#![allow(dead_code)]

use hdist::bench::Family;
use hdist::broad_search::{broad_phase, BroadPhaseOutcome, CellBvh};
use hdist::index_space::{ScaledQuery, SearchTargets};
use hdist::{build_index_space, scale_queries, IndexSpace, Point3, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: [Family; 4] = [
    Family::UniformBox,
    Family::GaussianClusters,
    Family::Coplanar,
    Family::DisjointTranslated,
];

/// Instance `i` of a seeded stream, cycling through the four families.
pub fn instance(seed: u64, i: usize, max_size: usize) -> (PointCloud, PointCloud) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
    let na = rng.random_range(1..=max_size);
    let nb = rng.random_range(1..=max_size);
    FAMILIES[i % FAMILIES.len()].instance(na, nb, &mut rng)
}

/// Squared distance and id of the nearest target point, smallest id on ties.
pub fn oracle_nn(p: &Point3, target: &[Point3]) -> (f64, u32) {
    let mut best = (f64::INFINITY, u32::MAX);
    for (i, t) in target.iter().enumerate() {
        let (dx, dy, dz) = (p.x - t.x, p.y - t.y, p.z - t.z);
        let d2 = dx * dx + dy * dy + dz * dz;
        if d2 < best.0 {
            best = (d2, i as u32);
        }
    }
    best
}

/// One-sided distance by all pairs: (h, query id, target id), with the
/// smallest query id winning ties.
pub fn oracle_one_sided(a: &[Point3], b: &[Point3]) -> (f64, u32, u32) {
    let mut best = (f64::NEG_INFINITY, u32::MAX, u32::MAX);
    for (i, p) in a.iter().enumerate() {
        let (d2, j) = oracle_nn(p, b);
        if d2 > best.0 {
            best = (d2, i as u32, j);
        }
    }
    (best.0.sqrt(), best.1, best.2)
}

pub fn oracle_hausdorff(a: &PointCloud, b: &PointCloud) -> f64 {
    oracle_one_sided(a.points(), b.points())
        .0
        .max(oracle_one_sided(b.points(), a.points()).0)
}

pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

/// Everything one side of the pipeline builds before refinement.
pub struct SideRun {
    pub space: IndexSpace,
    pub queries: Vec<ScaledQuery>,
    pub bvh: CellBvh,
    pub outcome: BroadPhaseOutcome,
}

impl SideRun {
    /// `None` when the target has no extent and the grid cannot be built.
    pub fn new(queries: &PointCloud, target: &PointCloud, bits: u32, r0_multiple: u32) -> Option<SideRun> {
        let space = build_index_space(target, bits).ok()?;
        let scaled = scale_queries(queries, space.grid());
        let bvh = CellBvh::build(space.positions()).expect("bvh");
        let outcome = broad_phase(&scaled, &bvh, r0_multiple);
        Some(SideRun {
            space,
            queries: scaled,
            bvh,
            outcome,
        })
    }

    /// Target points in index-space coordinates.
    pub fn scaled_target(&self, target: &PointCloud) -> Vec<Point3> {
        target.points().iter().map(|p| self.space.grid().scale(p)).collect()
    }
}
