//! Exact distance refinement, the two-way driver, and the brute-force
//! reference.
//!
//! Ties are broken the same way everywhere: a query's nearest neighbor is
//! the smallest target id among the closest ones, and the one-sided maximum
//! goes to the smallest query id among the farthest ones. All reductions
//! compare `(squared distance, id)` keys, which is a total order, so the
//! outcome does not depend on how work is split across threads.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::broad_search::{broad_phase, CandidateSet, CellBvh, TraceRow};
use crate::error::{Error, Result};
use crate::geom::{dist2, Aabb, Point3, SQRT_3};
use crate::index_space::{build_grid, scale_queries, GridParams, IndexSpace, SearchTargets};
use crate::mesh_io::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Queries from A, targets from B: h(A, B).
    AtoB,
    /// Queries from B, targets from A: h(B, A).
    BtoA,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::AtoB => "ab",
            Side::BtoA => "ba",
        })
    }
}

/// A one-sided distance with the pair that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSided {
    pub h: f64,
    pub query: u32,
    pub target: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Best {
    d2: f64,
    query: u32,
    target: u32,
}

impl Best {
    const NONE: Best = Best {
        d2: f64::NEG_INFINITY,
        query: u32::MAX,
        target: u32::MAX,
    };

    /// Larger distance wins; on a tie the smaller query id.
    fn max(self, o: Best) -> Best {
        match self.d2.total_cmp(&o.d2) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => o,
            std::cmp::Ordering::Equal => {
                if (self.query, self.target) <= (o.query, o.target) {
                    self
                } else {
                    o
                }
            }
        }
    }

    fn finish(self) -> OneSided {
        OneSided {
            h: self.d2.sqrt(),
            query: self.query,
            target: self.target,
        }
    }
}

/// Nearest of `ids` to `p`: smallest squared distance, then smallest id.
#[inline]
fn nearest_of(p: &Point3, ids: impl Iterator<Item = u32>, target: &PointCloud) -> (f64, u32) {
    let pts = target.points();
    let mut best = (f64::INFINITY, u32::MAX);
    for id in ids {
        let d2 = dist2(p, &pts[id as usize]);
        if d2 < best.0 || (d2 == best.0 && id < best.1) {
            best = (d2, id);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RefineStats {
    pub candidate_cells: usize,
    pub candidate_pairs: usize,
}

/// Expands every gray-zone candidate set to its member target points and
/// returns `max over queries of min over members` with its witness pair.
pub fn refine_one_sided<T: SearchTargets>(
    cands: &[CandidateSet],
    queries: &PointCloud,
    target: &PointCloud,
    space: &T,
) -> Result<(OneSided, RefineStats)> {
    if cands.is_empty() {
        return Err(Error::Consistency("no candidate sets to refine".into()));
    }
    let per_query: Vec<(Best, RefineStats)> = cands
        .par_iter()
        .map(|set| {
            let mut reps: Vec<u32> = set.cells.iter().map(|c| c.rep).collect();
            reps.sort_unstable();
            reps.dedup();
            if reps.is_empty() {
                return Err(Error::Consistency(format!(
                    "query {} has an empty candidate set",
                    set.query
                )));
            }
            let mut pairs = 0;
            for &r in &reps {
                if r as usize >= space.len() || space.members(r).is_empty() {
                    return Err(Error::Consistency(format!(
                        "candidate representative {r} of query {} has no members",
                        set.query
                    )));
                }
                pairs += space.members(r).len();
            }
            let p = queries.points()[set.query as usize];
            let (d2, t) = nearest_of(
                &p,
                reps.iter().flat_map(|&r| space.members(r).iter().copied()),
                target,
            );
            Ok((
                Best {
                    d2,
                    query: set.query,
                    target: t,
                },
                RefineStats {
                    candidate_cells: reps.len(),
                    candidate_pairs: pairs,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let best = per_query.iter().fold(Best::NONE, |acc, (b, _)| acc.max(*b));
    let stats = per_query.iter().fold(RefineStats::default(), |acc, (_, s)| RefineStats {
        candidate_cells: acc.candidate_cells + s.candidate_cells,
        candidate_pairs: acc.candidate_pairs + s.candidate_pairs,
    });
    Ok((best.finish(), stats))
}

const LANES: usize = 8;

/// Target coordinates split per axis for the all-pairs scan.
struct Soa {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl Soa {
    fn new(points: &[Point3]) -> Soa {
        Soa {
            x: points.iter().map(|p| p.x).collect(),
            y: points.iter().map(|p| p.y).collect(),
            z: points.iter().map(|p| p.z).collect(),
        }
    }

    /// Same expression as [`dist2`], evaluated lane-wise. Min is exact and
    /// order independent, and each lane keeps the first (smallest) index of
    /// its minimum, so the result equals the sequential scan.
    fn nearest(&self, p: &Point3) -> (f64, u32) {
        let n = self.x.len();
        let mut best = [f64::INFINITY; LANES];
        let mut idx = [u32::MAX; LANES];
        let chunks = n / LANES;
        for c in 0..chunks {
            let base = c * LANES;
            let xs = &self.x[base..base + LANES];
            let ys = &self.y[base..base + LANES];
            let zs = &self.z[base..base + LANES];
            for l in 0..LANES {
                let dx = p.x - xs[l];
                let dy = p.y - ys[l];
                let dz = p.z - zs[l];
                let d2 = dx * dx + dy * dy + dz * dz;
                if d2 < best[l] {
                    best[l] = d2;
                    idx[l] = (base + l) as u32;
                }
            }
        }
        let mut out = (f64::INFINITY, u32::MAX);
        for l in 0..LANES {
            if best[l] < out.0 || (best[l] == out.0 && idx[l] < out.1) {
                out = (best[l], idx[l]);
            }
        }
        for i in chunks * LANES..n {
            let d2 = dist2(p, &Point3::new(self.x[i], self.y[i], self.z[i]));
            if d2 < out.0 || (d2 == out.0 && (i as u32) < out.1) {
                out = (d2, i as u32);
            }
        }
        out
    }
}

/// All-pairs one-sided distance `max over a of min over b`.
pub fn brute_force_one_sided(queries: &PointCloud, target: &PointCloud) -> OneSided {
    let soa = Soa::new(target.points());
    queries
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (d2, t) = soa.nearest(p);
            Best {
                d2,
                query: i as u32,
                target: t,
            }
        })
        .reduce(|| Best::NONE, Best::max)
        .finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub query: u32,
    pub target: u32,
    pub side: Side,
}

impl Witness {
    /// The witness as an (A point id, B point id) pair.
    pub fn ab_pair(&self) -> (u32, u32) {
        match self.side {
            Side::AtoB => (self.query, self.target),
            Side::BtoA => (self.target, self.query),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseTimings {
    pub index: Duration,
    pub broad: Duration,
    pub narrow: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.index + self.broad + self.narrow
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SideStats {
    /// The target had no extent; this side was computed by brute force.
    pub fallback: bool,
    pub bits: u32,
    pub cell_size: f64,
    pub representatives: usize,
    pub iterations: u32,
    pub last_coverage: u32,
    pub r0_multiple: u32,
    pub restarts: u32,
    pub gray_queries: usize,
    pub retired_queries: usize,
    pub candidate_cells: usize,
    pub candidate_pairs: usize,
    pub timings: PhaseTimings,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffResult {
    pub h: f64,
    pub h_ab: f64,
    pub h_ba: f64,
    pub witness: Witness,
    pub ab: SideStats,
    pub ba: SideStats,
    /// Wall time of the whole call.
    pub elapsed: Duration,
}

impl HausdorffResult {
    fn combine(ab: OneSided, ba: OneSided, ab_stats: SideStats, ba_stats: SideStats, elapsed: Duration) -> Self {
        let (h, witness) = if ab.h >= ba.h {
            (
                ab.h,
                Witness {
                    query: ab.query,
                    target: ab.target,
                    side: Side::AtoB,
                },
            )
        } else {
            (
                ba.h,
                Witness {
                    query: ba.query,
                    target: ba.target,
                    side: Side::BtoA,
                },
            )
        };
        HausdorffResult {
            h,
            h_ab: ab.h,
            h_ba: ba.h,
            witness,
            ab: ab_stats,
            ba: ba_stats,
            elapsed,
        }
    }

    pub fn fallback(&self) -> bool {
        self.ab.fallback || self.ba.fallback
    }

    pub fn timings(&self) -> PhaseTimings {
        let (a, b) = (self.ab.timings, self.ba.timings);
        PhaseTimings {
            index: a.index + b.index,
            broad: a.broad + b.broad,
            narrow: a.narrow + b.narrow,
        }
    }

    /// Distance between the witness points.
    pub fn witness_distance(&self, a: &PointCloud, b: &PointCloud) -> f64 {
        let (ia, ib) = self.witness.ab_pair();
        crate::geom::dist(&a.get(ia), &b.get(ib))
    }
}

/// How the first search radius is chosen, in units of √3 index cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum R0Policy {
    /// Largest multiple of √3 not above half the distance between the two
    /// clouds' box centers; √3 when the boxes overlap.
    #[default]
    Auto,
    Sqrt3,
    Multiple(u32),
}

impl R0Policy {
    pub fn multiple(&self, query_box: &Aabb, target_box: &Aabb, grid: &GridParams) -> u32 {
        match *self {
            R0Policy::Sqrt3 => 1,
            R0Policy::Multiple(m) => m.max(1),
            R0Policy::Auto => {
                if query_box.overlaps(target_box) {
                    return 1;
                }
                let half = 0.5 * crate::geom::dist(&query_box.center(), &target_box.center());
                let m = (half / grid.cell_size / SQRT_3).floor();
                if m.is_finite() && m >= 1.0 {
                    m.min(u32::MAX as f64 / 2.0) as u32
                } else {
                    1
                }
            }
        }
    }
}

impl std::str::FromStr for R0Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(R0Policy::Auto),
            "sqrt3" => Ok(R0Policy::Sqrt3),
            m => match m.parse::<u32>() {
                Ok(v) if v >= 1 => Ok(R0Policy::Multiple(v)),
                _ => Err(Error::InvalidArgument(format!(
                    "r0 must be auto, sqrt3 or a positive multiple of √3, got {s:?}"
                ))),
            },
        }
    }
}

pub const DEFAULT_BITS: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HausdorffConfig {
    pub bits: u32,
    pub r0: R0Policy,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for HausdorffConfig {
    fn default() -> Self {
        HausdorffConfig {
            bits: DEFAULT_BITS,
            r0: R0Policy::Auto,
            threads: None,
        }
    }
}

impl HausdorffConfig {
    pub fn with_bits(mut self, bits: u32) -> Self {
        self.bits = bits;
        self
    }

    pub fn with_r0(mut self, r0: R0Policy) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// Runs `f` on a pool of the configured size, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Search targets for one side of the computation.
pub(crate) trait TargetBuilder: Sync {
    type Targets: SearchTargets;
    fn build(&self, target: &PointCloud, grid: GridParams) -> Self::Targets;
}

pub(crate) struct CellTargets;

impl TargetBuilder for CellTargets {
    type Targets = IndexSpace;
    fn build(&self, target: &PointCloud, grid: GridParams) -> IndexSpace {
        IndexSpace::with_grid(target, grid)
    }
}

/// One side through the index → broad → narrow pipeline. A target without
/// extent is handled by brute force and flagged.
pub(crate) fn one_sided_pipeline<B: TargetBuilder>(
    queries: &PointCloud,
    target: &PointCloud,
    cfg: &HausdorffConfig,
    builder: &B,
) -> Result<(OneSided, SideStats)> {
    let t0 = Instant::now();
    let grid = match build_grid(target, cfg.bits) {
        Ok(g) => g,
        Err(Error::DegenerateGrid) => {
            let r = brute_force_one_sided(queries, target);
            let stats = SideStats {
                fallback: true,
                bits: cfg.bits,
                timings: PhaseTimings {
                    narrow: t0.elapsed(),
                    ..Default::default()
                },
                ..Default::default()
            };
            return Ok((r, stats));
        }
        Err(e) => return Err(e),
    };
    let targets = builder.build(target, grid);
    let scaled = scale_queries(queries, &grid);
    let r0 = cfg.r0.multiple(&queries.bounds(), &target.bounds(), &grid);
    let t_index = t0.elapsed();

    let t1 = Instant::now();
    let bvh = CellBvh::build(targets.positions())?;
    let outcome = broad_phase(&scaled, &bvh, r0);
    let t_broad = t1.elapsed();

    let t2 = Instant::now();
    let (one, refine) = refine_one_sided(&outcome.candidates, queries, target, &targets)?;
    let t_narrow = t2.elapsed();

    let stats = SideStats {
        fallback: false,
        bits: cfg.bits,
        cell_size: grid.cell_size,
        representatives: targets.len(),
        iterations: outcome.iterations,
        last_coverage: outcome.last_coverage,
        r0_multiple: outcome.r0_multiple,
        restarts: outcome.restarts,
        gray_queries: outcome.candidates.len(),
        retired_queries: outcome.retired.len(),
        candidate_cells: refine.candidate_cells,
        candidate_pairs: refine.candidate_pairs,
        timings: PhaseTimings {
            index: t_index,
            broad: t_broad,
            narrow: t_narrow,
        },
        trace: outcome.trace,
    };
    Ok((one, stats))
}

pub(crate) fn two_sided<B: TargetBuilder>(
    a: &PointCloud,
    b: &PointCloud,
    cfg: &HausdorffConfig,
    builder: &B,
) -> Result<HausdorffResult> {
    let start = Instant::now();
    let ((ab, ab_stats), (ba, ba_stats)) = with_threads(cfg.threads, || -> Result<_> {
        Ok((
            one_sided_pipeline(a, b, cfg, builder)?,
            one_sided_pipeline(b, a, cfg, builder)?,
        ))
    })??;
    Ok(HausdorffResult::combine(ab, ba, ab_stats, ba_stats, start.elapsed()))
}

/// Exact two-way Hausdorff distance through the quantized index space.
/// h(A, B) uses an index space over B, h(B, A) one over A.
pub fn hausdorff(a: &PointCloud, b: &PointCloud, cfg: &HausdorffConfig) -> Result<HausdorffResult> {
    two_sided(a, b, cfg, &CellTargets)
}

/// All-pairs reference with the same tie-breaking as [`hausdorff`].
pub fn brute_force_hausdorff(a: &PointCloud, b: &PointCloud) -> HausdorffResult {
    let start = Instant::now();
    let side = |q: &PointCloud, t: &PointCloud| {
        let t0 = Instant::now();
        let r = brute_force_one_sided(q, t);
        let stats = SideStats {
            timings: PhaseTimings {
                narrow: t0.elapsed(),
                ..Default::default()
            },
            ..Default::default()
        };
        (r, stats)
    };
    let (ab, ab_stats) = side(a, b);
    let (ba, ba_stats) = side(b, a);
    HausdorffResult::combine(ab, ba, ab_stats, ba_stats, start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broad_search::Candidate;
    use crate::index_space::build_index_space;

    fn cloud(points: &[(f64, f64, f64)]) -> PointCloud {
        PointCloud::new(
            points.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect(),
            "t",
        )
        .unwrap()
    }

    #[test]
    fn refine_single_pair() {
        let a = cloud(&[(0.0, 0.0, 0.0)]);
        let b = cloud(&[(3.0, 4.0, 0.0), (3.0, 4.0, 1.0)]);
        let space = build_index_space(&b, 2).unwrap();
        let rep = space.rep_of(&space.grid().quantize_target(&b.get(0))).unwrap();
        let cands = [CandidateSet {
            query: 0,
            coverage: 1,
            cells: vec![Candidate { found: 1, rep }],
        }];
        let (one, _) = refine_one_sided(&cands, &a, &b, &space).unwrap();
        assert_eq!(one.h, 5.0);
        assert_eq!((one.query, one.target), (0, 0));
    }

    #[test]
    fn refine_rejects_unknown_representative() {
        let a = cloud(&[(0.0, 0.0, 0.0)]);
        let b = cloud(&[(3.0, 4.0, 0.0), (3.0, 4.0, 1.0)]);
        let space = build_index_space(&b, 2).unwrap();
        let cands = [CandidateSet {
            query: 0,
            coverage: 1,
            cells: vec![Candidate { found: 1, rep: 99 }],
        }];
        assert!(matches!(
            refine_one_sided(&cands, &a, &b, &space),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn self_distance_is_zero() {
        let a = crate::mesh_io::synthetic::generate(crate::mesh_io::synthetic::Shape::Blob, 2000, 1)
            .unwrap();
        let r = hausdorff(&a, &a, &HausdorffConfig::default()).unwrap();
        assert_eq!(r.h, 0.0);
        let (ia, ib) = r.witness.ab_pair();
        assert_eq!(a.get(ia), a.get(ib));
        assert_eq!(r.ab.last_coverage, 1);
    }

    #[test]
    fn singletons_fall_back() {
        let a = cloud(&[(0.0, 0.0, 0.0)]);
        let b = cloud(&[(3.0, 4.0, 0.0)]);
        let r = hausdorff(&a, &b, &HausdorffConfig::default()).unwrap();
        assert_eq!(r.h, 5.0);
        assert!(r.fallback());
        assert_eq!(brute_force_hausdorff(&a, &b).h, 5.0);
    }

    #[test]
    fn subset_one_sided_zero() {
        let b = cloud(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (5.0, 2.0, 1.0)]);
        let a = cloud(&[(1.0, 0.0, 0.0)]);
        let r = brute_force_hausdorff(&a, &b);
        assert_eq!(r.h_ab, 0.0);
        assert!(r.h_ba > 0.0);
        assert_eq!(r.h, r.h_ba);
    }

    #[test]
    fn brute_ties_pick_smallest_ids() {
        // both queries are 1 away from their nearest target; targets 0 and 1
        // are equidistant from query 0
        let a = cloud(&[(0.0, 0.0, 0.0), (10.0, 1.0, 0.0)]);
        let b = cloud(&[(-1.0, 0.0, 0.0), (1.0, 0.0, 0.0), (10.0, 0.0, 0.0)]);
        let r = brute_force_one_sided(&a, &b);
        assert_eq!((r.h, r.query, r.target), (1.0, 0, 0));
    }

    #[test]
    fn lanes_match_sequential_scan() {
        let b = crate::mesh_io::synthetic::generate(crate::mesh_io::synthetic::Shape::UniformBox, 1003, 8)
            .unwrap();
        let soa = Soa::new(b.points());
        for i in 0..50 {
            let p = Point3::new(i as f64 * 0.02, 0.5, 0.25);
            assert_eq!(soa.nearest(&p), nearest_of(&p, 0..b.len() as u32, &b));
        }
    }

    #[test]
    fn r0_policy_parsing() {
        assert_eq!("auto".parse::<R0Policy>().unwrap(), R0Policy::Auto);
        assert_eq!("sqrt3".parse::<R0Policy>().unwrap(), R0Policy::Sqrt3);
        assert_eq!("4".parse::<R0Policy>().unwrap(), R0Policy::Multiple(4));
        assert!("0".parse::<R0Policy>().is_err());
        assert!("1.5".parse::<R0Policy>().is_err());
    }

    #[test]
    fn auto_r0_from_center_distance() {
        let grid = GridParams {
            origin: Point3::ORIGIN,
            cell_size: 1.0,
            bits: 3,
            cells_per_dim: [8, 8, 8],
        };
        let a = Aabb::new(Point3::ORIGIN, Point3::new(2.0, 2.0, 2.0));
        let b = Aabb::new(Point3::new(20.0, 0.0, 0.0), Point3::new(22.0, 2.0, 2.0));
        // half center distance 10 → floor(10 / √3) = 5
        assert_eq!(R0Policy::Auto.multiple(&a, &b, &grid), 5);
        let near = Aabb::new(Point3::new(1.0, 1.0, 1.0), Point3::new(3.0, 3.0, 3.0));
        assert_eq!(R0Policy::Auto.multiple(&a, &near, &grid), 1);
        let close = Aabb::new(Point3::new(2.5, 0.0, 0.0), Point3::new(4.5, 2.0, 2.0));
        assert_eq!(R0Policy::Auto.multiple(&a, &close, &grid), 1);
    }
}
