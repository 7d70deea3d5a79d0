//! Expanding-radius candidate search in index space.
//!
//! Every sweep `n` searches with radius `r_n = r0 + (n - 1)·√3` around each
//! still-uncovered query. A query is *covered* at the first sweep that finds
//! a representative within `r_n`. Because a target point can sit anywhere in
//! its unit cell, a query covered at sweep `n` has its true nearest-neighbor
//! distance in `((n - 2)√3, (n + 1)√3]` (index units, `r0 = √3`), so only
//! queries covered in the last three coverage sweeps can realize the maximum.
//! Those form the gray zone; older ones are retired.
//!
//! A gray query keeps collecting candidates for two sweeps past its own
//! coverage sweep, which guarantees the cell of its true nearest neighbor is
//! among them. When the last query is covered, up to two more sweeps run for
//! the gray queries alone.
//!
//! Candidate lists are materialized once, at termination, for the surviving
//! gray queries only: the list a query would have accumulated over its three
//! sweeps is exactly the set of representatives within `r_{n+2}`, each stamped
//! with the first of those sweeps whose radius reached it. Retired queries
//! never pay for their candidate lists.

pub mod bvh;

use rayon::prelude::*;

pub use bvh::CellBvh;

use crate::geom::SQRT_3;
use crate::index_space::ScaledQuery;

/// Radius increment between sweeps, in index units.
pub const ALPHA: f64 = SQRT_3;

/// Sweeps a query stays in the gray zone after the sweep that covered it.
pub const GRAY_SWEEPS: u32 = 2;

/// Search radius of sweep `n` (1-based) when the first radius is
/// `r0_multiple · √3`.
#[inline]
pub fn radius(r0_multiple: u32, n: u32) -> f64 {
    (r0_multiple + n - 1) as f64 * ALPHA
}

/// Representatives within Euclidean distance `r` of the query, ascending.
/// The BVH collects leaf-cube hits (`cheb_dist <= r`), then the in-sphere
/// test drops the hits that only clip a cube corner. Expects `r >= √3`.
pub fn epsilon_neighbors(q: &ScaledQuery, r: f64, bvh: &CellBvh) -> Vec<u32> {
    debug_assert!(r >= SQRT_3, "search radius {r} below √3");
    bvh.within(&q.pos, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    /// Sweep at which the representative first fell inside the radius.
    pub found: u32,
    /// Representative id in the searched target set.
    pub rep: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub query: u32,
    /// Sweep that covered the query.
    pub coverage: u32,
    /// Ordered by (found, rep); no repeated reps.
    pub cells: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: u32,
    pub radius: f64,
    pub active: usize,
    pub gray: usize,
    pub newly_covered: usize,
    pub retired: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GrayEntry {
    /// Position in the query slice.
    slot: u32,
    coverage: u32,
}

/// Mutable bookkeeping of one broad-phase run. Queries are referred to by
/// their position in the query slice.
#[derive(Debug, Clone)]
pub struct BroadPhaseState {
    r0_multiple: u32,
    iteration: u32,
    active: Vec<u32>,
    gray: Vec<GrayEntry>,
    retired: Vec<u32>,
    coverage: Vec<u32>,
    last_coverage: u32,
}

impl BroadPhaseState {
    pub fn new(query_count: usize, r0_multiple: u32) -> Self {
        assert!(r0_multiple >= 1, "initial radius below √3");
        BroadPhaseState {
            r0_multiple,
            iteration: 0,
            active: (0..query_count as u32).collect(),
            gray: Vec::new(),
            retired: Vec::new(),
            coverage: vec![0; query_count],
            last_coverage: 0,
        }
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    /// Radius of the last completed sweep.
    pub fn radius(&self) -> f64 {
        radius(self.r0_multiple, self.iteration.max(1))
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn gray(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.gray.iter().map(|g| (g.slot, g.coverage))
    }

    pub fn retired(&self) -> &[u32] {
        &self.retired
    }

    /// Whether every query is covered and every gray query has had its
    /// post-coverage sweeps.
    pub fn is_done(&self) -> bool {
        self.active.is_empty()
            && self
                .gray
                .iter()
                .all(|g| g.coverage + GRAY_SWEEPS <= self.iteration)
    }

    /// Runs the next sweep over the active queries.
    pub fn sweep(&mut self, queries: &[ScaledQuery], bvh: &CellBvh) -> TraceRow {
        self.iteration += 1;
        let n = self.iteration;
        let r = radius(self.r0_multiple, n);

        let hit: Vec<bool> = self
            .active
            .par_iter()
            .map(|&slot| bvh.any_within(&queries[slot as usize].pos, r))
            .collect();

        // stream compaction, order preserving
        let mut still_active = Vec::with_capacity(self.active.len());
        let mut newly = Vec::new();
        for (&slot, covered) in self.active.iter().zip(&hit) {
            if *covered {
                newly.push(slot);
            } else {
                still_active.push(slot);
            }
        }
        self.active = still_active;

        let mut retired_now = 0;
        if !newly.is_empty() {
            let keep_from = n.saturating_sub(GRAY_SWEEPS);
            let retired = &mut self.retired;
            self.gray.retain(|g| {
                let keep = g.coverage >= keep_from;
                if !keep {
                    retired.push(g.slot);
                    retired_now += 1;
                }
                keep
            });
            for &slot in &newly {
                self.coverage[slot as usize] = n;
                self.gray.push(GrayEntry { slot, coverage: n });
            }
            self.last_coverage = n;
        }

        TraceRow {
            iteration: n,
            radius: r,
            active: self.active.len(),
            gray: self.gray.len(),
            newly_covered: newly.len(),
            retired: retired_now,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BroadPhaseOutcome {
    /// Gray-zone survivors, ascending by query id.
    pub candidates: Vec<CandidateSet>,
    /// Coverage sweep of each query, aligned with the query slice.
    pub coverage: Vec<u32>,
    /// Query ids whose candidates were discarded, ascending.
    pub retired: Vec<u32>,
    /// Total sweeps, post-coverage sweeps included.
    pub iterations: u32,
    /// Sweep that covered the last query.
    pub last_coverage: u32,
    /// Initial radius actually used, as a multiple of √3.
    pub r0_multiple: u32,
    /// How many times the initial radius was halved because the first sweep
    /// already covered every query.
    pub restarts: u32,
    pub trace: Vec<TraceRow>,
}

impl BroadPhaseOutcome {
    pub fn candidate_cells(&self) -> usize {
        self.candidates.iter().map(|c| c.cells.len()).sum()
    }
}

/// Runs the broad phase until every query is covered and the gray zone has
/// settled. `r0_multiple` is the initial radius in units of √3.
///
/// If the first sweep covers every query and the initial radius is above √3,
/// the run restarts with half the initial radius (rounded down, at least √3)
/// so the result is bracketed from below by an uncovered query.
pub fn broad_phase(queries: &[ScaledQuery], bvh: &CellBvh, r0_multiple: u32) -> BroadPhaseOutcome {
    let mut m = r0_multiple.max(1);
    let mut restarts = 0;
    let (state, trace) = loop {
        let mut state = BroadPhaseState::new(queries.len(), m);
        let first = state.sweep(queries, bvh);
        if first.active == 0 && m > 1 {
            m = (m / 2).max(1);
            restarts += 1;
            continue;
        }
        let mut trace = vec![first];
        while !state.is_done() {
            trace.push(state.sweep(queries, bvh));
        }
        break (state, trace);
    };

    let mut gray = state.gray.clone();
    gray.sort_unstable_by_key(|g| queries[g.slot as usize].id);
    let candidates = gray
        .par_iter()
        .map(|g| materialize(&queries[g.slot as usize], g.coverage, m, bvh))
        .collect();

    let mut retired: Vec<u32> = state
        .retired
        .iter()
        .map(|&s| queries[s as usize].id)
        .collect();
    retired.sort_unstable();

    BroadPhaseOutcome {
        candidates,
        coverage: state.coverage,
        retired,
        iterations: state.iteration,
        last_coverage: state.last_coverage,
        r0_multiple: m,
        restarts,
        trace,
    }
}

fn materialize(q: &ScaledQuery, coverage: u32, r0_multiple: u32, bvh: &CellBvh) -> CandidateSet {
    let last = coverage + GRAY_SWEEPS;
    let radii2: Vec<f64> = (coverage..=last)
        .map(|n| {
            let r = radius(r0_multiple, n);
            r * r
        })
        .collect();
    // same set as epsilon_neighbors(q, r_last), stamped on the fly
    let mut cells = Vec::new();
    bvh.for_each_within(&q.pos, radius(r0_multiple, last), |rep, _, d2| {
        let step = radii2.iter().position(|&r2| d2 <= r2).unwrap_or(GRAY_SWEEPS as usize);
        cells.push(Candidate {
            found: coverage + step as u32,
            rep,
        });
    });
    cells.sort_unstable();
    CandidateSet {
        query: q.id,
        coverage,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;
    use crate::index_space::ScaledQuery;

    fn q(id: u32, x: f64, y: f64, z: f64) -> ScaledQuery {
        ScaledQuery {
            id,
            pos: Point3::new(x, y, z),
        }
    }

    #[test]
    fn corner_hits_are_filtered() {
        let bvh = CellBvh::build(&[Point3::ORIGIN, Point3::new(5.0, 0.0, 0.0)]).unwrap();
        assert_eq!(epsilon_neighbors(&q(0, 1.2, 0.0, 0.0), SQRT_3, &bvh), vec![0]);

        // (1.5,1.5,1.5) is inside the cube of half-width √3 but outside the ball
        let bvh = CellBvh::build(&[Point3::new(1.5, 1.5, 1.5)]).unwrap();
        let origin = q(0, 0.0, 0.0, 0.0);
        assert_eq!(bvh.box_hits(&origin.pos, SQRT_3), vec![0]);
        assert!(epsilon_neighbors(&origin, SQRT_3, &bvh).is_empty());
    }

    #[test]
    fn query_on_representative() {
        let bvh = CellBvh::build(&[Point3::new(2.0, 3.0, 4.0)]).unwrap();
        for r in [SQRT_3, 2.0, 10.0] {
            assert_eq!(epsilon_neighbors(&q(0, 2.0, 3.0, 4.0), r, &bvh), vec![0]);
        }
    }

    #[test]
    fn far_query_covered_at_sixth_sweep() {
        let bvh = CellBvh::build(&[Point3::ORIGIN]).unwrap();
        let out = broad_phase(&[q(0, 10.0, 0.0, 0.0)], &bvh, 1);
        // 5·√3 ≈ 8.66 < 10 <= 6·√3 ≈ 10.39
        assert_eq!(out.coverage, vec![6]);
        assert_eq!(out.last_coverage, 6);
        assert_eq!(out.iterations, 8);
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(
            out.candidates[0].cells,
            vec![Candidate { found: 6, rep: 0 }]
        );
    }

    #[test]
    fn old_queries_retire() {
        let bvh = CellBvh::build(&[Point3::ORIGIN]).unwrap();
        let queries = [
            q(0, 0.0, 0.0, 0.0),  // sweep 1
            q(1, 3.0, 0.0, 0.0),  // sweep 2
            q(2, 9.0, 0.0, 0.0),  // sweep 6
            q(3, 16.0, 0.0, 0.0), // sweep 10
        ];
        let out = broad_phase(&queries, &bvh, 1);
        assert_eq!(out.coverage, vec![1, 2, 6, 10]);
        assert_eq!(out.retired, vec![0, 1, 2]);
        assert_eq!(out.candidates.iter().map(|c| c.query).collect::<Vec<_>>(), vec![3]);
        assert!(out.trace.iter().all(|t| t.active <= queries.len()));
    }

    #[test]
    fn all_covered_first_sweep_restarts_smaller() {
        let bvh = CellBvh::build(&[Point3::ORIGIN]).unwrap();
        let out = broad_phase(&[q(0, 1.0, 0.0, 0.0), q(1, 4.0, 0.0, 0.0)], &bvh, 8);
        assert!(out.restarts >= 1);
        assert_eq!(out.r0_multiple, 2);
        assert_eq!(out.coverage, vec![1, 2]);
    }
}
