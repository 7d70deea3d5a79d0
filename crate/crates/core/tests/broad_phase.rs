mod common;

use std::collections::BTreeMap;

use common::{instance, oracle_nn, oracle_one_sided, SideRun};
use hdist::broad_search::{broad_phase, epsilon_neighbors, BroadPhaseState, CellBvh, GRAY_SWEEPS};
use hdist::index_space::{ScaledQuery, SearchTargets};
use hdist::{Point3, SQRT_3};
use proptest::prelude::*;

/// Reps within `r` by linear scan: inside the Chebyshev cube and the ball.
fn scan_within(reps: &[Point3], q: &Point3, r: f64) -> Vec<u32> {
    reps.iter()
        .enumerate()
        .filter(|(_, p)| {
            let (dx, dy, dz) = (p.x - q.x, p.y - q.y, p.z - q.z);
            dx.abs().max(dy.abs()).max(dz.abs()) <= r && dx * dx + dy * dy + dz * dz <= r * r
        })
        .map(|(i, _)| i as u32)
        .collect()
}

fn scan_box_hits(reps: &[Point3], q: &Point3, r: f64) -> Vec<u32> {
    reps.iter()
        .enumerate()
        .filter(|(_, p)| (p.x - q.x).abs().max((p.y - q.y).abs()).max((p.z - q.z).abs()) <= r)
        .map(|(i, _)| i as u32)
        .collect()
}

struct Reference {
    /// query id -> (coverage, rep -> found)
    gray: BTreeMap<u32, (u32, BTreeMap<u32, u32>)>,
    retired: Vec<u32>,
    iterations: u32,
    last_coverage: u32,
    r0_multiple: u32,
}

/// The broad phase exactly as described: every sweep appends new neighbors
/// to each gray query until it is two sweeps past its own coverage.
fn reference_broad_phase(queries: &[ScaledQuery], reps: &[Point3], r0_multiple: u32) -> Reference {
    let mut m = r0_multiple.max(1);
    'restart: loop {
        let mut active: Vec<usize> = (0..queries.len()).collect();
        let mut gray: Vec<(usize, u32, BTreeMap<u32, u32>)> = Vec::new();
        let mut retired = Vec::new();
        let mut last_coverage = 0;
        let mut n = 0u32;
        loop {
            n += 1;
            let r = (m + n - 1) as f64 * SQRT_3;
            for (slot, cov, cands) in gray.iter_mut() {
                if *cov + GRAY_SWEEPS >= n {
                    for rep in scan_within(reps, &queries[*slot].pos, r) {
                        cands.entry(rep).or_insert(n);
                    }
                }
            }
            let mut newly = Vec::new();
            let mut still = Vec::new();
            for &slot in &active {
                let found = scan_within(reps, &queries[slot].pos, r);
                if found.is_empty() {
                    still.push(slot);
                } else {
                    newly.push((slot, found));
                }
            }
            if n == 1 && still.is_empty() && m > 1 {
                m = (m / 2).max(1);
                continue 'restart;
            }
            active = still;
            if !newly.is_empty() {
                gray.retain(|(slot, cov, _)| {
                    let keep = *cov + GRAY_SWEEPS >= n;
                    if !keep {
                        retired.push(queries[*slot].id);
                    }
                    keep
                });
                for (slot, found) in newly {
                    gray.push((slot, n, found.into_iter().map(|rep| (rep, n)).collect()));
                }
                last_coverage = n;
            }
            if active.is_empty() && gray.iter().all(|(_, cov, _)| cov + GRAY_SWEEPS <= n) {
                retired.sort_unstable();
                return Reference {
                    gray: gray
                        .into_iter()
                        .map(|(slot, cov, c)| (queries[slot].id, (cov, c)))
                        .collect(),
                    retired,
                    iterations: n,
                    last_coverage,
                    r0_multiple: m,
                };
            }
        }
    }
}

#[test]
fn incremental_reference_matches() {
    let mut compared = 0;
    for i in 0..48 {
        let (a, b) = instance(77, i, 300);
        let bits = 3 + (i as u32 % 4);
        let m = [1, 2, 3, 6][i / 4 % 4];
        let Some(run) = SideRun::new(&a, &b, bits, m) else { continue };
        let reference = reference_broad_phase(&run.queries, run.space.positions(), m);
        let out = &run.outcome;

        assert_eq!(out.iterations, reference.iterations, "instance {i}");
        assert_eq!(out.last_coverage, reference.last_coverage, "instance {i}");
        assert_eq!(out.r0_multiple, reference.r0_multiple, "instance {i}");
        assert_eq!(out.retired, reference.retired, "instance {i}");
        assert_eq!(out.candidates.len(), reference.gray.len(), "instance {i}");
        for set in &out.candidates {
            let (cov, cells) = &reference.gray[&set.query];
            assert_eq!(set.coverage, *cov);
            let mut expected: Vec<(u32, u32)> = cells.iter().map(|(&rep, &found)| (found, rep)).collect();
            expected.sort_unstable();
            let got: Vec<(u32, u32)> = set.cells.iter().map(|c| (c.found, c.rep)).collect();
            assert_eq!(got, expected, "instance {i} query {}", set.query);
        }
        compared += 1;
    }
    assert!(compared > 40);
}

fn lattice() -> impl Strategy<Value = Vec<Point3>> {
    prop::collection::btree_set((0i32..24, 0i32..24, 0i32..24), 1..300).prop_map(|s| {
        s.into_iter()
            .map(|(x, y, z)| Point3::new(x as f64, y as f64, z as f64))
            .collect()
    })
}

fn query_point() -> impl Strategy<Value = Point3> {
    (-8.0f64..32.0, -8.0f64..32.0, -8.0f64..32.0).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn epsilon_neighbors_equal_linear_scan(reps in lattice(), q in query_point(), j in 1u32..12, extra in 0.0f64..1.0) {
        let bvh = CellBvh::build(&reps).unwrap();
        let query = ScaledQuery { id: 0, pos: q };
        for r in [j as f64 * SQRT_3, j as f64 * SQRT_3 + extra] {
            prop_assert_eq!(epsilon_neighbors(&query, r, &bvh), scan_within(&reps, &q, r));
            prop_assert_eq!(bvh.box_hits(&q, r), scan_box_hits(&reps, &q, r));
            prop_assert_eq!(bvh.any_within(&q, r), !scan_within(&reps, &q, r).is_empty());
        }
    }

    #[test]
    fn box_hits_contain_sphere_hits(reps in lattice(), q in query_point(), r in 1.8f64..20.0) {
        let bvh = CellBvh::build(&reps).unwrap();
        let boxed = bvh.box_hits(&q, r);
        for rep in bvh.within(&q, r) {
            prop_assert!(boxed.binary_search(&rep).is_ok());
        }
    }

    #[test]
    fn neighbors_grow_with_radius(reps in lattice(), q in query_point(), r in 1.8f64..15.0, dr in 0.0f64..6.0) {
        let bvh = CellBvh::build(&reps).unwrap();
        let inner = bvh.within(&q, r);
        let outer = bvh.within(&q, r + dr);
        for rep in inner {
            prop_assert!(outer.binary_search(&rep).is_ok());
        }
    }

    #[test]
    fn bvh_contains_every_leaf(reps in lattice()) {
        let bvh = CellBvh::build(&reps).unwrap();
        prop_assert!(bvh.validate().is_ok());
        prop_assert_eq!(bvh.leaf_count(), reps.len());
    }
}

#[test]
fn coverage_band_holds_per_query() {
    for i in 0..16 {
        let (a, b) = instance(5, i, 400);
        let Some(run) = SideRun::new(&a, &b, 3 + (i as u32 % 5), 1) else { continue };
        let target = run.scaled_target(&b);
        for (q, &n) in run.queries.iter().zip(&run.outcome.coverage) {
            let nn = oracle_nn(&q.pos, &target).0.sqrt();
            let n = n as f64;
            assert!(nn > (n - 2.0) * SQRT_3 - 1e-9, "instance {i} query {}: {nn} vs n={n}", q.id);
            assert!(nn < (n + 1.0) * SQRT_3 + 1e-9, "instance {i} query {}: {nn} vs n={n}", q.id);
        }
    }
}

#[test]
fn retired_queries_cannot_realize_the_maximum() {
    let mut retired_seen = 0;
    for i in 0..24 {
        let (a, b) = instance(9, i, 500);
        for m in [1, 3] {
            let Some(run) = SideRun::new(&a, &b, 3 + (i as u32 % 4), m) else { continue };
            let target = run.scaled_target(&b);
            let scaled_a: Vec<Point3> = run.queries.iter().map(|q| q.pos).collect();
            let h = oracle_one_sided(&scaled_a, &target).0;
            for &id in &run.outcome.retired {
                let nn = oracle_nn(&scaled_a[id as usize], &target).0.sqrt();
                assert!(nn < h, "instance {i}: retired query {id} has NN {nn}, h {h}");
                retired_seen += 1;
            }
        }
    }
    assert!(retired_seen > 0, "no instance exercised retirement");
}

#[test]
fn sweep_count_is_bounded_by_farthest_query() {
    for i in 0..20 {
        let (a, b) = instance(13, i, 400);
        let Some(run) = SideRun::new(&a, &b, 2 + (i as u32 % 6), 1) else { continue };
        let reps = run.space.positions();
        let d = run
            .queries
            .iter()
            .map(|q| oracle_nn(&q.pos, reps).0.sqrt())
            .fold(0.0, f64::max);
        let bound = (d / SQRT_3).ceil() as u32 + 3;
        assert!(run.outcome.iterations <= bound, "instance {i}: {} > {bound}", run.outcome.iterations);
    }
}

#[test]
fn active_set_only_shrinks_and_each_query_is_covered_once() {
    for i in 0..8 {
        let (a, b) = instance(21, i, 600);
        let Some(run) = SideRun::new(&a, &b, 5, 1) else { continue };
        let mut state = BroadPhaseState::new(run.queries.len(), 1);
        let mut covered = vec![0u32; run.queries.len()];
        let mut prev = state.active().to_vec();
        while !state.is_done() {
            let row = state.sweep(&run.queries, &run.bvh);
            let now = state.active();
            assert!(now.len() <= prev.len());
            assert!(now.iter().all(|s| prev.contains(s)));
            assert_eq!(prev.len() - now.len(), row.newly_covered);
            for s in prev.iter().filter(|s| !now.contains(s)) {
                covered[*s as usize] += 1;
            }
            prev = now.to_vec();
        }
        assert!(covered.iter().all(|&c| c == 1));
        assert_eq!(state.iteration(), run.outcome.iterations);
    }
}

#[test]
fn maximizing_query_keeps_its_nearest_cell() {
    for i in 0..32 {
        let (a, b) = instance(31, i, 800);
        let Some(run) = SideRun::new(&a, &b, 3 + (i as u32 % 6), 1 + (i as u32 % 3)) else { continue };
        let (_, qid, tid) = oracle_one_sided(a.points(), b.points());
        let set = run
            .outcome
            .candidates
            .iter()
            .find(|c| c.query == qid)
            .unwrap_or_else(|| panic!("instance {i}: maximizing query {qid} missing"));
        let cell = run.space.grid().quantize_target(&b.get(tid));
        let rep = run.space.rep_of(&cell).unwrap();
        assert!(set.cells.iter().any(|c| c.rep == rep), "instance {i}: nearest cell dropped");
    }
}

#[test]
fn identical_clouds_cover_everything_on_the_first_sweep() {
    let (a, _) = instance(3, 0, 500);
    let run = SideRun::new(&a, &a, 6, 1).unwrap();
    assert!(run.outcome.coverage.iter().all(|&n| n == 1));
    for set in &run.outcome.candidates {
        let own = run.space.grid().quantize_target(&a.get(set.query));
        let rep = run.space.rep_of(&own).unwrap();
        assert!(set.cells.iter().any(|c| c.rep == rep && c.found == 1));
    }
}

#[test]
fn broad_phase_is_repeatable() {
    let (a, b) = instance(8, 2, 1500);
    let run = SideRun::new(&a, &b, 6, 1).unwrap();
    let again = broad_phase(&run.queries, &run.bvh, 1);
    assert_eq!(run.outcome.candidates, again.candidates);
    assert_eq!(run.outcome.retired, again.retired);
    assert_eq!(run.outcome.trace, again.trace);
}
