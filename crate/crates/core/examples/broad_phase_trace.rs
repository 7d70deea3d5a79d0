//! Step the broad phase one sweep at a time and print how the query set
//! moves from active to covered to retired as the radius grows.
//!
//!     cargo run --release --example broad_phase_trace -- [ratio]

use hdist::broad_search::{BroadPhaseState, CellBvh};
use hdist::index_space::SearchTargets;
use hdist::mesh_io::synthetic::{generate, Shape};
use hdist::mesh_io::translate_cloud;
use hdist::{build_index_space, scale_queries, Axis};

fn main() -> hdist::Result<()> {
    let ratio: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.4);
    let b = generate(Shape::Blob, 30_000, 7)?;
    let a = translate_cloud(&b, Axis::X, ratio)?;

    let space = build_index_space(&b, 6)?;
    let queries = scale_queries(&a, space.grid());
    let bvh = CellBvh::build(space.positions())?;
    println!("{} queries against {} cells ({} BVH nodes)", queries.len(), space.occupied(), bvh.node_count());
    println!("{:>5} {:>9} {:>8} {:>7} {:>8} {:>8}", "sweep", "radius", "active", "gray", "covered", "retired");

    let mut state = BroadPhaseState::new(queries.len(), 1);
    while !state.is_done() {
        let row = state.sweep(&queries, &bvh);
        println!(
            "{:>5} {:>9.4} {:>8} {:>7} {:>8} {:>8}",
            row.iteration, row.radius, row.active, row.gray, row.newly_covered, row.retired
        );
    }
    let kept = state.gray().count();
    println!(
        "{kept} queries reach the narrow phase; {} were retired early",
        state.retired().len()
    );
    Ok(())
}
