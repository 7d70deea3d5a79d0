//! Two-way Hausdorff distance between two clouds, with the witness pair and
//! per-side search statistics.
//!
//!     cargo run --release --example compute_pair -- a.ply b.obj [k]
//!
//! Without arguments a torus is compared against a noisy blob.

use hdist::mesh_io::synthetic::{generate, Shape};
use hdist::{hausdorff, load_cloud_auto, HausdorffConfig, PointCloud};

fn main() -> hdist::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (a, b): (PointCloud, PointCloud) = match args.as_slice() {
        [pa, pb, ..] => (load_cloud_auto(pa)?, load_cloud_auto(pb)?),
        _ => (generate(Shape::Torus, 20_000, 1)?, generate(Shape::Blob, 15_000, 2)?),
    };
    let k = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);

    let r = hausdorff(&a, &b, &HausdorffConfig::default().with_bits(k))?;
    let (ia, ib) = r.witness.ab_pair();
    println!("{} ({} points) vs {} ({} points), k = {k}", a.label(), a.len(), b.label(), b.len());
    println!("H = {}   h(A,B) = {}   h(B,A) = {}", r.h, r.h_ab, r.h_ba);
    println!("witness: A[{ia}] = {:?}  B[{ib}] = {:?}  (side {})", a.get(ia), b.get(ib), r.witness.side);
    for (name, s) in [("A->B", &r.ab), ("B->A", &r.ba)] {
        println!(
            "{name}: {} cells, {} sweeps, {} queries kept, {} retired, {} candidate pairs",
            s.representatives, s.iterations, s.gray_queries, s.retired_queries, s.candidate_pairs
        );
    }
    println!("elapsed {:.3}s", r.elapsed.as_secs_f64());
    Ok(())
}
