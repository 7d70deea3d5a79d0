//! Time the full pipeline against the run without index-space construction
//! and the all-pairs baseline on a translated-copy scene, then print the
//! CSV rows the `hdist bench` command would write.
//!
//!     cargo run --release --example ablation -- [points] [ratio]

use hdist::bench::{run_bench, summarize, write_records, BenchConfig, Mode};
use hdist::mesh_io::scene::SceneSpec;
use hdist::{Axis, R0Policy};

fn main() -> hdist::Result<()> {
    let mut args = std::env::args().skip(1);
    let points: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let ratio: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let cfg = BenchConfig {
        scene: SceneSpec::Translation {
            source: format!("synthetic:blob:{points}:1").parse()?,
            axis: Axis::X,
            ratio,
        },
        bits: vec![6, 7, 8],
        r0: R0Policy::Auto,
        repetitions: 1,
        modes: vec![Mode::Full, Mode::NoIndexSpace, Mode::BruteForce],
        threads: None,
    };
    let out = run_bench(&cfg)?;
    println!("{}", out.label);
    for s in summarize(&out.records) {
        let k = s.k.map_or("-".to_string(), |k| k.to_string());
        println!("  {:<5} k={:<2} {:>8.3}s  H={}", s.mode, k, s.min_s, s.h);
    }
    println!();
    write_records(&out.records, std::io::stdout().lock()).expect("stdout");
    Ok(())
}
