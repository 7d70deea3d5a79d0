//! Check the pipeline against the all-pairs oracle on seeded random
//! instances from the four distribution families.
//!
//!     cargo run --release --example verify_oracle -- [instances] [seed]

use hdist::bench::{verify, VerifyConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let instances = args.next().and_then(|s| s.parse().ok()).unwrap_or(40);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let report = verify(&VerifyConfig {
        instances,
        seed,
        max_size: 1500,
        ..VerifyConfig::default()
    });
    for i in &report.instances {
        println!(
            "{} #{:<3} {:<9} |A|={:<5} |B|={:<5} k={} H={:.12}",
            if i.passed() { "ok  " } else { "FAIL" },
            i.index,
            i.family.name(),
            i.size_a,
            i.size_b,
            i.bits,
            i.h
        );
    }
    println!("{}/{} match", report.passed(), report.instances.len());
    if !report.all_passed() {
        std::process::exit(1);
    }
}
