//! Benchmark and verification drivers behind the `hdist` binary: pipeline
//! modes, the index-space ablation, randomized oracle checks and CSV
//! reporting.

mod report;
mod verify;

use std::time::Instant;

use serde::Serialize;

pub use report::{summarize, write_records, write_trace, Summary, CSV_HEADER};
pub use verify::{verify, Family, InstanceReport, VerifyConfig, VerifyReport};

use crate::error::{Error, Result};
use crate::index_space::{GridParams, PointTargets};
use crate::mesh_io::scene::SceneSpec;
use crate::mesh_io::PointCloud;
use crate::narrow_phase::{
    brute_force_hausdorff, hausdorff, two_sided, HausdorffConfig, HausdorffResult, R0Policy,
    TargetBuilder,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Index space, BVH broad phase, narrow phase.
    Full,
    /// Same search over one leaf per target point, no quantization.
    NoIndexSpace,
    /// All-pairs reference.
    BruteForce,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::NoIndexSpace => "nois",
            Mode::BruteForce => "brute",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "full" => Ok(Mode::Full),
            "nois" => Ok(Mode::NoIndexSpace),
            "brute" => Ok(Mode::BruteForce),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

struct EachPoint;

impl TargetBuilder for EachPoint {
    type Targets = PointTargets;
    fn build(&self, target: &PointCloud, grid: GridParams) -> PointTargets {
        PointTargets::new(target, &grid)
    }
}

/// The pipeline without index-space construction: every target point gets
/// its own leaf, and the search uses the same initial radius and increment
/// as the full pipeline at this bit count (`√3·s` in object units).
pub fn run_no_index_space(a: &PointCloud, b: &PointCloud, cfg: &HausdorffConfig) -> Result<HausdorffResult> {
    two_sided(a, b, cfg, &EachPoint)
}

pub fn run_mode(mode: Mode, a: &PointCloud, b: &PointCloud, cfg: &HausdorffConfig) -> Result<HausdorffResult> {
    match mode {
        Mode::Full => hausdorff(a, b, cfg),
        Mode::NoIndexSpace => run_no_index_space(a, b, cfg),
        Mode::BruteForce => crate::narrow_phase::with_threads(cfg.threads, || brute_force_hausdorff(a, b)),
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub scene: SceneSpec,
    pub bits: Vec<u32>,
    pub r0: R0Policy,
    pub repetitions: usize,
    pub modes: Vec<Mode>,
    pub threads: Option<usize>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if let Some(k) = self.bits.iter().find(|k| !(1..=10).contains(*k)) {
            return Err(Error::InvalidArgument(format!("bit count {k} outside 1..=10")));
        }
        if self.bits.is_empty() || self.modes.is_empty() {
            return Err(Error::InvalidArgument("need at least one bit count and one mode".into()));
        }
        self.scene.validate()
    }
}

/// One timed run. Times are seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub scene: String,
    pub mode: String,
    /// Empty for brute force, which has no bit count.
    pub k: Option<u32>,
    pub repetition: usize,
    pub points_a: usize,
    pub points_b: usize,
    #[serde(serialize_with = "report::secs")]
    pub index_s: f64,
    #[serde(serialize_with = "report::secs")]
    pub broad_s: f64,
    #[serde(serialize_with = "report::secs")]
    pub narrow_s: f64,
    #[serde(serialize_with = "report::secs")]
    pub total_s: f64,
    pub h: f64,
    pub h_ab: f64,
    pub h_ba: f64,
    pub witness_a: u32,
    pub witness_b: u32,
    pub witness_side: String,
    pub iterations_ab: u32,
    pub iterations_ba: u32,
    pub candidate_pairs: usize,
    pub fallback: bool,
    /// On full-mode rows: no-index-space total over full total for the same
    /// k and repetition.
    pub speedup_vs_nois: Option<f64>,
}

impl BenchRecord {
    pub fn from_result(scene: &str, mode: Mode, k: Option<u32>, repetition: usize, a: &PointCloud, b: &PointCloud, r: &HausdorffResult) -> Self {
        let t = r.timings();
        let (wa, wb) = r.witness.ab_pair();
        BenchRecord {
            scene: scene.to_string(),
            mode: mode.name().to_string(),
            k,
            repetition,
            points_a: a.len(),
            points_b: b.len(),
            index_s: t.index.as_secs_f64(),
            broad_s: t.broad.as_secs_f64(),
            narrow_s: t.narrow.as_secs_f64(),
            total_s: r.elapsed.as_secs_f64(),
            h: r.h,
            h_ab: r.h_ab,
            h_ba: r.h_ba,
            witness_a: wa,
            witness_b: wb,
            witness_side: r.witness.side.to_string(),
            iterations_ab: r.ab.iterations,
            iterations_ba: r.ba.iterations,
            candidate_pairs: r.ab.candidate_pairs + r.ba.candidate_pairs,
            fallback: r.fallback(),
            speedup_vs_nois: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub label: String,
    pub records: Vec<BenchRecord>,
    /// Whether every run produced the same H.
    pub consistent: bool,
    /// Largest relative deviation of H from the first run.
    pub max_rel_deviation: f64,
}

/// Runs every (mode, k, repetition) combination on one scene. Brute force
/// has no bit count and runs once per repetition.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    cfg.validate()?;
    let scene = cfg.scene.build()?;
    let (a, b) = (&scene.a, &scene.b);
    let mut records = Vec::new();
    for rep in 0..cfg.repetitions {
        for &mode in &cfg.modes {
            let ks: Vec<Option<u32>> = if mode == Mode::BruteForce {
                vec![None]
            } else {
                cfg.bits.iter().map(|&k| Some(k)).collect()
            };
            for k in ks {
                let hc = HausdorffConfig {
                    bits: k.unwrap_or(crate::narrow_phase::DEFAULT_BITS),
                    r0: cfg.r0,
                    threads: cfg.threads,
                };
                let start = Instant::now();
                let mut r = run_mode(mode, a, b, &hc)?;
                r.elapsed = start.elapsed();
                records.push(BenchRecord::from_result(&scene.label, mode, k, rep, a, b, &r));
            }
        }
    }
    fill_speedups(&mut records);

    let reference = records[0].h;
    let max_rel_deviation = records
        .iter()
        .map(|r| (r.h - reference).abs() / reference.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(BenchOutcome {
        label: scene.label,
        consistent: max_rel_deviation <= 1e-9,
        max_rel_deviation,
        records,
    })
}

fn fill_speedups(records: &mut [BenchRecord]) {
    let nois: Vec<(Option<u32>, usize, f64)> = records
        .iter()
        .filter(|r| r.mode == Mode::NoIndexSpace.name())
        .map(|r| (r.k, r.repetition, r.total_s))
        .collect();
    for r in records.iter_mut().filter(|r| r.mode == Mode::Full.name()) {
        if let Some((_, _, t)) = nois.iter().find(|(k, rep, _)| *k == r.k && *rep == r.repetition) {
            r.speedup_vs_nois = Some(t / r.total_s.max(1e-12));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Axis;
    use crate::mesh_io::scene::CloudSource;

    #[test]
    fn k_sweep_row_count() {
        let cfg = BenchConfig {
            scene: SceneSpec::Translation {
                source: "synthetic:blob:3000:1".parse::<CloudSource>().unwrap(),
                axis: Axis::X,
                ratio: 0.5,
            },
            bits: vec![6, 7, 8],
            r0: R0Policy::Auto,
            repetitions: 2,
            modes: vec![Mode::Full],
            threads: None,
        };
        let out = run_bench(&cfg).unwrap();
        assert_eq!(out.records.len(), 6);
        assert!(out.consistent);
    }

    #[test]
    fn modes_agree_and_ratio_filled() {
        let cfg = BenchConfig {
            scene: SceneSpec::RawPair {
                a: "synthetic:torus:1500:2".parse().unwrap(),
                b: "synthetic:sphere:1200:3".parse().unwrap(),
            },
            bits: vec![5],
            r0: R0Policy::Auto,
            repetitions: 1,
            modes: vec![Mode::Full, Mode::NoIndexSpace, Mode::BruteForce],
            threads: Some(2),
        };
        let out = run_bench(&cfg).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.consistent, "deviation {}", out.max_rel_deviation);
        let full = &out.records[0];
        assert!(full.speedup_vs_nois.is_some());
        assert_eq!(out.records[2].k, None);
    }

    #[test]
    fn bad_configs_rejected() {
        let base = BenchConfig {
            scene: SceneSpec::RawPair {
                a: "synthetic:torus:10:2".parse().unwrap(),
                b: "synthetic:sphere:10:3".parse().unwrap(),
            },
            bits: vec![5],
            r0: R0Policy::Auto,
            repetitions: 0,
            modes: vec![Mode::Full],
            threads: None,
        };
        assert!(base.validate().is_err());
        let mut c = base.clone();
        c.repetitions = 1;
        c.bits = vec![11];
        assert!(c.validate().is_err());
        c.bits = vec![10];
        assert!(c.validate().is_ok());
    }

    #[test]
    fn nois_singletons() {
        let a = PointCloud::new(vec![crate::geom::Point3::ORIGIN], "a").unwrap();
        let b = PointCloud::new(vec![crate::geom::Point3::new(3.0, 4.0, 0.0)], "b").unwrap();
        let cfg = HausdorffConfig::default();
        assert_eq!(run_no_index_space(&a, &b, &cfg).unwrap().h, hausdorff(&a, &b, &cfg).unwrap().h);
    }
}
