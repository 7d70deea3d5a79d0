//! Randomized comparison of the pipeline against the all-pairs oracle.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geom::{Axis, Point3};
use crate::mesh_io::synthetic::{generate_with, Shape};
use crate::mesh_io::PointCloud;
use crate::narrow_phase::{brute_force_hausdorff, hausdorff, HausdorffConfig, R0Policy};

/// Relative tolerance between pipeline and oracle.
pub const VALUE_TOLERANCE: f64 = 1e-9;
/// Relative tolerance between H and the distance of its witness pair.
pub const WITNESS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    UniformBox,
    GaussianClusters,
    Coplanar,
    /// Two boxes of points separated along one axis.
    DisjointTranslated,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::UniformBox,
        Family::GaussianClusters,
        Family::Coplanar,
        Family::DisjointTranslated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::UniformBox => "uniform",
            Family::GaussianClusters => "gaussian",
            Family::Coplanar => "coplanar",
            Family::DisjointTranslated => "disjoint",
        }
    }

    /// A random instance of this family with the given side sizes.
    pub fn instance<R: Rng>(self, na: usize, nb: usize, rng: &mut R) -> (PointCloud, PointCloud) {
        let (a, b) = match self {
            Family::UniformBox => (
                generate_with(Shape::UniformBox, na, rng),
                generate_with(Shape::UniformBox, nb, rng),
            ),
            // shared clusters / shared plane: draw both sides in one go
            Family::GaussianClusters | Family::Coplanar => {
                let shape = if self == Family::Coplanar {
                    Shape::Coplanar
                } else {
                    Shape::GaussianClusters
                };
                let mut all = generate_with(shape, na + nb, rng);
                let b = all.split_off(na);
                (all, b)
            }
            Family::DisjointTranslated => {
                let a = generate_with(Shape::UniformBox, na, rng);
                let axis = Axis::ALL[rng.random_range(0..3)];
                let gap = 1.0 + rng.random_range(0.05..3.0);
                let b = generate_with(Shape::UniformBox, nb, rng)
                    .into_iter()
                    .map(|p: Point3| p.with_axis(axis, p.axis(axis) + gap))
                    .collect();
                (a, b)
            }
        };
        (
            PointCloud::new(a, format!("{}-a", self.name())).expect("nonempty"),
            PointCloud::new(b, format!("{}-b", self.name())).expect("nonempty"),
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub instances: usize,
    /// Largest side size; sizes are drawn from `1..=max_size`.
    pub max_size: usize,
    pub seed: u64,
    pub bits: RangeInclusive<u32>,
    pub r0: R0Policy,
    pub threads: Option<usize>,
    /// Perturb the first result before comparing, to prove mismatches are
    /// caught.
    pub self_test: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            instances: 200,
            max_size: 2000,
            seed: 42,
            bits: 4..=8,
            r0: R0Policy::Auto,
            threads: None,
            self_test: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceReport {
    pub index: usize,
    pub family: Family,
    pub size_a: usize,
    pub size_b: usize,
    pub bits: u32,
    pub h: f64,
    pub oracle_h: f64,
    pub witness_ok: bool,
    pub fallback: bool,
    pub error: Option<String>,
}

impl InstanceReport {
    pub fn value_ok(&self) -> bool {
        (self.h - self.oracle_h).abs() <= VALUE_TOLERANCE * self.oracle_h.abs().max(f64::MIN_POSITIVE)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.value_ok() && self.witness_ok
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub instances: Vec<InstanceReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> usize {
        self.instances.iter().filter(|i| i.passed()).count()
    }

    pub fn failed(&self) -> usize {
        self.instances.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

/// Instance `i` uses family `i mod 4` and cycles through the bit range, so
/// every (family, k) pair is exercised once enough instances run.
pub fn verify(cfg: &VerifyConfig) -> VerifyReport {
    let ks: Vec<u32> = cfg.bits.clone().collect();
    let run = |i: usize| -> InstanceReport {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64));
        let family = Family::ALL[i % Family::ALL.len()];
        let bits = ks[(i / Family::ALL.len()) % ks.len()];
        let na = rng.random_range(1..=cfg.max_size.max(1));
        let nb = rng.random_range(1..=cfg.max_size.max(1));
        let (a, b) = family.instance(na, nb, &mut rng);
        let oracle = brute_force_hausdorff(&a, &b);
        let hc = HausdorffConfig {
            bits,
            r0: cfg.r0,
            threads: None,
        };
        let mut report = InstanceReport {
            index: i,
            family,
            size_a: na,
            size_b: nb,
            bits,
            h: f64::NAN,
            oracle_h: oracle.h,
            witness_ok: false,
            fallback: false,
            error: None,
        };
        match hausdorff(&a, &b, &hc) {
            Ok(mut r) => {
                if cfg.self_test && i == 0 {
                    r.h = r.h * (1.0 + 1e-6) + 1e-6;
                }
                let wd = r.witness_distance(&a, &b);
                report.h = r.h;
                report.fallback = r.fallback();
                report.witness_ok = (wd - r.h).abs() <= WITNESS_TOLERANCE * r.h.max(f64::MIN_POSITIVE);
            }
            Err(e) => report.error = Some(e.to_string()),
        }
        report
    };
    let instances = crate::narrow_phase::with_threads(cfg.threads, || {
        (0..cfg.instances).into_par_iter().map(run).collect()
    })
    .unwrap_or_else(|_| (0..cfg.instances).map(run).collect());
    VerifyReport { instances }
}
