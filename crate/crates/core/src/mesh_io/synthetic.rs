//! Seeded point-cloud generators used by the verification harness,
//! the benchmark scenes and the examples.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use super::PointCloud;
use crate::error::{Error, Result};
use crate::geom::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// Uniform in the unit cube.
    UniformBox,
    /// A handful of isotropic gaussian blobs.
    GaussianClusters,
    /// Uniform on a randomly oriented planar patch.
    Coplanar,
    /// Uniform on a unit sphere surface.
    Sphere,
    /// Torus surface, major radius 1, minor radius 0.35.
    Torus,
    /// Sphere surface with low-frequency radial bumps, anisotropically
    /// stretched. Stands in for a scanned organic model.
    Blob,
}

impl Shape {
    pub const ALL: [Shape; 6] = [
        Shape::UniformBox,
        Shape::GaussianClusters,
        Shape::Coplanar,
        Shape::Sphere,
        Shape::Torus,
        Shape::Blob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::UniformBox => "box",
            Shape::GaussianClusters => "gaussian",
            Shape::Coplanar => "plane",
            Shape::Sphere => "sphere",
            Shape::Torus => "torus",
            Shape::Blob => "blob",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Shape> {
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown synthetic shape {s:?}")))
    }
}

pub fn generate(shape: Shape, count: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = generate_with(shape, count, &mut rng);
    PointCloud::new(points, format!("synthetic:{}:{count}:{seed}", shape.name()))
}

pub fn generate_with<R: Rng>(shape: Shape, count: usize, rng: &mut R) -> Vec<Point3> {
    match shape {
        Shape::UniformBox => (0..count)
            .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
            .collect(),
        Shape::GaussianClusters => {
            let k = rng.random_range(2..=6);
            let centers: Vec<Point3> = (0..k)
                .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
                .collect();
            let sigma = rng.random_range(0.01..0.1);
            let normal = Normal::new(0.0, sigma).unwrap();
            (0..count)
                .map(|_| {
                    let c = centers[rng.random_range(0..k)];
                    c + Point3::new(
                        normal.sample(rng),
                        normal.sample(rng),
                        normal.sample(rng),
                    )
                })
                .collect()
        }
        Shape::Coplanar => {
            // two orthonormal in-plane directions from a random normal
            let n: [f64; 3] = UnitSphere.sample(rng);
            let n = Point3::new(n[0], n[1], n[2]);
            let helper = if n.x.abs() < 0.9 {
                Point3::new(1.0, 0.0, 0.0)
            } else {
                Point3::new(0.0, 1.0, 0.0)
            };
            let u = normalize(cross(n, helper));
            let v = cross(n, u);
            let origin = Point3::new(rng.random(), rng.random(), rng.random());
            (0..count)
                .map(|_| {
                    let a: f64 = rng.random_range(-1.0..1.0);
                    let b: f64 = rng.random_range(-1.0..1.0);
                    origin + u * a + v * b
                })
                .collect()
        }
        Shape::Sphere => (0..count)
            .map(|_| {
                let s: [f64; 3] = UnitSphere.sample(rng);
                Point3::new(s[0], s[1], s[2])
            })
            .collect(),
        Shape::Torus => {
            let (major, minor) = (1.0, 0.35);
            (0..count)
                .map(|_| {
                    let u = rng.random::<f64>() * TAU;
                    let v = rng.random::<f64>() * TAU;
                    let ring = major + minor * v.cos();
                    Point3::new(ring * u.cos(), ring * u.sin(), minor * v.sin())
                })
                .collect()
        }
        Shape::Blob => (0..count)
            .map(|_| {
                let s: [f64; 3] = UnitSphere.sample(rng);
                let (x, y, z) = (s[0], s[1], s[2]);
                let bump = 1.0
                    + 0.18 * (3.0 * x).sin() * (2.0 * y).cos()
                    + 0.12 * (4.0 * z + 1.0).sin()
                    + 0.08 * (5.0 * x * y).cos();
                Point3::new(0.8 * x * bump, 1.0 * y * bump, 0.65 * z * bump)
            })
            .collect(),
    }
}

fn cross(a: Point3, b: Point3) -> Point3 {
    Point3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

fn normalize(a: Point3) -> Point3 {
    a * (1.0 / a.norm())
}
