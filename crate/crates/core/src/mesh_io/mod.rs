//! Point-cloud ingestion, transforms and benchmark scene construction.
//!
//! Only vertex positions are read from mesh files. Faces, normals and any
//! other per-vertex attributes are skipped.

mod obj;
mod ply;
pub mod scene;
pub mod synthetic;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{aabb_of, Aabb, Axis, Point3};

pub use obj::write_obj;
pub use ply::write_ply_ascii;

/// An ordered, nonempty set of finite points. A point's id is its position.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    label: String,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Degenerate("point cloud has no points".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, id: u32) -> Point3 {
        self.points[id as usize]
    }

    /// File path or generator description the cloud came from.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn bounds(&self) -> Aabb {
        aabb_of(&self.points).expect("nonempty by construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Obj,
    PlyAscii,
    PlyBinaryLittleEndian,
}

impl CloudFormat {
    /// Picks a format from the file extension; PLY files are further
    /// distinguished by their header's `format` line.
    pub fn detect(path: &Path) -> Result<CloudFormat> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("obj") => Ok(CloudFormat::Obj),
            Some("ply") => Self::detect_ply(path),
            _ => Err(Error::InvalidArgument(format!(
                "cannot infer format of {}; expected .obj or .ply",
                path.display()
            ))),
        }
    }
}

impl CloudFormat {
    /// Reads a PLY header and reports its encoding, whatever the extension.
    pub fn detect_ply(path: &Path) -> Result<CloudFormat> {
        ply::detect_encoding(&read_bytes(path)?, path)
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the vertex set of an OBJ or PLY file, preserving file order.
pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let points = match format {
        CloudFormat::Obj => obj::parse(&bytes, path)?,
        CloudFormat::PlyAscii | CloudFormat::PlyBinaryLittleEndian => {
            ply::parse(&bytes, path, format)?
        }
    };
    if points.is_empty() {
        return Err(Error::Degenerate(format!(
            "{} contains no vertices",
            path.display()
        )));
    }
    PointCloud::new(points, path.display().to_string())
}

/// [`load_cloud`] with the format taken from [`CloudFormat::detect`].
pub fn load_cloud_auto(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    load_cloud(path, CloudFormat::detect(path)?)
}

/// Shifts every point along `axis` by `ratio` times the cloud's extent on
/// that axis.
pub fn translate_cloud(c: &PointCloud, axis: Axis, ratio: f64) -> Result<PointCloud> {
    if !ratio.is_finite() {
        return Err(Error::InvalidArgument(format!("translation ratio {ratio}")));
    }
    let shift = ratio * c.bounds().extent().axis(axis);
    let points = c
        .points
        .iter()
        .map(|p| p.with_axis(axis, p.axis(axis) + shift))
        .collect();
    PointCloud::new(points, format!("{} +{ratio}{axis}", c.label))
}

/// Deterministic draw of `target_count` distinct points. The drawn points
/// keep their relative order from `c`.
pub fn subsample_cloud(c: &PointCloud, target_count: usize, seed: u64) -> Result<PointCloud> {
    if target_count == 0 || target_count > c.len() {
        return Err(Error::InvalidArgument(format!(
            "subsample size {target_count} outside 1..={}",
            c.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = rand::seq::index::sample(&mut rng, c.len(), target_count).into_vec();
    ids.sort_unstable();
    let points = ids.into_iter().map(|i| c.points[i]).collect();
    PointCloud::new(points, format!("{} (subsample {target_count}, seed {seed})", c.label))
}
