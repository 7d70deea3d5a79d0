//! Benchmark scene families: decimated-vs-original, translated copies,
//! and pairs of unrelated objects.

use std::path::PathBuf;
use std::str::FromStr;

use super::synthetic::{self, Shape};
use super::{load_cloud, load_cloud_auto, subsample_cloud, translate_cloud, CloudFormat, PointCloud};
use crate::error::{Error, Result};
use crate::geom::Axis;

/// Where a cloud comes from: a mesh file or a seeded generator.
///
/// Parses from either a path or `synthetic:<shape>:<count>[:<seed>]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CloudSource {
    File {
        path: PathBuf,
        format: Option<CloudFormat>,
    },
    Synthetic {
        shape: Shape,
        count: usize,
        seed: u64,
    },
}

impl CloudSource {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        CloudSource::File {
            path: path.into(),
            format: None,
        }
    }

    pub fn load(&self) -> Result<PointCloud> {
        match self {
            CloudSource::File { path, format: None } => load_cloud_auto(path),
            CloudSource::File {
                path,
                format: Some(f),
            } => load_cloud(path, *f),
            CloudSource::Synthetic { shape, count, seed } => {
                synthetic::generate(*shape, *count, *seed)
            }
        }
    }
}

impl FromStr for CloudSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some(rest) = s.strip_prefix("synthetic:") else {
            return Ok(CloudSource::file(s));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || Error::InvalidArgument(format!("bad synthetic source {s:?}"));
        let (shape, count, seed) = match parts.as_slice() {
            [shape, count] => (shape, count, "0"),
            [shape, count, seed] => (shape, count, *seed),
            _ => return Err(bad()),
        };
        let count: usize = count.parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(bad());
        }
        Ok(CloudSource::Synthetic {
            shape: shape.parse()?,
            count,
            seed: seed.parse().map_err(|_| bad())?,
        })
    }
}

impl std::fmt::Display for CloudSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CloudSource::File { path, .. } => write!(f, "{}", path.display()),
            CloudSource::Synthetic { shape, count, seed } => {
                write!(f, "synthetic:{}:{count}:{seed}", shape.name())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneSpec {
    /// Original model against a coarser version of itself. The coarse side
    /// is either a user-provided decimated file or a seeded subsample.
    Decimation {
        original: CloudSource,
        decimated: Decimated,
    },
    /// A model against a copy of itself shifted by `ratio` × its extent.
    Translation {
        source: CloudSource,
        axis: Axis,
        ratio: f64,
    },
    DifferentObjects { a: CloudSource, b: CloudSource },
    RawPair { a: CloudSource, b: CloudSource },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decimated {
    File(CloudSource),
    Subsample { count: usize, seed: u64 },
}

/// A built scene, ready for distance computation.
#[derive(Debug, Clone)]
pub struct Scene {
    pub label: String,
    pub a: PointCloud,
    pub b: PointCloud,
}

impl SceneSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SceneSpec::Decimation { .. } => "decimation",
            SceneSpec::Translation { .. } => "translation",
            SceneSpec::DifferentObjects { .. } => "different-objects",
            SceneSpec::RawPair { .. } => "raw-pair",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SceneSpec::Translation { ratio, .. } = self {
            if !(0.0..=1.0).contains(ratio) {
                return Err(Error::InvalidArgument(format!(
                    "translation ratio {ratio} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Scene> {
        self.validate()?;
        let scene = match self {
            SceneSpec::Decimation {
                original,
                decimated,
            } => {
                let a = original.load()?;
                let (b, how) = match decimated {
                    Decimated::File(src) => (src.load()?, format!("decimated file {src}")),
                    Decimated::Subsample { count, seed } => (
                        subsample_cloud(&a, *count, *seed)?,
                        format!("subsample stand-in {count} (seed {seed})"),
                    ),
                };
                Scene {
                    label: format!("decimation {original} vs {how}"),
                    a,
                    b,
                }
            }
            SceneSpec::Translation {
                source,
                axis,
                ratio,
            } => {
                let a = source.load()?;
                let b = translate_cloud(&a, *axis, *ratio)?;
                Scene {
                    label: format!("translation {source} {axis} {ratio}"),
                    a,
                    b,
                }
            }
            SceneSpec::DifferentObjects { a, b } => Scene {
                label: format!("different-objects {a} vs {b}"),
                a: a.load()?,
                b: b.load()?,
            },
            SceneSpec::RawPair { a, b } => Scene {
                label: format!("raw-pair {a} vs {b}"),
                a: a.load()?,
                b: b.load()?,
            },
        };
        Ok(scene)
    }
}
