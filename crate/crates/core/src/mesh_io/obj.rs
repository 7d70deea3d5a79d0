use std::io::Write;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Location, Result};
use crate::geom::Point3;

/// Reads `v x y z [w]` records; every other record type is ignored.
pub(super) fn parse(bytes: &[u8], path: &Path) -> Result<Vec<Point3>> {
    let text = String::from_utf8_lossy(bytes);
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        if tok.next() != Some("v") {
            continue;
        }
        let loc = Location::Line(i + 1);
        let mut coord = || -> Result<f64> {
            let t = tok.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                location: loc,
                message: "vertex record needs three coordinates".into(),
            })?;
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    location: loc,
                    message: format!("bad coordinate {t:?}"),
                })
        };
        let (x, y, z) = (coord()?, coord()?, coord()?);
        points.push(Point3::new(x, y, z));
    }
    Ok(points)
}

pub fn write_obj(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(w, "# {}", cloud.label().replace('\n', " ")).map_err(io)?;
    for p in cloud.points() {
        writeln!(w, "v {:?} {:?} {:?}", p.x, p.y, p.z).map_err(io)?;
    }
    w.flush().map_err(io)
}
