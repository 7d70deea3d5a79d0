//! PLY vertex reader (ASCII and binary little-endian) and ASCII writer.
//!
//! Elements preceding `vertex` are skipped by counting rows (ASCII) or by
//! walking their property sizes (binary). Nothing after the vertex element
//! is read.

use std::io::Write;
use std::path::Path;

use super::{CloudFormat, PointCloud};
use crate::error::{Error, Location, Result};
use crate::geom::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    format: CloudFormat,
    elements: Vec<Element>,
    /// Byte offset of the first body byte.
    body_offset: usize,
    /// 1-based line number of the first body line (ASCII bodies).
    body_line: usize,
}

fn parse_err(path: &Path, location: Location, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        location,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();

    loop {
        let rest = &bytes[offset..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            return Err(parse_err(
                path,
                Location::Line(line_no + 1),
                "header ended before end_header",
            ));
        };
        line_no += 1;
        let loc = Location::Line(line_no);
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| parse_err(path, loc, "header is not valid text"))?
            .trim_end_matches('\r');
        offset += nl + 1;
        let mut tok = line.split_whitespace();
        let Some(keyword) = tok.next() else { continue };

        if line_no == 1 {
            if keyword != "ply" {
                return Err(parse_err(path, loc, "missing 'ply' magic"));
            }
            continue;
        }
        match keyword {
            "format" => {
                format = Some(match tok.next() {
                    Some("ascii") => CloudFormat::PlyAscii,
                    Some("binary_little_endian") => CloudFormat::PlyBinaryLittleEndian,
                    Some("binary_big_endian") => {
                        return Err(parse_err(path, loc, "big-endian binary PLY is not supported"))
                    }
                    other => {
                        return Err(parse_err(path, loc, format!("unknown PLY format {other:?}")))
                    }
                });
            }
            "comment" | "obj_info" => {}
            "element" => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_err(path, loc, "element without a name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(path, loc, "element count is not an integer"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, loc, "property before any element"))?;
                let words: Vec<&str> = tok.collect();
                let bad = || parse_err(path, loc, format!("malformed property line {line:?}"));
                let prop = match words.as_slice() {
                    ["list", count, item, _name] => Property::List {
                        count: Scalar::parse(count).ok_or_else(bad)?,
                        item: Scalar::parse(item).ok_or_else(bad)?,
                    },
                    [ty, name] => Property::Scalar {
                        name: name.to_string(),
                        ty: Scalar::parse(ty).ok_or_else(bad)?,
                    },
                    _ => return Err(bad()),
                };
                element.properties.push(prop);
            }
            "end_header" => break,
            other => {
                return Err(parse_err(path, loc, format!("unexpected header keyword {other:?}")))
            }
        }
    }

    let format = format.ok_or_else(|| {
        parse_err(path, Location::Line(line_no), "header has no format line")
    })?;
    Ok(Header {
        format,
        elements,
        body_offset: offset,
        body_line: line_no + 1,
    })
}

pub(super) fn detect_encoding(bytes: &[u8], path: &Path) -> Result<CloudFormat> {
    Ok(parse_header(bytes, path)?.format)
}

/// Positions of x, y, z among the vertex element's properties.
fn xyz_slots(element: &Element, path: &Path) -> Result<[usize; 3]> {
    let find = |axis: &str| {
        element.properties.iter().position(|p| match p {
            Property::Scalar { name, ty } => {
                name == axis && matches!(ty, Scalar::F32 | Scalar::F64)
            }
            Property::List { .. } => false,
        })
    };
    match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => Ok([x, y, z]),
        _ => Err(parse_err(
            path,
            Location::Line(1),
            "vertex element needs float or double properties x, y, z",
        )),
    }
}

pub(super) fn parse(bytes: &[u8], path: &Path, declared: CloudFormat) -> Result<Vec<Point3>> {
    let header = parse_header(bytes, path)?;
    if header.format != declared {
        return Err(parse_err(
            path,
            Location::Line(2),
            format!("header declares {:?} but {:?} was requested", header.format, declared),
        ));
    }
    let Some(vi) = header.elements.iter().position(|e| e.name == "vertex") else {
        return Ok(Vec::new());
    };
    let slots = xyz_slots(&header.elements[vi], path)?;
    match header.format {
        CloudFormat::PlyAscii => parse_ascii_body(bytes, &header, vi, slots, path),
        _ => parse_binary_body(bytes, &header, vi, slots, path),
    }
}

fn parse_ascii_body(
    bytes: &[u8],
    header: &Header,
    vi: usize,
    slots: [usize; 3],
    path: &Path,
) -> Result<Vec<Point3>> {
    let body = std::str::from_utf8(&bytes[header.body_offset..]).map_err(|e| {
        parse_err(
            path,
            Location::Offset((header.body_offset + e.valid_up_to()) as u64),
            "ASCII body is not valid text",
        )
    })?;
    let mut lines = body
        .lines()
        .enumerate()
        .map(|(i, l)| (header.body_line + i, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut last_line = header.body_line.saturating_sub(1);

    let skip: usize = header.elements[..vi].iter().map(|e| e.count).sum();
    for _ in 0..skip {
        match lines.next() {
            Some((n, _)) => last_line = n,
            None => {
                return Err(parse_err(
                    path,
                    Location::Line(last_line + 1),
                    "file ended inside an element preceding vertex",
                ))
            }
        }
    }

    let vertex = &header.elements[vi];
    let mut points = Vec::with_capacity(vertex.count);
    for row in 0..vertex.count {
        let Some((n, line)) = lines.next() else {
            return Err(parse_err(
                path,
                Location::Line(last_line + 1),
                format!("expected {} vertex rows, found {row}", vertex.count),
            ));
        };
        last_line = n;
        let loc = Location::Line(n);
        let toks: Vec<&str> = line.split_whitespace().collect();
        // walk properties to find the token index of each one
        let mut at = 0usize;
        let mut xyz = [0.0f64; 3];
        for (pi, prop) in vertex.properties.iter().enumerate() {
            match prop {
                Property::Scalar { .. } => {
                    let t = toks
                        .get(at)
                        .ok_or_else(|| parse_err(path, loc, "vertex row has too few values"))?;
                    if let Some(axis) = slots.iter().position(|&s| s == pi) {
                        xyz[axis] = t
                            .parse::<f64>()
                            .map_err(|_| parse_err(path, loc, format!("bad coordinate {t:?}")))?;
                    }
                    at += 1;
                }
                Property::List { .. } => {
                    let t = toks
                        .get(at)
                        .ok_or_else(|| parse_err(path, loc, "vertex row has too few values"))?;
                    let len: usize = t
                        .parse()
                        .map_err(|_| parse_err(path, loc, format!("bad list length {t:?}")))?;
                    at += 1 + len;
                }
            }
        }
        if at > toks.len() {
            return Err(parse_err(path, loc, "vertex row has too few values"));
        }
        let p = Point3::new(xyz[0], xyz[1], xyz[2]);
        if !p.is_finite() {
            return Err(parse_err(path, loc, "non-finite coordinate"));
        }
        points.push(p);
    }
    Ok(points)
}

fn parse_binary_body(
    bytes: &[u8],
    header: &Header,
    vi: usize,
    slots: [usize; 3],
    path: &Path,
) -> Result<Vec<Point3>> {
    let mut at = header.body_offset;
    let truncated = |at: usize| {
        parse_err(
            path,
            Location::Offset(at as u64),
            "binary body truncated",
        )
    };
    let take = |at: usize, n: usize| -> Result<&[u8]> {
        bytes.get(at..at + n).ok_or_else(|| truncated(at))
    };

    for element in &header.elements[..vi] {
        for _ in 0..element.count {
            for prop in &element.properties {
                match *prop {
                    Property::Scalar { ty, .. } => at += ty.size(),
                    Property::List { count, item } => {
                        let len = count.read_le(take(at, count.size())?);
                        at += count.size() + len as usize * item.size();
                    }
                }
            }
        }
    }

    let vertex = &header.elements[vi];
    let mut points = Vec::with_capacity(vertex.count);
    for _ in 0..vertex.count {
        let row_start = at;
        let mut xyz = [0.0f64; 3];
        for (pi, prop) in vertex.properties.iter().enumerate() {
            match *prop {
                Property::Scalar { ty, .. } => {
                    let raw = take(at, ty.size())?;
                    if let Some(axis) = slots.iter().position(|&s| s == pi) {
                        xyz[axis] = ty.read_le(raw);
                    }
                    at += ty.size();
                }
                Property::List { count, item } => {
                    let len = count.read_le(take(at, count.size())?);
                    at += count.size() + len as usize * item.size();
                }
            }
        }
        let p = Point3::new(xyz[0], xyz[1], xyz[2]);
        if !p.is_finite() {
            return Err(parse_err(path, Location::Offset(row_start as u64), "non-finite coordinate"));
        }
        points.push(p);
    }
    if at > bytes.len() {
        return Err(truncated(bytes.len()));
    }
    Ok(points)
}

/// Writes the cloud as an ASCII PLY with `double` coordinates. Values are
/// printed in shortest round-trip form, so reloading is bit-exact.
pub fn write_ply_ascii(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write!(
        w,
        "ply\nformat ascii 1.0\ncomment {}\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.label().replace('\n', " "),
        cloud.len()
    )
    .map_err(io)?;
    for p in cloud.points() {
        writeln!(w, "{:?} {:?} {:?}", p.x, p.y, p.z).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_io::load_cloud;

    fn write(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, bytes).unwrap();
        p
    }

    #[test]
    fn ascii_three_vertices_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.ply",
            b"ply\nformat ascii 1.0\ncomment hi\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0 255\n1 0 0 255\n0 1 0.5 255\n3 0 1 2\n",
        );
        let c = load_cloud(&p, CloudFormat::PlyAscii).unwrap();
        assert_eq!(
            c.points(),
            &[
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.5)
            ]
        );
    }

    #[test]
    fn binary_le_skips_leading_element() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement meta 2\nproperty list uchar int ids\nelement vertex 2\nproperty float nx\nproperty double x\nproperty double y\nproperty float z\nend_header\n".to_vec();
        // meta rows: list of 1 int, list of 0
        bytes.extend([1u8]);
        bytes.extend(7i32.to_le_bytes());
        bytes.extend([0u8]);
        for (x, y, z) in [(1.5f64, -2.0f64, 3.25f32), (4.0, 5.0, 6.0)] {
            bytes.extend(9.0f32.to_le_bytes());
            bytes.extend(x.to_le_bytes());
            bytes.extend(y.to_le_bytes());
            bytes.extend(z.to_le_bytes());
        }
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "b.ply", &bytes);
        assert_eq!(CloudFormat::detect(&p).unwrap(), CloudFormat::PlyBinaryLittleEndian);
        let c = load_cloud(&p, CloudFormat::PlyBinaryLittleEndian).unwrap();
        assert_eq!(
            c.points(),
            &[Point3::new(1.5, -2.0, 3.25), Point3::new(4.0, 5.0, 6.0)]
        );

        let cut = write(&dir, "c.ply", &bytes[..bytes.len() - 3]);
        assert!(matches!(
            load_cloud(&cut, CloudFormat::PlyBinaryLittleEndian),
            Err(Error::Parse { location: Location::Offset(_), .. })
        ));
    }

    #[test]
    fn big_endian_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "be.ply",
            b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n",
        );
        let err = load_cloud(&p, CloudFormat::PlyBinaryLittleEndian).unwrap_err();
        assert!(err.to_string().contains("big-endian"), "{err}");
    }

    #[test]
    fn malformed_headers() {
        let dir = tempfile::tempdir().unwrap();
        let cases: &[(&[u8], Location)] = &[
            (b"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n", Location::Line(5)),
            (b"ply\nformat ascii 1.0\nelement vertex two\nend_header\n", Location::Line(3)),
            (b"plx\nformat ascii 1.0\nend_header\n", Location::Line(1)),
            (b"ply\nformat ascii 1.0\nproperty float x\nend_header\n", Location::Line(3)),
        ];
        for (i, (bytes, loc)) in cases.iter().enumerate() {
            let p = write(&dir, &format!("m{i}.ply"), bytes);
            match load_cloud(&p, CloudFormat::PlyAscii) {
                Err(Error::Parse { location, .. }) => assert_eq!(location, *loc, "case {i}"),
                other => panic!("case {i}: {other:?}"),
            }
        }
    }

    #[test]
    fn wrong_vertex_count_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "short.ply",
            b"ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 1 1\n",
        );
        let err = load_cloud(&p, CloudFormat::PlyAscii).unwrap_err();
        match err {
            Error::Parse { location, message, .. } => {
                assert_eq!(location, Location::Line(10));
                assert!(message.contains("expected 3 vertex rows, found 2"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_vertices_is_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "z.ply",
            b"ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        );
        assert!(matches!(
            load_cloud(&p, CloudFormat::PlyAscii),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn missing_xyz_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "n.ply",
            b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty int z\nend_header\n0 0 0\n",
        );
        assert!(matches!(
            load_cloud(&p, CloudFormat::PlyAscii),
            Err(Error::Parse { .. })
        ));
    }
}
