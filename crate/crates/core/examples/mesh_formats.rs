//! Read a PLY or OBJ file, print what was found, and write it back out in
//! both formats. Written coordinates read back bit for bit.
//!
//!     cargo run --release --example mesh_formats -- input.ply out_dir

use std::path::PathBuf;

use hdist::mesh_io::{subsample_cloud, write_obj, write_ply_ascii};
use hdist::{load_cloud_auto, CloudFormat};

fn main() -> hdist::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/torus_color.ply"));
    let out_dir = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);

    let format = match input.extension().and_then(|e| e.to_str()) {
        Some("ply") => CloudFormat::detect_ply(&input)?,
        _ => CloudFormat::detect(&input)?,
    };
    let cloud = load_cloud_auto(&input)?;
    let b = cloud.bounds();
    println!("{}: {:?}, {} vertices", input.display(), format, cloud.len());
    println!("bounds {:?} .. {:?}", b.min, b.max);

    let ply = out_dir.join("hdist_roundtrip.ply");
    let obj = out_dir.join("hdist_roundtrip.obj");
    write_ply_ascii(&cloud, &ply)?;
    write_obj(&cloud, &obj)?;
    for path in [&ply, &obj] {
        let back = load_cloud_auto(path)?;
        let same = back.points() == cloud.points();
        println!("{} -> {} vertices, identical: {same}", path.display(), back.len());
    }

    let half = subsample_cloud(&cloud, cloud.len() / 2, 1)?;
    println!("seeded half-size subsample: {} vertices", half.len());
    Ok(())
}
