//! Quantize a target cloud into its index space and look at the occupancy:
//! how many cells are used, how full they get, and how far each point sits
//! from its cell's representative corner.
//!
//!     cargo run --release --example index_space -- [cloud] [k] [dump.txt]

use hdist::index_space::SearchTargets;
use hdist::mesh_io::synthetic::{generate, Shape};
use hdist::{build_index_space, dist, load_cloud_auto};

fn main() -> hdist::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cloud = match args.first() {
        Some(p) => load_cloud_auto(p)?,
        None => generate(Shape::Sphere, 50_000, 3)?,
    };
    let k: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let space = build_index_space(&cloud, k)?;
    let grid = space.grid();

    println!("{}: {} points, k = {k}", cloud.label(), cloud.len());
    println!("cell size {:.6}, grid {:?} cells", grid.cell_size, grid.cells_per_dim);
    println!(
        "{} occupied cells out of {} ({:.3}%), {:.2} points per occupied cell",
        space.occupied(),
        grid.total_cells(),
        100.0 * space.occupied() as f64 / grid.total_cells() as f64,
        cloud.len() as f64 / space.occupied() as f64
    );

    let mut sizes: Vec<usize> = (0..space.len() as u32).map(|r| space.members(r).len()).collect();
    sizes.sort_unstable();
    println!(
        "members per cell: min {} median {} max {}",
        sizes[0],
        sizes[sizes.len() / 2],
        sizes[sizes.len() - 1]
    );

    // every point lies within one cell diagonal of its representative
    let worst = (0..space.len() as u32)
        .flat_map(|r| space.members(r).iter().map(move |&id| (r, id)))
        .map(|(r, id)| dist(&space.positions()[r as usize], &grid.scale(&cloud.get(id))))
        .fold(0.0, f64::max);
    println!("largest point-to-representative distance: {worst:.4} cells (bound √3 = 1.7321)");

    if let Some(path) = args.get(2) {
        let file = std::fs::File::create(path).map_err(|source| hdist::Error::Io { path: path.into(), source })?;
        space
            .write_dump(std::io::BufWriter::new(file))
            .map_err(|source| hdist::Error::Io { path: path.into(), source })?;
        println!("wrote {path}");
    }
    Ok(())
}
