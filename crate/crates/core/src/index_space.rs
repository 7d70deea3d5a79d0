//! Quantized index space over a target cloud.
//!
//! The target's bounding box is cut into cubic cells of edge
//! `s = l / 2^k`, `l` being the longest box extent. Each occupied cell is
//! represented by one lattice point (its min corner) and keeps the ids of the
//! target points that fell into it. Query points are carried into the same
//! space by scaling, without snapping them to the lattice.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{CellIndex, Point3};
use crate::mesh_io::PointCloud;

/// Largest accepted bit count. 2^20 cells per axis is far beyond any useful
/// resolution and keeps every index comfortably inside `i64`.
pub const MAX_BITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    /// Min corner of the target's bounding box.
    pub origin: Point3,
    /// Cell edge length in object units.
    pub cell_size: f64,
    pub bits: u32,
    pub cells_per_dim: [i64; 3],
}

impl GridParams {
    /// Unclamped cell of an arbitrary point. Points outside the target box
    /// get indices outside `[0, cells_per_dim)`.
    pub fn quantize(&self, p: &Point3) -> CellIndex {
        let q = self.scale(p);
        CellIndex::new(q.x.floor() as i64, q.y.floor() as i64, q.z.floor() as i64)
    }

    /// Cell of a target point. Points on the max face of the box are pulled
    /// into the last cell so every target point has a cell inside the grid.
    pub fn quantize_target(&self, p: &Point3) -> CellIndex {
        let c = self.quantize(p);
        let clamp = |v: i64, d: usize| v.clamp(0, self.cells_per_dim[d] - 1);
        CellIndex::new(clamp(c.ix, 0), clamp(c.iy, 1), clamp(c.iz, 2))
    }

    /// Object space → continuous index space.
    #[inline]
    pub fn scale(&self, p: &Point3) -> Point3 {
        let s = self.cell_size;
        Point3::new(
            (p.x - self.origin.x) / s,
            (p.y - self.origin.y) / s,
            (p.z - self.origin.z) / s,
        )
    }

    /// Continuous index space → object space.
    pub fn unscale(&self, q: &Point3) -> Point3 {
        let s = self.cell_size;
        Point3::new(
            q.x * s + self.origin.x,
            q.y * s + self.origin.y,
            q.z * s + self.origin.z,
        )
    }

    /// Object-space location of a cell's representative corner.
    pub fn corner(&self, c: &CellIndex) -> Point3 {
        self.unscale(&c.as_point())
    }

    pub fn total_cells(&self) -> u128 {
        self.cells_per_dim.iter().map(|&n| n as u128).product()
    }
}

pub fn build_grid(target: &PointCloud, bits: u32) -> Result<GridParams> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::InvalidArgument(format!(
            "bit count {bits} outside 1..={MAX_BITS}"
        )));
    }
    let bounds = target.bounds();
    let extent = bounds.extent();
    let longest = bounds.longest_axis();
    let l = extent.axis(longest);
    if l <= 0.0 {
        return Err(Error::DegenerateGrid);
    }
    let along_longest = 1i64 << bits;
    let cell_size = l / along_longest as f64;
    let mut cells_per_dim = [1i64; 3];
    for (d, n) in cells_per_dim.iter_mut().enumerate() {
        *n = if d == longest as usize {
            along_longest
        } else {
            ((extent[d] / cell_size).ceil() as i64).clamp(1, along_longest)
        };
    }
    Ok(GridParams {
        origin: bounds.min,
        cell_size,
        bits,
        cells_per_dim,
    })
}

/// A query point carried into index space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledQuery {
    pub id: u32,
    pub pos: Point3,
}

pub fn scale_queries(queries: &PointCloud, grid: &GridParams) -> Vec<ScaledQuery> {
    queries
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, p)| ScaledQuery {
            id: i as u32,
            pos: grid.scale(p),
        })
        .collect()
}

/// Anything the broad phase can search: a set of representative positions
/// in index space, each standing for a list of target point ids.
pub trait SearchTargets: Sync {
    fn positions(&self) -> &[Point3];
    fn members(&self, rep: u32) -> &[u32];
    fn len(&self) -> usize {
        self.positions().len()
    }
    fn is_empty(&self) -> bool {
        self.positions().is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct IndexSpace {
    grid: GridParams,
    /// Occupied cells in ascending order. A cell's position here is its
    /// representative id.
    cells: Vec<CellIndex>,
    positions: Vec<Point3>,
    /// `members[offsets[r]..offsets[r + 1]]` are the point ids of cell `r`,
    /// ascending.
    offsets: Vec<u32>,
    members: Vec<u32>,
    lookup: HashMap<CellIndex, u32>,
}

pub fn build_index_space(target: &PointCloud, bits: u32) -> Result<IndexSpace> {
    let grid = build_grid(target, bits)?;
    Ok(IndexSpace::with_grid(target, grid))
}

impl IndexSpace {
    pub fn with_grid(target: &PointCloud, grid: GridParams) -> IndexSpace {
        let mut keyed: Vec<(CellIndex, u32)> = target
            .points()
            .par_iter()
            .enumerate()
            .map(|(i, p)| (grid.quantize_target(p), i as u32))
            .collect();
        keyed.par_sort_unstable();

        let mut cells = Vec::new();
        let mut offsets = Vec::new();
        let mut members = Vec::with_capacity(keyed.len());
        for (i, (cell, id)) in keyed.iter().enumerate() {
            if i == 0 || keyed[i - 1].0 != *cell {
                cells.push(*cell);
                offsets.push(i as u32);
            }
            members.push(*id);
        }
        offsets.push(members.len() as u32);
        let positions = cells.iter().map(CellIndex::as_point).collect();
        let lookup = cells
            .iter()
            .enumerate()
            .map(|(r, c)| (*c, r as u32))
            .collect();
        IndexSpace {
            grid,
            cells,
            positions,
            offsets,
            members,
            lookup,
        }
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    pub fn cells(&self) -> &[CellIndex] {
        &self.cells
    }

    pub fn occupied(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, rep: u32) -> CellIndex {
        self.cells[rep as usize]
    }

    pub fn rep_of(&self, cell: &CellIndex) -> Option<u32> {
        self.lookup.get(cell).copied()
    }

    pub fn cell_members(&self, cell: &CellIndex) -> Option<&[u32]> {
        self.rep_of(cell).map(|r| self.members(r))
    }

    /// One `ix iy iz count` line per occupied cell.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = &self.grid;
        writeln!(
            w,
            "# origin {:?} {:?} {:?} cell_size {:?} bits {} cells_per_dim {} {} {}",
            g.origin.x,
            g.origin.y,
            g.origin.z,
            g.cell_size,
            g.bits,
            g.cells_per_dim[0],
            g.cells_per_dim[1],
            g.cells_per_dim[2]
        )?;
        for (r, c) in self.cells.iter().enumerate() {
            writeln!(w, "{} {} {} {}", c.ix, c.iy, c.iz, self.members(r as u32).len())?;
        }
        Ok(())
    }
}

impl SearchTargets for IndexSpace {
    fn positions(&self) -> &[Point3] {
        &self.positions
    }

    fn members(&self, rep: u32) -> &[u32] {
        let r = rep as usize;
        &self.members[self.offsets[r] as usize..self.offsets[r + 1] as usize]
    }
}

/// Every target point as its own representative, at its exact scaled
/// position. Used by the run without index-space construction.
#[derive(Debug, Clone)]
pub struct PointTargets {
    positions: Vec<Point3>,
    ids: Vec<u32>,
}

impl PointTargets {
    pub fn new(target: &PointCloud, grid: &GridParams) -> PointTargets {
        PointTargets {
            positions: target.points().par_iter().map(|p| grid.scale(p)).collect(),
            ids: (0..target.len() as u32).collect(),
        }
    }
}

impl SearchTargets for PointTargets {
    fn positions(&self) -> &[Point3] {
        &self.positions
    }

    fn members(&self, rep: u32) -> &[u32] {
        let r = rep as usize;
        &self.ids[r..r + 1]
    }
}
