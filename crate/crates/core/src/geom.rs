//! Geometry primitives shared by every stage of the pipeline.
//!
//! Hot loops compare squared Euclidean distances; [`dist`] takes the root
//! and is meant for API boundaries only.

use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// √3, the diagonal of a unit cube. Also the base search radius and
/// increment in index space.
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn min(&self, o: &Point3) -> Point3 {
        Point3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(&self, o: &Point3) -> Point3 {
        Point3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn axis(&self, axis: Axis) -> f64 {
        self[axis as usize]
    }

    pub fn with_axis(mut self, axis: Axis, value: f64) -> Point3 {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
        }
        self
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl Index<usize> for Point3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Point3 index {i} out of range"),
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis {other:?}"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Squared Euclidean distance. Every distance comparison in the crate goes
/// through this one expression so that different code paths agree bit for bit.
#[inline(always)]
pub fn dist2(p: &Point3, q: &Point3) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    dx * dx + dy * dy + dz * dz
}

pub fn dist(p: &Point3, q: &Point3) -> f64 {
    dist2(p, q).sqrt()
}

/// Chebyshev (L∞) distance. A point lies inside a cube of half-width `h`
/// centered on `q` exactly when its Chebyshev distance to `q` is at most `h`.
#[inline]
pub fn cheb_dist(p: &Point3, q: &Point3) -> f64 {
    (p.x - q.x).abs().max((p.y - q.y).abs()).max((p.z - q.z).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Self { min, max }
    }

    pub fn from_point(p: Point3) -> Self {
        Self { min: p, max: p }
    }

    /// Cube of half-width `half` around `center`.
    pub fn cube(center: Point3, half: f64) -> Self {
        let h = Point3::new(half, half, half);
        Self {
            min: center - h,
            max: center + h,
        }
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(&o.min),
            max: self.max.max(&o.max),
        }
    }

    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }

    pub fn longest_axis(&self) -> Axis {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            Axis::X
        } else if e.y >= e.z {
            Axis::Y
        } else {
            Axis::Z
        }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    pub fn contains_box(&self, o: &Aabb) -> bool {
        self.contains(&o.min) && self.contains(&o.max)
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= o.max[i] && o.min[i] <= self.max[i])
    }

    /// Chebyshev distance from `p` to the nearest point of the box (0 inside).
    #[inline]
    pub fn cheb_dist_to(&self, p: &Point3) -> f64 {
        let x = (self.min.x - p.x).max(p.x - self.max.x);
        let y = (self.min.y - p.y).max(p.y - self.max.y);
        let z = (self.min.z - p.z).max(p.z - self.max.z);
        x.max(y).max(z).max(0.0)
    }

    /// Squared Euclidean distance from `p` to the farthest corner of the box.
    /// Never below [`dist2`] from `p` to any point of the box.
    #[inline]
    pub fn max_dist2_to(&self, p: &Point3) -> f64 {
        let x = (p.x - self.min.x).abs().max((self.max.x - p.x).abs());
        let y = (p.y - self.min.y).abs().max((self.max.y - p.y).abs());
        let z = (p.z - self.min.z).abs().max((self.max.z - p.z).abs());
        x * x + y * y + z * z
    }

    /// Squared Euclidean distance from `p` to the box (0 inside). Never
    /// exceeds [`dist2`] from `p` to any point of the box.
    #[inline]
    pub fn dist2_to(&self, p: &Point3) -> f64 {
        let x = (self.min.x - p.x).max(p.x - self.max.x).max(0.0);
        let y = (self.min.y - p.y).max(p.y - self.max.y).max(0.0);
        let z = (self.min.z - p.z).max(p.z - self.max.z).max(0.0);
        x * x + y * y + z * z
    }
}

/// Tight bounding box of a point sequence.
pub fn aabb_of<'a, I>(points: I) -> Result<Aabb>
where
    I: IntoIterator<Item = &'a Point3>,
{
    let mut it = points.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Degenerate("bounding box of an empty point set".into()))?;
    let mut b = Aabb::from_point(*first);
    for p in it {
        b.grow(p);
    }
    Ok(b)
}

/// Integer grid coordinates of a cell. Query points outside the target's
/// box quantize to indices outside `[0, cells_per_dim)`, so these are signed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CellIndex {
    pub ix: i64,
    pub iy: i64,
    pub iz: i64,
}

impl CellIndex {
    pub const fn new(ix: i64, iy: i64, iz: i64) -> Self {
        Self { ix, iy, iz }
    }

    /// The cell's representative point in index space: its min corner.
    pub fn as_point(&self) -> Point3 {
        Point3::new(self.ix as f64, self.iy as f64, self.iz as f64)
    }
}
