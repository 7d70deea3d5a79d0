//! Exact Hausdorff distance between 3-D point clouds.
//!
//! The one-sided distance `h(A, B) = max over a of min over b |a - b|` is
//! computed as a series of fixed-radius neighbor searches with growing
//! radius. Target points are first clustered into a quantized *index space*
//! (a cubic grid of `2^k` cells along the longest axis of the target's box);
//! the searches run over one representative per occupied cell through a BVH
//! whose leaf-box hit test plays the role of a ray-tracing unit. The searches
//! bracket the answer, and only the queries that can still realize the
//! maximum keep their candidate cells for the exact refinement step.
//!
//! ```
//! use hdist::{hausdorff, brute_force_hausdorff, HausdorffConfig};
//! use hdist::mesh_io::synthetic::{generate, Shape};
//!
//! let a = generate(Shape::Torus, 2_000, 1).unwrap();
//! let b = generate(Shape::Blob, 1_500, 2).unwrap();
//! let fast = hausdorff(&a, &b, &HausdorffConfig::default()).unwrap();
//! let slow = brute_force_hausdorff(&a, &b);
//! assert_eq!(fast.h, slow.h);
//! assert_eq!(fast.witness, slow.witness);
//! ```

pub mod bench;
pub mod broad_search;
pub mod error;
pub mod geom;
pub mod index_space;
pub mod mesh_io;
pub mod narrow_phase;

pub use error::{Error, Result};
pub use geom::{aabb_of, cheb_dist, dist, Aabb, Axis, CellIndex, Point3, SQRT_3};
pub use index_space::{build_grid, build_index_space, scale_queries, GridParams, IndexSpace};
pub use mesh_io::{load_cloud, load_cloud_auto, CloudFormat, PointCloud};
pub use narrow_phase::{
    brute_force_hausdorff, hausdorff, HausdorffConfig, HausdorffResult, R0Policy, Side, Witness,
};
