//! Bounding volume hierarchy over representative points.
//!
//! Each leaf stands for one representative `b'` and carries the cube of
//! half-width √3 around it. A query at `q` with search radius `r >= √3`
//! hits a leaf when the leaf cube overlaps the cube of half-width `r - √3`
//! around `q`, which is the same as `cheb_dist(b', q) <= r`. Nodes therefore
//! store the bounds of their leaf *centers*, and pruning compares Chebyshev
//! distances against `r` directly; the cube boxes are derived on demand.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::geom::{cheb_dist, dist2, Aabb, Point3, SQRT_3};

/// Half-width of every leaf cube, in index units.
pub const LEAF_HALF_WIDTH: f64 = SQRT_3;

/// Most representatives stored in one leaf.
const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Leaf,
    /// The left child immediately follows its parent.
    Inner { right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    centers: Aabb,
    /// Every node covers the contiguous slots `start..start + len` of the
    /// leaf-ordered arrays.
    start: u32,
    len: u32,
    kind: Kind,
}

#[derive(Debug, Clone)]
pub struct CellBvh {
    nodes: Vec<Node>,
    positions: Vec<Point3>,
    /// Representative ids and positions in leaf order, for locality.
    leaf_reps: Vec<u32>,
    leaf_positions: Vec<Point3>,
}

impl CellBvh {
    /// Median-split build, up to eight representatives per leaf. The split axis is
    /// the longest extent of the centers' bounds; ties in the sort key are
    /// broken by representative id so the tree depends only on the input.
    pub fn build(positions: &[Point3]) -> Result<CellBvh> {
        if positions.is_empty() {
            return Err(Error::Degenerate("BVH over an empty representative set".into()));
        }
        let mut order: Vec<u32> = (0..positions.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * positions.len().div_ceil(LEAF_SIZE));
        build_node(positions, &mut order, 0, &mut nodes);
        let leaf_positions = order.iter().map(|&r| positions[r as usize]).collect();
        Ok(CellBvh {
            nodes,
            positions: positions.to_vec(),
            leaf_reps: order,
            leaf_positions,
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.positions.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn position(&self, rep: u32) -> Point3 {
        self.positions[rep as usize]
    }

    /// The overlap box of the whole tree: union of all leaf cubes.
    pub fn root_box(&self) -> Aabb {
        self.node_box(0)
    }

    fn node_box(&self, i: usize) -> Aabb {
        let c = self.nodes[i].centers;
        Aabb::new(
            c.min - Point3::new(LEAF_HALF_WIDTH, LEAF_HALF_WIDTH, LEAF_HALF_WIDTH),
            c.max + Point3::new(LEAF_HALF_WIDTH, LEAF_HALF_WIDTH, LEAF_HALF_WIDTH),
        )
    }

    /// Visits every representative whose leaf cube is hit by a search of
    /// radius `r` around `q`, i.e. `cheb_dist(b', q) <= r`. With `sphere`
    /// set, subtrees lying entirely outside the ball of radius `r` are
    /// skipped as well; the leaves visited are then exactly the box hits that
    /// can still pass an in-sphere test.
    fn traverse<F>(&self, q: &Point3, r: f64, sphere: bool, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(u32, &Point3) -> ControlFlow<()>,
    {
        let r2 = r * r;
        // inside the ball implies inside the cube, so one test suffices
        let reject = |b: &Aabb| {
            if sphere {
                b.dist2_to(q) > r2
            } else {
                b.cheb_dist_to(q) > r
            }
        };
        if reject(&self.nodes[0].centers) {
            return ControlFlow::Continue(());
        }
        let mut stack = [0u32; 64];
        let mut top = 1usize;
        while top > 0 {
            top -= 1;
            let i = stack[top];
            let node = &self.nodes[i as usize];
            // a subtree wholly inside the ball needs no further descent
            let inside = sphere && node.centers.max_dist2_to(q) <= r2;
            match node.kind {
                Kind::Inner { right } if !inside => {
                    let left = i + 1;
                    let lb = &self.nodes[left as usize].centers;
                    let rb = &self.nodes[right as usize].centers;
                    let (dl, dr) = (lb.dist2_to(q), rb.dist2_to(q));
                    let l_ok = if sphere { dl <= r2 } else { !reject(lb) };
                    let r_ok = if sphere { dr <= r2 } else { !reject(rb) };
                    // nearer child on top of the stack
                    let (first, second) = if dl <= dr { (right, left) } else { (left, right) };
                    let (first_ok, second_ok) = if dl <= dr { (r_ok, l_ok) } else { (l_ok, r_ok) };
                    if first_ok {
                        stack[top] = first;
                        top += 1;
                    }
                    if second_ok {
                        stack[top] = second;
                        top += 1;
                    }
                }
                _ => {
                    let range = node.start as usize..(node.start + node.len) as usize;
                    for (p, &rep) in self.leaf_positions[range.clone()]
                        .iter()
                        .zip(&self.leaf_reps[range])
                    {
                        if cheb_dist(p, q) <= r {
                            visit(rep, p)?;
                        }
                    }
                }
            }
        }
        ControlFlow::Continue(())
    }

    /// Visits every representative whose leaf cube is hit by a search of
    /// radius `r` around `q`, i.e. `cheb_dist(b', q) <= r`.
    pub fn for_each_box_hit<F>(&self, q: &Point3, r: f64, visit: F) -> ControlFlow<()>
    where
        F: FnMut(u32, &Point3) -> ControlFlow<()>,
    {
        self.traverse(q, r, false, visit)
    }

    /// Leaf-cube hits only, before the in-sphere test. Ascending rep order.
    pub fn box_hits(&self, q: &Point3, r: f64) -> Vec<u32> {
        let mut out = Vec::new();
        let _ = self.for_each_box_hit(q, r, |rep, _| {
            out.push(rep);
            ControlFlow::Continue(())
        });
        out.sort_unstable();
        out
    }

    /// Calls `visit` for every representative within Euclidean distance `r`
    /// of `q`, in traversal order.
    pub fn for_each_within<F>(&self, q: &Point3, r: f64, mut visit: F)
    where
        F: FnMut(u32, &Point3, f64),
    {
        let r2 = r * r;
        let _ = self.traverse(q, r, true, |rep, p| {
            let d2 = dist2(p, q);
            if d2 <= r2 {
                visit(rep, p, d2);
            }
            ControlFlow::Continue(())
        });
    }

    /// Representatives within Euclidean distance `r` of `q`: box hits that
    /// also pass the in-sphere test. Ascending rep order.
    pub fn within(&self, q: &Point3, r: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_within(q, r, |rep, _, _| out.push(rep));
        out.sort_unstable();
        out
    }

    /// Whether any representative lies within Euclidean distance `r` of `q`.
    pub fn any_within(&self, q: &Point3, r: f64) -> bool {
        let r2 = r * r;
        self.traverse(q, r, true, |_, p| {
            if dist2(p, q) <= r2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
    }

    /// Checks the containment hierarchy; used by tests.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut leaves = 0usize;
        for (i, node) in self.nodes.iter().enumerate() {
            let own = self.node_box(i);
            match node.kind {
                Kind::Leaf => {
                    for slot in node.start..node.start + node.len {
                        leaves += 1;
                        let p = self.positions[self.leaf_reps[slot as usize] as usize];
                        if p != self.leaf_positions[slot as usize] {
                            return Err(format!("leaf {i} slot {slot} out of sync"));
                        }
                        if !own.contains_box(&Aabb::cube(p, LEAF_HALF_WIDTH)) {
                            return Err(format!("leaf {i} does not contain its cube"));
                        }
                    }
                }
                Kind::Inner { right } => {
                    for child in [i + 1, right as usize] {
                        if !own.contains_box(&self.node_box(child)) {
                            return Err(format!("node {i} does not contain child {child}"));
                        }
                    }
                }
            }
        }
        if leaves != self.positions.len() {
            return Err(format!("{leaves} leaves for {} representatives", self.positions.len()));
        }
        Ok(())
    }
}

fn build_node(positions: &[Point3], order: &mut [u32], offset: u32, nodes: &mut Vec<Node>) -> u32 {
    let index = nodes.len() as u32;
    let mut centers = Aabb::from_point(positions[order[0] as usize]);
    for &r in order.iter().skip(1) {
        centers.grow(&positions[r as usize]);
    }
    let len = order.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node {
            centers,
            start: offset,
            len,
            kind: Kind::Leaf,
        });
        return index;
    }
    nodes.push(Node {
        centers,
        start: offset,
        len,
        kind: Kind::Inner { right: 0 },
    });
    let axis = centers.longest_axis() as usize;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        positions[a as usize][axis]
            .total_cmp(&positions[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    build_node(positions, lo, offset, nodes);
    let right = build_node(positions, hi, offset + mid as u32, nodes);
    nodes[index as usize].kind = Kind::Inner { right };
    index
}
