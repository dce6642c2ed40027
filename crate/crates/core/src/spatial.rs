//! Exact k-nearest-neighbor and fixed-radius search under the Euclidean norm.
//!
//! Two backends answer identical queries: a kd-tree (median split on the
//! widest-spread axis, leaves of at most [`LEAF_SIZE`] points) and a linear
//! scan kept as a reference oracle. Both compute squared distances with the
//! same arithmetic, so their results agree bit-for-bit.
//!
//! Results are ordered by distance, ties broken by ascending source index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::io::PointCloud;

/// Maximum number of points stored in a kd-tree leaf.
pub const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    KdTree,
    Linear,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kdtree" => Ok(Backend::KdTree),
            "linear" => Ok(Backend::Linear),
            _ => Err(format!("unknown backend '{s}' (expected kdtree or linear)")),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::KdTree => "kdtree",
            Backend::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Neighbors sorted by `(distance, index)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborSet(Vec<Neighbor>);

impl NeighborSet {
    pub fn as_slice(&self) -> &[Neighbor] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|n| n.index).collect()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.0.iter().map(|n| n.distance).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor> {
        self.0.iter()
    }
}

impl<'a> IntoIterator for &'a NeighborSet {
    type Item = &'a Neighbor;
    type IntoIter = std::slice::Iter<'a, Neighbor>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Candidate ordered by squared distance, then index.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

/// Keeps the `k` smallest candidates seen so far.
struct KBest {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl KBest {
    fn new(k: usize) -> Self {
        KBest {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, c: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(worst) = self.heap.peek() {
            if c < *worst {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }

    /// Squared distance beyond which nothing can enter, or infinity while not full.
    fn bound(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |c| c.dist2)
        }
    }

    fn into_sorted(self) -> Vec<Candidate> {
        self.heap.into_sorted_vec()
    }
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn to_set(mut cands: Vec<Candidate>) -> NeighborSet {
    cands.sort_unstable();
    NeighborSet(
        cands
            .into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.dist2.sqrt(),
            })
            .collect(),
    )
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable search structure over a borrowed point cloud.
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    points: &'a PointCloud,
    backend: Backend,
    /// Point indices, permuted so every leaf owns a contiguous range.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Builds an index over `points`.
pub fn build_index(points: &PointCloud, backend: Backend) -> Result<SpatialIndex<'_>> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut index = SpatialIndex {
        points,
        backend,
        order: (0..points.len()).collect(),
        nodes: Vec::new(),
    };
    if backend == Backend::KdTree {
        let n = points.len();
        index.build_node(0, n);
    }
    Ok(index)
}

impl<'a> SpatialIndex<'a> {
    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn points(&self) -> &'a PointCloud {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point indices in leaf order (kd-tree) or natural order (linear).
    pub fn leaf_order(&self) -> &[usize] {
        &self.order
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.points.dim();
        let points = self.points;
        let slice = &mut self.order[start..end];
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in slice.iter() {
            let p = points.point(i);
            for a in 0..dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&i, &j| {
            points.point(i)[axis]
                .total_cmp(&points.point(j)[axis])
                .then(i.cmp(&j))
        });
        let value = points.point(slice[mid])[axis];
        // Reserve this node's slot before the children are appended.
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn check_query(&self, query: &[f64]) -> Result<[f64; 3]> {
        if query.len() != self.points.dim() {
            return Err(Error::DimensionMismatch {
                found: query.len(),
                expected: self.points.dim(),
            });
        }
        if query.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteQuery);
        }
        let mut q = [0.0; 3];
        q[..query.len()].copy_from_slice(query);
        Ok(q)
    }

    /// The `min(k, N)` nearest points to `query`.
    pub fn knn(&self, query: &[f64], k: usize) -> Result<NeighborSet> {
        if k == 0 {
            return Err(Error::ZeroNeighbors);
        }
        let q = self.check_query(query)?;
        let mut best = KBest::new(k.min(self.len()));
        match self.backend {
            Backend::Linear => {
                for (index, p) in self.points.iter().enumerate() {
                    best.offer(Candidate {
                        dist2: dist2(&q, p),
                        index,
                    });
                }
            }
            Backend::KdTree => self.knn_node(0, &q, &mut best),
        }
        Ok(to_set(best.into_sorted()))
    }

    fn knn_node(&self, node: usize, q: &[f64; 3], best: &mut KBest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &index in &self.order[start..end] {
                    best.offer(Candidate {
                        dist2: dist2(q, self.points.point(index)),
                        index,
                    });
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_node(near, q, best);
                // Equal bounds are still visited: a tie there may carry a smaller index.
                if diff * diff <= best.bound() {
                    self.knn_node(far, q, best);
                }
            }
        }
    }

    /// All points whose distance to `query` is at most `radius`.
    pub fn radius_search(&self, query: &[f64], radius: f64) -> Result<NeighborSet> {
        if !(radius > 0.0) {
            return Err(Error::NonPositiveRadius(radius));
        }
        let q = self.check_query(query)?;
        let mut found = Vec::new();
        match self.backend {
            Backend::Linear => {
                for (index, p) in self.points.iter().enumerate() {
                    let d2 = dist2(&q, p);
                    if d2.sqrt() <= radius {
                        found.push(Candidate { dist2: d2, index });
                    }
                }
            }
            Backend::KdTree => self.radius_node(0, &q, radius, &mut found),
        }
        Ok(to_set(found))
    }

    fn radius_node(&self, node: usize, q: &[f64; 3], radius: f64, found: &mut Vec<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &index in &self.order[start..end] {
                    let d2 = dist2(q, self.points.point(index));
                    if d2.sqrt() <= radius {
                        found.push(Candidate { dist2: d2, index });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.radius_node(near, q, radius, found);
                if (diff * diff).sqrt() <= radius {
                    self.radius_node(far, q, radius, found);
                }
            }
        }
    }
}
