//! Static k-d tree answering "distance to the k-th nearest other point" for
//! every point of a fixed set.

use std::collections::BinaryHeap;

use ordered::OrdF64;

/// Flat row-major point set.
pub struct KdTree<'a> {
    points: &'a [f64],
    dim: usize,
    /// Permutation of point indices; each node covers a contiguous slice.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

struct Node {
    start: usize,
    end: usize,
    axis: usize,
    split: f64,
    left: Option<usize>,
    right: Option<usize>,
}

const LEAF_SIZE: usize = 16;

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [f64], dim: usize) -> Self {
        let n = points.len() / dim;
        let mut tree = Self {
            points,
            dim,
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    fn coord(&self, i: usize, axis: usize) -> f64 {
        self.points[i * self.dim + axis]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            axis: 0,
            split: 0.0,
            left: None,
            right: None,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        // split on the axis of largest spread at the median
        let axis = (0..self.dim)
            .map(|a| {
                let (lo, hi) = self.order[start..end].iter().fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), &i| {
                        let v = self.coord(i, a);
                        (lo.min(v), hi.max(v))
                    },
                );
                (a, hi - lo)
            })
            .fold(
                (0, f64::NEG_INFINITY),
                |best, c| if c.1 > best.1 { c } else { best },
            )
            .0;
        let mid = start + (end - start) / 2;
        let points = self.points;
        let dim = self.dim;
        self.order[start..end].select_nth_unstable_by(mid - start, |a, b| {
            points[a * dim + axis].total_cmp(&points[b * dim + axis])
        });
        let split = self.coord(self.order[mid], axis);
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        let node = &mut self.nodes[id];
        node.axis = axis;
        node.split = split;
        node.left = Some(left);
        node.right = Some(right);
        id
    }

    /// Squared Euclidean distance between stored points.
    pub fn dist2(&self, a: usize, b: usize) -> f64 {
        let pa = &self.points[a * self.dim..(a + 1) * self.dim];
        let pb = &self.points[b * self.dim..(b + 1) * self.dim];
        pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    /// Squared distance from point `query` to its `k`-th nearest other point.
    pub fn kth_neighbor_dist2(&self, query: usize, k: usize) -> f64 {
        let mut heap: BinaryHeap<OrdF64> = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        heap.peek().map(|d| d.0).unwrap_or(f64::INFINITY)
    }

    fn search(&self, node_id: usize, query: usize, k: usize, heap: &mut BinaryHeap<OrdF64>) {
        let node = &self.nodes[node_id];
        match (node.left, node.right) {
            (Some(left), Some(right)) => {
                let diff = self.coord(query, node.axis) - node.split;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, k, heap);
                let worst = if heap.len() < k {
                    f64::INFINITY
                } else {
                    heap.peek().map(|d| d.0).unwrap_or(f64::INFINITY)
                };
                if diff * diff <= worst {
                    self.search(far, query, k, heap);
                }
            }
            _ => {
                for &i in &self.order[node.start..node.end] {
                    if i == query {
                        continue;
                    }
                    let d = self.dist2(query, i);
                    if heap.len() < k {
                        heap.push(OrdF64(d));
                    } else if d < heap.peek().expect("non-empty").0 {
                        heap.pop();
                        heap.push(OrdF64(d));
                    }
                }
            }
        }
    }
}

mod ordered {
    /// Total order on f64 for the max-heap.
    #[derive(Clone, Copy, PartialEq)]
    pub struct OrdF64(pub f64);

    impl Eq for OrdF64 {}

    impl PartialOrd for OrdF64 {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    impl Ord for OrdF64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}
