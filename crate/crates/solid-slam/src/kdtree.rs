//! Balanced, bulk-loaded k-d tree over 3D points.
//!
//! Rebuilt from scratch whenever the local map changes; no incremental
//! insertion. Ties in the k-nearest search are broken by point index so
//! queries are fully deterministic.

use crate::se3::Point3;

#[derive(Debug, Clone)]
struct Node {
    /// Index into `points`.
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

const NIL: i32 = -1;

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    nodes: Vec<Node>,
    root: i32,
}

impl Default for KdTree {
    fn default() -> Self {
        Self { points: Vec::new(), nodes: Vec::new(), root: NIL }
    }
}

impl KdTree {
    pub fn build(points: Vec<Point3>) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut tree = Self { points, nodes: Vec::new(), root: NIL };
        tree.nodes.reserve(order.len());
        let n = order.len();
        tree.root = tree.build_rec(&mut order, 0, n, 0);
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, idx: usize) -> &Point3 {
        &self.points[idx]
    }

    fn build_rec(&mut self, order: &mut [u32], lo: usize, hi: usize, depth: usize) -> i32 {
        if lo >= hi {
            return NIL;
        }
        let axis = (depth % 3) as u8;
        let mid = (lo + hi) / 2;
        order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            let (pa, pb) = (&self.points[a as usize], &self.points[b as usize]);
            pa[axis as usize]
                .partial_cmp(&pb[axis as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        let point = order[mid];
        let id = self.nodes.len() as i32;
        self.nodes.push(Node { point, axis, left: NIL, right: NIL });
        let left = self.build_rec(order, lo, mid, depth + 1);
        let right = self.build_rec(order, mid + 1, hi, depth + 1);
        self.nodes[id as usize].left = left;
        self.nodes[id as usize].right = right;
        id
    }

    /// The `k` nearest points to `query`, as `(distance, index)` pairs in
    /// ascending distance order.
    pub fn nearest_k(&self, query: &Point3, k: usize) -> Vec<(f64, usize)> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search(self.root, query, k, &mut best);
        }
        for b in &mut best {
            b.0 = b.0.sqrt();
        }
        best
    }

    fn search(&self, node: i32, query: &Point3, k: usize, best: &mut Vec<(f64, usize)>) {
        if node == NIL {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = &self.points[n.point as usize];
        let d2 = (p - query).norm_squared();
        Self::offer(best, k, d2, n.point as usize);
        let delta = query[n.axis as usize] - p[n.axis as usize];
        let (near, far) = if delta < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.search(near, query, k, best);
        // <= so equal-distance points across the split still compete on
        // index order
        if best.len() < k || delta * delta <= best[best.len() - 1].0 {
            self.search(far, query, k, best);
        }
    }

    fn offer(best: &mut Vec<(f64, usize)>, k: usize, d2: f64, idx: usize) {
        let key = (d2, idx);
        let pos = best.partition_point(|&(bd, bi)| (bd, bi) < key);
        if pos >= k {
            return;
        }
        best.insert(pos, key);
        best.truncate(k);
    }
}
