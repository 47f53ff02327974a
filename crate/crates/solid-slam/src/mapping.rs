//! Keyframe-gated probabilistic occupancy mapping.
//!
//! Occupancy lives in an octree whose leaves store log-odds; the external
//! contract (and the test oracle) is the recursive Bayes update on
//! probabilities. Free space along each sensor ray is carved with the miss
//! probability so the exported map is usable, with hits winning over
//! misses within a single scan.

use crate::se3::{transform_point, Point3, Pose};

/// Thresholds deciding when a scan becomes a keyframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyframePolicy {
    pub min_translation: f64,
    pub min_rotation: f64,
    pub max_interval: f64,
}

impl Default for KeyframePolicy {
    fn default() -> Self {
        Self {
            min_translation: 0.3,
            min_rotation: 15.0_f64.to_radians(),
            max_interval: 1.0,
        }
    }
}

/// True when the displacement since the last keyframe is significant:
/// enough translation, enough rotation, or enough elapsed time.
pub fn is_keyframe(delta_pose: &Pose, elapsed: f64, policy: &KeyframePolicy) -> bool {
    delta_pose.translation.norm() >= policy.min_translation
        || delta_pose.rotation_angle() >= policy.min_rotation
        || elapsed >= policy.max_interval
}

/// Hit/miss measurement probabilities of the range sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub p_hit: f64,
    pub p_miss: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self { p_hit: 0.7, p_miss: 0.4 }
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

/// Recursive Bayes fusion of an occupancy probability with one
/// measurement, clamped to `[p_min, p_max]`:
/// `[1 + (1-pm)/pm * (1-pp)/pp * prior/(1-prior)]^-1`.
///
/// Computed in log-odds for numerical stability; the probability form
/// above is the contract the tests check against.
pub fn fuse_occupancy(p_prev: f64, p_meas: f64, prior: f64, p_min: f64, p_max: f64) -> f64 {
    debug_assert!(p_prev > 0.0 && p_prev < 1.0);
    debug_assert!(p_meas > 0.0 && p_meas < 1.0);
    debug_assert!(prior > 0.0 && prior < 1.0);
    let l = logit(p_prev) + logit(p_meas) - logit(prior);
    sigmoid(l).clamp(p_min, p_max)
}

const NIL: i32 = -1;

#[derive(Debug, Clone)]
struct OctNode {
    children: [i32; 8],
    /// Log-odds occupancy; only meaningful on leaf-depth nodes.
    log_odds: f64,
}

impl OctNode {
    fn new(log_odds: f64) -> Self {
        Self { children: [NIL; 8], log_odds }
    }
}

/// Octree of occupancy probabilities over cubic leaves of edge
/// `resolution`, centered on the world origin. Lookups walk at most
/// `max_depth` (16) levels.
#[derive(Debug, Clone)]
pub struct OccupancyOctree {
    resolution: f64,
    max_depth: u32,
    prior: f64,
    prior_log: f64,
    clamp_lo: f64,
    clamp_hi: f64,
    nodes: Vec<OctNode>,
}

/// Integer voxel coordinate, offset so it is always non-negative.
type VoxelKey = [u32; 3];

impl OccupancyOctree {
    pub const DEFAULT_DEPTH: u32 = 16;

    pub fn new(resolution: f64, prior: f64, p_min: f64, p_max: f64) -> Self {
        assert!(resolution > 0.0);
        assert!(0.0 < p_min && p_min < prior && prior < p_max && p_max < 1.0);
        let prior_log = logit(prior);
        Self {
            resolution,
            max_depth: Self::DEFAULT_DEPTH,
            prior,
            prior_log,
            clamp_lo: logit(p_min),
            clamp_hi: logit(p_max),
            nodes: vec![OctNode::new(prior_log)],
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    fn half_extent(&self) -> i64 {
        1i64 << (self.max_depth - 1)
    }

    fn key_of(&self, p: &Point3) -> Option<VoxelKey> {
        let half = self.half_extent();
        let mut key = [0u32; 3];
        for (axis, v) in [p.x, p.y, p.z].into_iter().enumerate() {
            if !v.is_finite() {
                return None;
            }
            let idx = (v / self.resolution).floor() as i64 + half;
            if idx < 0 || idx >= 2 * half {
                return None;
            }
            key[axis] = idx as u32;
        }
        Some(key)
    }

    /// Center of the leaf containing the key.
    fn key_center(&self, key: &VoxelKey) -> Point3 {
        let half = self.half_extent();
        Point3::new(
            (key[0] as i64 - half) as f64 + 0.5,
            (key[1] as i64 - half) as f64 + 0.5,
            (key[2] as i64 - half) as f64 + 0.5,
        ) * self.resolution
    }

    fn leaf_index(&self, key: &VoxelKey) -> Option<usize> {
        let mut node = 0usize;
        for level in (0..self.max_depth).rev() {
            let child = (((key[0] >> level) & 1)
                | (((key[1] >> level) & 1) << 1)
                | (((key[2] >> level) & 1) << 2)) as usize;
            let next = self.nodes[node].children[child];
            if next == NIL {
                return None;
            }
            node = next as usize;
        }
        Some(node)
    }

    fn leaf_index_or_create(&mut self, key: &VoxelKey) -> usize {
        let mut node = 0usize;
        for level in (0..self.max_depth).rev() {
            let child = (((key[0] >> level) & 1)
                | (((key[1] >> level) & 1) << 1)
                | (((key[2] >> level) & 1) << 2)) as usize;
            let next = self.nodes[node].children[child];
            node = if next == NIL {
                let id = self.nodes.len();
                self.nodes.push(OctNode::new(self.prior_log));
                self.nodes[node].children[child] = id as i32;
                id
            } else {
                next as usize
            };
        }
        node
    }

    fn fuse_leaf(&mut self, key: &VoxelKey, p_meas: f64) {
        let delta = logit(p_meas) - self.prior_log;
        let idx = self.leaf_index_or_create(key);
        let l = (self.nodes[idx].log_odds + delta).clamp(self.clamp_lo, self.clamp_hi);
        self.nodes[idx].log_odds = l;
    }

    /// Occupancy probability of the leaf containing `point`; untouched
    /// space reads as the prior.
    pub fn query(&self, point: &Point3) -> f64 {
        let Some(key) = self.key_of(point) else {
            return self.prior;
        };
        match self.leaf_index(&key) {
            Some(idx) => sigmoid(self.nodes[idx].log_odds),
            None => self.prior,
        }
    }

    /// Fuses one scan: every endpoint leaf with `p_hit`, every leaf the ray
    /// crosses on the way with `p_miss`. Within a scan each leaf is updated
    /// at most once and hits win over misses. Returns the number of leaf
    /// updates.
    pub fn integrate_scan(
        &mut self,
        cloud: &[Point3],
        pose: &Pose,
        model: &SensorModel,
    ) -> usize {
        let origin = pose.translation;
        let mut hits: Vec<VoxelKey> = Vec::new();
        let mut misses: Vec<VoxelKey> = Vec::new();
        for p in cloud {
            let end = transform_point(pose, p);
            let Some(end_key) = self.key_of(&end) else { continue };
            hits.push(end_key);
            self.walk_ray(&origin, &end, &end_key, &mut misses);
        }
        hits.sort_unstable();
        hits.dedup();
        misses.sort_unstable();
        misses.dedup();
        // hit wins over miss
        let misses: Vec<VoxelKey> = misses
            .into_iter()
            .filter(|k| hits.binary_search(k).is_err())
            .collect();
        for key in &hits {
            self.fuse_leaf(key, model.p_hit);
        }
        for key in &misses {
            self.fuse_leaf(key, model.p_miss);
        }
        hits.len() + misses.len()
    }

    /// Amanatides-Woo traversal from `origin` to `end`, collecting every
    /// voxel key strictly before the endpoint voxel.
    fn walk_ray(&self, origin: &Point3, end: &Point3, end_key: &VoxelKey, out: &mut Vec<VoxelKey>) {
        let Some(start_key) = self.key_of(origin) else { return };
        if start_key == *end_key {
            return;
        }
        let dir = end - origin;
        let res = self.resolution;
        let mut cur: [i64; 3] = [0; 3];
        let mut step: [i64; 3] = [0; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        let half = self.half_extent();
        for a in 0..3 {
            cur[a] = start_key[a] as i64 - half;
            let d = dir[a];
            if d > 0.0 {
                step[a] = 1;
                let boundary = (cur[a] + 1) as f64 * res;
                t_max[a] = (boundary - origin[a]) / d;
                t_delta[a] = res / d;
            } else if d < 0.0 {
                step[a] = -1;
                let boundary = cur[a] as f64 * res;
                t_max[a] = (boundary - origin[a]) / d;
                t_delta[a] = res / -d;
            }
        }
        let end_cell = [
            end_key[0] as i64 - half,
            end_key[1] as i64 - half,
            end_key[2] as i64 - half,
        ];
        let cap = 4 * ((end_cell[0] - cur[0]).abs()
            + (end_cell[1] - cur[1]).abs()
            + (end_cell[2] - cur[2]).abs()) as usize
            + 8;
        for _ in 0..cap {
            if cur == end_cell {
                return;
            }
            out.push([
                (cur[0] + half) as u32,
                (cur[1] + half) as u32,
                (cur[2] + half) as u32,
            ]);
            let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            cur[axis] += step[axis];
            t_max[axis] += t_delta[axis];
        }
    }

    /// All leaves with occupancy at or above `threshold`, as
    /// `(leaf_center, probability)` pairs in deterministic spatial order.
    pub fn occupied_leaves(&self, threshold: f64) -> Vec<(Point3, f64)> {
        let mut out = Vec::new();
        self.collect_leaves(0, self.max_depth, [0u32; 3], threshold, &mut out);
        out
    }

    fn collect_leaves(
        &self,
        node: usize,
        levels_left: u32,
        prefix: VoxelKey,
        threshold: f64,
        out: &mut Vec<(Point3, f64)>,
    ) {
        if levels_left == 0 {
            let p = sigmoid(self.nodes[node].log_odds);
            if p >= threshold {
                out.push((self.key_center(&prefix), p));
            }
            return;
        }
        for child in 0..8usize {
            let next = self.nodes[node].children[child];
            if next == NIL {
                continue;
            }
            let key = [
                (prefix[0] << 1) | (child as u32 & 1),
                (prefix[1] << 1) | ((child as u32 >> 1) & 1),
                (prefix[2] << 1) | ((child as u32 >> 2) & 1),
            ];
            self.collect_leaves(next as usize, levels_left - 1, key, threshold, out);
        }
    }
}

/// One point per occupied leaf (occupancy >= threshold) at the leaf center.
pub fn export_occupied(tree: &OccupancyOctree, threshold: f64) -> Vec<Point3> {
    assert!(threshold > 0.0 && threshold < 1.0);
    tree.occupied_leaves(threshold)
        .into_iter()
        .map(|(center, _)| center)
        .collect()
}
