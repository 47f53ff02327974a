//! Scan-to-map odometry: point-to-edge / point-to-plane residuals against
//! a sliding-window feature map, minimized by Gauss-Newton with a left
//! perturbation update `T <- exp(dxi) * T`.

use crate::features::FeatureSet;
use crate::kdtree::KdTree;
use crate::se3::{compose, exp, inverse, point_jacobian, skew, transform_point, Point3, Pose, Twist};
use nalgebra::{Matrix3x6, Matrix6, RowVector6, Vector6};
use std::collections::HashMap;
use std::collections::VecDeque;
use thiserror::Error;

/// Separation below which two edge targets no longer define a line.
const EDGE_DEGENERACY: f64 = 1e-9;
/// Cross-product norm below which three plane targets are collinear.
const PLANE_DEGENERACY: f64 = 1e-9;
/// Residual below which the point-to-edge gradient is undefined.
const ON_LINE_EPS: f64 = 1e-12;
const MAX_STEP_HALVINGS: usize = 5;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OdometryError {
    #[error("edge targets are coincident, no line is defined")]
    DegenerateEdge,
    #[error("plane targets are collinear, no plane is defined")]
    DegeneratePlane,
    /// The query point lies on the target line; the caller should
    /// contribute a zero row for this correspondence.
    #[error("point lies on the target edge, gradient is undefined")]
    OnLine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryParams {
    /// Sliding-window length `q`, in frames.
    pub window_frames: usize,
    pub max_corr_dist_edge: f64,
    pub max_corr_dist_plane: f64,
    /// Combined rad/m norm of the accepted step below which the solve stops.
    pub convergence_eps: f64,
    pub max_iterations: usize,
    /// Voxel edge lengths for map downsampling on insertion; 0 disables.
    pub voxel_edge: f64,
    pub voxel_plane: f64,
    pub min_correspondences: usize,
    pub max_condition: f64,
}

impl Default for OdometryParams {
    fn default() -> Self {
        Self {
            window_frames: 10,
            max_corr_dist_edge: 1.0,
            max_corr_dist_plane: 1.0,
            convergence_eps: 1e-3,
            max_iterations: 10,
            voxel_edge: 0.05,
            voxel_plane: 0.10,
            min_correspondences: 10,
            max_condition: 1e12,
        }
    }
}

/// One matched feature: the sensor-frame source point plus its map-frame
/// targets (two points for an edge, three for a plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correspondence {
    Edge { source: Point3, targets: [Point3; 2] },
    Plane { source: Point3, targets: [Point3; 3] },
}

#[derive(Debug, Clone, Default)]
struct MapFrame {
    edges: Vec<Point3>,
    planes: Vec<Point3>,
}

/// Sliding window of the last `q` feature frames in the map frame, with
/// nearest-neighbor indices over the union of their points. The indices
/// are rebuilt after every insertion.
#[derive(Debug, Clone)]
pub struct LocalMap {
    window: VecDeque<MapFrame>,
    capacity: usize,
    voxel_edge: f64,
    voxel_plane: f64,
    edge_tree: KdTree,
    plane_tree: KdTree,
}

impl LocalMap {
    pub fn new(params: &OdometryParams) -> Self {
        Self {
            window: VecDeque::new(),
            capacity: params.window_frames.max(1),
            voxel_edge: params.voxel_edge,
            voxel_plane: params.voxel_plane,
            edge_tree: KdTree::default(),
            plane_tree: KdTree::default(),
        }
    }

    pub fn frame_count(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn edge_points(&self) -> Vec<Point3> {
        self.window.iter().flat_map(|f| f.edges.iter().copied()).collect()
    }

    pub fn plane_points(&self) -> Vec<Point3> {
        self.window.iter().flat_map(|f| f.planes.iter().copied()).collect()
    }

    /// Transforms the features to the map frame, appends them as a new
    /// window entry (evicting the oldest one beyond capacity), and rebuilds
    /// both nearest-neighbor indices.
    pub fn insert_frame(&mut self, features: &FeatureSet, pose: &Pose) {
        let to_world = |pts: &[Point3]| -> Vec<Point3> {
            pts.iter().map(|p| transform_point(pose, p)).collect()
        };
        let frame = MapFrame {
            edges: voxel_downsample(&to_world(&features.edges), self.voxel_edge),
            planes: voxel_downsample(&to_world(&features.planars), self.voxel_plane),
        };
        self.window.push_back(frame);
        while self.window.len() > self.capacity {
            self.window.pop_front();
        }
        self.rebuild();
    }

    fn rebuild(&mut self) {
        self.edge_tree = KdTree::build(self.edge_points());
        self.plane_tree = KdTree::build(self.plane_points());
    }

    /// A copy of this map rigidly moved by `g`.
    pub fn transformed(&self, g: &Pose) -> LocalMap {
        let mut out = self.clone();
        for frame in &mut out.window {
            for p in frame.edges.iter_mut().chain(frame.planes.iter_mut()) {
                *p = transform_point(g, p);
            }
        }
        out.rebuild();
        out
    }
}

/// Centroid voxel filter preserving first-touch voxel order; `voxel <= 0`
/// returns the input unchanged.
pub fn voxel_downsample(points: &[Point3], voxel: f64) -> Vec<Point3> {
    if voxel <= 0.0 {
        return points.to_vec();
    }
    let mut slots: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut accum: Vec<(Point3, u32)> = Vec::new();
    for p in points {
        let key = (
            (p.x / voxel).floor() as i64,
            (p.y / voxel).floor() as i64,
            (p.z / voxel).floor() as i64,
        );
        let idx = *slots.entry(key).or_insert_with(|| {
            accum.push((Point3::zeros(), 0));
            accum.len() - 1
        });
        accum[idx].0 += p;
        accum[idx].1 += 1;
    }
    accum.into_iter().map(|(sum, n)| sum / n as f64).collect()
}

/// Constant-velocity initial guess: `T_prev * T_prev2^-1 * T_prev`.
pub fn predict_initial_pose(t_prev: &Pose, t_prev2: &Pose) -> Pose {
    compose(&compose(t_prev, &inverse(t_prev2)), t_prev)
}

/// The two nearest map edge points, or `None` when fewer than two exist
/// within `max_dist` or the pair is coincident.
pub fn find_edge_correspondence(
    p_hat: &Point3,
    map: &LocalMap,
    max_dist: f64,
) -> Option<[Point3; 2]> {
    let found = map.edge_tree.nearest_k(p_hat, 2);
    if found.len() < 2 || found[1].0 > max_dist {
        return None;
    }
    let e1 = *map.edge_tree.point(found[0].1);
    let e2 = *map.edge_tree.point(found[1].1);
    if (e1 - e2).norm() < EDGE_DEGENERACY {
        return None;
    }
    Some([e1, e2])
}

/// The three nearest map planar points, or `None` when fewer than three
/// exist within `max_dist` or the triple is collinear.
pub fn find_plane_correspondence(
    p_hat: &Point3,
    map: &LocalMap,
    max_dist: f64,
) -> Option<[Point3; 3]> {
    let found = map.plane_tree.nearest_k(p_hat, 3);
    if found.len() < 3 || found[2].0 > max_dist {
        return None;
    }
    let s1 = *map.plane_tree.point(found[0].1);
    let s2 = *map.plane_tree.point(found[1].1);
    let s3 = *map.plane_tree.point(found[2].1);
    if (s1 - s2).cross(&(s1 - s3)).norm() < 2.0 * PLANE_DEGENERACY {
        return None;
    }
    Some([s1, s2, s3])
}

/// Point-to-line distance `|(p-e2) x (p-e1)| / |e1-e2|`.
pub fn edge_residual(p_hat: &Point3, e1: &Point3, e2: &Point3) -> Result<f64, OdometryError> {
    let edge = e1 - e2;
    let len = edge.norm();
    if len < EDGE_DEGENERACY {
        return Err(OdometryError::DegenerateEdge);
    }
    Ok((p_hat - e2).cross(&(p_hat - e1)).norm() / len)
}

/// Point-to-plane distance `|(p-s1)^T n|` with `n` the unit normal of the
/// target triangle.
pub fn plane_residual(
    p_hat: &Point3,
    s1: &Point3,
    s2: &Point3,
    s3: &Point3,
) -> Result<f64, OdometryError> {
    let cross = (s1 - s2).cross(&(s1 - s3));
    let norm = cross.norm();
    if norm < PLANE_DEGENERACY {
        return Err(OdometryError::DegeneratePlane);
    }
    Ok((p_hat - s1).dot(&cross).abs() / norm)
}

/// Row Jacobian of the point-to-edge residual w.r.t. the left pose
/// perturbation: `n_p^T * skew((e1-e2)/|e1-e2|) * J_p`.
pub fn edge_jacobian(
    p_hat: &Point3,
    e1: &Point3,
    e2: &Point3,
    j_p: &Matrix3x6<f64>,
) -> Result<RowVector6<f64>, OdometryError> {
    let edge = e1 - e2;
    let len = edge.norm();
    if len < EDGE_DEGENERACY {
        return Err(OdometryError::DegenerateEdge);
    }
    let cross = (p_hat - e2).cross(&(p_hat - e1));
    let cross_norm = cross.norm();
    if cross_norm / len < ON_LINE_EPS {
        return Err(OdometryError::OnLine);
    }
    let n_p = cross / cross_norm;
    Ok(n_p.transpose() * skew(&(edge / len)) * j_p)
}

/// Row Jacobian of the point-to-plane residual:
/// `sign((p-s1)^T n) * n^T * J_p`. In-plane points get the `+` sign.
pub fn plane_jacobian(
    p_hat: &Point3,
    s1: &Point3,
    s2: &Point3,
    s3: &Point3,
    j_p: &Matrix3x6<f64>,
) -> Result<RowVector6<f64>, OdometryError> {
    let cross = (s1 - s2).cross(&(s1 - s3));
    let norm = cross.norm();
    if norm < PLANE_DEGENERACY {
        return Err(OdometryError::DegeneratePlane);
    }
    let n = cross / norm;
    let sign = if (p_hat - s1).dot(&n) < 0.0 { -1.0 } else { 1.0 };
    Ok(sign * n.transpose() * j_p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationCost {
    /// Squared-residual cost at the start of the iteration.
    pub before: f64,
    /// Cost after the accepted (possibly halved) step, same correspondences.
    pub after: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    pub final_cost: f64,
    pub edge_inliers: usize,
    pub plane_inliers: usize,
    /// Set when the problem was degenerate and `t_init` was returned.
    pub low_confidence: bool,
    pub costs: Vec<IterationCost>,
}

fn correspondence_cost(corrs: &[Correspondence], t: &Pose) -> f64 {
    let mut cost = 0.0;
    for c in corrs {
        let r = match c {
            Correspondence::Edge { source, targets } => {
                let p_hat = transform_point(t, source);
                edge_residual(&p_hat, &targets[0], &targets[1]).unwrap_or(0.0)
            }
            Correspondence::Plane { source, targets } => {
                let p_hat = transform_point(t, source);
                plane_residual(&p_hat, &targets[0], &targets[1], &targets[2]).unwrap_or(0.0)
            }
        };
        cost += r * r;
    }
    cost
}

/// Scan-to-map pose estimation.
///
/// Each outer iteration re-associates correspondences at the current pose,
/// assembles the Gauss-Newton normal equations over all valid residuals,
/// and applies one left-update step (with up to five halvings if the step
/// would increase the fixed-correspondence cost). Degenerate problems
/// (too few correspondences or an ill-conditioned normal matrix) return
/// `t_init` with the `low_confidence` flag set.
pub fn estimate_pose(
    features: &FeatureSet,
    map: &LocalMap,
    t_init: &Pose,
    params: &OdometryParams,
) -> (Pose, Diagnostics) {
    let mut t = *t_init;
    let mut diag = Diagnostics::default();
    for _ in 0..params.max_iterations {
        let mut corrs: Vec<Correspondence> = Vec::new();
        let mut edge_inliers = 0usize;
        for source in &features.edges {
            let p_hat = transform_point(&t, source);
            if let Some(targets) = find_edge_correspondence(&p_hat, map, params.max_corr_dist_edge)
            {
                corrs.push(Correspondence::Edge { source: *source, targets });
                edge_inliers += 1;
            }
        }
        let mut plane_inliers = 0usize;
        for source in &features.planars {
            let p_hat = transform_point(&t, source);
            if let Some(targets) =
                find_plane_correspondence(&p_hat, map, params.max_corr_dist_plane)
            {
                corrs.push(Correspondence::Plane { source: *source, targets });
                plane_inliers += 1;
            }
        }
        diag.edge_inliers = edge_inliers;
        diag.plane_inliers = plane_inliers;
        if corrs.len() < params.min_correspondences {
            diag.low_confidence = true;
            return (*t_init, diag);
        }

        let mut h = Matrix6::<f64>::zeros();
        let mut g = Vector6::<f64>::zeros();
        let mut cost_before = 0.0;
        for c in &corrs {
            let (row, r) = match c {
                Correspondence::Edge { source, targets } => {
                    let p_hat = transform_point(&t, source);
                    let j_p = point_jacobian(&t, source);
                    let r = edge_residual(&p_hat, &targets[0], &targets[1]).unwrap_or(0.0);
                    match edge_jacobian(&p_hat, &targets[0], &targets[1], &j_p) {
                        Ok(row) => (row, r),
                        Err(OdometryError::OnLine) => (RowVector6::zeros(), r),
                        Err(_) => continue,
                    }
                }
                Correspondence::Plane { source, targets } => {
                    let p_hat = transform_point(&t, source);
                    let j_p = point_jacobian(&t, source);
                    let r = plane_residual(&p_hat, &targets[0], &targets[1], &targets[2])
                        .unwrap_or(0.0);
                    match plane_jacobian(&p_hat, &targets[0], &targets[1], &targets[2], &j_p) {
                        Ok(row) => (row, r),
                        Err(_) => continue,
                    }
                }
            };
            h += row.transpose() * row;
            g += row.transpose() * r;
            cost_before += r * r;
        }

        let eig = h.symmetric_eigenvalues();
        let (lambda_min, lambda_max) = (eig.min(), eig.max());
        if lambda_min <= 0.0 || lambda_max / lambda_min > params.max_condition {
            diag.low_confidence = true;
            return (*t_init, diag);
        }
        let Some(chol) = h.cholesky() else {
            diag.low_confidence = true;
            return (*t_init, diag);
        };
        let delta = chol.solve(&(-g));

        let mut accepted: Option<(Pose, f64, f64)> = None;
        let mut scale = 1.0;
        for _ in 0..=MAX_STEP_HALVINGS {
            let step: Vector6<f64> = scale * delta;
            let t_try = compose(&exp(&Twist::from_vector(&step)), &t);
            let cost_try = correspondence_cost(&corrs, &t_try);
            if cost_try <= cost_before {
                accepted = Some((t_try, cost_try, Twist::from_vector(&step).norm()));
                break;
            }
            scale *= 0.5;
        }
        let Some((t_new, cost_after, step_norm)) = accepted else {
            // even the smallest step increases the cost: accept the current
            // pose as converged
            diag.final_cost = cost_before;
            return (t, diag);
        };
        t = t_new;
        diag.iterations += 1;
        diag.final_cost = cost_after;
        diag.costs.push(IterationCost { before: cost_before, after: cost_after });
        if step_norm < params.convergence_eps {
            break;
        }
    }
    (t, diag)
}
