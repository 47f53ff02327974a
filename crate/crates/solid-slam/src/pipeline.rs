//! Per-frame pipeline: range filter, grid features, scan-to-map pose,
//! keyframe-gated map integration.

use crate::config::Config;
use crate::features::{
    classify_features, compute_smoothness, filter_range, grid_size, project_to_grid,
};
use crate::io::Trajectory;
use crate::mapping::{is_keyframe, OccupancyOctree};
use crate::odometry::{estimate_pose, predict_initial_pose, LocalMap};
use crate::se3::{compose, inverse, Point3, Pose};
use std::time::Instant;

/// Per-frame processing summary, also emitted as one structured log line.
#[derive(Debug, Clone)]
pub struct FrameSummary {
    pub frame_index: u64,
    pub timestamp: f64,
    pub pose: Pose,
    pub latency_ms: f64,
    pub keyframe: bool,
    pub low_confidence: bool,
    pub iterations: usize,
    pub cost: f64,
    pub edge_inliers: usize,
    pub plane_inliers: usize,
    pub edge_features: usize,
    pub planar_features: usize,
}

/// Aggregate statistics of a finished run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub frames: usize,
    pub mean_latency_ms: f64,
    pub max_latency_ms: f64,
    pub keyframes: usize,
    pub low_confidence_frames: usize,
}

/// Everything a run produces.
pub struct PipelineOutput {
    pub trajectory: Trajectory,
    pub octree: OccupancyOctree,
    pub stats: RunStats,
}

/// Full run report in `key = value` form.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub stats: RunStats,
    pub trajectory_path: String,
    pub map_path: String,
    pub ate_rmse: Option<f64>,
}

impl RunReport {
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("frames = {}\n", self.stats.frames));
        out.push_str(&format!("mean_latency_ms = {:.3}\n", self.stats.mean_latency_ms));
        out.push_str(&format!("max_latency_ms = {:.3}\n", self.stats.max_latency_ms));
        out.push_str(&format!("keyframes = {}\n", self.stats.keyframes));
        out.push_str(&format!(
            "low_confidence_frames = {}\n",
            self.stats.low_confidence_frames
        ));
        out.push_str(&format!("trajectory = {}\n", self.trajectory_path));
        out.push_str(&format!("map = {}\n", self.map_path));
        if let Some(ate) = self.ate_rmse {
            out.push_str(&format!("ate_rmse = {ate:.6}\n"));
        }
        out
    }
}

pub struct SlamPipeline {
    config: Config,
    grid_dims: (usize, usize),
    map: LocalMap,
    octree: OccupancyOctree,
    trajectory: Trajectory,
    prev_pose: Option<Pose>,
    prev_prev_pose: Option<Pose>,
    last_keyframe: Option<(Pose, f64)>,
    frame_index: u64,
    keyframes: usize,
    low_confidence_frames: usize,
    latency_sum_ms: f64,
    latency_max_ms: f64,
}

impl SlamPipeline {
    pub fn new(config: Config) -> Self {
        let grid_dims = grid_size(
            &config.sensor,
            config.extraction.max_grid_rows,
            config.extraction.max_grid_cols,
        );
        let octree = OccupancyOctree::new(
            config.mapping.resolution,
            config.mapping.prior,
            config.mapping.p_min,
            config.mapping.p_max,
        );
        Self {
            grid_dims,
            map: LocalMap::new(&config.odometry),
            octree,
            trajectory: Trajectory::new(),
            prev_pose: None,
            prev_prev_pose: None,
            last_keyframe: None,
            frame_index: 0,
            keyframes: 0,
            low_confidence_frames: 0,
            latency_sum_ms: 0.0,
            latency_max_ms: 0.0,
            config,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Processes one scan (sensor frame) and returns its summary.
    pub fn process_frame(&mut self, cloud: &[Point3], timestamp: f64) -> FrameSummary {
        let start = Instant::now();
        let e = &self.config.extraction;
        let filtered = filter_range(cloud, &self.config.sensor, e.range_margin);
        let grid = project_to_grid(&filtered, &self.config.sensor, self.grid_dims.0, self.grid_dims.1);
        let grid = compute_smoothness(grid, e.lambda);
        let mut features = classify_features(
            &grid,
            e.sigma_edge,
            e.sigma_plane,
            e.max_edges,
            e.max_planars,
            e.max_cell_spread,
        );
        features.frame_index = self.frame_index;
        features.timestamp = timestamp;

        let (pose, diag) = if self.map.is_empty() {
            // first frame: the identity pose seeds the map
            (Pose::identity(), Default::default())
        } else {
            let t_init = match (&self.prev_pose, &self.prev_prev_pose) {
                (Some(p1), Some(p2)) => predict_initial_pose(p1, p2),
                (Some(p1), None) => *p1,
                _ => Pose::identity(),
            };
            estimate_pose(&features, &self.map, &t_init, &self.config.odometry)
        };
        self.map.insert_frame(&features, &pose);

        let keyframe = match &self.last_keyframe {
            None => true,
            Some((kf_pose, kf_time)) => {
                let delta = compose(&inverse(kf_pose), &pose);
                is_keyframe(&delta, timestamp - kf_time, &self.config.mapping.keyframe)
            }
        };
        if keyframe {
            self.octree
                .integrate_scan(&filtered, &pose, &self.config.mapping.model);
            self.last_keyframe = Some((pose, timestamp));
            self.keyframes += 1;
        }

        self.trajectory.push((timestamp, pose));
        self.prev_prev_pose = self.prev_pose;
        self.prev_pose = Some(pose);
        if diag.low_confidence {
            self.low_confidence_frames += 1;
        }
        let latency_ms = start.elapsed().as_secs_f64() * 1e3;
        self.latency_sum_ms += latency_ms;
        self.latency_max_ms = self.latency_max_ms.max(latency_ms);
        let summary = FrameSummary {
            frame_index: self.frame_index,
            timestamp,
            pose,
            latency_ms,
            keyframe,
            low_confidence: diag.low_confidence,
            iterations: diag.iterations,
            cost: diag.final_cost,
            edge_inliers: diag.edge_inliers,
            plane_inliers: diag.plane_inliers,
            edge_features: features.edges.len(),
            planar_features: features.planars.len(),
        };
        log::info!(
            target: "odometry",
            "frame={} iters={} cost={:.6e} edges={} planes={} keyframe={} low_conf={} elapsed_ms={:.2}",
            summary.frame_index,
            summary.iterations,
            summary.cost,
            summary.edge_inliers,
            summary.plane_inliers,
            summary.keyframe,
            summary.low_confidence,
            summary.latency_ms,
        );
        self.frame_index += 1;
        summary
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn octree(&self) -> &OccupancyOctree {
        &self.octree
    }

    pub fn finish(self) -> PipelineOutput {
        let frames = self.frame_index as usize;
        let stats = RunStats {
            frames,
            mean_latency_ms: if frames > 0 { self.latency_sum_ms / frames as f64 } else { 0.0 },
            max_latency_ms: self.latency_max_ms,
            keyframes: self.keyframes,
            low_confidence_frames: self.low_confidence_frames,
        };
        PipelineOutput { trajectory: self.trajectory, octree: self.octree, stats }
    }
}
