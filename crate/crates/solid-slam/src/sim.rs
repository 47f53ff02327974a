//! Synthetic solid-state LiDAR simulator and trajectory evaluation.
//!
//! Scenes are unions of axis-aligned boxes and finite axis-aligned
//! rectangles, enough to produce the two feature classes the pipeline
//! consumes (sharp silhouettes/corners and flat walls). Scans are cast on
//! the regular angle lattice of the sensor with seeded Gaussian range
//! noise, so every dataset is bit-reproducible.
//!
//! World frame convention matches the sensor frame at identity: x forward,
//! y up, z lateral.

use crate::config::Config;
use crate::features::PointCloud;
use crate::io::{self, IoFormatError, Trajectory};
use crate::se3::{Point3, Pose};
use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("fewer than {min} associated pose pairs between the trajectories")]
    InsufficientOverlap { min: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The other two axes in cyclic order.
    fn others(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (2, 0),
            Axis::Z => (0, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// Solid axis-aligned box.
    Box { id: String, min: Point3, max: Point3 },
    /// Finite axis-aligned rectangle: fixed `axis` coordinate at `value`,
    /// spanning `b` and `c` on the other two axes in cyclic order.
    Rect { id: String, axis: Axis, value: f64, b: (f64, f64), c: (f64, f64) },
}

const RAY_EPS: f64 = 1e-9;

impl Primitive {
    /// Nearest positive ray parameter, if any.
    fn intersect(&self, origin: &Point3, dir: &Point3) -> Option<f64> {
        match self {
            Primitive::Box { min, max, .. } => {
                let mut t_enter = f64::NEG_INFINITY;
                let mut t_exit = f64::INFINITY;
                for a in 0..3 {
                    if dir[a].abs() < 1e-15 {
                        if origin[a] < min[a] || origin[a] > max[a] {
                            return None;
                        }
                        continue;
                    }
                    let t0 = (min[a] - origin[a]) / dir[a];
                    let t1 = (max[a] - origin[a]) / dir[a];
                    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
                    t_enter = t_enter.max(lo);
                    t_exit = t_exit.min(hi);
                }
                if t_exit < t_enter.max(RAY_EPS) {
                    return None;
                }
                if t_enter > RAY_EPS {
                    Some(t_enter)
                } else if t_exit > RAY_EPS {
                    Some(t_exit)
                } else {
                    None
                }
            }
            Primitive::Rect { axis, value, b, c, .. } => {
                let a = axis.index();
                if dir[a].abs() < 1e-15 {
                    return None;
                }
                let t = (value - origin[a]) / dir[a];
                if t <= RAY_EPS {
                    return None;
                }
                let (bi, ci) = axis.others();
                let pb = origin[bi] + t * dir[bi];
                let pc = origin[ci] + t * dir[ci];
                if pb < b.0 || pb > b.1 || pc < c.0 || pc > c.1 {
                    return None;
                }
                Some(t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        Self { primitives }
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Nearest intersection over all primitives.
    pub fn intersect(&self, origin: &Point3, dir: &Point3) -> Option<f64> {
        self.primitives
            .iter()
            .filter_map(|p| p.intersect(origin, dir))
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// One primitive per line: `box <id> <min xyz> <max xyz>` or
    /// `rect <id> <axis> <value> <bmin> <bmax> <cmin> <cmax>`.
    pub fn parse_str(text: &str, path: &Path) -> Result<Self, IoFormatError> {
        let mut primitives = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parse_f = |tok: &str| -> Result<f64, IoFormatError> {
                tok.parse().map_err(|_| IoFormatError::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    msg: format!("bad number `{tok}`"),
                })
            };
            let bad = |msg: &str| IoFormatError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: msg.to_string(),
            };
            match toks.first().copied() {
                Some("box") => {
                    if toks.len() != 8 {
                        return Err(bad("box expects: id xmin ymin zmin xmax ymax zmax"));
                    }
                    let v: Result<Vec<f64>, _> = toks[2..8].iter().map(|t| parse_f(t)).collect();
                    let v = v?;
                    let (min, max) = (
                        Point3::new(v[0], v[1], v[2]),
                        Point3::new(v[3], v[4], v[5]),
                    );
                    if !(min.x < max.x && min.y < max.y && min.z < max.z) {
                        return Err(bad("box must have positive extent"));
                    }
                    primitives.push(Primitive::Box { id: toks[1].to_string(), min, max });
                }
                Some("rect") => {
                    if toks.len() != 8 {
                        return Err(bad("rect expects: id axis value bmin bmax cmin cmax"));
                    }
                    let axis = match toks[2] {
                        "x" => Axis::X,
                        "y" => Axis::Y,
                        "z" => Axis::Z,
                        other => return Err(bad(&format!("unknown axis `{other}`"))),
                    };
                    let v: Result<Vec<f64>, _> = toks[3..8].iter().map(|t| parse_f(t)).collect();
                    let v = v?;
                    if !(v[1] < v[2] && v[3] < v[4]) {
                        return Err(bad("rect must have positive extent"));
                    }
                    primitives.push(Primitive::Rect {
                        id: toks[1].to_string(),
                        axis,
                        value: v[0],
                        b: (v[1], v[2]),
                        c: (v[3], v[4]),
                    });
                }
                _ => return Err(bad("expected `box` or `rect`")),
            }
        }
        Ok(Self { primitives })
    }

    pub fn load(path: &Path) -> Result<Self, IoFormatError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoFormatError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse_str(&text, path)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for p in &self.primitives {
            match p {
                Primitive::Box { id, min, max } => {
                    out.push_str(&format!(
                        "box {id} {} {} {} {} {} {}\n",
                        min.x, min.y, min.z, max.x, max.y, max.z
                    ));
                }
                Primitive::Rect { id, axis, value, b, c } => {
                    let a = match axis {
                        Axis::X => "x",
                        Axis::Y => "y",
                        Axis::Z => "z",
                    };
                    out.push_str(&format!(
                        "rect {id} {a} {value} {} {} {} {}\n",
                        b.0, b.1, c.0, c.1
                    ));
                }
            }
        }
        out
    }
}

/// Sensor envelope plus lattice density and noise model for simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub sensor: crate::features::SensorSpec,
    pub rays_vertical: usize,
    pub rays_horizontal: usize,
    /// Gaussian range noise, meters (sensor accuracy is about 1.4 cm).
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            sensor: crate::features::SensorSpec::l515(),
            rays_vertical: 96,
            rays_horizontal: 128,
            noise_sigma: 0.014,
            seed: 7,
        }
    }
}

impl ScanSpec {
    /// Pipeline configuration whose grid sizing matches this lattice: the
    /// effective angular resolution is the lattice spacing, which the
    /// half-of-points rule turns into one grid cell per two rays.
    pub fn matching_config(&self) -> Config {
        let mut cfg = Config::default();
        cfg.sensor = self.sensor;
        cfg.sensor.alpha_res =
            (self.sensor.alpha_max - self.sensor.alpha_min) / (self.rays_vertical - 1) as f64;
        cfg.sensor.theta_res =
            (self.sensor.theta_max - self.sensor.theta_min) / (self.rays_horizontal - 1) as f64;
        cfg
    }
}

/// Direction of the lattice ray `(alpha, theta)` in the sensor frame.
fn ray_direction(alpha: f64, theta: f64) -> Point3 {
    Vector3::new(1.0, alpha.tan(), theta.tan()).normalize()
}

/// Casts one scan from `pose`. Rays sweep the regular `(alpha, theta)`
/// lattice; each returns the nearest primitive hit within the range gate,
/// perturbed by seeded Gaussian range noise, in the sensor frame. Missed
/// rays produce no point.
pub fn raycast_scan(scene: &Scene, pose: &Pose, spec: &ScanSpec) -> PointCloud {
    assert!(spec.rays_vertical >= 2 && spec.rays_horizontal >= 2);
    assert!(spec.noise_sigma >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).unwrap())
    } else {
        None
    };
    let s = &spec.sensor;
    let origin = pose.translation;
    let mut cloud = PointCloud::new();
    for i in 0..spec.rays_vertical {
        let alpha = s.alpha_min
            + (s.alpha_max - s.alpha_min) * i as f64 / (spec.rays_vertical - 1) as f64;
        for j in 0..spec.rays_horizontal {
            let theta = s.theta_min
                + (s.theta_max - s.theta_min) * j as f64 / (spec.rays_horizontal - 1) as f64;
            let dir_sensor = ray_direction(alpha, theta);
            let dir_world = pose.rotation * dir_sensor;
            let Some(t) = scene.intersect(&origin, &dir_world) else { continue };
            if t < s.range_min || t > s.range_max {
                continue;
            }
            let range = match &noise {
                Some(n) => t + n.sample(&mut rng),
                None => t,
            };
            cloud.push(dir_sensor * range);
        }
    }
    cloud
}

/// Pose at time `t` interpolated along the waypoints: linear translation,
/// spherical-linear rotation, clamped at the ends.
pub fn interpolate_pose(waypoints: &Trajectory, t: f64) -> Pose {
    assert!(!waypoints.is_empty());
    if t <= waypoints[0].0 {
        return waypoints[0].1;
    }
    if t >= waypoints[waypoints.len() - 1].0 {
        return waypoints[waypoints.len() - 1].1;
    }
    let hi = waypoints.partition_point(|(wt, _)| *wt <= t);
    let (t0, p0) = &waypoints[hi - 1];
    let (t1, p1) = &waypoints[hi];
    let s = (t - t0) / (t1 - t0);
    let translation = p0.translation + s * (p1.translation - p0.translation);
    let q0 = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(p0.rotation));
    let q1 = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(p1.rotation));
    let q = q0.slerp(&q1, s);
    Pose::new(q.to_rotation_matrix().into_inner(), translation)
}

/// Ground-truth sample times: `rate` Hz from the first to the last
/// waypoint, endpoints included.
pub fn sample_times(waypoints: &Trajectory, rate: f64) -> Vec<f64> {
    assert!(rate > 0.0 && !waypoints.is_empty());
    let t0 = waypoints[0].0;
    let t1 = waypoints[waypoints.len() - 1].0;
    let frames = ((t1 - t0) * rate + 1e-9).floor() as usize + 1;
    (0..frames).map(|k| t0 + k as f64 / rate).collect()
}

/// In-memory simulation of a whole sequence: `(cloud, timestamp, pose)`
/// per frame. Per-frame noise streams are derived from the spec seed, so
/// truncating a sequence keeps its prefix identical.
pub fn simulate_frames(
    scene: &Scene,
    waypoints: &Trajectory,
    rate: f64,
    spec: &ScanSpec,
) -> Vec<(PointCloud, f64, Pose)> {
    sample_times(waypoints, rate)
        .into_iter()
        .enumerate()
        .map(|(k, t)| {
            let pose = interpolate_pose(waypoints, t);
            let mut frame_spec = *spec;
            frame_spec.seed = spec.seed.wrapping_add((k as u64).wrapping_mul(0x9E3779B97F4A7C15));
            (raycast_scan(scene, &pose, &frame_spec), t, pose)
        })
        .collect()
}

/// Writes a dataset directory: one zero-padded scan file per interpolated
/// pose plus `groundtruth.txt`. Returns the frame count.
pub fn generate_sequence(
    scene: &Scene,
    waypoints: &Trajectory,
    rate: f64,
    spec: &ScanSpec,
    out_dir: &Path,
) -> Result<usize, IoFormatError> {
    std::fs::create_dir_all(out_dir).map_err(|e| IoFormatError::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let frames = simulate_frames(scene, waypoints, rate, spec);
    let mut truth = Trajectory::new();
    for (k, (cloud, t, pose)) in frames.iter().enumerate() {
        let path = out_dir.join(format!("frame_{k:06}.pcd"));
        io::write_pointcloud(&path, cloud, *t)?;
        truth.push((*t, *pose));
    }
    io::write_trajectory(&truth, &out_dir.join("groundtruth.txt"))?;
    Ok(frames.len())
}

/// Absolute-trajectory-error statistics after rigid alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteReport {
    pub rmse: f64,
    pub max_error: f64,
    pub pairs: usize,
}

/// Timestamp association window for ATE, seconds.
pub const ATE_ASSOCIATION_WINDOW: f64 = 0.010;
const ATE_MIN_PAIRS: usize = 3;

fn associate(estimated: &Trajectory, ground_truth: &Trajectory) -> Vec<(Point3, Point3)> {
    let mut pairs = Vec::new();
    for (t, pose) in estimated {
        let hi = ground_truth.partition_point(|(gt, _)| gt < t);
        let mut best: Option<(f64, usize)> = None;
        for idx in [hi.wrapping_sub(1), hi] {
            if let Some((gt, _)) = ground_truth.get(idx) {
                let dt = (gt - t).abs();
                if best.is_none_or(|(b, _)| dt < b) {
                    best = Some((dt, idx));
                }
            }
        }
        if let Some((dt, idx)) = best {
            if dt <= ATE_ASSOCIATION_WINDOW {
                pairs.push((pose.translation, ground_truth[idx].1.translation));
            }
        }
    }
    pairs
}

/// RMSE of translational residuals after the closed-form rigid alignment
/// (orthogonal Procrustes over the associated translations).
pub fn ate_rmse(estimated: &Trajectory, ground_truth: &Trajectory) -> Result<f64, EvalError> {
    ate_report(estimated, ground_truth).map(|r| r.rmse)
}

pub fn ate_report(
    estimated: &Trajectory,
    ground_truth: &Trajectory,
) -> Result<AteReport, EvalError> {
    let pairs = associate(estimated, ground_truth);
    if pairs.len() < ATE_MIN_PAIRS {
        return Err(EvalError::InsufficientOverlap { min: ATE_MIN_PAIRS });
    }
    let n = pairs.len() as f64;
    let mean_e: Point3 = pairs.iter().map(|(e, _)| e).sum::<Point3>() / n;
    let mean_g: Point3 = pairs.iter().map(|(_, g)| g).sum::<Point3>() / n;
    let mut cross = Matrix3::<f64>::zeros();
    for (e, g) in &pairs {
        cross += (g - mean_g) * (e - mean_e).transpose();
    }
    let svd = cross.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let d = (u * v_t).determinant();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d.signum()));
    let r = u * fix * v_t;
    let t = mean_g - r * mean_e;

    let mut sum_sq = 0.0;
    let mut max_error = 0.0f64;
    for (e, g) in &pairs {
        let err = (r * e + t - g).norm();
        sum_sq += err * err;
        max_error = max_error.max(err);
    }
    Ok(AteReport {
        rmse: (sum_sq / n).sqrt(),
        max_error,
        pairs: pairs.len(),
    })
}

fn heading_pose(position: Point3, heading: f64) -> Pose {
    // sensor x -> horizontal forward direction, sensor y -> world up
    let f = Vector3::new(heading.cos(), 0.0, heading.sin());
    let u = Vector3::new(0.0, 1.0, 0.0);
    let rotation = Matrix3::from_columns(&[f, u, f.cross(&u)]);
    Pose::new(rotation, position)
}

/// Default experiment scene: a 4 m x 4 m x 2.5 m room with two
/// box-shaped machines on the floor, flanking a free central corridor.
///
/// The walls carry a few fixtures (door frame, cabinet, shelf, junction
/// box). Perfectly bare walls would leave the lateral direction
/// unobservable whenever the whole FoV sees a single face-on wall, which
/// no range-only method can recover from.
pub fn default_room_scene() -> Scene {
    let mut p = vec![
        Primitive::Rect { id: "wall_east".into(), axis: Axis::X, value: 2.0, b: (0.0, 2.5), c: (-2.0, 2.0) },
        Primitive::Rect { id: "wall_west".into(), axis: Axis::X, value: -2.0, b: (0.0, 2.5), c: (-2.0, 2.0) },
        Primitive::Rect { id: "floor".into(), axis: Axis::Y, value: 0.0, b: (-2.0, 2.0), c: (-2.0, 2.0) },
        Primitive::Rect { id: "ceiling".into(), axis: Axis::Y, value: 2.5, b: (-2.0, 2.0), c: (-2.0, 2.0) },
        Primitive::Rect { id: "wall_north".into(), axis: Axis::Z, value: 2.0, b: (-2.0, 2.0), c: (0.0, 2.5) },
        Primitive::Rect { id: "wall_south".into(), axis: Axis::Z, value: -2.0, b: (-2.0, 2.0), c: (0.0, 2.5) },
    ];
    p.extend(machine_boxes(Point3::zeros()));
    p.extend(wall_fixtures(2.0, 2.0));
    Scene::new(p)
}

/// Wall-mounted clutter for a room with half-extents `hx`, `hz`.
fn wall_fixtures(hx: f64, hz: f64) -> Vec<Primitive> {
    vec![
        // door frame on the south wall: two vertical jambs
        Primitive::Box {
            id: "door_jamb_l".into(),
            min: Point3::new(-0.425, 0.0, -hz),
            max: Point3::new(-0.325, 2.1, -hz + 0.09),
        },
        Primitive::Box {
            id: "door_jamb_r".into(),
            min: Point3::new(0.475, 0.0, -hz),
            max: Point3::new(0.575, 2.1, -hz + 0.09),
        },
        // cabinet against the east wall
        Primitive::Box {
            id: "cabinet".into(),
            min: Point3::new(hx - 0.24, 0.0, 0.825),
            max: Point3::new(hx, 1.62, 1.425),
        },
        // shelf high on the north wall
        Primitive::Box {
            id: "shelf".into(),
            min: Point3::new(-1.575, 1.3, hz - 0.21),
            max: Point3::new(-0.725, 1.62, hz),
        },
        // junction box on the west wall
        Primitive::Box {
            id: "junction_box".into(),
            min: Point3::new(-hx, 0.825, -1.375),
            max: Point3::new(-hx + 0.14, 1.275, -0.975),
        },
    ]
}

/// The two machine boxes (1.15 x 1.85 and 1.16 x 1.95 footprints, 1.2 m
/// tall), offset by `shift`. Faces sit on multiples of 0.025 m so they
/// align with 0.05 m leaf centers.
fn machine_boxes(shift: Point3) -> Vec<Primitive> {
    vec![
        Primitive::Box {
            id: "machine_a".into(),
            min: Point3::new(-1.775, 0.0, -0.925) + shift,
            max: Point3::new(-0.625, 1.2, 0.925) + shift,
        },
        Primitive::Box {
            id: "machine_b".into(),
            min: Point3::new(0.625, 0.0, -0.975) + shift,
            max: Point3::new(1.785, 1.2, 0.975) + shift,
        },
    ]
}

/// Larger room for the mapping experiment, leaving an aisle wide enough to
/// orbit the machines and observe every face.
pub fn mapping_scene() -> Scene {
    let mut p = vec![
        Primitive::Rect { id: "wall_east".into(), axis: Axis::X, value: 3.2, b: (0.0, 2.5), c: (-3.2, 3.2) },
        Primitive::Rect { id: "wall_west".into(), axis: Axis::X, value: -3.2, b: (0.0, 2.5), c: (-3.2, 3.2) },
        Primitive::Rect { id: "floor".into(), axis: Axis::Y, value: 0.0, b: (-3.2, 3.2), c: (-3.2, 3.2) },
        Primitive::Rect { id: "ceiling".into(), axis: Axis::Y, value: 2.5, b: (-3.2, 3.2), c: (-3.2, 3.2) },
        Primitive::Rect { id: "wall_north".into(), axis: Axis::Z, value: 3.2, b: (-3.2, 3.2), c: (0.0, 2.5) },
        Primitive::Rect { id: "wall_south".into(), axis: Axis::Z, value: -3.2, b: (-3.2, 3.2), c: (0.0, 2.5) },
    ];
    p.extend(machine_boxes(Point3::zeros()));
    p.extend(wall_fixtures(3.2, 3.2));
    Scene::new(p)
}

/// 10-second ellipse loop through the free corridor of the default room.
/// The heading sweeps one full turn at a constant rate (36 deg/s), which
/// keeps the per-frame rotation bounded; a true tangent heading would
/// spike past 100 deg/s at the ellipse ends. 300 frames at 30 Hz.
pub fn room_loop_trajectory() -> Trajectory {
    let duration = 299.0 / 30.0;
    let waypoints = 24usize;
    let (rx, rz) = (0.32, 1.0);
    let height = 1.3;
    let mut traj = Trajectory::new();
    for k in 0..=waypoints {
        let t = duration * k as f64 / waypoints as f64;
        let phase = 2.0 * std::f64::consts::PI * k as f64 / waypoints as f64;
        let position = Point3::new(rx * phase.cos(), height, rz * phase.sin());
        let heading = phase + std::f64::consts::FRAC_PI_2;
        traj.push((t, heading_pose(position, heading)));
    }
    traj
}

/// 12-second orbit around both machines in the mapping scene, always
/// facing the room center so every box face is observed.
pub fn orbit_trajectory() -> Trajectory {
    let duration = 12.0;
    let waypoints = 36usize;
    let (rx, rz) = (2.45, 1.75);
    let height = 1.0;
    let mut traj = Trajectory::new();
    for k in 0..=waypoints {
        let t = duration * k as f64 / waypoints as f64;
        let phase = 2.0 * std::f64::consts::PI * k as f64 / waypoints as f64;
        let position = Point3::new(rx * phase.cos(), height, rz * phase.sin());
        // face the room center
        let inward = -position + Point3::new(0.0, height, 0.0);
        let heading = inward.z.atan2(inward.x);
        traj.push((t, heading_pose(position, heading)));
    }
    traj
}

/// Stationary-position random yaw excursion that returns to the start
/// orientation, mirrored around its midpoint. At least one segment runs at
/// the peak angular rate of 1.57 rad/s.
pub fn rotation_trajectory(seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segment_dt = 0.25;
    let half_segments = 12usize;
    let peak_rate = 1.57;
    let peak_at = rng.random_range(0..half_segments);
    let mut yaw = vec![0.0f64];
    for k in 0..half_segments {
        let rate = if k == peak_at {
            peak_rate
        } else {
            rng.random_range(0.5 * peak_rate..peak_rate)
        };
        let dir: f64 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut next = yaw[yaw.len() - 1] + dir * rate * segment_dt;
        // reflect off the excursion bound to keep the room in view
        if next.abs() > 1.2 {
            next = yaw[yaw.len() - 1] - dir * rate * segment_dt;
        }
        yaw.push(next);
    }
    // mirror back to zero
    for k in (0..half_segments).rev() {
        yaw.push(yaw[k]);
    }
    let position = Point3::new(0.0, 1.0, 0.0);
    yaw.iter()
        .enumerate()
        .map(|(k, &psi)| (k as f64 * segment_dt, heading_pose(position, psi)))
        .collect()
}
