//! Solid-state LiDAR SLAM toolkit.
//!
//! Small-FoV solid-state range sensors update fast and resolve finely but
//! cover only a narrow pyramid, which makes classical scan-line feature
//! extraction and scan-to-scan matching fragile under rotation. This crate
//! implements a three-stage pipeline tuned for that regime:
//!
//! 1. [`features`] — scans are projected onto an angular grid, cells are
//!    reduced to centroids, and a windowed range-difference smoothness
//!    splits them into edge and planar features.
//! 2. [`odometry`] — features register against a sliding-window local map
//!    by Gauss-Newton over point-to-edge and point-to-plane distances,
//!    with analytic left-perturbation Jacobians on SE(3).
//! 3. [`mapping`] — keyframes fuse into a probabilistic occupancy octree
//!    with log-odds updates and free-space carving.
//!
//! The [`sim`] module provides a deterministic synthetic scanner and
//! ground-truth trajectories so the whole pipeline can be validated
//! without hardware, and [`pipeline`] wires the stages together for the
//! command-line driver.

pub mod config;
pub mod features;
pub mod io;
pub mod kdtree;
pub mod mapping;
pub mod odometry;
pub mod pipeline;
pub mod se3;
pub mod sim;

pub use config::Config;
pub use features::{FeatureSet, PointCloud, SensorSpec};
pub use io::Trajectory;
pub use mapping::OccupancyOctree;
pub use odometry::LocalMap;
pub use pipeline::{RunReport, SlamPipeline};
pub use se3::{Point3, Pose, Twist};
