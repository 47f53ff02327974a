//! Runtime configuration: plain-text `key = value` lines under
//! `[section]` headers. Unknown sections or keys are rejected, absent keys
//! fall back to the defaults below, and every value is validated against
//! the preconditions of the module that consumes it.
//!
//! Angles are stored in radians so that serialize/parse round-trips are
//! exact.

use crate::features::{grid_size, SensorSpec};
use crate::mapping::{KeyframePolicy, SensorModel};
use crate::odometry::OdometryParams;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(key: &str, reason: &str) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), reason: reason.to_string() }
}

/// Feature-extraction knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionParams {
    /// Smoothness window radius, in cells.
    pub lambda: usize,
    /// Smoothness at or above which a cell becomes an edge feature, meters.
    pub sigma_edge: f64,
    /// Absolute smoothness at or below which a cell is planar, meters.
    pub sigma_plane: f64,
    pub max_edges: usize,
    pub max_planars: usize,
    /// Caps on the grid dimensions, protecting the frame budget.
    pub max_grid_rows: usize,
    pub max_grid_cols: usize,
    /// Fraction of the maximum range treated as unreliable.
    pub range_margin: f64,
    /// Cells covering a wider range interval than this straddle a depth
    /// discontinuity and yield no feature, meters.
    pub max_cell_spread: f64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            lambda: 2,
            sigma_edge: 0.05,
            sigma_plane: 0.01,
            max_edges: 150,
            max_planars: 400,
            max_grid_rows: 200,
            max_grid_cols: 200,
            range_margin: 0.02,
            max_cell_spread: 0.3,
        }
    }
}

/// Occupancy-map knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingParams {
    pub resolution: f64,
    pub model: SensorModel,
    pub p_min: f64,
    pub p_max: f64,
    pub prior: f64,
    pub keyframe: KeyframePolicy,
    pub occupancy_threshold: f64,
}

impl Default for MappingParams {
    fn default() -> Self {
        Self {
            resolution: 0.05,
            model: SensorModel::default(),
            p_min: 0.12,
            p_max: 0.97,
            prior: 0.5,
            keyframe: KeyframePolicy::default(),
            occupancy_threshold: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub sensor: SensorSpec,
    pub extraction: ExtractionParams,
    pub odometry: OdometryParams,
    pub mapping: MappingParams,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(ConfigError::Parse {
                        line: line_no,
                        msg: format!("malformed section header `{line}`"),
                    });
                };
                section = name.trim().to_string();
                if !matches!(section.as_str(), "sensor" | "extraction" | "odometry" | "mapping") {
                    return Err(invalid(&section, "unknown section"));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let qualified = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        let float = || -> Result<f64, ConfigError> {
            value.parse().map_err(|_| ConfigError::Parse {
                line,
                msg: format!("`{qualified}` expects a number, got `{value}`"),
            })
        };
        let count = || -> Result<usize, ConfigError> {
            value.parse().map_err(|_| ConfigError::Parse {
                line,
                msg: format!("`{qualified}` expects a non-negative integer, got `{value}`"),
            })
        };
        match (section, key) {
            ("sensor", "alpha_min") => self.sensor.alpha_min = float()?,
            ("sensor", "alpha_max") => self.sensor.alpha_max = float()?,
            ("sensor", "theta_min") => self.sensor.theta_min = float()?,
            ("sensor", "theta_max") => self.sensor.theta_max = float()?,
            ("sensor", "alpha_res") => self.sensor.alpha_res = float()?,
            ("sensor", "theta_res") => self.sensor.theta_res = float()?,
            ("sensor", "range_min") => self.sensor.range_min = float()?,
            ("sensor", "range_max") => self.sensor.range_max = float()?,
            ("extraction", "lambda") => self.extraction.lambda = count()?,
            ("extraction", "sigma_edge") => self.extraction.sigma_edge = float()?,
            ("extraction", "sigma_plane") => self.extraction.sigma_plane = float()?,
            ("extraction", "max_edges") => self.extraction.max_edges = count()?,
            ("extraction", "max_planars") => self.extraction.max_planars = count()?,
            ("extraction", "max_grid_rows") => self.extraction.max_grid_rows = count()?,
            ("extraction", "max_grid_cols") => self.extraction.max_grid_cols = count()?,
            ("extraction", "range_margin") => self.extraction.range_margin = float()?,
            ("extraction", "max_cell_spread") => self.extraction.max_cell_spread = float()?,
            ("odometry", "window_frames") => self.odometry.window_frames = count()?,
            ("odometry", "max_corr_dist_edge") => self.odometry.max_corr_dist_edge = float()?,
            ("odometry", "max_corr_dist_plane") => self.odometry.max_corr_dist_plane = float()?,
            ("odometry", "convergence_eps") => self.odometry.convergence_eps = float()?,
            ("odometry", "max_iterations") => self.odometry.max_iterations = count()?,
            ("odometry", "voxel_edge") => self.odometry.voxel_edge = float()?,
            ("odometry", "voxel_plane") => self.odometry.voxel_plane = float()?,
            ("odometry", "min_correspondences") => {
                self.odometry.min_correspondences = count()?
            }
            ("odometry", "max_condition") => self.odometry.max_condition = float()?,
            ("mapping", "resolution") => self.mapping.resolution = float()?,
            ("mapping", "p_hit") => self.mapping.model.p_hit = float()?,
            ("mapping", "p_miss") => self.mapping.model.p_miss = float()?,
            ("mapping", "p_min") => self.mapping.p_min = float()?,
            ("mapping", "p_max") => self.mapping.p_max = float()?,
            ("mapping", "prior") => self.mapping.prior = float()?,
            ("mapping", "keyframe_min_translation") => {
                self.mapping.keyframe.min_translation = float()?
            }
            ("mapping", "keyframe_min_rotation") => {
                self.mapping.keyframe.min_rotation = float()?
            }
            ("mapping", "keyframe_max_interval") => {
                self.mapping.keyframe.max_interval = float()?
            }
            ("mapping", "occupancy_threshold") => {
                self.mapping.occupancy_threshold = float()?
            }
            _ => return Err(invalid(&qualified, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.sensor;
        if !(s.alpha_min < s.alpha_max) {
            return Err(invalid("sensor.alpha_min", "alpha_min must be below alpha_max"));
        }
        if !(s.theta_min < s.theta_max) {
            return Err(invalid("sensor.theta_min", "theta_min must be below theta_max"));
        }
        if !(s.alpha_res > 0.0) || !(s.theta_res > 0.0) {
            return Err(invalid("sensor.alpha_res", "angular resolutions must be positive"));
        }
        if !(s.range_min > 0.0 && s.range_min < s.range_max) {
            return Err(invalid("sensor.range_min", "need 0 < range_min < range_max"));
        }
        let e = &self.extraction;
        let (rows, cols) = grid_size(s, e.max_grid_rows, e.max_grid_cols);
        if rows < 1 || cols < 1 {
            return Err(invalid("sensor.alpha_res", "resolution too coarse for any grid cell"));
        }
        if e.lambda < 1 {
            return Err(invalid("extraction.lambda", "window radius must be at least 1"));
        }
        if !(e.sigma_plane >= 0.0 && e.sigma_plane < e.sigma_edge) {
            return Err(invalid("extraction.sigma_plane", "need 0 <= sigma_plane < sigma_edge"));
        }
        if e.max_edges < 1 || e.max_planars < 1 {
            return Err(invalid("extraction.max_edges", "feature caps must be positive"));
        }
        if e.max_grid_rows < 1 || e.max_grid_cols < 1 {
            return Err(invalid("extraction.max_grid_rows", "grid caps must be positive"));
        }
        if !(e.range_margin >= 0.0 && e.range_margin < 1.0) {
            return Err(invalid("extraction.range_margin", "margin must be in [0, 1)"));
        }
        if !(e.max_cell_spread > 0.0) {
            return Err(invalid("extraction.max_cell_spread", "must be positive"));
        }
        let o = &self.odometry;
        if o.window_frames < 1 {
            return Err(invalid("odometry.window_frames", "window must hold at least one frame"));
        }
        if !(o.max_corr_dist_edge > 0.0) || !(o.max_corr_dist_plane > 0.0) {
            return Err(invalid("odometry.max_corr_dist_edge", "gating distances must be positive"));
        }
        if !(o.convergence_eps > 0.0) {
            return Err(invalid("odometry.convergence_eps", "must be positive"));
        }
        if o.max_iterations < 1 {
            return Err(invalid("odometry.max_iterations", "must run at least one iteration"));
        }
        if o.voxel_edge < 0.0 || o.voxel_plane < 0.0 {
            return Err(invalid("odometry.voxel_edge", "voxel sizes cannot be negative"));
        }
        if o.min_correspondences < 1 {
            return Err(invalid("odometry.min_correspondences", "must be positive"));
        }
        if !(o.max_condition > 1.0) {
            return Err(invalid("odometry.max_condition", "must exceed 1"));
        }
        let m = &self.mapping;
        if !(m.resolution > 0.0) {
            return Err(invalid("mapping.resolution", "must be positive"));
        }
        for (key, v) in [("mapping.p_hit", m.model.p_hit), ("mapping.p_miss", m.model.p_miss)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(key, "probabilities must lie in (0, 1)"));
            }
        }
        if !(0.0 < m.p_min && m.p_min < m.prior && m.prior < m.p_max && m.p_max < 1.0) {
            return Err(invalid("mapping.p_min", "need 0 < p_min < prior < p_max < 1"));
        }
        let k = &m.keyframe;
        if !(k.min_translation > 0.0 && k.min_rotation > 0.0 && k.max_interval > 0.0) {
            return Err(invalid("mapping.keyframe_min_translation", "keyframe thresholds must be positive"));
        }
        if !(m.occupancy_threshold > 0.0 && m.occupancy_threshold < 1.0) {
            return Err(invalid("mapping.occupancy_threshold", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Canonical text form; `parse_str(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let s = &self.sensor;
        let _ = writeln!(out, "[sensor]");
        let _ = writeln!(out, "alpha_min = {}", s.alpha_min);
        let _ = writeln!(out, "alpha_max = {}", s.alpha_max);
        let _ = writeln!(out, "theta_min = {}", s.theta_min);
        let _ = writeln!(out, "theta_max = {}", s.theta_max);
        let _ = writeln!(out, "alpha_res = {}", s.alpha_res);
        let _ = writeln!(out, "theta_res = {}", s.theta_res);
        let _ = writeln!(out, "range_min = {}", s.range_min);
        let _ = writeln!(out, "range_max = {}", s.range_max);
        let e = &self.extraction;
        let _ = writeln!(out, "\n[extraction]");
        let _ = writeln!(out, "lambda = {}", e.lambda);
        let _ = writeln!(out, "sigma_edge = {}", e.sigma_edge);
        let _ = writeln!(out, "sigma_plane = {}", e.sigma_plane);
        let _ = writeln!(out, "max_edges = {}", e.max_edges);
        let _ = writeln!(out, "max_planars = {}", e.max_planars);
        let _ = writeln!(out, "max_grid_rows = {}", e.max_grid_rows);
        let _ = writeln!(out, "max_grid_cols = {}", e.max_grid_cols);
        let _ = writeln!(out, "range_margin = {}", e.range_margin);
        let _ = writeln!(out, "max_cell_spread = {}", e.max_cell_spread);
        let o = &self.odometry;
        let _ = writeln!(out, "\n[odometry]");
        let _ = writeln!(out, "window_frames = {}", o.window_frames);
        let _ = writeln!(out, "max_corr_dist_edge = {}", o.max_corr_dist_edge);
        let _ = writeln!(out, "max_corr_dist_plane = {}", o.max_corr_dist_plane);
        let _ = writeln!(out, "convergence_eps = {}", o.convergence_eps);
        let _ = writeln!(out, "max_iterations = {}", o.max_iterations);
        let _ = writeln!(out, "voxel_edge = {}", o.voxel_edge);
        let _ = writeln!(out, "voxel_plane = {}", o.voxel_plane);
        let _ = writeln!(out, "min_correspondences = {}", o.min_correspondences);
        let _ = writeln!(out, "max_condition = {}", o.max_condition);
        let m = &self.mapping;
        let _ = writeln!(out, "\n[mapping]");
        let _ = writeln!(out, "resolution = {}", m.resolution);
        let _ = writeln!(out, "p_hit = {}", m.model.p_hit);
        let _ = writeln!(out, "p_miss = {}", m.model.p_miss);
        let _ = writeln!(out, "p_min = {}", m.p_min);
        let _ = writeln!(out, "p_max = {}", m.p_max);
        let _ = writeln!(out, "prior = {}", m.prior);
        let _ = writeln!(out, "keyframe_min_translation = {}", m.keyframe.min_translation);
        let _ = writeln!(out, "keyframe_min_rotation = {}", m.keyframe.min_rotation);
        let _ = writeln!(out, "keyframe_max_interval = {}", m.keyframe.max_interval);
        let _ = writeln!(out, "occupancy_threshold = {}", m.occupancy_threshold);
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.serialize())?;
        Ok(())
    }
}
