//! Grid-based edge/planar feature extraction.
//!
//! A scan is projected onto an `M x N` angular grid, each occupied cell is
//! reduced to its centroid, and a windowed range-difference smoothness
//! score decides whether the centroid is a sharp (edge) or flat (planar)
//! feature.
//!
//! Angle naming note: `alpha = atan(y/x)` is bound to the *vertical*
//! sectors (`M` rows) and `theta = atan(z/x)` to the *horizontal* sectors
//! (`N` columns). In the sensor frame used throughout this crate, x points
//! forward and y is the vertical axis.

use crate::se3::Point3;
use thiserror::Error;

pub type PointCloud = Vec<Point3>;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum FeatureError {
    /// `x == 0` puts the point on the sensor plane; its angles are undefined.
    #[error("point has x = 0, projection angles are undefined")]
    DegeneratePoint,
}

/// Angular and range envelope of the sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// Vertical field-of-view bounds, radians.
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Horizontal field-of-view bounds, radians.
    pub theta_min: f64,
    pub theta_max: f64,
    /// Angular resolutions, radians.
    pub alpha_res: f64,
    pub theta_res: f64,
    /// Usable range interval, meters.
    pub range_min: f64,
    pub range_max: f64,
}

impl SensorSpec {
    /// Small-FoV solid-state sensor defaults: 70 deg x 55 deg FoV,
    /// 0.07 deg resolution, 0.25-9 m range.
    pub fn l515() -> Self {
        let deg = std::f64::consts::PI / 180.0;
        Self {
            alpha_min: -27.5 * deg,
            alpha_max: 27.5 * deg,
            theta_min: -35.0 * deg,
            theta_max: 35.0 * deg,
            alpha_res: 0.07 * deg,
            theta_res: 0.07 * deg,
            range_min: 0.25,
            range_max: 9.0,
        }
    }
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self::l515()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub mean: Point3,
    pub count: u32,
    /// Range interval covered by the cell's points. A wide interval means
    /// the cell straddles a depth discontinuity and its mean lies between
    /// surfaces.
    pub range_min: f64,
    pub range_max: f64,
}

impl Cell {
    pub fn range_spread(&self) -> f64 {
        self.range_max - self.range_min
    }
}

/// Projected scan: per-cell centroids plus (after
/// [`compute_smoothness`]) per-cell smoothness values.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    rows: usize,
    cols: usize,
    cells: Vec<Option<Cell>>,
    smoothness: Vec<Option<f64>>,
}

impl CellGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![None; rows * cols],
            smoothness: vec![None; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, m: usize, n: usize) -> Option<&Cell> {
        self.cells[m * self.cols + n].as_ref()
    }

    pub fn sigma(&self, m: usize, n: usize) -> Option<f64> {
        self.smoothness[m * self.cols + n]
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn total_point_count(&self) -> u64 {
        self.cells
            .iter()
            .flatten()
            .map(|c| u64::from(c.count))
            .sum()
    }

    fn set_cell(&mut self, m: usize, n: usize, cell: Cell) {
        self.cells[m * self.cols + n] = Some(cell);
    }
}

/// Classified feature points of one scan, in the sensor frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub edges: Vec<Point3>,
    pub planars: Vec<Point3>,
    pub frame_index: u64,
    pub timestamp: f64,
}

impl FeatureSet {
    pub fn empty() -> Self {
        Self { edges: Vec::new(), planars: Vec::new(), frame_index: 0, timestamp: 0.0 }
    }
}

/// Drops non-finite points and points outside
/// `[range_min, range_max * (1 - margin)]`. Readings near the maximum
/// detection range carry little reflected energy and are unreliable, hence
/// the margin (default 0.02).
pub fn filter_range(cloud: &[Point3], spec: &SensorSpec, margin: f64) -> PointCloud {
    let hi = spec.range_max * (1.0 - margin);
    cloud
        .iter()
        .filter(|p| {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return false;
            }
            let r = p.norm();
            r >= spec.range_min && r <= hi
        })
        .copied()
        .collect()
}

/// Projection angles of a point: `alpha = atan(y/x)`, `theta = atan(z/x)`.
pub fn compute_angles(p: &Point3) -> Result<(f64, f64), FeatureError> {
    if p.x == 0.0 {
        return Err(FeatureError::DegeneratePoint);
    }
    Ok((p.y.atan2(p.x), p.z.atan2(p.x)))
}

/// Grid dimensions: half of the per-direction point count, capped. The
/// epsilon absorbs float fuzz in ratios that are exact in the reals
/// (70 deg / 0.14 deg must give 500, not 499).
pub fn grid_size(spec: &SensorSpec, cap_rows: usize, cap_cols: usize) -> (usize, usize) {
    let rows = ((spec.alpha_max - spec.alpha_min) / (2.0 * spec.alpha_res) + 1e-9).floor() as usize;
    let cols = ((spec.theta_max - spec.theta_min) / (2.0 * spec.theta_res) + 1e-9).floor() as usize;
    (rows.min(cap_rows), cols.min(cap_cols))
}

/// Assigns each in-FoV point to a cell by equal angular division and
/// reduces every occupied cell to its centroid. Points behind the sensor
/// (`x <= 0`) and points outside the FoV are dropped.
pub fn project_to_grid(cloud: &[Point3], spec: &SensorSpec, rows: usize, cols: usize) -> CellGrid {
    assert!(rows >= 1 && cols >= 1, "grid must have at least one cell");
    let mut sums = vec![(Point3::zeros(), 0u32, f64::INFINITY, f64::NEG_INFINITY); rows * cols];
    let alpha_span = spec.alpha_max - spec.alpha_min;
    let theta_span = spec.theta_max - spec.theta_min;
    for p in cloud {
        if p.x <= 0.0 {
            continue;
        }
        let (alpha, theta) = (p.y.atan2(p.x), p.z.atan2(p.x));
        if alpha < spec.alpha_min
            || alpha > spec.alpha_max
            || theta < spec.theta_min
            || theta > spec.theta_max
        {
            continue;
        }
        let m = (((alpha - spec.alpha_min) / alpha_span * rows as f64) as usize).min(rows - 1);
        let n = (((theta - spec.theta_min) / theta_span * cols as f64) as usize).min(cols - 1);
        let slot = &mut sums[m * cols + n];
        let r = p.norm();
        slot.0 += p;
        slot.1 += 1;
        slot.2 = slot.2.min(r);
        slot.3 = slot.3.max(r);
    }
    let mut grid = CellGrid::new(rows, cols);
    for m in 0..rows {
        for n in 0..cols {
            let (sum, count, range_min, range_max) = sums[m * cols + n];
            if count > 0 {
                grid.set_cell(
                    m,
                    n,
                    Cell { mean: sum / count as f64, count, range_min, range_max },
                );
            }
        }
    }
    grid
}

/// Windowed range-difference smoothness:
/// `sigma(m,n) = sum(|p_ij| - |p_mn|) / lambda^2` over occupied cells in
/// the `(2*lambda+1)^2` window, clipped at the grid border.
///
/// Cells whose clipped window holds fewer than `(2*lambda+1)^2 / 2`
/// occupied neighbors get no smoothness value; this suppresses spurious
/// edges where the window hangs off the FoV border.
pub fn compute_smoothness(mut grid: CellGrid, lambda: usize) -> CellGrid {
    assert!(lambda >= 1, "window radius must be at least 1");
    let min_neighbors = (2 * lambda + 1).pow(2) / 2;
    let inv_l2 = 1.0 / (lambda * lambda) as f64;
    let (rows, cols) = (grid.rows, grid.cols);
    let il = lambda as isize;
    let mut smoothness = vec![None; rows * cols];
    for m in 0..rows {
        for n in 0..cols {
            let Some(center) = grid.cell(m, n) else { continue };
            let center_range = center.mean.norm();
            let mut sum = 0.0;
            let mut occupied = 0usize;
            for i in (m as isize - il).max(0)..=(m as isize + il).min(rows as isize - 1) {
                for j in (n as isize - il).max(0)..=(n as isize + il).min(cols as isize - 1) {
                    if i as usize == m && j as usize == n {
                        continue;
                    }
                    if let Some(c) = grid.cell(i as usize, j as usize) {
                        sum += c.mean.norm() - center_range;
                        occupied += 1;
                    }
                }
            }
            if occupied >= min_neighbors {
                smoothness[m * cols + n] = Some(sum * inv_l2);
            }
        }
    }
    grid.smoothness = smoothness;
    grid
}

/// Threshold-and-sort classification: cells with `sigma >= sigma_edge`
/// (sharpest first) become edge features, cells with
/// `|sigma| <= sigma_plane` (flattest first) become planar features, and
/// everything else is discarded. Each cell yields at most one feature.
///
/// Cells whose own range spread exceeds `max_cell_spread` straddle a depth
/// discontinuity: their centroid floats between the foreground and the
/// background and shifts with parallax, so they yield no feature at all.
pub fn classify_features(
    grid: &CellGrid,
    sigma_edge: f64,
    sigma_plane: f64,
    max_edges: usize,
    max_planars: usize,
    max_cell_spread: f64,
) -> FeatureSet {
    debug_assert!(sigma_plane < sigma_edge);
    let mut edge_cells: Vec<(f64, usize)> = Vec::new();
    let mut plane_cells: Vec<(f64, usize)> = Vec::new();
    for idx in 0..grid.cells.len() {
        let (Some(cell), Some(sigma)) = (&grid.cells[idx], grid.smoothness[idx]) else {
            continue;
        };
        if cell.range_spread() > max_cell_spread {
            continue;
        }
        if sigma >= sigma_edge {
            edge_cells.push((sigma, idx));
        } else if sigma.abs() <= sigma_plane {
            plane_cells.push((sigma.abs(), idx));
        }
    }
    // descending sigma for edges, ascending |sigma| for planars; cell index
    // breaks ties so the output is deterministic
    edge_cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    plane_cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let pick = |cells: &[(f64, usize)], cap: usize| -> Vec<Point3> {
        cells
            .iter()
            .take(cap)
            .map(|&(_, idx)| grid.cells[idx].as_ref().unwrap().mean)
            .collect()
    };
    let edges = pick(&edge_cells, max_edges);
    let planars = pick(&plane_cells, max_planars);
    if edges.len() < 10 || planars.len() < 30 {
        log::warn!(
            target: "features",
            "insufficient features: {} edges, {} planars",
            edges.len(),
            planars.len()
        );
    }
    FeatureSet { edges, planars, frame_index: 0, timestamp: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn square_spec(half_fov_deg: f64) -> SensorSpec {
        let a = half_fov_deg * PI / 180.0;
        SensorSpec {
            alpha_min: -a,
            alpha_max: a,
            theta_min: -a,
            theta_max: a,
            alpha_res: a / 50.0,
            theta_res: a / 50.0,
            range_min: 0.25,
            range_max: 9.0,
        }
    }

    #[test]
    fn filter_range_empty_cloud() {
        assert!(filter_range(&[], &SensorSpec::l515(), 0.02).is_empty());
    }

    #[test]
    fn filter_range_drops_max_range_readings() {
        let spec = SensorSpec::l515();
        let at_max = Point3::new(spec.range_max, 0.0, 0.0);
        assert!(filter_range(&[at_max], &spec, 0.02).is_empty());
    }

    #[test]
    fn filter_range_keeps_mid_range() {
        let spec = SensorSpec::l515();
        let mid = Point3::new((spec.range_min + spec.range_max) / 2.0, 0.0, 0.0);
        assert_eq!(filter_range(&[mid], &spec, 0.02).len(), 1);
    }

    #[test]
    fn filter_range_drops_non_finite() {
        let spec = SensorSpec::l515();
        let cloud = vec![
            Point3::new(f64::NAN, 0.0, 0.0),
            Point3::new(1.0, f64::INFINITY, 0.0),
            Point3::new(1.0, 0.0, 0.0),
        ];
        assert_eq!(filter_range(&cloud, &spec, 0.02).len(), 1);
    }

    #[test]
    fn angles_boresight() {
        assert_eq!(compute_angles(&Point3::new(1.0, 0.0, 0.0)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn angles_45_in_xy() {
        let (a, t) = compute_angles(&Point3::new(1.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(a, FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(t, 0.0);
    }

    #[test]
    fn angles_45_in_xz() {
        let (a, t) = compute_angles(&Point3::new(2.0, 0.0, 2.0)).unwrap();
        assert_eq!(a, 0.0);
        assert_relative_eq!(t, FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn angles_reject_x_zero() {
        assert_eq!(
            compute_angles(&Point3::new(0.0, 1.0, 1.0)),
            Err(FeatureError::DegeneratePoint)
        );
    }

    #[test]
    fn grid_size_rule_and_cap() {
        let spec = SensorSpec::l515();
        // 55 / 0.14 = 392, 70 / 0.14 = 500, both above the cap
        assert_eq!(grid_size(&spec, 200, 200), (200, 200));
        assert_eq!(grid_size(&spec, 1000, 1000), (392, 500));
    }

    #[test]
    fn project_single_center_point() {
        let spec = square_spec(30.0);
        let (rows, cols) = (5usize, 7usize);
        let p = Point3::new(2.0, 0.0, 0.0); // FoV center
        let grid = project_to_grid(&[p], &spec, rows, cols);
        assert_eq!(grid.occupied_count(), 1);
        // ceil(M/2), ceil(N/2) in 1-based indexing for odd M, N
        let (m, n) = (rows / 2, cols / 2);
        let cell = grid.cell(m, n).expect("center cell occupied");
        assert_eq!(cell.count, 1);
        assert_eq!(cell.mean, p);
    }

    #[test]
    fn project_duplicate_points_share_cell() {
        let spec = square_spec(30.0);
        let p = Point3::new(2.0, 0.1, -0.2);
        let grid = project_to_grid(&[p, p], &spec, 9, 9);
        assert_eq!(grid.occupied_count(), 1);
        let (a, t) = compute_angles(&p).unwrap();
        let m = ((a - spec.alpha_min) / (spec.alpha_max - spec.alpha_min) * 9.0) as usize;
        let n = ((t - spec.theta_min) / (spec.theta_max - spec.theta_min) * 9.0) as usize;
        let cell = grid.cell(m, n).unwrap();
        assert_eq!(cell.count, 2);
        assert_relative_eq!(cell.mean, p, epsilon = 1e-15);
    }

    #[test]
    fn project_conserves_in_fov_points() {
        let spec = square_spec(25.0);
        let mut rng = StdRng::seed_from_u64(11);
        let mut cloud = Vec::new();
        let mut in_fov = 0u64;
        for _ in 0..10_000 {
            let p = Point3::new(
                rng.random_range(-1.0..4.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            if p.x > 0.0 {
                let (a, t) = compute_angles(&p).unwrap();
                if a >= spec.alpha_min
                    && a <= spec.alpha_max
                    && t >= spec.theta_min
                    && t <= spec.theta_max
                {
                    in_fov += 1;
                }
            }
            cloud.push(p);
        }
        let grid = project_to_grid(&cloud, &spec, 40, 40);
        assert_eq!(grid.total_point_count(), in_fov);
    }

    /// Builds a grid directly from one point per cell-center direction.
    fn grid_from_ranges(spec: &SensorSpec, rows: usize, cols: usize, ranges: &[Option<f64>]) -> CellGrid {
        assert_eq!(ranges.len(), rows * cols);
        let mut cloud = Vec::new();
        for m in 0..rows {
            for n in 0..cols {
                let Some(r) = ranges[m * cols + n] else { continue };
                let a = spec.alpha_min
                    + (m as f64 + 0.5) / rows as f64 * (spec.alpha_max - spec.alpha_min);
                let t = spec.theta_min
                    + (n as f64 + 0.5) / cols as f64 * (spec.theta_max - spec.theta_min);
                let dir = Point3::new(1.0, a.tan(), t.tan()).normalize();
                cloud.push(dir * r);
            }
        }
        project_to_grid(&cloud, spec, rows, cols)
    }

    #[test]
    fn smoothness_zero_for_constant_range() {
        let spec = square_spec(10.0);
        let ranges = vec![Some(3.0); 25];
        let grid = compute_smoothness(grid_from_ranges(&spec, 5, 5, &ranges), 1);
        let sigma = grid.sigma(2, 2).expect("interior cell has a value");
        assert!(sigma.abs() < 1e-12, "sigma = {sigma}");
    }

    #[test]
    fn smoothness_eight_neighbor_example() {
        // lambda = 1, center at 1 m, all 8 neighbors at 2 m: sigma = 8
        let spec = square_spec(10.0);
        let mut ranges = vec![Some(2.0); 9];
        ranges[4] = Some(1.0);
        let grid = compute_smoothness(grid_from_ranges(&spec, 3, 3, &ranges), 1);
        assert_relative_eq!(grid.sigma(1, 1).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn smoothness_window_clipped_at_border() {
        // corner cell of a fully occupied 3x3 grid: window holds 3 in-bounds
        // neighbors, below the minimum of 4, so no value is assigned; an
        // interior cell of a 5x5 grid keeps its value
        let spec = square_spec(10.0);
        let grid3 = compute_smoothness(grid_from_ranges(&spec, 3, 3, &vec![Some(2.0); 9]), 1);
        assert_eq!(grid3.sigma(0, 0), None);
        assert!(grid3.sigma(1, 1).is_some());

        // border (non-corner) cell has 5 neighbors >= 4 and its sum uses
        // only the in-bounds cells
        let mut ranges = vec![Some(2.0); 9];
        ranges[0] = Some(3.0); // corner neighbor of (0,1)
        let grid = compute_smoothness(grid_from_ranges(&spec, 3, 3, &ranges), 1);
        // neighbors of (0,1): (0,0)=3, (0,2)=2, (1,0)=2, (1,1)=2, (1,2)=2
        assert_relative_eq!(grid.sigma(0, 1).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn smoothness_sparse_window_suppressed() {
        let spec = square_spec(10.0);
        let mut ranges = vec![None; 25];
        ranges[12] = Some(2.0); // lone center
        ranges[11] = Some(2.0);
        let grid = compute_smoothness(grid_from_ranges(&spec, 5, 5, &ranges), 1);
        assert_eq!(grid.sigma(2, 2), None); // 1 neighbor < 4
    }

    #[test]
    fn classify_flat_grid_yields_only_planars() {
        let spec = square_spec(10.0);
        let grid = compute_smoothness(grid_from_ranges(&spec, 5, 5, &vec![Some(3.0); 25]), 1);
        let f = classify_features(&grid, 0.05, 0.01, 10, 6, 0.3);
        assert!(f.edges.is_empty());
        assert_eq!(f.planars.len(), 6); // capped at max_planars
    }

    #[test]
    fn classify_single_sharp_cell() {
        let spec = square_spec(10.0);
        let mut ranges = vec![Some(2.0); 49];
        ranges[3 * 7 + 3] = Some(1.0); // center pops forward: sigma >> 0 there
        let grid = compute_smoothness(grid_from_ranges(&spec, 7, 7, &ranges), 1);
        let f = classify_features(&grid, 0.5, 0.01, 10, 100, 0.3);
        assert_eq!(f.edges.len(), 1);
        let expect = grid.cell(3, 3).unwrap().mean;
        assert_eq!(f.edges[0], expect);
        // the sharp cell's neighbors see a negative-sigma outlier and are
        // neither edge nor plane; everything else stays planar
        assert!(!f.planars.contains(&expect));
    }

    #[test]
    fn classify_skips_depth_straddling_cells() {
        // a cell mixing a 1 m surface and a 3 m surface has a blended mean
        // and must yield no feature, even though its sigma is large
        let spec = square_spec(10.0);
        let mut cloud = Vec::new();
        for m in 0..5 {
            for n in 0..5 {
                let a = spec.alpha_min
                    + (m as f64 + 0.5) / 5.0 * (spec.alpha_max - spec.alpha_min);
                let t = spec.theta_min
                    + (n as f64 + 0.5) / 5.0 * (spec.theta_max - spec.theta_min);
                let dir = Point3::new(1.0, a.tan(), t.tan()).normalize();
                if m == 2 && n == 2 {
                    cloud.push(dir * 1.0);
                    cloud.push(dir * 3.0);
                } else {
                    cloud.push(dir * 3.0);
                }
            }
        }
        let grid = compute_smoothness(project_to_grid(&cloud, &spec, 5, 5), 1);
        let center = grid.cell(2, 2).unwrap();
        assert!(center.range_spread() > 1.9);
        let f = classify_features(&grid, 0.05, 0.01, 10, 100, 0.3);
        assert!(!f.edges.contains(&center.mean));
        assert!(!f.planars.contains(&center.mean));
        // with the guard relaxed the blended cell would have been an edge
        let loose = classify_features(&grid, 0.05, 0.01, 10, 100, 10.0);
        assert!(loose.edges.contains(&center.mean));
    }

    #[test]
    fn classify_is_deterministic() {
        let spec = square_spec(20.0);
        let mut rng = StdRng::seed_from_u64(12);
        let cloud: Vec<Point3> = (0..5000)
            .map(|_| {
                let dir = Point3::new(
                    1.0,
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-0.3..0.3),
                );
                dir.normalize() * rng.random_range(1.0..5.0)
            })
            .collect();
        let run = |cloud: &[Point3]| {
            let grid = compute_smoothness(project_to_grid(cloud, &spec, 20, 20), 2);
            classify_features(&grid, 0.05, 0.01, 150, 400, 0.3)
        };
        assert_eq!(run(&cloud), run(&cloud));
    }

    #[test]
    fn sigma_invariant_under_cell_exact_rotation() {
        // 90 deg roll about the boresight maps (y, z) -> (-z, y); with a
        // square symmetric FoV and M == N the cell lattice maps onto
        // itself: (m, n) -> (M-1-n, m). Ranges are rotation-invariant, so
        // sigma must follow the permutation.
        let spec = square_spec(25.0);
        let (rows, cols) = (15usize, 15usize);
        let mut rng = StdRng::seed_from_u64(13);
        let cloud: Vec<Point3> = (0..4000)
            .map(|_| {
                Point3::new(
                    rng.random_range(1.0..5.0),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                )
            })
            .collect();
        let rotated: Vec<Point3> = cloud
            .iter()
            .map(|p| Point3::new(p.x, -p.z, p.y))
            .collect();
        let g1 = compute_smoothness(project_to_grid(&cloud, &spec, rows, cols), 1);
        let g2 = compute_smoothness(project_to_grid(&rotated, &spec, rows, cols), 1);
        let mut compared = 0;
        for m in 0..rows {
            for n in 0..cols {
                let s1 = g1.sigma(m, n);
                let s2 = g2.sigma(rows - 1 - n, m);
                match (s1, s2) {
                    (Some(a), Some(b)) => {
                        assert!((a - b).abs() < 1e-12, "sigma mismatch at ({m},{n})");
                        compared += 1;
                    }
                    (None, None) => {}
                    _ => panic!("occupancy mismatch at ({m},{n})"),
                }
            }
        }
        assert!(compared > 50, "rotation test compared too few cells");
    }
}
