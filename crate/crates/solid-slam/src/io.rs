//! Dataset and trajectory file I/O.
//!
//! Scan files are ASCII PCD-style: optional `#` comment lines (a leading
//! `# timestamp <seconds>` carries the frame time), a header with at least
//! `FIELDS x y z` and `POINTS n`, an optional `DATA ascii` marker, then
//! `n` lines of three decimal numbers. Trajectories use one
//! `timestamp tx ty tz qx qy qz qw` line per pose (unit quaternion,
//! w-last, nine significant digits).

use crate::features::PointCloud;
use crate::se3::{Point3, Pose};
use nalgebra::{Quaternion, Rotation3, UnitQuaternion};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub type Trajectory = Vec<(f64, Pose)>;

#[derive(Debug, Error)]
pub enum IoFormatError {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}: missing or incomplete header (need FIELDS x y z and POINTS)")]
    MissingHeader { path: String },
    #[error("dataset directory {0} contains no scan files")]
    EmptyDataset(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn io_err(path: &Path, source: std::io::Error) -> IoFormatError {
    IoFormatError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IoFormatError {
    IoFormatError::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

/// A parsed scan file.
#[derive(Debug, Clone)]
pub struct ScanFile {
    pub cloud: PointCloud,
    pub timestamp: f64,
    /// Number of non-finite data lines that were skipped.
    pub skipped: usize,
}

/// Reads an ASCII scan file. Lines whose coordinates are not all finite
/// are skipped and counted in [`ScanFile::skipped`].
pub fn read_pointcloud(path: &Path) -> Result<ScanFile, IoFormatError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);

    let mut timestamp = 0.0f64;
    let mut fields_ok = false;
    let mut points: Option<usize> = None;
    let mut in_data = false;
    let mut cloud = PointCloud::new();
    let mut skipped = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut toks = rest.split_whitespace();
            if toks.next() == Some("timestamp") {
                if let Some(t) = toks.next().and_then(|t| t.parse::<f64>().ok()) {
                    timestamp = t;
                }
            }
            continue;
        }
        if !in_data {
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap_or("");
            let is_header_key =
                !key.is_empty() && key.chars().all(|c| c.is_ascii_uppercase());
            if is_header_key {
                match key {
                    "FIELDS" => {
                        let fields: Vec<&str> = toks.collect();
                        if fields != ["x", "y", "z"] {
                            return Err(parse_err(
                                path,
                                idx + 1,
                                format!("unsupported FIELDS {fields:?}, expected x y z"),
                            ));
                        }
                        fields_ok = true;
                    }
                    "POINTS" => {
                        let n = toks.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(
                            || parse_err(path, idx + 1, "POINTS expects a count"),
                        )?;
                        points = Some(n);
                    }
                    "DATA" => in_data = true,
                    // other PCD-style header keys (VERSION, WIDTH, ...) are
                    // accepted and ignored
                    _ => {}
                }
                if in_data && (points.is_none() || !fields_ok) {
                    return Err(IoFormatError::MissingHeader {
                        path: path.display().to_string(),
                    });
                }
                continue;
            }
            // first non-header line starts the data section
            if points.is_none() || !fields_ok {
                return Err(IoFormatError::MissingHeader { path: path.display().to_string() });
            }
            in_data = true;
        }
        let n = points.unwrap();
        if cloud.len() + skipped >= n {
            break; // trailing content beyond the declared count is ignored
        }
        let mut vals = [0.0f64; 3];
        let mut toks = line.split_whitespace();
        for v in vals.iter_mut() {
            let tok = toks
                .next()
                .ok_or_else(|| parse_err(path, idx + 1, "expected three coordinates"))?;
            *v = tok
                .parse()
                .map_err(|_| parse_err(path, idx + 1, format!("bad number `{tok}`")))?;
        }
        if toks.next().is_some() {
            return Err(parse_err(path, idx + 1, "trailing tokens after coordinates"));
        }
        if vals.iter().all(|v| v.is_finite()) {
            cloud.push(Point3::new(vals[0], vals[1], vals[2]));
        } else {
            skipped += 1;
        }
    }
    let (Some(n), true) = (points, fields_ok) else {
        return Err(IoFormatError::MissingHeader { path: path.display().to_string() });
    };
    if cloud.len() + skipped < n {
        return Err(parse_err(
            path,
            0,
            format!("expected {n} data lines, found {}", cloud.len() + skipped),
        ));
    }
    if skipped > 0 {
        log::debug!(target: "io", "{}: skipped {skipped} non-finite lines", path.display());
    }
    Ok(ScanFile { cloud, timestamp, skipped })
}

/// Writes a scan in the format [`read_pointcloud`] parses. Coordinates are
/// written with six decimals (micrometer resolution).
pub fn write_pointcloud(path: &Path, cloud: &[Point3], timestamp: f64) -> Result<(), IoFormatError> {
    let mut out = String::with_capacity(cloud.len() * 32 + 64);
    let _ = writeln!(out, "# timestamp {timestamp:.9}");
    let _ = writeln!(out, "FIELDS x y z");
    let _ = writeln!(out, "POINTS {}", cloud.len());
    let _ = writeln!(out, "DATA ascii");
    for p in cloud {
        let _ = writeln!(out, "{:.6} {:.6} {:.6}", p.x, p.y, p.z);
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Nine-significant-digit decimal formatting with trailing zeros trimmed,
/// so an identity pose prints as `0 0 0 0 0 0 1`.
fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn pose_to_quat(pose: &Pose) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(pose.rotation))
}

/// One `timestamp tx ty tz qx qy qz qw` line per pose.
pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<(), IoFormatError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for (t, pose) in traj {
        let q = pose_to_quat(pose);
        let line = format!(
            "{:.9} {} {} {} {} {} {} {}",
            t,
            fmt_sig9(pose.translation.x),
            fmt_sig9(pose.translation.y),
            fmt_sig9(pose.translation.z),
            fmt_sig9(q.i),
            fmt_sig9(q.j),
            fmt_sig9(q.k),
            fmt_sig9(q.w),
        );
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Parses a trajectory file; timestamps must increase strictly.
pub fn read_trajectory(path: &Path) -> Result<Trajectory, IoFormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut traj = Trajectory::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split_whitespace().map(|t| t.parse()).collect();
        let vals = vals.map_err(|_| parse_err(path, i + 1, "bad number"))?;
        if vals.len() != 8 {
            return Err(parse_err(path, i + 1, format!("expected 8 values, got {}", vals.len())));
        }
        let t = vals[0];
        if let Some((prev, _)) = traj.last() {
            if t <= *prev {
                return Err(parse_err(path, i + 1, "timestamps must increase strictly"));
            }
        }
        let q = UnitQuaternion::from_quaternion(Quaternion::new(vals[7], vals[4], vals[5], vals[6]));
        let pose = Pose::new(q.to_rotation_matrix().into_inner(), Point3::new(vals[1], vals[2], vals[3]));
        traj.push((t, pose));
    }
    Ok(traj)
}

/// Ordered iterator over the scan files of a dataset directory.
///
/// Frame files are zero-padded `*.pcd` names yielded in lexicographic
/// order; `groundtruth.txt` and configuration files are ignored. Frames
/// without an embedded timestamp fall back to their index in seconds.
pub struct Playback {
    files: Vec<PathBuf>,
    next: usize,
}

impl Playback {
    pub fn open(dir: &Path) -> Result<Self, IoFormatError> {
        let entries = std::fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "pcd"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(IoFormatError::EmptyDataset(dir.display().to_string()));
        }
        Ok(Self { files, next: 0 })
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

impl Iterator for Playback {
    type Item = Result<ScanFile, IoFormatError>;

    fn next(&mut self) -> Option<Self::Item> {
        let idx = self.next;
        let path = self.files.get(idx)?;
        self.next += 1;
        let mut scan = match read_pointcloud(path) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        if scan.timestamp == 0.0 && idx > 0 {
            scan.timestamp = idx as f64;
        }
        Some(Ok(scan))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::{exp, Twist};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn empty_pointcloud_round_trip() {
        let dir = tmp();
        let path = dir.path().join("empty.pcd");
        write_pointcloud(&path, &[], 0.5).unwrap();
        let scan = read_pointcloud(&path).unwrap();
        assert!(scan.cloud.is_empty());
        assert_eq!(scan.timestamp, 0.5);
    }

    #[test]
    fn three_point_file_parses_bit_equal() {
        let dir = tmp();
        let path = dir.path().join("scan.pcd");
        std::fs::write(
            &path,
            "FIELDS x y z\nPOINTS 3\nDATA ascii\n1.5 -2.25 0.125\n0.1 0.2 0.3\n-9 8 7\n",
        )
        .unwrap();
        let scan = read_pointcloud(&path).unwrap();
        assert_eq!(scan.cloud.len(), 3);
        assert_eq!(scan.cloud[0], Point3::new(1.5, -2.25, 0.125));
        assert_eq!(scan.cloud[1], Point3::new(0.1, 0.2, 0.3));
        assert_eq!(scan.cloud[2], Point3::new(-9.0, 8.0, 7.0));
    }

    #[test]
    fn nan_lines_are_skipped_and_counted() {
        let dir = tmp();
        let path = dir.path().join("scan.pcd");
        let mut text = String::from("FIELDS x y z\nPOINTS 10\nDATA ascii\n");
        for i in 0..9 {
            text.push_str(&format!("{i} 0 0\n"));
        }
        text.push_str("nan nan nan\n");
        std::fs::write(&path, text).unwrap();
        let scan = read_pointcloud(&path).unwrap();
        assert_eq!(scan.cloud.len(), 9);
        assert_eq!(scan.skipped, 1);
    }

    #[test]
    fn missing_header_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("scan.pcd");
        std::fs::write(&path, "1 2 3\n").unwrap();
        assert!(matches!(
            read_pointcloud(&path),
            Err(IoFormatError::MissingHeader { .. })
        ));
    }

    #[test]
    fn bad_number_reports_line() {
        let dir = tmp();
        let path = dir.path().join("scan.pcd");
        std::fs::write(&path, "FIELDS x y z\nPOINTS 1\nDATA ascii\n1 oops 3\n").unwrap();
        match read_pointcloud(&path) {
            Err(IoFormatError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_pose_line_format() {
        let dir = tmp();
        let path = dir.path().join("traj.txt");
        write_trajectory(&vec![(0.0, Pose::identity())], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "0.000000000 0 0 0 0 0 0 1\n");
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tmp();
        let path = dir.path().join("traj.txt");
        let mut rng = StdRng::seed_from_u64(51);
        let mut traj = Trajectory::new();
        for i in 0..50 {
            let xi = Twist::new(
                Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ),
                Point3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                ),
            );
            traj.push((i as f64 / 30.0, exp(&xi)));
        }
        write_trajectory(&traj, &path).unwrap();
        let back = read_trajectory(&path).unwrap();
        assert_eq!(back.len(), traj.len());
        for ((t1, p1), (t2, p2)) in traj.iter().zip(back.iter()) {
            assert_relative_eq!(t1, t2, epsilon = 1e-9);
            assert!((p1.translation - p2.translation).amax() < 1e-8);
            assert!((p1.rotation - p2.rotation).amax() < 1e-7);
        }
    }

    #[test]
    fn written_quaternions_are_unit() {
        let dir = tmp();
        let path = dir.path().join("traj.txt");
        let mut rng = StdRng::seed_from_u64(52);
        let mut traj = Trajectory::new();
        for i in 0..100 {
            let xi = Twist::new(
                Point3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ),
                Point3::zeros(),
            );
            traj.push((i as f64, exp(&xi)));
        }
        write_trajectory(&traj, &path).unwrap();
        for line in std::fs::read_to_string(&path).unwrap().lines() {
            let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
            let norm = (v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]).sqrt();
            assert!((norm - 1.0).abs() <= 1e-9, "quaternion norm {norm}");
        }
    }

    #[test]
    fn nonmonotonic_timestamps_rejected() {
        let dir = tmp();
        let path = dir.path().join("traj.txt");
        std::fs::write(&path, "1.0 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n").unwrap();
        assert!(read_trajectory(&path).is_err());
    }

    #[test]
    fn playback_yields_frames_in_order() {
        let dir = tmp();
        for i in 0..5 {
            let path = dir.path().join(format!("frame_{i:06}.pcd"));
            write_pointcloud(&path, &[Point3::new(i as f64, 0.0, 0.0)], i as f64 / 30.0).unwrap();
        }
        // distractors that playback must ignore
        std::fs::write(dir.path().join("groundtruth.txt"), "0 0 0 0 0 0 0 1\n").unwrap();
        let playback = Playback::open(dir.path()).unwrap();
        assert_eq!(playback.len(), 5);
        let frames: Vec<ScanFile> = playback.map(|f| f.unwrap()).collect();
        for (i, f) in frames.iter().enumerate() {
            assert_eq!(f.cloud[0].x, i as f64);
            assert_relative_eq!(f.timestamp, i as f64 / 30.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        let dir = tmp();
        assert!(matches!(
            Playback::open(dir.path()),
            Err(IoFormatError::EmptyDataset(_))
        ));
    }
}
