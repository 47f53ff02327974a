//! Command-line driver: `sim` writes synthetic datasets, `run` executes
//! the SLAM pipeline over a dataset directory, `eval` compares two
//! trajectory files.
//!
//! Exit codes are the machine contract: 0 success, 2 invalid
//! input/configuration, 3 run finished but more than 20% of frames were
//! low-confidence, 4 insufficient trajectory overlap.

use clap::{Parser, Subcommand, ValueEnum};
use solid_slam::io::{self, Playback};
use solid_slam::mapping::export_occupied;
use solid_slam::pipeline::{RunReport, SlamPipeline};
use solid_slam::sim::{
    self, ate_report, EvalError, ScanSpec, Scene,
};
use solid_slam::Config;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 2;
const EXIT_LOW_CONFIDENCE: u8 = 3;
const EXIT_NO_OVERLAP: u8 = 4;

#[derive(Parser)]
#[command(name = "solid-slam", version, about = "Solid-state LiDAR SLAM toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    /// 4 m x 4 m room, 10 s tangent-heading loop.
    RoomLoop,
    /// Larger room, 12 s orbit around the machine boxes.
    MapOrbit,
    /// Stationary random yaw excursion returning to the start.
    Rotation,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset directory.
    Sim {
        /// Scene file (`box`/`rect` lines); defaults to the builtin scene.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Waypoint trajectory file; defaults to the builtin trajectory.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Builtin scene/trajectory pair used when files are not given.
        #[arg(long, value_enum, default_value = "room-loop")]
        builtin: Builtin,
        #[arg(long)]
        out: PathBuf,
        /// Noise seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Gaussian range noise sigma, meters.
        #[arg(long, default_value_t = 0.014)]
        noise: f64,
        /// Vertical rays per scan.
        #[arg(long, default_value_t = 96)]
        rays_v: usize,
        /// Horizontal rays per scan.
        #[arg(long, default_value_t = 128)]
        rays_h: usize,
        /// Frame rate, Hz.
        #[arg(long, default_value_t = 30.0)]
        rate: f64,
    },
    /// Run the SLAM pipeline over a dataset directory.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        /// Configuration file; defaults to `<dataset>/config.cfg` when
        /// present, otherwise builtin defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "slam-out")]
        out: PathBuf,
        /// Occupancy threshold for the exported map.
        #[arg(long, default_value_t = 0.6)]
        occupancy_threshold: f64,
        /// Process at most this many frames.
        #[arg(long)]
        max_frames: Option<usize>,
    },
    /// Compare an estimated trajectory against ground truth.
    Eval {
        #[arg(long)]
        estimated: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Sim { scene, trajectory, builtin, out, seed, noise, rays_v, rays_h, rate } => {
            cmd_sim(scene, trajectory, builtin, &out, seed, noise, rays_v, rays_h, rate)
        }
        Command::Run { dataset, config, out, occupancy_threshold, max_frames } => {
            cmd_run(&dataset, config, &out, occupancy_threshold, max_frames)
        }
        Command::Eval { estimated, ground_truth } => cmd_eval(&estimated, &ground_truth),
    };
    ExitCode::from(code)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

#[allow(clippy::too_many_arguments)]
fn cmd_sim(
    scene_path: Option<PathBuf>,
    trajectory_path: Option<PathBuf>,
    builtin: Builtin,
    out: &Path,
    seed: u64,
    noise: f64,
    rays_v: usize,
    rays_h: usize,
    rate: f64,
) -> u8 {
    if rays_v < 2 || rays_h < 2 {
        return fail(EXIT_INVALID, "ray counts must be at least 2");
    }
    if noise < 0.0 {
        return fail(EXIT_INVALID, "noise sigma cannot be negative");
    }
    if rate <= 0.0 {
        return fail(EXIT_INVALID, "rate must be positive");
    }
    let scene = match scene_path {
        Some(path) => match Scene::load(&path) {
            Ok(s) if !s.is_empty() => s,
            Ok(_) => return fail(EXIT_INVALID, format!("scene {} is empty", path.display())),
            Err(e) => return fail(EXIT_INVALID, e),
        },
        None => match builtin {
            Builtin::MapOrbit => sim::mapping_scene(),
            _ => sim::default_room_scene(),
        },
    };
    let trajectory = match trajectory_path {
        Some(path) => match io::read_trajectory(&path) {
            Ok(t) if t.len() >= 2 => t,
            Ok(_) => {
                return fail(EXIT_INVALID, "trajectory needs at least two waypoints")
            }
            Err(e) => return fail(EXIT_INVALID, e),
        },
        None => match builtin {
            Builtin::RoomLoop => sim::room_loop_trajectory(),
            Builtin::MapOrbit => sim::orbit_trajectory(),
            Builtin::Rotation => sim::rotation_trajectory(seed),
        },
    };
    let spec = ScanSpec {
        rays_vertical: rays_v,
        rays_horizontal: rays_h,
        noise_sigma: noise,
        seed,
        ..Default::default()
    };
    match sim::generate_sequence(&scene, &trajectory, rate, &spec, out) {
        Ok(frames) => {
            // drop a matching config next to the frames so `run` sizes its
            // grid to this lattice
            if let Err(e) = spec.matching_config().save(&out.join("config.cfg")) {
                return fail(EXIT_INVALID, e);
            }
            println!("wrote {frames} frames to {}", out.display());
            EXIT_OK
        }
        Err(e) => fail(EXIT_INVALID, e),
    }
}

fn cmd_run(
    dataset: &Path,
    config_path: Option<PathBuf>,
    out: &Path,
    occupancy_threshold: f64,
    max_frames: Option<usize>,
) -> u8 {
    if !(occupancy_threshold > 0.0 && occupancy_threshold < 1.0) {
        return fail(EXIT_INVALID, "occupancy threshold must lie in (0, 1)");
    }
    let config = {
        let default_cfg = dataset.join("config.cfg");
        let path = config_path.or_else(|| default_cfg.exists().then_some(default_cfg));
        match path {
            Some(p) => match Config::load(&p) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_INVALID, e),
            },
            None => Config::default(),
        }
    };
    let playback = match Playback::open(dataset) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        return fail(EXIT_INVALID, format!("cannot create {}: {e}", out.display()));
    }

    let mut pipeline = SlamPipeline::new(config);
    let limit = max_frames.unwrap_or(usize::MAX);
    for scan in playback.take(limit) {
        let scan = match scan {
            Ok(s) => s,
            Err(e) => return fail(EXIT_INVALID, e),
        };
        pipeline.process_frame(&scan.cloud, scan.timestamp);
    }
    let output = pipeline.finish();

    let trajectory_path = out.join("trajectory.txt");
    if let Err(e) = io::write_trajectory(&output.trajectory, &trajectory_path) {
        return fail(EXIT_INVALID, e);
    }
    let map_path = out.join("map.pcd");
    let occupied = export_occupied(&output.octree, occupancy_threshold);
    if let Err(e) = io::write_pointcloud(&map_path, &occupied, 0.0) {
        return fail(EXIT_INVALID, e);
    }

    let ate = match io::read_trajectory(&dataset.join("groundtruth.txt")) {
        Ok(truth) => ate_report(&output.trajectory, &truth).ok().map(|r| r.rmse),
        Err(_) => None,
    };
    let report = RunReport {
        stats: output.stats.clone(),
        trajectory_path: trajectory_path.display().to_string(),
        map_path: map_path.display().to_string(),
        ate_rmse: ate,
    };
    let text = report.to_key_values();
    if let Err(e) = std::fs::write(out.join("report.txt"), &text) {
        return fail(EXIT_INVALID, format!("cannot write report: {e}"));
    }
    print!("{text}");

    let frames = output.stats.frames.max(1);
    if output.stats.low_confidence_frames * 5 > frames {
        eprintln!(
            "warning: {}/{} frames were low-confidence",
            output.stats.low_confidence_frames, output.stats.frames
        );
        return EXIT_LOW_CONFIDENCE;
    }
    EXIT_OK
}

fn cmd_eval(estimated: &Path, ground_truth: &Path) -> u8 {
    let est = match io::read_trajectory(estimated) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let truth = match io::read_trajectory(ground_truth) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    match ate_report(&est, &truth) {
        Ok(report) => {
            println!("ate_rmse = {:.6}", report.rmse);
            println!("max_error = {:.6}", report.max_error);
            println!("pairs = {}", report.pairs);
            EXIT_OK
        }
        Err(e @ EvalError::InsufficientOverlap { .. }) => fail(EXIT_NO_OVERLAP, e),
    }
}
