//! Scratch probe for end-to-end tuning; run with
//! `cargo test -p solid-slam --test probe -- --ignored --nocapture`.

use solid_slam::io::Trajectory;
use solid_slam::pipeline::SlamPipeline;
use solid_slam::sim::{
    ate_report, default_room_scene, mapping_scene, orbit_trajectory, room_loop_trajectory,
    rotation_trajectory, simulate_frames, ScanSpec,
};

#[test]
#[ignore]
fn probe_room_loop() {
    let spec = ScanSpec::default();
    let scene = default_room_scene();
    let waypoints = room_loop_trajectory();
    let frames = simulate_frames(&scene, &waypoints, 30.0, &spec);
    println!("frames: {}", frames.len());
    let mut pipeline = SlamPipeline::new(spec.matching_config());
    let mut truth = Trajectory::new();
    for (cloud, t, pose) in &frames {
        let s = pipeline.process_frame(cloud, *t);
        truth.push((*t, *pose));
        if s.frame_index % 50 == 0 {
            println!(
                "frame {} edges={} planes={} inliers=({},{}) iters={} cost={:.3e} low={}",
                s.frame_index, s.edge_features, s.planar_features, s.edge_inliers,
                s.plane_inliers, s.iterations, s.cost, s.low_confidence
            );
        }
    }
    let out = pipeline.finish();
    let report = ate_report(&out.trajectory, &truth).unwrap();
    println!(
        "ATE rmse={:.4} max={:.4} pairs={} | latency mean={:.1}ms max={:.1}ms keyframes={} lowconf={}",
        report.rmse,
        report.max_error,
        report.pairs,
        out.stats.mean_latency_ms,
        out.stats.max_latency_ms,
        out.stats.keyframes,
        out.stats.low_confidence_frames
    );
}

#[test]
#[ignore]
fn probe_rotation() {
    for seed in 1..=6u64 {
        let spec = ScanSpec { seed: 100 + seed, ..Default::default() };
        let scene = default_room_scene();
        let waypoints = rotation_trajectory(seed);
        let frames = simulate_frames(&scene, &waypoints, 30.0, &spec);
        let mut pipeline = SlamPipeline::new(spec.matching_config());
        for (cloud, t, _) in &frames {
            pipeline.process_frame(cloud, *t);
        }
        let out = pipeline.finish();
        let (_, final_pose) = out.trajectory.last().unwrap();
        let gt_final = waypoints.last().unwrap().1;
        let delta = solid_slam::se3::compose(&solid_slam::se3::inverse(&gt_final), final_pose);
        println!(
            "seed {seed}: final orientation error {:.2} deg, translation {:.3} m, lowconf {}",
            delta.rotation_angle().to_degrees(),
            delta.translation.norm(),
            out.stats.low_confidence_frames
        );
    }
}

#[test]
#[ignore]
fn probe_mapping() {
    let spec = ScanSpec::default();
    let scene = mapping_scene();
    let waypoints = orbit_trajectory();
    let frames = simulate_frames(&scene, &waypoints, 30.0, &spec);
    println!("frames: {}", frames.len());
    let mut pipeline = SlamPipeline::new(spec.matching_config());
    let mut truth = Trajectory::new();
    for (cloud, t, pose) in &frames {
        pipeline.process_frame(cloud, *t);
        truth.push((*t, *pose));
    }
    let out = pipeline.finish();
    let report = ate_report(&out.trajectory, &truth).unwrap();
    println!("orbit ATE rmse={:.4} keyframes={}", report.rmse, out.stats.keyframes);

    let occupied = solid_slam::mapping::export_occupied(&out.octree, 0.6);
    println!("occupied leaves: {}", occupied.len());
    // machine_a footprint x in [-1.775, -0.625], z in [-0.925, 0.925]
    // machine_b footprint x in [0.625, 1.785], z in [-0.975, 0.975]
    for (name, x_lo, x_hi, z_lo, z_hi, dim_x, dim_z) in [
        ("machine_a", -1.775, -0.625, -0.925, 0.925, 1.15, 1.85),
        ("machine_b", 0.625, 1.785, -0.975, 0.975, 1.16, 1.95),
    ] {
        let crop: Vec<_> = occupied
            .iter()
            .filter(|p| {
                p.y > 0.15
                    && p.y < 1.15
                    && p.x > x_lo - 0.15
                    && p.x < x_hi + 0.15
                    && p.z > z_lo - 0.15
                    && p.z < z_hi + 0.15
            })
            .collect();
        if crop.is_empty() {
            println!("{name}: no leaves in crop");
            continue;
        }
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_z, mut max_z) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &crop {
            min_x = min_x.min(p.x);
            max_x = max_x.max(p.x);
            min_z = min_z.min(p.z);
            max_z = max_z.max(p.z);
        }
        println!(
            "{name}: {} leaves, measured {:.3} x {:.3} (actual {dim_x} x {dim_z}), err ({:+.3}, {:+.3})",
            crop.len(),
            max_x - min_x,
            max_z - min_z,
            max_x - min_x - dim_x,
            max_z - min_z - dim_z,
        );
    }
}
