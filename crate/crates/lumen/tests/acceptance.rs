//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p lumen --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use lumen::cli::{execute, Cli};
use lumen::eval::{evaluate, map_as_truth, percentile};
use lumen::formats::{read_map, read_truth, MapFile};
use lumen_core::estimator::group_by_led;
use lumen_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn noisy(seed: u64) -> NoiseModel {
    NoiseModel {
        pixel_sigma: 2.0,
        yaw_sigma: 0.01,
        vo_position_sigma: 0.02,
        vo_drift_rate: 0.0,
        seed,
    }
}

fn estimator_for(s: &ScenarioConfig) -> EstimatorConfig {
    EstimatorConfig::new(s.intrinsics, s.cam_height_h1, s.cam1_to_cam2)
}

fn simulate(s: &ScenarioConfig) -> (SimulatedLog, Vec<Observation>) {
    let log = synthesize_log(s).expect("simulate");
    let obs = log
        .records
        .iter()
        .map(|r| r.to_observation(&s.intrinsics, &s.cam1_to_cam2).expect("observation"))
        .collect();
    (log, obs)
}

/// 3-D error of every estimated LED against the log's truth.
fn errors_3d(build: &MapBuild, truth: &[GroundTruthLed]) -> Result<Vec<f64>, String> {
    check(build.skipped.is_empty(), || format!("skipped LEDs: {:?}", build.skipped))?;
    check(build.entries.len() == truth.len(), || "LED count mismatch".into())?;
    Ok(build
        .entries
        .iter()
        .map(|e| {
            let t = truth.iter().find(|t| t.key == e.led_key).expect("truth entry");
            (e.x_hat - t.x).hypot(e.y_hat - t.y).hypot(e.height - t.height)
        })
        .collect())
}

fn noise_free_exact_recovery() -> Outcome {
    let start = Instant::now();
    let scenario = reference_scenario(NoiseModel::noiseless(0));
    let (log, obs) = simulate(&scenario);
    let (_, build) = map_observations(obs, &estimator_for(&scenario)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let min_count = log.truth.iter().map(|t| log.count_for(&t.key)).min().unwrap_or(0);
    check(min_count >= 50, || format!("only {min_count} observations for some LED"))?;
    let errs = errors_3d(&build, &log.truth)?;
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    check(mean < 1e-6, || format!("mean 3-D error {mean:e} m"))?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("mean {mean:.2e} m, >= {min_count} obs/LED, {elapsed:.2?}"))
}

fn noisy_analog() -> Outcome {
    let start = Instant::now();
    let mut all = Vec::new();
    for seed in 1..=20 {
        let scenario = reference_scenario(noisy(seed));
        let (log, obs) = simulate(&scenario);
        let (_, build) = map_observations(obs, &estimator_for(&scenario)).map_err(|e| e.to_string())?;
        all.extend(errors_3d(&build, &log.truth)?);
    }
    let elapsed = start.elapsed();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let p90 = percentile(&sorted, 90.0);
    check(mean <= 0.15, || format!("mean {mean:.4} m"))?;
    check(p90 <= 0.25, || format!("p90 {p90:.4} m"))?;
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} LEDs, mean {mean:.4} m, p90 {p90:.4} m, {elapsed:.2?}", all.len()))
}

fn noisy_tracks(seeds: std::ops::Range<u64>) -> Vec<(EstimatorConfig, LedTrack)> {
    seeds
        .flat_map(|seed| {
            let scenario = reference_scenario(noisy(seed));
            let est = estimator_for(&scenario);
            let (_, obs) = simulate(&scenario);
            let (tracks, _) = map_observations(obs, &est).expect("map");
            tracks.into_iter().map(move |t| (est.clone(), t))
        })
        .collect()
}

fn gradient_check() -> Outcome {
    let tracks = noisy_tracks(100..105);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 1000 {
        let (est, track) = &tracks[rng.gen_range(0..tracks.len())];
        let rough = track.rough_position().expect("rough position");
        let (r, a) = (2.0 * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        let p = Point2::new(rough.x + r * a.cos(), rough.y + r * a.sin());
        // Keep the whole stencil outside the excluded disks.
        let margin = est.distance_epsilon + 4.0 * h;
        if track.observations().iter().any(|o| o.cam2_pose_pre().position().distance(&p) < margin) {
            continue;
        }
        let g = track.gradient(p, est).map_err(|e| e.to_string())?;
        let f = |q: Point2| track.cost(q, est).expect("cost");
        let fx = (f(Point2::new(p.x + h, p.y)) - f(Point2::new(p.x - h, p.y))) / (2.0 * h);
        let fy = (f(Point2::new(p.x, p.y + h)) - f(Point2::new(p.x, p.y - h))) / (2.0 * h);
        let rel = (g[0] - fx).hypot(g[1] - fy) / g[0].hypot(g[1]).max(1.0);
        worst = worst.max(rel);
        done += 1;
    }
    check(worst < 1e-6, || format!("worst relative error {worst:e}"))?;
    Ok(format!("1000 instances, worst relative error {worst:.2e}"))
}

fn brute_force_oracle() -> Outcome {
    let tracks = noisy_tracks(200..205);
    check(tracks.len() == 20, || format!("{} tracks", tracks.len()))?;
    let mut min_margin = f64::INFINITY;
    for (est, track) in &tracks {
        let rough = track.rough_position().ok_or("no rough position")?;
        let p_hat = track.optimized_position().ok_or("no solution")?;
        let best = track.cost(p_hat, est).map_err(|e| e.to_string())?;
        let mut grid_min = f64::INFINITY;
        for i in -100..=100 {
            for j in -100..=100 {
                let p = Point2::new(rough.x + 0.01 * i as f64, rough.y + 0.01 * j as f64);
                if let Ok(c) = track.cost(p, est) {
                    grid_min = grid_min.min(c);
                }
            }
        }
        check(best <= grid_min, || {
            format!("{}: J1(P^) = {best} > grid minimum {grid_min}", track.led_key())
        })?;
        min_margin = min_margin.min((grid_min - best) / grid_min);
    }
    Ok(format!("20 tracks, smallest relative margin {min_margin:.2e}"))
}

fn height_formula() -> Outcome {
    let scenario = reference_scenario(NoiseModel::noiseless(0));
    let est = estimator_for(&scenario);
    let (log, obs) = simulate(&scenario);
    let (tracks, _) = map_observations(obs, &est).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for track in &tracks {
        let truth = log.truth.iter().find(|t| &t.key == track.led_key()).ok_or("no truth")?;
        let k = track.k_refined().ok_or("no scale")?;
        let h = estimate_height(k, scenario.intrinsics.focal(), scenario.cam_height_h1).map_err(|e| e.to_string())?;
        worst = worst.max((h - truth.height).abs());
    }
    check(worst < 1e-9, || format!("worst height error {worst:e} m"))?;
    Ok(format!("{} tracks, worst height error {worst:.2e} m", tracks.len()))
}

fn pauta_suite() -> Outcome {
    let mut samples = vec![300.0; 30];
    samples.push(3000.0);
    let out = pauta_filter(&samples, 3).map_err(|e| e.to_string())?;
    check(out.removed == 1 && out.mean == 300.0, || format!("outlier case: {out:?}"))?;

    let flat = vec![1.25; 12];
    let out = pauta_filter(&flat, 3).map_err(|e| e.to_string())?;
    check(out.kept == flat && out.removed == 0, || "zero variance changed".into())?;

    for small in [vec![5.0], vec![-1e6, 1e6]] {
        let out = pauta_filter(&small, 3).map_err(|e| e.to_string())?;
        check(out.kept == small && out.removed == 0, || format!("small n changed: {small:?}"))?;
    }

    let mut points = vec![Point2::new(0.0, 0.0); 30];
    points.push(Point2::new(10.0, 10.0));
    let rough = rough_position(&points, 3).ok_or("no rough position")?;
    check(rough == Point2::new(0.0, 0.0), || format!("rough position {rough:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let n = rng.gen_range(1..80);
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    rng.gen_range(-1e4..1e4)
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            })
            .collect();
        let out = pauta_filter(&xs, 3).map_err(|e| e.to_string())?;
        check(!out.kept.is_empty() && out.kept.len() + out.removed == n, || format!("emptied or lost samples: {xs:?}"))?;
    }
    check(pauta_filter(&[], 3).is_err(), || "empty input accepted".into())?;
    Ok("outlier removed, passthrough cases unchanged, 2000 random sets never emptied".into())
}

fn projection_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_d: f64 = 0.0;
    let mut worst_phi: f64 = 0.0;
    let mut cases = 0;
    while cases < 10_000 {
        let intr = CameraIntrinsics::new(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0), rng.gen_range(100.0..2000.0))
            .map_err(|e| e.to_string())?;
        let h1 = rng.gen_range(0.0..1.0);
        let led = GroundTruthLed::new("x", rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), h1 + rng.gen_range(0.5..5.0));
        let pose = PlanarPose::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-PI..PI))
            .map_err(|e| e.to_string())?;
        let planar = pose.position().distance(&led.position());
        if planar < 1e-6 {
            continue;
        }
        let pixel = project_led(&pose, h1, &led, &intr).map_err(|e| e.to_string())?;
        let obs = make_observation(pixel, pose.theta(), &intr, pose, "x".into(), 0.0).map_err(|e| e.to_string())?;
        let d_true = intr.focal() * planar / (led.height - h1);
        let phi_true = bearing(pose.x() - led.x, pose.y() - led.y).map_err(|e| e.to_string())?;
        worst_d = worst_d.max((obs.d_obs() - d_true).abs());
        worst_phi = worst_phi.max(wrap_angle(obs.phi_obs() - phi_true).map_err(|e| e.to_string())?.abs());
        cases += 1;
    }
    check(worst_d < 1e-9 && worst_phi < 1e-9, || format!("worst d {worst_d:e}, worst phi {worst_phi:e}"))?;
    Ok(format!("worst |Δd| {worst_d:.1e} px, |Δφ| {worst_phi:.1e} rad"))
}

fn lumen_cli(args: &[&str]) -> Result<(), String> {
    let cli = Cli::try_parse_from(std::iter::once("lumen").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    execute(cli).map(drop).map_err(|e| format!("`lumen {}`: {e}", args.join(" ")))
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn file_round_trips() -> Outcome {
    let (projection, files) = (projection_round_trip()?, artifact_round_trips()?);
    Ok(format!("{projection}; {files}"))
}

fn artifact_round_trips() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/default.json");
    let mut artifacts = Vec::new();
    for run in 0..2 {
        let log = dir.path().join(format!("run{run}.jsonl"));
        let map = dir.path().join(format!("map{run}.json"));
        lumen_cli(&["simulate", scenario, "-o", s(&log), "--seed", "5"])?;
        lumen_cli(&["map", s(&log), "-c", scenario, "-o", s(&map)])?;
        let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
        artifacts.push([read(&log)?, read(&dir.path().join(format!("run{run}.truth.json")))?, read(&map)?]);
    }
    check(artifacts[0] == artifacts[1], || "same seed produced different artifacts".into())?;

    let [log_bytes, _, map_bytes] = &artifacts[0];
    let parsed = lumen::formats::read_records(log_bytes.as_slice(), lumen::formats::ParseMode::Strict)
        .map_err(|e| e.to_string())?;
    let mut rewritten = Vec::new();
    lumen::formats::write_log(&mut rewritten, &parsed.records).map_err(|e| e.to_string())?;
    check(&rewritten == log_bytes, || "log did not round-trip byte-exactly".into())?;

    let map = read_map(map_bytes.as_slice()).map_err(|e| e.to_string())?;
    let mut rewritten = Vec::new();
    lumen::formats::write_map(&mut rewritten, &map).map_err(|e| e.to_string())?;
    check(&rewritten == map_bytes, || "map did not round-trip byte-exactly".into())?;
    Ok(format!("{} log records and {} map LEDs byte-exact and reproducible", parsed.records.len(), map.leds.len()))
}

fn incremental_equivalence() -> Outcome {
    let scenario = reference_scenario(NoiseModel::noiseless(0));
    let est = estimator_for(&scenario);
    let (_, obs) = simulate(&scenario);
    let mut worst: f64 = 0.0;
    for (key, group) in group_by_led(obs) {
        let batch = LedTrack::from_observations(key.clone(), group.clone(), &est).map_err(|e| e.to_string())?;
        let mut stream = LedTrack::new(key);
        for o in group {
            stream.update(o, &est).map_err(|e| e.to_string())?;
        }
        let (a, b) = (batch.optimized_position().ok_or("batch unsolved")?, stream.optimized_position().ok_or("stream unsolved")?);
        let dh = (batch.height().ok_or("no height")? - stream.height().ok_or("no height")?).abs();
        worst = worst.max(a.distance(&b)).max(dh);
    }
    check(worst < 1e-9, || format!("streaming differs by {worst:e} m"))?;
    Ok(format!("worst difference {worst:.1e} m"))
}

fn cdf_report() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/default.json");
    let (log, map, report, csv) = ["r.jsonl", "m.json", "e.json", "c.csv"].map(|n| dir.path().join(n)).into();
    lumen_cli(&["simulate", scenario, "-o", s(&log)])?;
    lumen_cli(&["map", s(&log), "-c", scenario, "-o", s(&map)])?;
    lumen_cli(&["evaluate", s(&map), s(&dir.path().join("r.truth.json")), "-o", s(&report)])?;
    lumen_cli(&["report", s(&report), "-o", s(&csv)])?;

    let map_file: MapFile = read_map(std::fs::File::open(&map).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (e, c) = l.split_once(',').expect("two columns");
            (e.parse().expect("error"), c.parse().expect("cdf"))
        })
        .collect();
    check(rows.len() == map_file.leds.len(), || format!("{} rows for {} LEDs", rows.len(), map_file.leds.len()))?;
    check(rows.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1), || "CDF decreases".into())?;
    check(rows.last().map(|r| r.1) == Some(1.0), || "CDF does not end at 1.0".into())?;

    let truth = read_truth(std::fs::File::open(dir.path().join("r.truth.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    check(truth.len() == map_file.leds.len(), || "truth and map sizes differ".into())?;

    let own = evaluate(&map_file, &map_as_truth(&map_file)).map_err(|e| e.to_string())?;
    let zero = own.leds.iter().all(|e| e.planar_m == 0.0 && e.height_m == 0.0 && e.error_3d_m == 0.0)
        && own.mean_3d_m == 0.0
        && own.percentiles.iter().all(|p| p.error_m == 0.0)
        && own.cdf.iter().all(|p| p.error_m == 0.0);
    check(zero, || "self-evaluation is not all zero".into())?;
    Ok(format!("{} rows, terminal 1.0, self-evaluation all zero", rows.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("noise-free exact recovery", noise_free_exact_recovery),
        ("noisy synthetic analog", noisy_analog),
        ("gradient check", gradient_check),
        ("brute-force oracle", brute_force_oracle),
        ("height formula", height_formula),
        ("pauta suite", pauta_suite),
        ("round-trip suite", file_round_trips),
        ("incremental equivalence", incremental_equivalence),
        ("cdf report", cdf_report),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
