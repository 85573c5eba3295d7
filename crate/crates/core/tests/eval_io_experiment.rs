mod common;

use common::oracles::mann_whitney_z;
use miaa::eval::{evaluate, quality_directed, quality_symmetric, rmse_pointwise, shape_deviation};
use miaa::experiment::{
    calibration_config, rows_from_csv, rows_to_csv, run_experiment, summarize, ExperimentSpec, NamedConfig,
};
use miaa::geometry::{Point, Similarity, Trajectory};
use miaa::io::{gpx_string, parse_gpx, read_trajectory_csv, write_trajectory_csv, LocalProjection};
use miaa::miaa::{miaa_run, select_master, AggMode, MasterMode, MatchMode, MiaaConfig, RepresentMode, Termination};
use miaa::noisesim::{calibration_stack, generate_base_track, Direction, KernelKind, NoiseLayer, Shape, TrackNoiser};
use miaa::plot::experiment_plots;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_traj(rng: &mut ChaCha8Rng, n: usize) -> Trajectory {
    let pts: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0)))
        .collect();
    Trajectory::new("r", pts).unwrap()
}

/// Arc-length resampling written independently of the library.
fn naive_resample(t: &Trajectory, n: usize) -> Vec<(f64, f64)> {
    let p = t.points();
    let mut cum = vec![0.0];
    for w in p.windows(2) {
        cum.push(cum.last().unwrap() + (w[1].x - w[0].x).hypot(w[1].y - w[0].y));
    }
    let total = *cum.last().unwrap();
    (0..n)
        .map(|k| {
            let s = total * k as f64 / (n - 1) as f64;
            let seg = (1..p.len()).find(|&i| cum[i] >= s).unwrap_or(p.len() - 1);
            let len = cum[seg] - cum[seg - 1];
            let u = if len > 0.0 { (s - cum[seg - 1]) / len } else { 0.0 };
            (p[seg - 1].x + u * (p[seg].x - p[seg - 1].x), p[seg - 1].y + u * (p[seg].y - p[seg - 1].y))
        })
        .collect()
}

#[test]
fn quality_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let a = random_traj(&mut rng, 30);
        let b = random_traj(&mut rng, 40);
        let mut acc = 0.0;
        for p in a.points() {
            let mut best = f64::INFINITY;
            for q in b.points() {
                best = best.min((p.x - q.x).hypot(p.y - q.y));
            }
            acc += best * best;
        }
        let oracle = (acc / 30.0).sqrt();
        assert!((quality_directed(&a, &b) - oracle).abs() < 1e-12);
        assert_eq!(quality_symmetric(&a, &b), quality_symmetric(&b, &a));
    }
}

#[test]
fn rmse_matches_hand_rolled_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let truth = generate_base_track(Shape::Moderate, 300.0, &mut rng).unwrap();
    let noiser = TrackNoiser::new(&truth, &calibration_stack()).unwrap();
    let agg = noiser.apply(&mut rng);
    let (a, t) = (naive_resample(&agg, 1000), naive_resample(&truth, 1000));
    let oracle = (a.iter().zip(&t).map(|(p, q)| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sum::<f64>() / 1000.0).sqrt();
    assert!((rmse_pointwise(&agg, &truth, 1000).unwrap() - oracle).abs() < 1e-9);
}

#[test]
fn shape_deviation_ignores_similarities() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for shape in Shape::ALL {
        let t = generate_base_track(shape, 300.0, &mut rng).unwrap();
        let s = Similarity {
            scale: rng.random_range(0.5..2.0),
            rotation: rng.random_range(-3.0..3.0),
            tx: rng.random_range(-50.0..50.0),
            ty: rng.random_range(-50.0..50.0),
        };
        let moved = t.map_points(|p| s.apply(p)).unwrap();
        let dev = shape_deviation(&moved, &t, 1000).unwrap();
        assert!(dev < 1e-6, "{shape:?}: {dev}");
        assert!(dev < rmse_pointwise(&moved, &t, 1000).unwrap());
        let r = evaluate(&t, &t).unwrap();
        assert_eq!((r.rmse_m, r.q_symmetric_m), (0.0, 0.0));
    }
}

#[test]
fn more_white_noise_scores_worse() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let truth = generate_base_track(Shape::Moderate, 300.0, &mut rng).unwrap();
    let white = |a: f64| TrackNoiser::new(&truth, &[NoiseLayer::new(a, KernelKind::Dirac, 0.0, Direction::BothAxes)]).unwrap();
    let (low, high) = (white(0.5), white(1.5));
    let (mut rl, mut rh, mut sl, mut sh) = (vec![], vec![], vec![], vec![]);
    for _ in 0..50 {
        let a = low.apply(&mut rng);
        let b = high.apply(&mut rng);
        rl.push(rmse_pointwise(&a, &truth, 1000).unwrap());
        rh.push(rmse_pointwise(&b, &truth, 1000).unwrap());
        sl.push(shape_deviation(&a, &truth, 1000).unwrap());
        sh.push(shape_deviation(&b, &truth, 1000).unwrap());
    }
    // Two-sided 1% critical value.
    assert!(mann_whitney_z(&rl, &rh) > 2.576);
    assert!(mann_whitney_z(&sl, &sh) > 2.576);
}

#[test]
fn mean_of_ten_white_noise_copies_stays_in_band() {
    let sigma = 1.0;
    let truth = Trajectory::from_xy("t", &(0..101).map(|k| (k as f64 * 3.0, 0.0)).collect::<Vec<_>>()).unwrap();
    let noiser = TrackNoiser::new(&truth, &[NoiseLayer::new(sigma, KernelKind::Dirac, 0.0, Direction::Orthogonal)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let collection: Vec<Trajectory> = (0..10).map(|_| noiser.apply(&mut rng)).collect();
    let mut cfg = MiaaConfig::new(MasterMode::MedianLength, MatchMode::DtwL2, RepresentMode::Barycentre, AggMode::MeanL2);
    cfg.iter_max = 1;
    let out = miaa_run(&collection, &cfg).unwrap().aggregated;
    // Per point the mean has standard deviation sigma / sqrt(10). A 3-sigma
    // band holds pointwise; for all 101 points at once use a Bonferroni band
    // at 1% family-wise level (z = 4.42).
    let sd = sigma / 10f64.sqrt();
    let worst = out.points().iter().map(|p| p.y.abs()).fold(0.0, f64::max);
    assert!(worst < 4.42 * sd, "{worst}");
    let outside = out.points().iter().filter(|p| p.y.abs() > 3.0 * sd).count();
    assert!(outside <= 2, "{outside} points outside the 3-sigma band");
}

#[test]
fn twenty_tracks_converge_and_beat_individual_tracks() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let truth = generate_base_track(Shape::Moderate, 300.0, &mut rng).unwrap();
    let noiser = TrackNoiser::new(&truth, &miaa::noisesim::realistic_stack()).unwrap();
    let tracks: Vec<Trajectory> = (0..20).map(|_| noiser.apply(&mut rng)).collect();
    let mean_individual =
        tracks.iter().map(|t| rmse_pointwise(t, &truth, 1000).unwrap()).sum::<f64>() / tracks.len() as f64;
    for mode in [MatchMode::Frechet, MatchMode::DtwL2] {
        let run = miaa_run(&tracks, &calibration_config(mode)).unwrap();
        assert_eq!(run.termination, Termination::Converged, "{mode}");
        assert!(run.iterations <= 25);
        assert!(rmse_pointwise(&run.aggregated, &truth, 1000).unwrap() < mean_individual, "{mode}");
    }
}

#[test]
fn min_sum_master_avoids_the_shifted_track() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let base = Trajectory::from_xy("l", &(0..50).map(|k| (k as f64 * 3.0, 0.0)).collect::<Vec<_>>()).unwrap();
    let noiser = TrackNoiser::new(&base, &calibration_stack()).unwrap();
    for shifted in 0..5 {
        let collection: Vec<Trajectory> = (0..5)
            .map(|k| {
                let t = noiser.apply(&mut rng);
                if k == shifted { t.translated(0.0, 500.0) } else { t }
            })
            .collect();
        assert_ne!(select_master(&collection, MasterMode::MinSumDistance, None).unwrap(), shifted);
    }
}

#[test]
fn csv_and_gpx_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    let t = generate_base_track(Shape::Switchbacks, 300.0, &mut rng).unwrap();
    let timed = Trajectory::new(
        "timed",
        t.points().iter().enumerate().map(|(k, p)| Point::with_time(p.x, p.y, k as f64 * 1.5)).collect(),
    )
    .unwrap();
    let csv = dir.path().join("timed.csv");
    write_trajectory_csv(&csv, &timed, &["generated".into()]).unwrap();
    let back = read_trajectory_csv(&csv).unwrap();
    assert_eq!(back.points(), timed.points());

    let proj = LocalProjection { lat0_deg: 45.2, lon0_deg: 5.7 };
    let other = t.translated(400.0, -250.0);
    let gpx = dir.path().join("tracks.gpx");
    std::fs::write(&gpx, gpx_string(&[timed.clone(), other.clone()], &proj)).unwrap();
    let parsed = parse_gpx(&gpx).unwrap();
    assert_eq!(parsed.trajectories.len(), 2);
    for (orig, got) in [&timed, &other].into_iter().zip(&parsed.trajectories) {
        assert_eq!(orig.len(), got.len());
        for (p, q) in orig.points().iter().zip(got.points()) {
            // Back to geographic coordinates, then into the writer's frame.
            let (lat, lon) = parsed.projection.inverse(q.x, q.y);
            let (x, y) = proj.forward(lat, lon);
            assert!((p.x - x).hypot(p.y - y) < 0.01);
        }
    }
    let t0 = parsed.trajectories[0].points()[3].t.unwrap() - parsed.trajectories[0].points()[0].t.unwrap();
    assert!((t0 - 4.5).abs() < 1e-3);
}

fn paper_figure_spec() -> ExperimentSpec {
    ExperimentSpec {
        shapes: vec![Shape::Moderate],
        length_m: 300.0,
        noise_stack: miaa::noisesim::realistic_stack(),
        sizes: vec![3, 20],
        replications: 1,
        configs: vec![
            NamedConfig { name: "FRECHET".into(), config: calibration_config(MatchMode::Frechet) },
            NamedConfig { name: "DTW_L2".into(), config: calibration_config(MatchMode::DtwL2) },
        ],
        seed: 2024,
        npts: 1000,
        output_dir: None,
    }
}

#[test]
fn experiment_is_reproducible_and_plots_come_from_csv() {
    let spec = paper_figure_spec();
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows.len(), 4);
    let csv = rows_to_csv(&rows).unwrap();
    assert_eq!(csv, rows_to_csv(&run_experiment(&spec).unwrap()).unwrap());

    let plots = experiment_plots(&rows);
    assert_eq!(plots.len(), 2);
    let series: usize = plots.iter().map(|(_, svg)| svg.matches("class=\"series\"").count()).sum();
    assert_eq!(series, 4);
    let reparsed = rows_from_csv(&csv).unwrap();
    assert_eq!(experiment_plots(&reparsed), plots);
    assert_eq!(summarize(&reparsed), summarize(&rows));
}
