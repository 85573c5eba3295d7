use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use miaa::experiment::{
    ground_truth, noisy_pool, rows_from_csv, rows_to_csv, run_experiment, ExperimentSpec,
    NamedConfig,
};
use miaa::eval::evaluate_with;
use miaa::geometry::AlignMode;
use miaa::io::{read_trajectories, write_trajectory_csv};
use miaa::miaa::{miaa_run, MiaaConfig};
use miaa::noisesim::{realistic_stack, NoiseLayer, Shape};
use miaa::plot::{experiment_plots, track_plot};
use miaa::{counterexample, Error, Trajectory};

use crate::{AggregateArgs, Cli, Command, EvaluateArgs, ExperimentArgs, GenerateArgs, GlobalArgs, PlotArgs};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    if cli.global.jobs > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global();
    }
    let g = &cli.global;
    match &cli.command {
        Command::Generate(a) => generate(g, a),
        Command::Aggregate(a) => aggregate(g, a),
        Command::Evaluate(a) => evaluate(g, a),
        Command::Experiment(a) => experiment(g, a),
        Command::Plot(a) => plot(g, a),
        Command::Counterexample => run_counterexample(g),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, String)> {
    let text = read_text(path)?;
    let value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok((value, text))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn parse_flag<T: std::str::FromStr<Err = Error>>(flag: &str, value: &str) -> Result<T> {
    value.parse().map_err(|e: Error| CliError::Usage(format!("--{flag}: {e}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateSpec {
    #[serde(default = "default_shape")]
    shape: Shape,
    #[serde(default = "default_length")]
    length_m: f64,
    #[serde(default = "default_count")]
    n_tracks: usize,
    #[serde(default = "realistic_stack")]
    noise_stack: Vec<NoiseLayer>,
}

fn default_shape() -> Shape {
    Shape::Straight
}

fn default_length() -> f64 {
    300.0
}

fn default_count() -> usize {
    10
}

fn generate(g: &GlobalArgs, a: &GenerateArgs) -> Result<()> {
    let (mut spec, source) = match &g.config {
        Some(p) => {
            let (s, text) = load_json::<GenerateSpec>(p)?;
            (s, Some(text))
        }
        None => (serde_json::from_str::<GenerateSpec>("{}").expect("defaults parse"), None),
    };
    if let Some(s) = &a.shape {
        spec.shape = parse_flag("shape", s)?;
    }
    if let Some(l) = a.length {
        spec.length_m = l;
    }
    if let Some(n) = a.count {
        spec.n_tracks = n;
    }
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    // Same streams as replication 0 of an experiment on this shape.
    let exp = ExperimentSpec {
        shapes: vec![spec.shape],
        length_m: spec.length_m,
        noise_stack: spec.noise_stack.clone(),
        sizes: vec![spec.n_tracks],
        replications: 1,
        configs: vec![NamedConfig {
            name: "unused".into(),
            config: MiaaConfig::default(),
        }],
        seed,
        npts: miaa::eval::DEFAULT_NPTS,
        output_dir: None,
    };
    exp.validate()?;
    let truth = ground_truth(&exp, 0)?.with_id("truth");
    let tracks = noisy_pool(&exp, 0, 0, &truth)?;

    ensure_dir(&g.out)?;
    write_trajectory_csv(&g.out.join("truth.csv"), &truth, &[format!("ground truth, {} seed {seed}", spec.shape.name())])?;
    let mut files = Vec::new();
    for t in &tracks {
        let name = format!("{}.csv", t.id);
        write_trajectory_csv(&g.out.join(&name), t, &[format!("noisy recording, seed {seed}")])?;
        files.push(name);
    }
    let manifest = json!({
        "command": "generate",
        "seed": seed,
        "spec": spec,
        "config_source": source,
        "truth": "truth.csv",
        "truth_points": truth.len(),
        "truth_length_m": truth.length(),
        "tracks": files,
    });
    write(&g.out.join("manifest.json"), to_json(&manifest)?)?;
    println!(
        "wrote truth.csv ({} points, {:.1} m) and {} noisy tracks to {}",
        truth.len(),
        truth.length(),
        tracks.len(),
        g.out.display()
    );
    Ok(())
}

/// Files to read for one positional input.
fn expand_input(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = fs::read_dir(path).map_err(|e| Error::io(path, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let lower = name.to_ascii_lowercase();
        if (lower.starts_with("track_") && lower.ends_with(".csv")) || lower.ends_with(".gpx") {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no track_*.csv or *.gpx files", path.display())).into());
    }
    Ok(files)
}

fn aggregate(g: &GlobalArgs, a: &AggregateArgs) -> Result<()> {
    let mut config = match &g.config {
        Some(p) => load_json::<MiaaConfig>(p)?.0,
        None => MiaaConfig::default(),
    };
    if let Some(s) = &a.master_mode {
        config.master_mode = parse_flag("master", s)?;
    }
    if let Some(s) = &a.match_mode {
        config.match_mode = parse_flag("match", s)?;
    }
    if let Some(s) = &a.represent_mode {
        config.represent_mode = parse_flag("represent", s)?;
    }
    if let Some(s) = &a.agg_mode {
        config.agg_mode = parse_flag("agg", s)?;
    }
    if a.anchor {
        config.anchor = true;
    }
    if let Some(t) = a.threshold {
        config.threshold = t;
    }
    if let Some(n) = a.iter_max {
        config.iter_max = n;
    }
    if let Some(s) = g.seed {
        config.seed = Some(s);
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let mut files = Vec::new();
    for p in &a.inputs {
        files.extend(expand_input(p)?);
    }
    let mut collection: Vec<Trajectory> = Vec::new();
    let mut inputs = Vec::new();
    for f in &files {
        for t in read_trajectories(f)? {
            inputs.push(json!({ "path": f.display().to_string(), "id": t.id, "points": t.len() }));
            collection.push(t);
        }
    }
    let result = miaa_run(&collection, &config)?;

    ensure_dir(&g.out)?;
    write_trajectory_csv(
        &g.out.join("aggregate.csv"),
        &result.aggregated,
        &[format!("aggregate of {} trajectories, {}", collection.len(), result.termination)],
    )?;
    let report = json!({
        "command": "aggregate",
        "config": config,
        "inputs": inputs,
        "master_index": result.master_index,
        "master_id": collection[result.master_index].id,
        "iterations": result.iterations,
        "termination": result.termination,
        "cycle_period": result.cycle_period,
        "per_iteration_deltas": result.per_iteration_deltas,
        "aggregate_points": result.aggregated.len(),
    });
    write(&g.out.join("report.json"), to_json(&report)?)?;
    write(
        &g.out.join("aggregate.svg"),
        track_plot("Aggregate over input traces", &collection, std::slice::from_ref(&result.aggregated)),
    )?;
    println!(
        "{} after {} iteration(s){}; wrote aggregate.csv, report.json, aggregate.svg to {}",
        result.termination,
        result.iterations,
        result.cycle_period.map(|p| format!(" (period {p})")).unwrap_or_default(),
        g.out.display()
    );
    Ok(())
}

fn single_trajectory(path: &Path) -> Result<Trajectory> {
    let mut ts = read_trajectories(path)?;
    if ts.len() != 1 {
        return Err(Error::InvalidInput(format!("{}: expected one trajectory, found {}", path.display(), ts.len())).into());
    }
    Ok(ts.remove(0))
}

fn evaluate(g: &GlobalArgs, a: &EvaluateArgs) -> Result<()> {
    if a.npts < 2 {
        return Err(CliError::Usage("--npts must be at least 2".into()));
    }
    let agg = single_trajectory(&a.agg)?;
    let truth = single_trajectory(&a.truth)?;
    let mode = if a.full_affine { AlignMode::FullAffine } else { AlignMode::Similarity };
    let mut report = evaluate_with(&agg, &truth, a.npts, mode)?;
    report.metadata.insert("aggregate".into(), a.agg.display().to_string());
    report.metadata.insert("truth".into(), a.truth.display().to_string());
    report.metadata.insert("alignment".into(), format!("{mode:?}").to_ascii_uppercase());

    ensure_dir(&g.out)?;
    write(&g.out.join("evaluation.json"), to_json(&report)?)?;
    write(
        &g.out.join("evaluation.csv"),
        format!("{}\n{}\n", miaa::eval::EvaluationReport::CSV_HEADER, report.csv_row()),
    )?;
    let truth_named = truth.clone().with_id("truth");
    let agg_named = agg.clone().with_id("aggregate");
    write(&g.out.join("evaluation.svg"), track_plot("Aggregate against ground truth", &[], &[truth_named, agg_named]))?;
    println!(
        "rmse {:.3} m, shape deviation {:.3} m, symmetric quality {:.3} m",
        report.rmse_m, report.shape_deviation_m, report.q_symmetric_m
    );
    Ok(())
}

fn experiment(g: &GlobalArgs, a: &ExperimentArgs) -> Result<()> {
    let (mut spec, source) = match &g.config {
        Some(p) => {
            let (s, text) = load_json::<ExperimentSpec>(p)?;
            (s, Some(text))
        }
        None => (ExperimentSpec::desk_default(DEFAULT_SEED), None),
    };
    if let Some(s) = g.seed {
        spec.seed = s;
    }
    if let Some(r) = a.reps {
        spec.replications = r;
    }
    if let Some(s) = &a.sizes {
        spec.sizes = s.clone();
    }
    if let Some(names) = &a.shapes {
        spec.shapes = names.iter().map(|n| parse_flag("shapes", n)).collect::<Result<_>>()?;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let out = if g.config.is_some() && g.out == Path::new("out") {
        spec.output_dir.clone().unwrap_or_else(|| g.out.clone())
    } else {
        g.out.clone()
    };

    let rows = run_experiment(&spec)?;
    ensure_dir(&out)?;
    write(&out.join("results.csv"), rows_to_csv(&rows)?)?;
    let mut plots = Vec::new();
    for (name, svg) in experiment_plots(&rows) {
        write(&out.join(&name), svg)?;
        plots.push(name);
    }
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let manifest = json!({
        "command": "experiment",
        "spec": spec,
        "config_source": source,
        "rows": rows.len(),
        "failed_cells": failures,
        "results": "results.csv",
        "plots": plots,
    });
    write(&out.join("manifest.json"), to_json(&manifest)?)?;
    println!("{} cells ({failures} failed); wrote results.csv, {} plots to {}", rows.len(), plots.len(), out.display());
    Ok(())
}

fn plot(g: &GlobalArgs, a: &PlotArgs) -> Result<()> {
    let csv_path = a.csv.clone().unwrap_or_else(|| g.out.join("results.csv"));
    let rows = rows_from_csv(&read_text(&csv_path)?)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", csv_path.display())))?;
    ensure_dir(&g.out)?;
    let plots = experiment_plots(&rows);
    for (name, svg) in &plots {
        write(&g.out.join(name), svg)?;
    }
    println!("wrote {} plots to {}", plots.len(), g.out.display());
    Ok(())
}

fn run_counterexample(g: &GlobalArgs) -> Result<()> {
    let r = counterexample::reproduce()?;
    let cfg = counterexample::config();
    ensure_dir(&g.out)?;
    for t in counterexample::trajectories() {
        write_trajectory_csv(&g.out.join(format!("{}.csv", t.id)), &t, &[])?;
    }
    write(&g.out.join("counterexample.json"), to_json(&json!({ "config": cfg, "report": r }))?)?;
    let fmt = |p: &miaa::Point| format!("({}, {})", p.x, p.y);
    println!("config: {} {} {} {} anchor={}", cfg.master_mode, cfg.match_mode, cfg.represent_mode, cfg.agg_mode, cfg.anchor);
    for (k, m) in r.run.masters.iter().enumerate() {
        let pts: Vec<String> = m.points().iter().map(fmt).collect();
        println!("master {k}: {}", pts.join(" "));
    }
    println!("iteration 2, first vertex: barycentre of y = {}", fmt(&r.barycentre));
    println!(
        "aggregated candidate {} ties at squared distance {} with {}",
        fmt(&r.second_iteration_first_point.aggregated),
        r.tie_sq_distance,
        r.tied_candidates.iter().map(fmt).collect::<Vec<_>>().join(" and ")
    );
    println!("anchored winner: {}", fmt(&r.anchored_winner));
    println!(
        "termination: {} after {} iterations, period {}",
        r.run.termination,
        r.run.iterations,
        r.run.cycle_period.map(|p| p.to_string()).unwrap_or_else(|| "-".into())
    );
    Ok(())
}
