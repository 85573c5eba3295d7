//! Calibration sweep: generate, aggregate and evaluate over a grid of
//! shapes, sample sizes, replications and engine configurations.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{evaluate_with, rmse_pointwise, DEFAULT_NPTS};
use crate::geometry::{AlignMode, Trajectory};
use crate::miaa::{miaa_run, AggMode, MasterMode, MatchMode, MiaaConfig, RepresentMode};
use crate::noisesim::{generate_base_track, realistic_stack, NoiseLayer, Shape, TrackNoiser};

/// Independent generator for `(seed, stream)`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const TRUTH_STREAMS: u64 = 1 << 32;
const POOL_STREAMS: u64 = 2 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedConfig {
    pub name: String,
    pub config: MiaaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub shapes: Vec<Shape>,
    #[serde(default = "default_length")]
    pub length_m: f64,
    pub noise_stack: Vec<NoiseLayer>,
    /// Sample sizes `N'`, non-decreasing.
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub configs: Vec<NamedConfig>,
    pub seed: u64,
    #[serde(default = "default_npts")]
    pub npts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_length() -> f64 {
    300.0
}

fn default_npts() -> usize {
    DEFAULT_NPTS
}

/// Engine settings of the calibration notebook, with the matcher swapped in.
pub fn calibration_config(match_mode: MatchMode) -> MiaaConfig {
    MiaaConfig::new(
        MasterMode::MedianLength,
        match_mode,
        RepresentMode::Barycentre,
        AggMode::MarginalMedian,
    )
}

impl ExperimentSpec {
    /// Three shapes, six sample sizes, FRECHET and DTW_L2.
    pub fn desk_default(seed: u64) -> Self {
        ExperimentSpec {
            shapes: Shape::ALL.to_vec(),
            length_m: 300.0,
            noise_stack: realistic_stack(),
            sizes: vec![1, 3, 5, 10, 15, 20],
            replications: 10,
            configs: vec![
                NamedConfig {
                    name: "FRECHET".into(),
                    config: calibration_config(MatchMode::Frechet),
                },
                NamedConfig {
                    name: "DTW_L2".into(),
                    config: calibration_config(MatchMode::DtwL2),
                },
            ],
            seed,
            npts: DEFAULT_NPTS,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.shapes.is_empty() {
            return bad("experiment needs at least one shape".into());
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a non-empty list of positive counts".into());
        }
        if self.sizes.windows(2).any(|w| w[1] < w[0]) {
            return bad(format!("sizes must be non-decreasing, got {:?}", self.sizes));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.configs.is_empty() {
            return bad("experiment needs at least one config".into());
        }
        if !(self.length_m.is_finite() && self.length_m > 0.0) {
            return bad(format!("length_m must be positive, got {}", self.length_m));
        }
        if self.npts < 2 {
            return bad("npts must be at least 2".into());
        }
        for (k, layer) in self.noise_stack.iter().enumerate() {
            layer
                .validate()
                .map_err(|e| Error::InvalidInput(format!("noise_stack[{k}]: {e}")))?;
        }
        for c in &self.configs {
            c.config
                .validate()
                .map_err(|e| Error::InvalidInput(format!("config '{}': {e}", c.name)))?;
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.shapes.len() * self.sizes.len() * self.replications * self.configs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub cell: usize,
    pub shape: Shape,
    pub n_traj: usize,
    pub rep: usize,
    pub config: String,
    pub match_mode: MatchMode,
    pub rmse_m: Option<f64>,
    pub shape_deviation_m: Option<f64>,
    pub q_symmetric_m: Option<f64>,
    /// Mean RMSE of the cell's individual noisy tracks against the truth.
    pub individual_rmse_m: Option<f64>,
    pub iterations: Option<usize>,
    pub termination: Option<String>,
    pub error: Option<String>,
}

pub fn ground_truth(spec: &ExperimentSpec, shape_index: usize) -> Result<Trajectory> {
    let mut rng = rng_stream(spec.seed, TRUTH_STREAMS + shape_index as u64);
    generate_base_track(spec.shapes[shape_index], spec.length_m, &mut rng)
}

/// Noisy tracks for one `(shape, replication)`; sample size `N'` takes the
/// first `N'` of them.
pub fn noisy_pool(spec: &ExperimentSpec, shape_index: usize, rep: usize, truth: &Trajectory) -> Result<Vec<Trajectory>> {
    let pool_size = *spec.sizes.iter().max().unwrap();
    let stream = POOL_STREAMS + (shape_index * spec.replications + rep) as u64;
    let mut rng = rng_stream(spec.seed, stream);
    let noiser = TrackNoiser::new(truth, &spec.noise_stack)?;
    Ok((0..pool_size)
        .map(|k| noiser.apply(&mut rng).with_id(format!("track_{k:03}")))
        .collect())
}

struct Pool {
    truth: Trajectory,
    tracks: Vec<Trajectory>,
    individual_rmse: Vec<f64>,
}

fn run_cell(spec: &ExperimentSpec, pool: &Pool, n_traj: usize, cfg: &NamedConfig) -> Result<(f64, f64, f64, usize, String)> {
    let sample = &pool.tracks[..n_traj];
    let result = miaa_run(sample, &cfg.config)?;
    let report = evaluate_with(&result.aggregated, &pool.truth, spec.npts, AlignMode::Similarity)?;
    Ok((
        report.rmse_m,
        report.shape_deviation_m,
        report.q_symmetric_m,
        result.iterations,
        result.termination.to_string(),
    ))
}

/// Runs every cell, in parallel on the current rayon pool. Row order and
/// content depend only on the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let n_shapes = spec.shapes.len();
    let reps = spec.replications;

    let truths: Vec<Result<Trajectory>> = (0..n_shapes).into_par_iter().map(|s| ground_truth(spec, s)).collect();
    let pools: Vec<std::result::Result<Pool, String>> = (0..n_shapes * reps)
        .into_par_iter()
        .map(|k| {
            let (s, rep) = (k / reps, k % reps);
            let truth = truths[s].as_ref().map_err(|e| e.to_string())?.clone();
            let tracks = noisy_pool(spec, s, rep, &truth).map_err(|e| e.to_string())?;
            let individual_rmse = tracks
                .iter()
                .map(|t| rmse_pointwise(t, &truth, spec.npts))
                .collect::<Result<Vec<f64>>>()
                .map_err(|e| e.to_string())?;
            Ok(Pool {
                truth,
                tracks,
                individual_rmse,
            })
        })
        .collect();

    let n_sizes = spec.sizes.len();
    let n_cfg = spec.configs.len();
    let rows = (0..spec.cell_count())
        .into_par_iter()
        .map(|cell| {
            let c = cell % n_cfg;
            let rep = (cell / n_cfg) % reps;
            let z = (cell / (n_cfg * reps)) % n_sizes;
            let s = cell / (n_cfg * reps * n_sizes);
            let n_traj = spec.sizes[z];
            let cfg = &spec.configs[c];
            let mut row = ExperimentRow {
                cell,
                shape: spec.shapes[s],
                n_traj,
                rep,
                config: cfg.name.clone(),
                match_mode: cfg.config.match_mode,
                rmse_m: None,
                shape_deviation_m: None,
                q_symmetric_m: None,
                individual_rmse_m: None,
                iterations: None,
                termination: None,
                error: None,
            };
            match &pools[s * reps + rep] {
                Err(e) => row.error = Some(e.clone()),
                Ok(pool) => {
                    let ind = &pool.individual_rmse[..n_traj];
                    row.individual_rmse_m = Some(ind.iter().sum::<f64>() / n_traj as f64);
                    match run_cell(spec, pool, n_traj, cfg) {
                        Ok((rmse, dev, q, it, term)) => {
                            row.rmse_m = Some(rmse);
                            row.shape_deviation_m = Some(dev);
                            row.q_symmetric_m = Some(q);
                            row.iterations = Some(it);
                            row.termination = Some(term);
                        }
                        Err(e) => row.error = Some(e.to_string()),
                    }
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Like [`run_experiment`] on a dedicated pool of `jobs` threads.
pub fn run_experiment_with_jobs(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<ExperimentRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| run_experiment(spec))
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Medians over replications for one `(shape, N', config)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub shape: Shape,
    pub n_traj: usize,
    pub config: String,
    pub median_rmse_m: Option<f64>,
    pub median_shape_deviation_m: Option<f64>,
    pub median_individual_rmse_m: Option<f64>,
    pub failures: usize,
}

pub fn summarize(rows: &[ExperimentRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(Shape, usize, String)> = Vec::new();
    for r in rows {
        let k = (r.shape, r.n_traj, r.config.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(shape, n_traj, config)| {
            let cell: Vec<&ExperimentRow> = rows
                .iter()
                .filter(|r| r.shape == shape && r.n_traj == n_traj && r.config == config)
                .collect();
            let pick = |f: fn(&ExperimentRow) -> Option<f64>| {
                median(&mut cell.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            CellSummary {
                median_rmse_m: pick(|r| r.rmse_m),
                median_shape_deviation_m: pick(|r| r.shape_deviation_m),
                median_individual_rmse_m: pick(|r| r.individual_rmse_m),
                failures: cell.iter().filter(|r| r.error.is_some()).count(),
                shape,
                n_traj,
                config,
            }
        })
        .collect()
}
