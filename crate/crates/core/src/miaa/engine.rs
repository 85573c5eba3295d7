use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate_point, representative_of, select_master, MatchMode, MiaaConfig};
use crate::error::{Error, Result};
use crate::geometry::{Point, Trajectory};
use crate::matching::{connected_components, dtw_match, frechet_match, nn_match, Matching};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Converged,
    CycleDetected,
    IterMax,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "CONVERGED",
            Termination::CycleDetected => "CYCLE_DETECTED",
            Termination::IterMax => "ITER_MAX",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregationResult {
    pub aggregated: Trajectory,
    pub master_index: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub per_iteration_deltas: Vec<f64>,
    /// Initial master followed by the output of every iteration.
    pub masters: Vec<Trajectory>,
    /// Number of iterations in the detected cycle.
    pub cycle_period: Option<usize>,
}

/// What happened at one master vertex during a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTrace {
    pub master_point: Point,
    /// One per trajectory, in collection order.
    pub representatives: Vec<Point>,
    pub aggregated: Point,
    /// Ordered anchor candidates (empty without anchoring).
    pub anchor_candidates: Vec<Point>,
    pub anchor_sq_distances: Vec<f64>,
    pub output: Point,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StepTrace {
    pub matchings: Vec<Matching>,
    pub points: Vec<PointTrace>,
}

/// Squared distances closer than this (relative) count as tied.
pub const ANCHOR_TIE_RTOL: f64 = 1e-12;

pub(crate) fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= ANCHOR_TIE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Nearest member of `anchor_set` (squared L2). Ties, up to rounding, go to
/// the earliest.
pub fn anchor_index(candidate: &Point, anchor_set: &[Point]) -> usize {
    assert!(!anchor_set.is_empty(), "anchor set is empty");
    let d: Vec<f64> = anchor_set.iter().map(|p| candidate.dist2(p)).collect();
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    d.iter().position(|&v| ties(v, min)).unwrap()
}

pub fn anchor(candidate: &Point, anchor_set: &[Point]) -> Point {
    anchor_set[anchor_index(candidate, anchor_set)]
}

fn match_one(x: &Trajectory, master: &Trajectory, config: &MiaaConfig) -> Matching {
    match config.match_mode {
        MatchMode::DtwL1 => dtw_match(x, master, config.norm, 1).matching,
        MatchMode::DtwL2 => dtw_match(x, master, config.norm, 2).matching,
        MatchMode::Frechet => frechet_match(x, master, config.norm).matching,
        MatchMode::NearestNeighbour => nn_match(x, master, config.norm),
    }
}

/// For every master index, the trajectory indices it draws its
/// representative from.
fn groups_per_master(m: &Matching, n_x: usize, n_r: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); n_r];
    if m.ordered {
        for comp in connected_components(m, n_x, n_r) {
            for &j in &comp.master_indices {
                groups[j] = comp.traj_indices.clone();
            }
        }
    } else {
        for l in &m.links {
            groups[l.j].push(l.i);
        }
        for g in &mut groups {
            g.sort_unstable();
            g.dedup();
        }
    }
    groups
}

/// One matching / representative / aggregation pass. The output has exactly
/// as many points as `master`.
pub fn miaa_step(master: &Trajectory, collection: &[Trajectory], config: &MiaaConfig) -> Result<Trajectory> {
    step_impl(master, collection, config, None)
}

pub fn miaa_step_traced(
    master: &Trajectory,
    collection: &[Trajectory],
    config: &MiaaConfig,
) -> Result<(Trajectory, StepTrace)> {
    let mut trace = StepTrace::default();
    let out = step_impl(master, collection, config, Some(&mut trace))?;
    Ok((out, trace))
}

fn step_impl(
    master: &Trajectory,
    collection: &[Trajectory],
    config: &MiaaConfig,
    mut trace: Option<&mut StepTrace>,
) -> Result<Trajectory> {
    if collection.is_empty() {
        return Err(Error::InvalidInput("collection is empty".into()));
    }
    let n_r = master.len();
    let per_traj: Vec<(Matching, Vec<Vec<usize>>)> = collection
        .par_iter()
        .map(|x| {
            let m = match_one(x, master, config);
            let g = groups_per_master(&m, x.len(), n_r);
            (m, g)
        })
        .collect();

    let outputs: Vec<(Point, Option<PointTrace>)> = (0..n_r)
        .into_par_iter()
        .map(|j| {
            let r_j = &master.points()[j];
            let reps: Vec<Point> = collection
                .iter()
                .zip(&per_traj)
                .map(|(x, (_, groups))| representative_of(&groups[j], x, r_j, config.represent_mode))
                .collect();
            let aggregated = aggregate_point(&reps, config.agg_mode);
            let mut candidates = Vec::new();
            let output = if config.anchor {
                candidates.push(*r_j);
                for (x, (_, groups)) in collection.iter().zip(&per_traj) {
                    candidates.extend(groups[j].iter().map(|&i| x.points()[i]));
                }
                let a = anchor(&aggregated, &candidates);
                Point::new(a.x, a.y)
            } else {
                aggregated
            };
            let pt = trace.is_some().then(|| PointTrace {
                master_point: *r_j,
                anchor_sq_distances: candidates.iter().map(|c| c.dist2(&aggregated)).collect(),
                representatives: reps,
                aggregated,
                anchor_candidates: candidates,
                output,
            });
            (output, pt)
        })
        .collect();

    let mut points = Vec::with_capacity(n_r);
    let mut traced = Vec::new();
    for (p, t) in outputs {
        points.push(p);
        traced.extend(t);
    }
    if let Some(tr) = trace.as_mut() {
        tr.matchings = per_traj.into_iter().map(|(m, _)| m).collect();
        tr.points = traced;
    }
    Trajectory::new(master.id.clone(), points)
}

/// Root-mean-square of the index-paired L2 distances.
pub fn rms_pointwise_delta(a: &Trajectory, b: &Trajectory) -> f64 {
    let n = a.len().min(b.len());
    let s: f64 = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| p.dist2(q))
        .sum();
    (s / n as f64).sqrt()
}

/// Iterates [`miaa_step`] from the selected master until the RMS change
/// drops below the threshold, a previous master reappears exactly, or the
/// iteration cap is reached.
pub fn miaa_run(collection: &[Trajectory], config: &MiaaConfig) -> Result<AggregationResult> {
    config.validate()?;
    let master_index = select_master(collection, config.master_mode, config.seed)?;
    let mut master = Trajectory::new("aggregate", collection[master_index].points().to_vec())?;
    master = master.map_points(|p| Point::new(p.x, p.y))?;

    let mut seen: HashMap<Vec<(u64, u64)>, usize> = HashMap::new();
    seen.insert(master.coordinate_key(), 0);
    let mut masters = vec![master.clone()];
    let mut deltas = Vec::new();

    for it in 1..=config.iter_max {
        let next = miaa_step(&master, collection, config)?;
        let delta = rms_pointwise_delta(&master, &next);
        deltas.push(delta);
        masters.push(next.clone());

        if delta < config.threshold {
            return Ok(AggregationResult {
                aggregated: next,
                master_index,
                iterations: it,
                termination: Termination::Converged,
                per_iteration_deltas: deltas,
                masters,
                cycle_period: None,
            });
        }
        let key = next.coordinate_key();
        if let Some(&first) = seen.get(&key) {
            // Cycle members are masters[first + 1..=it]; deltas[k - 1] leads into masters[k].
            let best = (first + 1..=it)
                .min_by(|&a, &b| deltas[a - 1].total_cmp(&deltas[b - 1]).then(a.cmp(&b)))
                .unwrap();
            return Ok(AggregationResult {
                aggregated: masters[best].clone(),
                master_index,
                iterations: it,
                termination: Termination::CycleDetected,
                per_iteration_deltas: deltas,
                masters,
                cycle_period: Some(it - first),
            });
        }
        seen.insert(key, it);
        master = next;
    }
    Ok(AggregationResult {
        aggregated: master,
        master_index,
        iterations: config.iter_max,
        termination: Termination::IterMax,
        per_iteration_deltas: deltas,
        masters,
        cycle_period: None,
    })
}
