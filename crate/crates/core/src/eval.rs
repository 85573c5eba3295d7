//! Aggregate-versus-ground-truth metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{affine_align, resample, AlignMode, Trajectory};

pub const DEFAULT_NPTS: usize = 1000;

/// Root mean square, over the vertices of `t1`, of the distance to the
/// closest vertex of `t2`.
pub fn quality_directed(t1: &Trajectory, t2: &Trajectory) -> f64 {
    let sum: f64 = t1
        .points()
        .iter()
        .map(|p| {
            t2.points()
                .iter()
                .map(|q| p.dist2(q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    (sum / t1.len() as f64).sqrt()
}

/// Mean of both directed qualities.
pub fn quality_symmetric(a: &Trajectory, b: &Trajectory) -> f64 {
    (quality_directed(a, b) + quality_directed(b, a)) / 2.0
}

fn paired_rmse(a: &Trajectory, b: &Trajectory) -> f64 {
    let m = a.len().min(b.len());
    let sum: f64 = a.points()[..m]
        .iter()
        .zip(&b.points()[..m])
        .map(|(p, q)| p.dist2(q))
        .sum();
    (sum / m as f64).sqrt()
}

/// Pointwise RMSE after resampling both curves to `npts`.
pub fn rmse_pointwise(agg: &Trajectory, truth: &Trajectory, npts: usize) -> Result<f64> {
    let a = resample(agg, npts)?;
    let t = resample(truth, npts)?;
    Ok(paired_rmse(&a, &t))
}

/// Symmetric nearest-neighbour quality after aligning `agg` onto `truth`.
pub fn shape_deviation(agg: &Trajectory, truth: &Trajectory, npts: usize) -> Result<f64> {
    shape_deviation_with(agg, truth, npts, AlignMode::Similarity)
}

pub fn shape_deviation_with(agg: &Trajectory, truth: &Trajectory, npts: usize, mode: AlignMode) -> Result<f64> {
    let aligned = affine_align(agg, truth, mode)?.aligned;
    let a = resample(&aligned, npts)?;
    let t = resample(truth, npts)?;
    Ok(quality_symmetric(&a, &t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rmse_m: f64,
    pub shape_deviation_m: f64,
    pub q_forward_m: f64,
    pub q_backward_m: f64,
    pub q_symmetric_m: f64,
    pub resample_npts: usize,
    #[serde(flatten)]
    pub metadata: BTreeMap<String, String>,
}

impl EvaluationReport {
    pub const CSV_HEADER: &'static str =
        "rmse_m,shape_deviation_m,q_forward_m,q_backward_m,q_symmetric_m,resample_npts";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.rmse_m,
            self.shape_deviation_m,
            self.q_forward_m,
            self.q_backward_m,
            self.q_symmetric_m,
            self.resample_npts
        )
    }
}

pub fn evaluate(agg: &Trajectory, truth: &Trajectory) -> Result<EvaluationReport> {
    evaluate_with(agg, truth, DEFAULT_NPTS, AlignMode::Similarity)
}

/// Forward/backward qualities are taken on the unaligned resampled curves.
pub fn evaluate_with(agg: &Trajectory, truth: &Trajectory, npts: usize, mode: AlignMode) -> Result<EvaluationReport> {
    let a = resample(agg, npts)?;
    let t = resample(truth, npts)?;
    let q_forward_m = quality_directed(&a, &t);
    let q_backward_m = quality_directed(&t, &a);
    Ok(EvaluationReport {
        rmse_m: paired_rmse(&a, &t),
        shape_deviation_m: shape_deviation_with(agg, truth, npts, mode)?,
        q_forward_m,
        q_backward_m,
        q_symmetric_m: (q_forward_m + q_backward_m) / 2.0,
        resample_npts: npts,
        metadata: BTreeMap::new(),
    })
}
