//! The two-trajectory input for which anchored DTW-L1 aggregation never
//! converges but alternates between two masters.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{Point, Trajectory};
use crate::miaa::{
    miaa_run, miaa_step_traced, AggMode, AggregationResult, MasterMode, MatchMode, MiaaConfig,
    PointTrace, RepresentMode,
};

pub const FIRST: [(f64, f64); 4] = [(68.0, 20.0), (69.0, 22.0), (69.0, 24.0), (67.0, 25.0)];
pub const SECOND: [(f64, f64); 4] = [(71.0, 14.0), (71.0, 16.0), (72.0, 19.0), (70.0, 22.0)];

pub fn trajectories() -> Vec<Trajectory> {
    vec![
        Trajectory::from_xy("x", &FIRST).expect("valid constant"),
        Trajectory::from_xy("y", &SECOND).expect("valid constant"),
    ]
}

pub fn config() -> MiaaConfig {
    MiaaConfig::new(
        MasterMode::MinSumDistance,
        MatchMode::DtwL1,
        RepresentMode::Barycentre,
        AggMode::MarginalMedian,
    )
    .with_anchor(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub run: AggregationResult,
    /// Trace of the first master vertex during the second iteration.
    pub second_iteration_first_point: PointTrace,
    /// Representative of the second trajectory for that vertex.
    pub barycentre: Point,
    pub anchored_winner: Point,
    /// Candidates tied at the winning squared distance, in list order.
    pub tied_candidates: Vec<Point>,
    pub tie_sq_distance: f64,
}

pub fn reproduce() -> Result<CounterexampleReport> {
    let collection = trajectories();
    let cfg = config();
    let run = miaa_run(&collection, &cfg)?;
    // Replay the second iteration from the first iteration's output.
    let master = run.masters.get(1).cloned().unwrap_or_else(|| run.masters[0].clone());
    let (_, trace) = miaa_step_traced(&master, &collection, &cfg)?;
    let first = trace.points[0].clone();
    let best = first
        .anchor_sq_distances
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tied_candidates = first
        .anchor_candidates
        .iter()
        .zip(&first.anchor_sq_distances)
        .filter(|(_, &d)| crate::miaa::engine::ties(d, best))
        .map(|(p, _)| *p)
        .collect();
    Ok(CounterexampleReport {
        barycentre: first.representatives[1],
        anchored_winner: first.output,
        tied_candidates,
        tie_sq_distance: best,
        second_iteration_first_point: first,
        run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miaa::Termination;

    #[test]
    fn second_iteration_ties_and_picks_the_first_trajectory() {
        let r = reproduce().unwrap();
        assert_eq!(r.run.termination, Termination::CycleDetected);
        assert_eq!(r.run.cycle_period, Some(2));
        assert!((r.barycentre.x - 214.0 / 3.0).abs() < 1e-12);
        assert!((r.barycentre.y - 49.0 / 3.0).abs() < 1e-12);
        assert!((r.tie_sq_distance - 221.0 / 36.0).abs() < 1e-12);
        assert_eq!(r.tied_candidates, vec![Point::new(68., 20.), Point::new(72., 19.)]);
        assert_eq!(r.anchored_winner, Point::new(68., 20.));
    }
}
