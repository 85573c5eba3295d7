use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MasterMode;
use crate::error::{Error, Result};
use crate::eval::quality_symmetric;
use crate::geometry::Trajectory;

/// Index of the trajectory that seeds the iteration.
///
/// `MIN_SUM_DISTANCE` uses the symmetric nearest-neighbour quality as the
/// inter-trajectory distance. Ties resolve to the lowest index.
pub fn select_master(collection: &[Trajectory], mode: MasterMode, seed: Option<u64>) -> Result<usize> {
    if collection.is_empty() {
        return Err(Error::InvalidInput(
            "cannot select a master from an empty collection".into(),
        ));
    }
    let idx = match mode {
        MasterMode::MedianLength => {
            let lengths: Vec<f64> = collection.iter().map(Trajectory::length).collect();
            let mut sorted = lengths.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            };
            argmin(lengths.iter().map(|l| (l - median).abs()).collect(), median)
        }
        MasterMode::MinSumDistance => {
            let n = collection.len();
            let mut sums = vec![0.0; n];
            for a in 0..n {
                for b in a + 1..n {
                    let d = quality_symmetric(&collection[a], &collection[b]);
                    sums[a] += d;
                    sums[b] += d;
                }
            }
            let scale = sums.iter().copied().fold(0.0, f64::max);
            argmin(sums, scale)
        }
        MasterMode::Random => {
            let seed = seed.ok_or_else(|| {
                Error::InvalidInput("master_mode RANDOM requires a seed".into())
            })?;
            ChaCha8Rng::seed_from_u64(seed).random_range(0..collection.len())
        }
    };
    Ok(idx)
}

/// Lowest index among values within rounding of the minimum; `scale` sets
/// the rounding magnitude.
fn argmin(values: Vec<f64>, scale: f64) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * scale.abs();
    values.iter().position(|&v| v - min <= tol).unwrap_or(0)
}
