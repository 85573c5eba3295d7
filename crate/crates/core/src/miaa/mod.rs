//! The modular iterative aggregation engine.
//!
//! One iteration matches every trajectory against the current master, picks
//! one representative per master vertex and trajectory, and aggregates the
//! representatives into the next master. Four components, each swappable
//! through [`MiaaConfig`].

mod aggregate;
pub(crate) mod engine;
mod master;
mod represent;

pub use aggregate::{
    aggregate_point, geometric_median, marginal_median, mean_point, min_covering_circle, Circle,
    GeometricMedian,
};
pub use engine::{
    anchor, anchor_index, miaa_run, miaa_step, miaa_step_traced, rms_pointwise_delta,
    AggregationResult, PointTrace, StepTrace, Termination,
};
pub use master::select_master;
pub use represent::{representative, representative_of};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Norm;

pub const DEFAULT_THRESHOLD_M: f64 = 0.01;
pub const DEFAULT_ITER_MAX: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MasterMode {
    MedianLength,
    MinSumDistance,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchMode {
    DtwL1,
    DtwL2,
    Frechet,
    NearestNeighbour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RepresentMode {
    Barycentre,
    MedianTime,
    Furthest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AggMode {
    MarginalMedian,
    GeometricMedian,
    MeanL2,
    MinCoveringCircle,
}

macro_rules! enum_names {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$(<$ty>::$variant),+];

            pub fn name(&self) -> &'static str {
                match self { $(<$ty>::$variant => $name),+ }
            }
        }

        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.name())
            }
        }

        impl std::str::FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
                match wanted.as_str() {
                    $($name => Ok(<$ty>::$variant),)+
                    _ => Err(Error::InvalidInput(format!(
                        "unknown {} '{s}' (expected one of: {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

enum_names!(MasterMode {
    MedianLength => "MEDIAN_LENGTH",
    MinSumDistance => "MIN_SUM_DISTANCE",
    Random => "RANDOM",
});
enum_names!(MatchMode {
    DtwL1 => "DTW_L1",
    DtwL2 => "DTW_L2",
    Frechet => "FRECHET",
    NearestNeighbour => "NEAREST_NEIGHBOUR",
});
enum_names!(RepresentMode {
    Barycentre => "BARYCENTRE",
    MedianTime => "MEDIAN_TIME",
    Furthest => "FURTHEST",
});
enum_names!(AggMode {
    MarginalMedian => "MARGINAL_MEDIAN",
    GeometricMedian => "GEOMETRIC_MEDIAN",
    MeanL2 => "MEAN_L2",
    MinCoveringCircle => "MIN_COVERING_CIRCLE",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiaaConfig {
    pub master_mode: MasterMode,
    pub match_mode: MatchMode,
    pub represent_mode: RepresentMode,
    pub agg_mode: AggMode,
    #[serde(default)]
    pub anchor: bool,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_iter_max")]
    pub iter_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Point distance inside the matchers. `DTW_L1`/`DTW_L2` set the exponent,
    /// not this norm.
    #[serde(default)]
    pub norm: Norm,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD_M
}

fn default_iter_max() -> usize {
    DEFAULT_ITER_MAX
}

impl MiaaConfig {
    pub fn new(
        master_mode: MasterMode,
        match_mode: MatchMode,
        represent_mode: RepresentMode,
        agg_mode: AggMode,
    ) -> Self {
        MiaaConfig {
            master_mode,
            match_mode,
            represent_mode,
            agg_mode,
            anchor: false,
            threshold: DEFAULT_THRESHOLD_M,
            iter_max: DEFAULT_ITER_MAX,
            seed: None,
            norm: Norm::L2,
        }
    }

    pub fn with_anchor(mut self, anchor: bool) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must be finite and positive, got {}",
                self.threshold
            )));
        }
        if self.iter_max == 0 {
            return Err(Error::InvalidInput("iter_max must be at least 1".into()));
        }
        if self.master_mode == MasterMode::Random && self.seed.is_none() {
            return Err(Error::InvalidInput(
                "master_mode RANDOM requires a seed".into(),
            ));
        }
        Ok(())
    }
}

impl Default for MiaaConfig {
    /// Master by median length, DTW-L2, barycentre, marginal median, no anchor.
    fn default() -> Self {
        MiaaConfig::new(
            MasterMode::MedianLength,
            MatchMode::DtwL2,
            RepresentMode::Barycentre,
            AggMode::MarginalMedian,
        )
    }
}
