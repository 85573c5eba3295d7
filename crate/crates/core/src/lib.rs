//! Trajectory aggregation for GNSS traces.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: points, polylines, arc length, resampling, alignment
//! - [`matching`]: DTW, discrete Fréchet and nearest-neighbour matchings
//! - [`miaa`]: the four-component iterative aggregation engine
//! - [`noisesim`]: synthetic paths and kernel-based correlated noise
//! - [`eval`]: RMSE, shape deviation and nearest-neighbour quality
//! - [`experiment`], [`plot`], [`io`]: sweep harness, SVG charts, file formats

pub mod counterexample;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod matching;
pub mod miaa;
pub mod noisesim;
pub mod plot;

pub use error::{Error, Result};
pub use geometry::{Norm, Point, Trajectory};
pub use miaa::{miaa_run, miaa_step, AggregationResult, MiaaConfig, Termination};
