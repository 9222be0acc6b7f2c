//! Guaranteed over-approximation of a feedforward network's output set over
//! an input box.
//!
//! Three layers compose:
//! - [`propagate`]: sound output boxes in one pass (IBP, Fast-Lin, CROWN),
//! - [`partition`]: input splitting strategies (uniform, SG, GSG, AGSG) that
//!   drive a propagator per cell and merge the results,
//! - [`geometry`]: the requested boundary shape and its error metric.
//!
//! [`theory`] checks the closed-form volume reduction of a single split
//! against brute-force vertex enumeration.

pub mod arm;
pub mod error;
pub mod geometry;
pub mod interval;
pub mod nn;
pub mod partition;
pub mod propagate;
pub mod theory;

pub use error::{ReachError, Result};
pub use geometry::{BoundaryEstimate, Shape};
pub use interval::IntervalBox;
pub use nn::{Activation, Layer, Network, SampleSet};
pub use partition::{analyze, AnalysisResult, AnalyzerConfig, Partitioner};
pub use propagate::Propagator;

/// Slack used when checking sampled outputs against an estimate: `1e-9 * (1 + |x|)`.
pub const CONTAINMENT_TOL: f64 = 1e-9;
