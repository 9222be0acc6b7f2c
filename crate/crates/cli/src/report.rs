use serde::{Deserialize, Serialize};

use reach_core::geometry::estimate_error;
use reach_core::nn::truth_samples;
use reach_core::{
    AnalysisResult, AnalyzerConfig, BoundaryEstimate, IntervalBox, Network, ReachError, Result, SampleSet,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Random draws in the reference set used for error reporting.
pub const TRUTH_RANDOM: usize = 10_000;
/// XORed into the sample seed so the reference set never reuses the analyzer's samples.
pub const TRUTH_SALT: u64 = 0x7275_7468;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub sample: u64,
    pub truth: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub estimate: BoundaryEstimate,
    /// `None` when the true set has zero area/volume.
    pub error: Option<f64>,
    pub propagator_calls: u64,
    pub partitions: usize,
    pub wall_time_ms: f64,
}

/// The JSON artifact of one `analyze` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub net: String,
    pub input_box: IntervalBox,
    pub config: AnalyzerConfig,
    pub seeds: Seeds,
    pub result: Summary,
}

pub fn truth_seed(sample_seed: u64) -> u64 {
    sample_seed ^ TRUTH_SALT
}

/// Grid density for the reference set: dense for small inputs, random-only beyond 3.
fn truth_grid(dim: usize) -> usize {
    match dim {
        0..=2 => 101,
        3 => 21,
        _ => 0,
    }
}

/// Reference output set: a regular input grid plus [`TRUTH_RANDOM`] uniform draws.
pub fn reference_truth(net: &Network, input: &IntervalBox, seed: u64) -> Result<SampleSet> {
    truth_samples(net, input, truth_grid(input.dim()), TRUTH_RANDOM, seed)
}

/// Error of `result` against `truth`, or `None` when the metric is undefined.
pub fn error_against(result: &AnalysisResult, truth: &SampleSet) -> Result<Option<f64>> {
    match estimate_error(&result.estimate, truth, result.estimate.shape()) {
        Ok(e) => Ok(Some(e)),
        Err(ReachError::UndefinedError) => Ok(None),
        Err(e) => Err(e),
    }
}

impl Report {
    pub fn new(
        net_label: String,
        input_box: IntervalBox,
        config: AnalyzerConfig,
        result: &AnalysisResult,
        truth: &SampleSet,
    ) -> Result<Self> {
        Ok(Report {
            version: TOOL_VERSION.to_string(),
            net: net_label,
            seeds: Seeds {
                sample: config.sample_seed,
                truth: truth.seed,
            },
            input_box,
            config,
            result: Summary {
                estimate: result.estimate.clone(),
                error: error_against(result, truth)?,
                propagator_calls: result.propagator_calls,
                partitions: result.partitions,
                wall_time_ms: result.wall_time_ms,
            },
        })
    }
}
