//! The analyzer: splits the input box into cells, propagates each through
//! the chosen propagator and merges the cell outputs into one estimate.

mod adaptive;
mod distance;
mod refine;
mod uniform;

pub use adaptive::{decompose_remainder, expand_seed_cell, run_agsg};
pub use distance::outside_distance;
pub use refine::{run_gsg, run_sg};
pub use uniform::run_uniform;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::geometry::{merge, BoundaryEstimate, Shape};
use crate::interval::IntervalBox;
use crate::nn::{sample_outputs, Network, SampleSet, DEFAULT_SAMPLES};
use crate::propagate::Propagator;

/// Default cell-size threshold as a fraction of the root box's widest side.
pub const DEFAULT_EPS_FRACTION: f64 = 0.04;
/// Default expansion step as a fraction of the root box's widest side.
pub const DEFAULT_EXPANSION_FRACTION: f64 = 0.1;
pub const DEFAULT_EXPANSION_MIN_STEP: f64 = 1e-3;
pub const DEFAULT_EXPANSION_MIN_MARGIN: f64 = 1e-3;
pub const DEFAULT_MAX_GRID_CELLS: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partitioner {
    None,
    Uniform,
    Sg,
    Gsg,
    Agsg,
}

impl Partitioner {
    pub const ALL: [Partitioner; 5] = [
        Partitioner::None,
        Partitioner::Uniform,
        Partitioner::Sg,
        Partitioner::Gsg,
        Partitioner::Agsg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Partitioner::None => "none",
            Partitioner::Uniform => "uniform",
            Partitioner::Sg => "sg",
            Partitioner::Gsg => "gsg",
            Partitioner::Agsg => "agsg",
        }
    }
}

impl std::fmt::Display for Partitioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Partitioner {
    type Err = ReachError;

    fn from_str(s: &str) -> Result<Self> {
        Partitioner::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ReachError::InvalidArgument(format!("unknown partitioner {s:?}")))
    }
}

/// Smallest-cell threshold: a cell whose every side is at most this is not split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellThreshold {
    /// Fraction of the root box's widest side.
    Relative(f64),
    Absolute(f64),
}

impl CellThreshold {
    fn resolve(self, root: &IntervalBox) -> f64 {
        match self {
            CellThreshold::Relative(f) => f * root.max_width(),
            CellThreshold::Absolute(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    pub propagator: Propagator,
    pub partitioner: Partitioner,
    pub shape: Shape,
    pub num_samples: usize,
    pub sample_seed: u64,
    pub cell_dim_threshold: Option<CellThreshold>,
    pub budget_calls: Option<u64>,
    pub budget_time_ms: Option<u64>,
    pub uniform_k: usize,
    /// Expansion step `e_s`; `None` means 0.1 x root width.
    pub expansion_step: Option<f64>,
    /// `e_p`: stop expanding once the halved step would fall below this.
    pub expansion_min_step: f64,
    /// `e_q`: stop expanding once the remaining margin falls below this.
    pub expansion_min_margin: f64,
    pub max_grid_cells: u64,
}

impl AnalyzerConfig {
    pub fn new(propagator: Propagator, partitioner: Partitioner, shape: Shape) -> Self {
        Self {
            propagator,
            partitioner,
            shape,
            num_samples: DEFAULT_SAMPLES,
            sample_seed: 0,
            cell_dim_threshold: Some(CellThreshold::Relative(DEFAULT_EPS_FRACTION)),
            budget_calls: None,
            budget_time_ms: None,
            uniform_k: 2,
            expansion_step: None,
            expansion_min_step: DEFAULT_EXPANSION_MIN_STEP,
            expansion_min_margin: DEFAULT_EXPANSION_MIN_MARGIN,
            max_grid_cells: DEFAULT_MAX_GRID_CELLS,
        }
    }

    pub fn with_budget_calls(mut self, calls: u64) -> Self {
        self.budget_calls = Some(calls);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sample_seed = seed;
        self
    }

    pub fn with_uniform_k(mut self, k: usize) -> Self {
        self.uniform_k = k;
        self
    }

    pub fn with_threshold(mut self, eps: Option<CellThreshold>) -> Self {
        self.cell_dim_threshold = eps;
        self
    }

    pub fn validate(&self, net: &Network, root: &IntervalBox) -> Result<()> {
        let bad = |msg: String| Err(ReachError::InvalidConfig(msg));
        if root.dim() != net.input_dim() {
            return Err(ReachError::Dimension {
                expected: net.input_dim(),
                actual: root.dim(),
            });
        }
        if self.cell_dim_threshold.is_none() && self.budget_calls.is_none() && self.budget_time_ms.is_none() {
            return bad("set at least one of cell threshold, call budget or time budget".into());
        }
        if let Some(CellThreshold::Absolute(e) | CellThreshold::Relative(e)) = self.cell_dim_threshold {
            if e <= 0.0 || !e.is_finite() {
                return bad(format!("cell threshold must be positive, got {e}"));
            }
        }
        if self.budget_calls == Some(0) {
            return bad("call budget must be positive".into());
        }
        if self.budget_time_ms == Some(0) {
            return bad("time budget must be positive".into());
        }
        if self.num_samples == 0 {
            return bad("sample count must be positive".into());
        }
        if self.uniform_k == 0 {
            return bad("uniform_k must be positive".into());
        }
        if let Some(s) = self.expansion_step {
            if s <= 0.0 || !s.is_finite() {
                return bad(format!("expansion step must be positive, got {s}"));
            }
        }
        if self.expansion_min_step.is_nan()
            || self.expansion_min_step <= 0.0
            || self.expansion_min_margin.is_nan()
            || self.expansion_min_margin <= 0.0
        {
            return bad("expansion minima must be positive".into());
        }
        if self.shape == Shape::ConvexHull && net.output_dim() != 2 {
            return bad(format!(
                "convex-hull shape needs 2 outputs, network has {}",
                net.output_dim()
            ));
        }
        Ok(())
    }

    pub(crate) fn threshold(&self, root: &IntervalBox) -> Option<f64> {
        self.cell_dim_threshold.map(|t| t.resolve(root))
    }

    pub(crate) fn step(&self, root: &IntervalBox) -> f64 {
        self.expansion_step
            .unwrap_or(DEFAULT_EXPANSION_FRACTION * root.max_width())
    }
}

/// One input region with the propagator's output box for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub region: IntervalBox,
    pub output: IntervalBox,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub estimate: BoundaryEstimate,
    /// Final frontier, in a deterministic order.
    pub cells: Vec<Cell>,
    pub propagator_calls: u64,
    pub partitions: usize,
    pub wall_time_ms: f64,
    /// The simulation set guiding sg/gsg/agsg; `None` for none/uniform.
    pub samples: Option<SampleSet>,
}

/// Propagator access with call accounting and the termination budgets.
pub(crate) struct Engine<'a> {
    pub net: &'a Network,
    pub cfg: &'a AnalyzerConfig,
    pub calls: u64,
    started: Instant,
}

impl<'a> Engine<'a> {
    pub fn new(net: &'a Network, cfg: &'a AnalyzerConfig) -> Self {
        Self {
            net,
            cfg,
            calls: 0,
            started: Instant::now(),
        }
    }

    pub fn propagate(&mut self, region: &IntervalBox) -> Result<IntervalBox> {
        self.calls += 1;
        self.cfg.propagator.propagate(self.net, region)
    }

    pub fn cell(&mut self, region: IntervalBox, depth: u32) -> Result<Cell> {
        let output = self.propagate(&region)?;
        Ok(Cell { region, output, depth })
    }

    /// Whether `n` more calls fit in the call budget and the deadline has not passed.
    pub fn can_spend(&self, n: u64) -> bool {
        if let Some(max) = self.cfg.budget_calls {
            if self.calls + n > max {
                return false;
            }
        }
        if let Some(ms) = self.cfg.budget_time_ms {
            if self.started.elapsed() >= Duration::from_millis(ms) {
                return false;
            }
        }
        true
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.started.elapsed().as_secs_f64() * 1e3
    }

    /// Bisects along the longest side and propagates both halves.
    pub fn bisect(&mut self, cell: &Cell) -> Result<(Cell, Cell)> {
        let (l, r) = cell.region.bisect(cell.region.longest_axis());
        let left = self.cell(l, cell.depth + 1)?;
        let right = self.cell(r, cell.depth + 1)?;
        if self.cfg.propagator == Propagator::Ibp {
            debug_assert!(
                children_within_parent(&cell.output, &left.output, &right.output),
                "IBP children escaped parent output {}",
                cell.output
            );
        }
        Ok((left, right))
    }

    /// Merges the frontier outputs, plus the simulated points when present.
    pub fn finish(&self, cells: Vec<Cell>, samples: Option<SampleSet>) -> Result<AnalysisResult> {
        let outputs: Vec<IntervalBox> = cells.iter().map(|c| c.output.clone()).collect();
        let extra = samples.as_ref().map_or(&[][..], |s| s.points.as_slice());
        let estimate = merge(&outputs, extra, self.cfg.shape)?;
        Ok(AnalysisResult {
            estimate,
            partitions: cells.len(),
            cells,
            propagator_calls: self.calls,
            wall_time_ms: self.elapsed_ms(),
            samples,
        })
    }
}

/// Interval-arithmetic refinement never loosens: both children's outputs lie
/// in the parent's (up to rounding).
pub fn children_within_parent(parent: &IntervalBox, left: &IntervalBox, right: &IntervalBox) -> bool {
    let merged = left.hull(right);
    (0..parent.dim()).all(|i| {
        let slack = 1e-9 * (1.0 + parent.lo()[i].abs().max(parent.hi()[i].abs()));
        merged.lo()[i] >= parent.lo()[i] - slack && merged.hi()[i] <= parent.hi()[i] + slack
    })
}

pub(crate) fn simulate(net: &Network, root: &IntervalBox, cfg: &AnalyzerConfig) -> Result<SampleSet> {
    sample_outputs(net, root, cfg.num_samples, cfg.sample_seed)
}

/// Runs the configured partitioner.
pub fn analyze(net: &Network, root: &IntervalBox, cfg: &AnalyzerConfig) -> Result<AnalysisResult> {
    cfg.validate(net, root)?;
    let result = match cfg.partitioner {
        Partitioner::None => {
            let mut engine = Engine::new(net, cfg);
            let cell = engine.cell(root.clone(), 0)?;
            engine.finish(vec![cell], None)
        }
        Partitioner::Uniform => run_uniform(net, root, cfg),
        Partitioner::Sg => run_sg(net, root, cfg),
        Partitioner::Gsg => run_gsg(net, root, cfg),
        Partitioner::Agsg => run_agsg(net, root, cfg),
    }?;
    tracing::debug!(
        partitioner = %cfg.partitioner,
        propagator = %cfg.propagator,
        calls = result.propagator_calls,
        partitions = result.partitions,
        "analysis finished"
    );
    Ok(result)
}
