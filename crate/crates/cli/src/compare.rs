use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use reach_core::nn::random_network;
use reach_core::partition::CellThreshold;
use reach_core::{analyze, Activation, AnalyzerConfig, IntervalBox, Network, Partitioner, Propagator, Shape};

use crate::error::{CliError, CliResult};
use crate::output::write_atomic;
use crate::report::{error_against, reference_truth, truth_seed};
use crate::svg::{tradeoff_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodPair {
    pub propagator: Propagator,
    pub partitioner: Partitioner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetSource {
    /// Weight file; relative paths resolve against the spec file's directory.
    Path(PathBuf),
    /// Seeded random network; without a fixed seed each run seed also seeds the network.
    Random {
        layers: Vec<usize>,
        activation: Activation,
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// The swept resource: call budgets or wall-time budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetAxis {
    Calls(Vec<u64>),
    TimeMs(Vec<u64>),
}

impl BudgetAxis {
    fn values(&self) -> &[u64] {
        match self {
            BudgetAxis::Calls(v) | BudgetAxis::TimeMs(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub pairs: Vec<MethodPair>,
    pub net: NetSource,
    pub input_box: String,
    pub shape: Shape,
    pub budgets: BudgetAxis,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub uniform_k: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
}

impl CompareSpec {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let spec: CompareSpec =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad compare spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.pairs.is_empty() {
            return Err(CliError::Usage("compare spec has no method pairs".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Usage("compare spec has no seeds".into()));
        }
        let budgets = self.budgets.values();
        if budgets.is_empty() || budgets.contains(&0) {
            return Err(CliError::Usage(
                "budgets must be a nonempty list of positive values".into(),
            ));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::Usage(format!("eps must be positive, got {e}")));
            }
        }
        IntervalBox::parse(&self.input_box).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(())
    }

    fn network(&self, seed: u64, base: &Path) -> CliResult<Network> {
        Ok(match &self.net {
            NetSource::Path(p) => Network::load(base.join(p))?,
            NetSource::Random {
                layers,
                activation,
                seed: fixed,
            } => random_network(layers, *activation, fixed.unwrap_or(seed))?,
        })
    }

    fn config(&self, pair: MethodPair, seed: u64, budget: u64) -> AnalyzerConfig {
        let mut cfg = AnalyzerConfig::new(pair.propagator, pair.partitioner, self.shape).with_seed(seed);
        if let Some(n) = self.samples {
            cfg.num_samples = n;
        }
        if let Some(k) = self.uniform_k {
            cfg.uniform_k = k;
        }
        if let Some(e) = self.eps {
            cfg = cfg.with_threshold(Some(CellThreshold::Absolute(e)));
        }
        match self.budgets {
            BudgetAxis::Calls(_) => cfg.budget_calls = Some(budget),
            BudgetAxis::TimeMs(_) => cfg.budget_time_ms = Some(budget),
        }
        cfg
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub pair: String,
    pub seed: u64,
    pub budget: u64,
    pub calls: u64,
    pub partitions: usize,
    pub error: Option<f64>,
    pub time_ms: f64,
    #[serde(skip)]
    pub order: usize,
}

/// Runs every pair x seed x budget cell; rows come back sorted by
/// (pair position in the spec, seed, budget).
pub fn run_compare(spec: &CompareSpec, base: &Path) -> CliResult<Vec<CompareRow>> {
    spec.validate()?;
    let input = IntervalBox::parse(&spec.input_box).map_err(|e| CliError::Usage(e.to_string()))?;
    let per_seed: Vec<(u64, Network, reach_core::SampleSet)> = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let net = spec.network(seed, base)?;
            let truth = reference_truth(&net, &input, truth_seed(seed))?;
            Ok((seed, net, truth))
        })
        .collect::<CliResult<_>>()?;

    let jobs: Vec<(usize, MethodPair, usize, u64)> = spec
        .pairs
        .iter()
        .enumerate()
        .flat_map(|(i, &pair)| {
            (0..per_seed.len()).flat_map(move |s| spec.budgets.values().iter().map(move |&b| (i, pair, s, b)))
        })
        .collect();

    let mut rows = jobs
        .par_iter()
        .map(|&(order, pair, s, budget)| {
            let (seed, net, truth) = &per_seed[s];
            let cfg = spec.config(pair, *seed, budget);
            let result = analyze(net, &input, &cfg)?;
            Ok(CompareRow {
                pair: format!("{}+{}", pair.propagator, pair.partitioner),
                seed: *seed,
                budget,
                calls: result.propagator_calls,
                partitions: result.partitions,
                error: error_against(&result, truth)?,
                time_ms: result.wall_time_ms,
                order,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.order, r.seed, r.budget));
    Ok(rows)
}

pub fn rows_to_csv(rows: &[CompareRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn rows_to_series(spec: &CompareSpec, rows: &[CompareRow]) -> Vec<Series> {
    spec.pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| Series {
            propagator: pair.propagator,
            partitioner: pair.partitioner,
            points: rows
                .iter()
                .filter(|r| r.order == i)
                .filter_map(|r| r.error.map(|e| (r.calls as f64, e)))
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Comparison spec (JSON).
    pub spec: PathBuf,
    /// CSV destination; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Error-vs-calls chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec = CompareSpec::from_json(&text)?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let rows = run_compare(&spec, base)?;
    tracing::info!(rows = rows.len(), "comparison done");
    let csv = rows_to_csv(&rows)?;
    match &args.out {
        Some(p) => write_atomic(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if let Some(p) = &args.svg {
        write_atomic(p, tradeoff_chart(&rows_to_series(&spec, &rows)).as_bytes())?;
    }
    Ok(())
}
