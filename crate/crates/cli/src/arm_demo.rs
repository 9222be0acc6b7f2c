use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use reach_core::arm::{fit_arm_network, joint_box};
use reach_core::nn::sample_outputs;
use reach_core::{analyze, AnalysisResult, AnalyzerConfig, Network, Partitioner, Propagator, Shape, CONTAINMENT_TOL};

use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json};
use crate::report::{error_against, reference_truth, truth_seed, TOOL_VERSION};
use crate::svg::render_svg;

pub const FIT_GRID: usize = 25;
pub const FIT_ITERATIONS: usize = 20_000;
pub const SOUNDNESS_SAMPLES: usize = 10_000;
/// Keeps the soundness draws apart from the analyzer's and the reference set's.
const SOUNDNESS_SALT: u64 = 0x736f_756e;

pub const PROPAGATORS: [Propagator; 3] = [Propagator::Ibp, Propagator::FastLin, Propagator::Crown];
pub const PARTITIONERS: [Partitioner; 3] = [Partitioner::Sg, Partitioner::Gsg, Partitioner::Agsg];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmRow {
    pub propagator: Propagator,
    pub partitioner: Partitioner,
    pub error: Option<f64>,
    pub propagator_calls: u64,
    pub partitions: usize,
    /// Fresh joint-space samples whose network output falls outside the estimate.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub version: String,
    pub budget_calls: u64,
    pub seed: u64,
    pub rows: Vec<ArmRow>,
}

/// Loads the cached network, or fits one and caches it when a path is given.
pub fn arm_network(cache: Option<&Path>, seed: u64) -> CliResult<Network> {
    if let Some(p) = cache {
        if p.exists() {
            return Ok(Network::load(p)?);
        }
    }
    let net = fit_arm_network(FIT_GRID, FIT_ITERATIONS, seed)?;
    if let Some(p) = cache {
        write_atomic(p, net.to_json_string().as_bytes())?;
    }
    Ok(net)
}

/// Runs the nine-method grid; results are in propagator-major order.
pub fn run_arm_grid(net: &Network, budget_calls: u64, seed: u64) -> CliResult<Vec<(ArmRow, AnalysisResult)>> {
    let root = joint_box();
    let truth = reference_truth(net, &root, truth_seed(seed))?;
    let check = sample_outputs(net, &root, SOUNDNESS_SAMPLES, seed ^ SOUNDNESS_SALT)?;
    let methods: Vec<(Propagator, Partitioner)> = PROPAGATORS
        .iter()
        .flat_map(|&p| PARTITIONERS.iter().map(move |&q| (p, q)))
        .collect();
    methods
        .par_iter()
        .map(|&(prop, part)| {
            let cfg = AnalyzerConfig::new(prop, part, Shape::ConvexHull)
                .with_budget_calls(budget_calls)
                .with_seed(seed);
            let result = analyze(net, &root, &cfg)?;
            let violations = check
                .points
                .iter()
                .filter(|p| !result.estimate.contains(p, CONTAINMENT_TOL))
                .count();
            let row = ArmRow {
                propagator: prop,
                partitioner: part,
                error: error_against(&result, &truth)?,
                propagator_calls: result.propagator_calls,
                partitions: result.partitions,
                violations,
            };
            Ok((row, result))
        })
        .collect()
}

pub fn format_table(rows: &[ArmRow]) -> String {
    let mut out = format!(
        "{:<18} {:>10} {:>12} {:>11}\n",
        "method", "Error", "Prop. Calls", "Partitions"
    );
    for r in rows {
        let err = r.error.map_or("n/a".to_string(), |e| format!("{e:.4}"));
        out.push_str(&format!(
            "{:<18} {:>10} {:>12} {:>11}\n",
            format!("{}+{}", r.propagator, r.partitioner),
            err,
            r.propagator_calls,
            r.partitions
        ));
    }
    out
}

#[derive(Debug, Clone, Args)]
pub struct ArmDemoArgs {
    #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(5..))]
    pub budget_calls: u64,
    #[arg(long, default_value_t = 3)]
    pub seed: u64,
    /// Fitted network cache: loaded when present, written after a fresh fit.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Table as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for the best/worst hull overlays.
    #[arg(long)]
    pub svg_dir: Option<PathBuf>,
}

pub fn cmd_arm_demo(args: &ArmDemoArgs) -> CliResult<()> {
    let net = arm_network(args.cache.as_deref(), args.seed)?;
    let grid = run_arm_grid(&net, args.budget_calls, args.seed)?;
    let rows: Vec<ArmRow> = grid.iter().map(|(r, _)| r.clone()).collect();
    print!("{}", format_table(&rows));

    if let Some(dir) = &args.svg_dir {
        let key = |i: &usize| rows[*i].error.unwrap_or(f64::INFINITY);
        let order: Vec<usize> = (0..rows.len()).collect();
        let best = *order
            .iter()
            .min_by(|a, b| key(a).total_cmp(&key(b)))
            .expect("nine rows");
        let worst = *order
            .iter()
            .max_by(|a, b| key(a).total_cmp(&key(b)))
            .expect("nine rows");
        let truth = reference_truth(&net, &joint_box(), truth_seed(args.seed))?;
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
        render_svg(&grid[best].1, &truth, &dir.join("arm_best.svg"))?;
        render_svg(&grid[worst].1, &truth, &dir.join("arm_worst.svg"))?;
    }
    if let Some(p) = &args.out {
        write_json(
            p,
            &ArmReport {
                version: TOOL_VERSION.to_string(),
                budget_calls: args.budget_calls,
                seed: args.seed,
                rows: rows.clone(),
            },
        )?;
    }
    let unsound: usize = rows.iter().map(|r| r.violations).sum();
    if unsound > 0 {
        return Err(CliError::Mismatch(format!(
            "{unsound} sampled outputs fell outside an estimate"
        )));
    }
    Ok(())
}
