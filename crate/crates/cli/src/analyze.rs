use std::path::PathBuf;

use clap::Args;

use reach_core::partition::CellThreshold;
use reach_core::{analyze, AnalyzerConfig, IntervalBox, Network, Partitioner, Propagator, Shape};

use crate::error::{CliError, CliResult};
use crate::output::write_json;
use crate::report::{reference_truth, truth_seed, Report};
use crate::svg::render_svg;

pub fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive finite number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Network weight file (JSON).
    #[arg(long)]
    pub net: PathBuf,
    /// Input box as "lo,hi;lo,hi;...".
    #[arg(long, value_parser = IntervalBox::parse, allow_hyphen_values = true)]
    pub input_box: IntervalBox,
    #[arg(long, default_value = "crown")]
    pub propagator: Propagator,
    #[arg(long, default_value = "gsg")]
    pub partitioner: Partitioner,
    #[arg(long, default_value = "linf-ball")]
    pub shape: Shape,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub uniform_k: u64,
    /// Monte Carlo samples guiding the refinement.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Absolute smallest-cell side; defaults to 4% of the widest input side.
    #[arg(long, value_parser = positive_real)]
    pub eps: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_calls: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_time_ms: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional two-panel plot of cells and estimate.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

impl AnalyzeArgs {
    pub fn config(&self) -> AnalyzerConfig {
        let mut cfg = AnalyzerConfig::new(self.propagator, self.partitioner, self.shape)
            .with_seed(self.seed)
            .with_uniform_k(self.uniform_k as usize);
        cfg.num_samples = self.samples as usize;
        if let Some(eps) = self.eps {
            cfg = cfg.with_threshold(Some(CellThreshold::Absolute(eps)));
        }
        cfg.budget_calls = self.budget_calls;
        cfg.budget_time_ms = self.budget_time_ms;
        cfg
    }
}

/// Runs one analysis and builds its report.
pub fn run_analysis(args: &AnalyzeArgs) -> CliResult<Report> {
    let net = Network::load(&args.net)?;
    let cfg = args.config();
    let result = analyze(&net, &args.input_box, &cfg)?;
    let truth = reference_truth(&net, &args.input_box, truth_seed(cfg.sample_seed))?;
    if let Some(path) = &args.svg {
        render_svg(&result, &truth, path)?;
    }
    let report = Report::new(
        args.net.display().to_string(),
        args.input_box.clone(),
        cfg,
        &result,
        &truth,
    )?;
    Ok(report)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let report = run_analysis(args)?;
    tracing::info!(
        calls = report.result.propagator_calls,
        partitions = report.result.partitions,
        error = ?report.result.error,
        "analysis done"
    );
    match &args.out {
        Some(path) => write_json(path, &report),
        None => {
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}
