use std::path::PathBuf;

use clap::Args;
use ndarray::{array, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use reach_core::nn::seeded_rng;
use reach_core::theory::{
    evaluate_case, optimal_ratio_scan, oracle_sweep, random_matrix, repeated_split_reduction, vred_closed_form,
    SplitSpec, SweepCase, ABS_FLOOR,
};

use crate::error::{CliError, CliResult};
use crate::output::write_json;
use crate::report::TOOL_VERSION;

pub const TWO_OUTPUT_CASES: usize = 100;
/// Two-output closed form vs `2r(1-r)|a||b|`, relative to `|a||b|`.
pub const TWO_OUTPUT_TOL: f64 = 64.0 * f64::EPSILON;
pub const RATIO_CASES: usize = 20;
pub const RATIO_GRID: usize = 1000;
/// Generators with an entry smaller than this are redrawn for the ratio scan.
pub const NONDEGENERATE_MIN: f64 = 0.1;
pub const SPLIT_ROUNDS: usize = 20;
pub const SPLIT_LIMIT_TOL: f64 = 1e-5;

/// The hand-checkable layer `[[2,1],[3,1]]`.
pub fn fixed_layer() -> Array2<f64> {
    array![[2.0, 1.0], [3.0, 1.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoOutputCheck {
    pub cases: usize,
    pub max_scaled_diff: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub cases: usize,
    pub grid: usize,
    pub ratios: Vec<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitLimitCheck {
    pub rounds: usize,
    pub cumulative: f64,
    pub limit: f64,
    pub abs_diff: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub version: String,
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub max_abs_diff: f64,
    pub max_rel_diff: f64,
    pub min_reduction: f64,
    pub fixed_case: SweepCase,
    pub failures: Vec<SweepCase>,
    pub two_output: TwoOutputCheck,
    pub optimal_ratio: RatioCheck,
    pub split_limit: SplitLimitCheck,
    pub passed: bool,
}

fn two_output_check(seed: u64, dims: &[usize]) -> reach_core::Result<TwoOutputCheck> {
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for t in 0..TWO_OUTPUT_CASES {
        let n_in = dims[t % dims.len()];
        let v = random_matrix(&mut rng, 2, n_in);
        let k = rng.random_range(0..n_in);
        let r = rng.random_range(0.0..=1.0);
        let closed = vred_closed_form(&v, SplitSpec::new(k, r)?)?;
        let scale = v[[0, k]].abs() * v[[1, k]].abs();
        let direct = 2.0 * r * (1.0 - r) * scale;
        worst = worst.max((closed - direct).abs() / scale.max(ABS_FLOOR));
    }
    Ok(TwoOutputCheck {
        cases: TWO_OUTPUT_CASES,
        max_scaled_diff: worst,
        ok: worst <= TWO_OUTPUT_TOL,
    })
}

fn ratio_check(seed: u64) -> reach_core::Result<RatioCheck> {
    let mut rng = seeded_rng(seed);
    let mut ratios = Vec::with_capacity(RATIO_CASES);
    for t in 0..RATIO_CASES {
        let n_out = 2 + t % 2;
        let n_in = 2 + (t / 2) % 3;
        let v = loop {
            let v = random_matrix(&mut rng, n_out, n_in);
            if v.iter().all(|x| x.abs() >= NONDEGENERATE_MIN) {
                break v;
            }
        };
        ratios.push(optimal_ratio_scan(&v, RATIO_GRID)?);
    }
    let ok = ratios.iter().all(|&r| r == 0.5);
    Ok(RatioCheck {
        cases: RATIO_CASES,
        grid: RATIO_GRID,
        ratios,
        ok,
    })
}

fn split_limit_check() -> reach_core::Result<SplitLimitCheck> {
    let v = fixed_layer();
    let (_, cumulative) = repeated_split_reduction(&v, SPLIT_ROUNDS)?;
    let limit = v[[0, 0]].abs() * v[[1, 0]].abs();
    let abs_diff = (cumulative - limit).abs();
    Ok(SplitLimitCheck {
        rounds: SPLIT_ROUNDS,
        cumulative,
        limit,
        abs_diff,
        ok: abs_diff <= SPLIT_LIMIT_TOL,
    })
}

pub fn run_theory(trials: usize, seed: u64, dims: &[usize]) -> CliResult<TheoryReport> {
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    let cases = oracle_sweep(trials, seed, dims).map_err(|e| CliError::Usage(e.to_string()))?;
    let fixed_case = evaluate_case(&fixed_layer(), SplitSpec::new(0, 0.5)?)?;
    let rel = |c: &SweepCase| c.abs_diff / c.closed_form.abs().max(c.brute.abs()).max(ABS_FLOOR);
    let all = || cases.iter().chain(std::iter::once(&fixed_case));
    let failures: Vec<SweepCase> = all().filter(|c| !c.ok).cloned().collect();
    let two_output = two_output_check(seed, dims)?;
    let optimal_ratio = ratio_check(seed)?;
    let split_limit = split_limit_check()?;
    let passed = failures.is_empty() && two_output.ok && optimal_ratio.ok && split_limit.ok;
    Ok(TheoryReport {
        version: TOOL_VERSION.to_string(),
        trials,
        seed,
        dims: dims.to_vec(),
        max_abs_diff: all().map(|c| c.abs_diff).fold(0.0, f64::max),
        max_rel_diff: all().map(rel).fold(0.0, f64::max),
        min_reduction: all().map(|c| c.closed_form).fold(f64::INFINITY, f64::min),
        fixed_case,
        failures,
        two_output,
        optimal_ratio,
        split_limit,
        passed,
    })
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Layer sizes to draw from, as a comma list.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_theory(args: &TheoryArgs) -> CliResult<()> {
    let report = run_theory(args.trials, args.seed, &args.dims)?;
    match &args.out {
        Some(p) => write_json(p, &report)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?
        ),
    }
    if report.passed {
        return Ok(());
    }
    let dump = match report.failures.first() {
        Some(case) => serde_json::to_string(case).unwrap_or_default(),
        None => format!(
            "two-output ok={} ratio ok={} split limit ok={}",
            report.two_output.ok, report.optimal_ratio.ok, report.split_limit.ok
        ),
    };
    Err(CliError::Mismatch(format!("theory check failed: {dump}")))
}
