//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use ndarray::{array, Array2};
use rand::Rng;
use rayon::prelude::*;

use reach_cli::arm_demo::{run_arm_grid, ArmRow, FIT_GRID, FIT_ITERATIONS};
use reach_cli::report::{error_against, reference_truth, truth_seed, Report};
use reach_core::arm::fit_arm_network;
use reach_core::nn::{random_network, sample_outputs, seeded_rng};
use reach_core::theory::{
    optimal_ratio_scan, oracle_sweep, random_matrix, repeated_split_reduction, vred_closed_form, SplitSpec, ABS_FLOOR,
};
use reach_core::{
    analyze, Activation, AnalyzerConfig, BoundaryEstimate, IntervalBox, Layer, Network, Partitioner, Propagator, Shape,
    CONTAINMENT_TOL,
};

// Pinned tolerances and limits.
const ORACLE_REL_TOL: f64 = 1e-9;
const ORACLE_ABS_FLOOR: f64 = 1e-12;
const ORACLE_CASES: usize = 120;
const ORACLE_TIME: Duration = Duration::from_secs(5);
/// Two-output closed form vs `2r(1-r)|a||b|`, scaled by `|a||b|`.
const TWO_OUTPUT_TOL: f64 = 64.0 * f64::EPSILON;
const TWO_OUTPUT_CASES: usize = 100;
const RATIO_CASES: usize = 20;
const RATIO_GRID: usize = 1000;
const SPLIT_ROUNDS: usize = 20;
const SPLIT_LIMIT: f64 = 6.0;
const SPLIT_TOL: f64 = 1e-5;
const SPLIT_TIME: Duration = Duration::from_secs(1);
const SWEEP_NETS: u64 = 10;
const SWEEP_BUDGET: u64 = 500;
const SWEEP_CHECK_SAMPLES: usize = 10_000;
const SWEEP_UNIFORM_K: usize = 4;
const SWEEP_TIME: Duration = Duration::from_secs(300);
const GSG_OVER_SG_MIN: usize = 8;
const CROWN_OVER_IBP_MIN: usize = 9;
const BISECTION_ROUNDS: u32 = 10;
const ARM_BUDGET: u64 = 600;
const ARM_SEED: u64 = 3;
const ARM_REDUCTION: f64 = 0.5;
const ARM_TIME: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn relu_net(seed: u64) -> Network {
    random_network(&[2, 50, 2], Activation::Relu, seed).unwrap()
}

fn unit_square() -> IntervalBox {
    IntervalBox::unit(2)
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let cases = oracle_sweep(ORACLE_CASES, 2024, &[2, 3, 4]).unwrap();
    let elapsed = t.elapsed();
    let mut worst_rel: f64 = 0.0;
    let mut bad = 0;
    let mut negative = 0;
    let mut shapes = std::collections::BTreeSet::new();
    for c in &cases {
        shapes.insert((c.v.len(), c.v[0].len()));
        let scale = c.closed_form.abs().max(c.brute.abs());
        if (c.closed_form - c.brute).abs() > (ORACLE_REL_TOL * scale).max(ORACLE_ABS_FLOOR) {
            bad += 1;
        }
        worst_rel = worst_rel.max(c.abs_diff / scale.max(ORACLE_ABS_FLOOR));
        if c.closed_form < 0.0 || c.brute < -ORACLE_ABS_FLOOR {
            negative += 1;
        }
    }
    outcome(
        bad == 0 && negative == 0 && shapes.len() == 9 && elapsed < ORACLE_TIME,
        format!(
            "{} cases over {} shapes, {bad} mismatches, {negative} negative, max rel diff {worst_rel:.2e}, {:.2}s",
            cases.len(),
            shapes.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn two_output_closed_form() -> Outcome {
    let mut rng = seeded_rng(11);
    let mut worst: f64 = 0.0;
    for t in 0..TWO_OUTPUT_CASES {
        let n_in = 2 + t % 3;
        let v = random_matrix(&mut rng, 2, n_in);
        let k = rng.random_range(0..n_in);
        let r: f64 = rng.random_range(0.0..=1.0);
        let closed = vred_closed_form(&v, SplitSpec::new(k, r).unwrap()).unwrap();
        let scale = v[[0, k]].abs() * v[[1, k]].abs();
        worst = worst.max((closed - 2.0 * r * (1.0 - r) * scale).abs() / scale.max(ABS_FLOOR));
    }
    let mut off_half = Vec::new();
    for t in 0..RATIO_CASES {
        let n_out = 2 + t % 2;
        let v: Array2<f64> = loop {
            let v = random_matrix(&mut rng, n_out, 2 + (t / 2) % 3);
            if v.iter().all(|x| x.abs() >= 0.1) {
                break v;
            }
        };
        let r = optimal_ratio_scan(&v, RATIO_GRID).unwrap();
        if r != 0.5 {
            off_half.push(r);
        }
    }
    outcome(
        worst <= TWO_OUTPUT_TOL && off_half.is_empty(),
        format!(
            "{TWO_OUTPUT_CASES} two-output cases, max scaled diff {worst:.2e}; optimal ratio 0.5 on {}/{RATIO_CASES}",
            RATIO_CASES - off_half.len()
        ),
    )
}

fn repeated_split_limit() -> Outcome {
    let t = Instant::now();
    let v = array![[2.0, 1.0], [3.0, 1.0]];
    let (_, cumulative) = repeated_split_reduction(&v, SPLIT_ROUNDS).unwrap();
    let elapsed = t.elapsed();
    let diff = (cumulative - SPLIT_LIMIT).abs();
    outcome(
        diff <= SPLIT_TOL && elapsed < SPLIT_TIME,
        format!("cumulative after {SPLIT_ROUNDS} rounds {cumulative:.9}, |diff| {diff:.2e}"),
    )
}

struct SweepRun {
    label: String,
    partitioner: Partitioner,
    calls: u64,
    partitions: usize,
    violations: usize,
    report_text: String,
}

fn sweep_once() -> Vec<SweepRun> {
    let jobs: Vec<(u64, Propagator, Partitioner, Shape)> = (0..SWEEP_NETS)
        .flat_map(|seed| {
            Propagator::ALL.into_iter().flat_map(move |prop| {
                Partitioner::ALL
                    .into_iter()
                    .flat_map(move |part| Shape::ALL.into_iter().map(move |shape| (seed, prop, part, shape)))
            })
        })
        .collect();
    let nets: Vec<(Network, reach_core::SampleSet, reach_core::SampleSet)> = (0..SWEEP_NETS)
        .map(|seed| {
            let net = relu_net(seed);
            let check = sample_outputs(&net, &unit_square(), SWEEP_CHECK_SAMPLES, 50_000 + seed).unwrap();
            let truth = reference_truth(&net, &unit_square(), truth_seed(seed)).unwrap();
            (net, check, truth)
        })
        .collect();
    jobs.par_iter()
        .map(|&(seed, prop, part, shape)| {
            let (net, check, truth) = &nets[seed as usize];
            let cfg = AnalyzerConfig::new(prop, part, shape)
                .with_budget_calls(SWEEP_BUDGET)
                .with_uniform_k(SWEEP_UNIFORM_K)
                .with_seed(seed);
            let r = analyze(net, &unit_square(), &cfg).unwrap();
            let violations = check
                .points
                .iter()
                .filter(|p| !r.estimate.contains(p, CONTAINMENT_TOL))
                .count();
            let mut report = Report::new(format!("relu-2-50-2-seed-{seed}"), unit_square(), cfg, &r, truth).unwrap();
            report.result.wall_time_ms = 0.0;
            SweepRun {
                label: format!("seed {seed} {prop}/{part}/{shape}"),
                partitioner: part,
                calls: r.propagator_calls,
                partitions: r.partitions,
                violations,
                report_text: serde_json::to_string(&report).unwrap(),
            }
        })
        .collect()
}

fn soundness(runs: &[SweepRun], elapsed: Duration) -> Outcome {
    let violations: usize = runs.iter().map(|r| r.violations).sum();
    let over_budget = runs.iter().filter(|r| r.calls > SWEEP_BUDGET).count();
    let first = runs.iter().find(|r| r.violations > 0).map(|r| r.label.clone());
    outcome(
        violations == 0 && over_budget == 0 && runs.len() == 450 && elapsed < SWEEP_TIME,
        format!(
            "{} runs x {SWEEP_CHECK_SAMPLES} samples, {violations} violations{}, {over_budget} over budget, {:.1}s",
            runs.len(),
            first.map_or(String::new(), |l| format!(" (first: {l})")),
            elapsed.as_secs_f64()
        ),
    )
}

fn accounting(runs: &[SweepRun]) -> Outcome {
    let refined: Vec<&SweepRun> = runs
        .iter()
        .filter(|r| matches!(r.partitioner, Partitioner::Sg | Partitioner::Gsg))
        .collect();
    let broken: Vec<&SweepRun> = refined
        .iter()
        .copied()
        .filter(|r| r.calls != 2 * r.partitions as u64 - 1)
        .collect();
    outcome(
        broken.is_empty() && refined.len() == 180,
        format!(
            "{} sg/gsg runs, {} break calls = 2 partitions - 1{}",
            refined.len(),
            broken.len(),
            broken
                .first()
                .map_or(String::new(), |r| format!(" (first: {})", r.label))
        ),
    )
}

fn error_of(net: &Network, truth: &reach_core::SampleSet, prop: Propagator, part: Partitioner, seed: u64) -> f64 {
    let cfg = AnalyzerConfig::new(prop, part, Shape::ConvexHull)
        .with_budget_calls(SWEEP_BUDGET)
        .with_seed(seed);
    let r = analyze(net, &unit_square(), &cfg).unwrap();
    error_against(&r, truth).unwrap().expect("2-D reachable set has area")
}

fn method_ordering() -> Outcome {
    let per_seed: Vec<(bool, bool)> = (0..SWEEP_NETS)
        .into_par_iter()
        .map(|seed| {
            let net = relu_net(seed);
            let truth = reference_truth(&net, &unit_square(), truth_seed(seed)).unwrap();
            let e = |prop, part| error_of(&net, &truth, prop, part, seed);
            (
                e(Propagator::Crown, Partitioner::Gsg) <= e(Propagator::Crown, Partitioner::Sg),
                e(Propagator::Crown, Partitioner::None) <= e(Propagator::Ibp, Partitioner::None),
            )
        })
        .collect();
    let gsg = per_seed.iter().filter(|p| p.0).count();
    let crown = per_seed.iter().filter(|p| p.1).count();
    outcome(
        gsg >= GSG_OVER_SG_MIN && crown >= CROWN_OVER_IBP_MIN,
        format!("gsg <= sg on {gsg}/10 seeds; crown <= ibp unpartitioned on {crown}/10 seeds"),
    )
}

fn single_box(est: &BoundaryEstimate) -> (f64, f64) {
    match est {
        BoundaryEstimate::BoxBound { bounds } => (bounds.lo()[0], bounds.hi()[0]),
        other => panic!("expected a box, got {other:?}"),
    }
}

fn cancellation_halving() -> Outcome {
    let net = Network::new(vec![
        Layer::new(array![[1.0], [1.0]], array![0.0, 0.0], Activation::Linear).unwrap(),
        Layer::new(array![[1.0, -1.0]], array![0.0], Activation::Linear).unwrap(),
    ])
    .unwrap();
    let root = IntervalBox::unit(1);
    let run = |part, k| {
        let cfg = AnalyzerConfig::new(Propagator::Ibp, part, Shape::LinfBall).with_uniform_k(k);
        single_box(&analyze(&net, &root, &cfg).unwrap().estimate)
    };
    let whole = run(Partitioner::None, 1);
    let halves = run(Partitioner::Uniform, 2);
    let mut halving = true;
    for j in 0..=BISECTION_ROUNDS {
        let (lo, hi) = run(Partitioner::Uniform, 1usize << j);
        let expected = 2f64.powi(-(j as i32));
        halving &= lo == -expected && hi == expected;
    }
    outcome(
        whole == (-1.0, 1.0) && halves == (-0.5, 0.5) && halving,
        format!("unsplit {whole:?}, two cells {halves:?}, width 2^(1-j) for j = 0..={BISECTION_ROUNDS}: {halving}"),
    )
}

fn arm_ordering() -> Outcome {
    let t = Instant::now();
    let net = fit_arm_network(FIT_GRID, FIT_ITERATIONS, ARM_SEED).unwrap();
    let rows: Vec<ArmRow> = run_arm_grid(&net, ARM_BUDGET, ARM_SEED)
        .unwrap()
        .into_iter()
        .map(|(r, _)| r)
        .collect();
    let elapsed = t.elapsed();
    let err = |prop, part| {
        rows.iter()
            .find(|r| r.propagator == prop && r.partitioner == part)
            .and_then(|r| r.error)
            .unwrap()
    };
    let base = err(Propagator::Ibp, Partitioner::Sg);
    let agsg = err(Propagator::Crown, Partitioner::Agsg);
    let gsg = err(Propagator::Crown, Partitioner::Gsg);
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let budget_ok = rows.iter().all(|r| r.propagator_calls <= ARM_BUDGET);
    outcome(
        agsg <= (1.0 - ARM_REDUCTION) * base
            && gsg <= (1.0 - ARM_REDUCTION) * base
            && violations == 0
            && rows.len() == 9
            && budget_ok
            && elapsed < ARM_TIME,
        format!(
            "ibp+sg {base:.4}, crown+agsg {agsg:.4} ({:.0}% lower), crown+gsg {gsg:.4} ({:.0}% lower), {violations} violations, {:.1}s",
            100.0 * (1.0 - agsg / base),
            100.0 * (1.0 - gsg / base),
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism(first: &[SweepRun], second: &[SweepRun]) -> Outcome {
    let differing = first
        .iter()
        .zip(second)
        .filter(|(a, b)| a.report_text != b.report_text)
        .count();
    outcome(
        differing == 0 && first.len() == second.len(),
        format!("{} reports compared, {differing} differ", first.len()),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "closed form matches enumeration", oracle_equivalence()));
    results.push((2, "two-output closed form and optimal ratio", two_output_closed_form()));
    results.push((3, "repeated-split reduction limit", repeated_split_limit()));

    let t = Instant::now();
    let first = sweep_once();
    let sweep_time = t.elapsed();
    results.push((4, "soundness sweep", soundness(&first, sweep_time)));
    results.push((5, "sg/gsg call accounting", accounting(&first)));
    results.push((6, "method ordering at equal budget", method_ordering()));
    results.push((7, "cancellation net halving", cancellation_halving()));
    results.push((8, "arm demo ordering and soundness", arm_ordering()));
    let second = sweep_once();
    results.push((9, "determinism", determinism(&first, &second)));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {n}: {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
