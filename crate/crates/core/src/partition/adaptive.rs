//! AGSG: grow a cell around the "middle" sample while its output stays inside
//! the simulated boundary, then run GSG on what is left of the input set.

use super::distance::{outside_distance, sample_reference};
use super::refine::greedy_refine;
use super::{simulate, AnalysisResult, AnalyzerConfig, Cell, Engine};
use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::{Network, SampleSet};

/// Calls held back during expansion so every remainder slab can be propagated.
const REMAINDER_RESERVE: u64 = 4;

fn require_2d(root: &IntervalBox) -> Result<()> {
    if root.dim() != 2 {
        return Err(ReachError::UnsupportedDimension(root.dim()));
    }
    Ok(())
}

/// Sampled input whose output is nearest the centroid of all sampled outputs.
fn seed_input(samples: &SampleSet) -> Result<&[f64]> {
    let n = samples.points.len();
    if n == 0 {
        return Err(ReachError::InvalidArgument("no samples to seed expansion".into()));
    }
    let dim = samples.points[0].len();
    let centroid: Vec<f64> = (0..dim)
        .map(|i| samples.points.iter().map(|p| p[i]).sum::<f64>() / n as f64)
        .collect();
    let dist2 = |p: &[f64]| p.iter().zip(&centroid).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let best = (0..n)
        .min_by(|&a, &b| dist2(&samples.points[a]).total_cmp(&dist2(&samples.points[b])))
        .expect("nonempty");
    Ok(&samples.inputs[best])
}

fn grow(cell: &IntervalBox, step: f64, root: &IntervalBox) -> IntervalBox {
    let lo = (0..cell.dim())
        .map(|i| (cell.lo()[i] - step).max(root.lo()[i]))
        .collect();
    let hi = (0..cell.dim())
        .map(|i| (cell.hi()[i] + step).min(root.hi()[i]))
        .collect();
    IntervalBox::from_parts_unchecked(lo, hi)
}

/// Largest gap between a side of `inner` and the matching side of `outer`.
fn margin(outer: &IntervalBox, inner: &IntervalBox) -> f64 {
    (0..outer.dim())
        .map(|i| (inner.lo()[i] - outer.lo()[i]).max(outer.hi()[i] - inner.hi()[i]))
        .fold(0.0, f64::max)
}

fn expand(engine: &mut Engine<'_>, root: &IntervalBox, samples: &SampleSet) -> Result<Cell> {
    let cfg = engine.cfg;
    let mut accepted = engine.cell(IntervalBox::point(seed_input(samples)?)?, 0)?;
    let mut step = cfg.step(root);
    // Inside the sample box and, for hulls, inside the sample hull as well:
    // box corners outside the hull would inflate the merged estimate.
    let reference = sample_reference(samples, cfg.shape)?;
    let inside = |out: &IntervalBox| -> Result<bool> {
        Ok(out.is_subset_of(&samples.enclosing_box) && outside_distance(out, &reference)? <= 0.0)
    };
    loop {
        if margin(root, &accepted.region) < cfg.expansion_min_margin {
            break;
        }
        if !engine.can_spend(1 + REMAINDER_RESERVE) {
            break;
        }
        let candidate = engine.cell(grow(&accepted.region, step, root), 0)?;
        if inside(&candidate.output)? {
            accepted = candidate;
        } else {
            if step / 2.0 < cfg.expansion_min_step {
                break;
            }
            step /= 2.0;
        }
    }
    Ok(accepted)
}

/// Grows the expansion cell `[eta_e]` inside `root`.
pub fn expand_seed_cell(
    net: &Network,
    root: &IntervalBox,
    cfg: &AnalyzerConfig,
    samples: &SampleSet,
) -> Result<IntervalBox> {
    require_2d(root)?;
    cfg.validate(net, root)?;
    let mut engine = Engine::new(net, cfg);
    Ok(expand(&mut engine, root, samples)?.region)
}

/// Disjoint cover of `outer \ inner`: full-height left and right slabs, then
/// bottom and top slabs spanning `inner`'s x-extent. Zero-area slabs are omitted
/// unless nothing else covers their edge.
pub fn decompose_remainder(outer: &IntervalBox, inner: &IntervalBox) -> Result<Vec<IntervalBox>> {
    require_2d(outer)?;
    if !inner.is_subset_of(outer) {
        return Err(ReachError::InvalidBox(format!("{inner} is not inside {outer}")));
    }
    let (ox, oy) = ((outer.lo()[0], outer.hi()[0]), (outer.lo()[1], outer.hi()[1]));
    let (ix, iy) = ((inner.lo()[0], inner.hi()[0]), (inner.lo()[1], inner.hi()[1]));
    let (left, right) = (ox.0 < ix.0, ix.1 < ox.1);
    // a zero-width middle column is already covered by the closed side slabs
    let middle = ix.0 < ix.1 || !(left || right);
    let slabs = [
        left.then_some([(ox.0, ix.0), oy]),
        right.then_some([(ix.1, ox.1), oy]),
        (middle && oy.0 < iy.0).then_some([ix, (oy.0, iy.0)]),
        (middle && iy.1 < oy.1).then_some([ix, (iy.1, oy.1)]),
    ];
    slabs
        .into_iter()
        .flatten()
        .map(|b| IntervalBox::from_bounds(&b))
        .collect()
}

pub fn run_agsg(net: &Network, root: &IntervalBox, cfg: &AnalyzerConfig) -> Result<AnalysisResult> {
    require_2d(root)?;
    cfg.validate(net, root)?;
    if let Some(max) = cfg.budget_calls {
        if max < 1 + REMAINDER_RESERVE {
            return Err(ReachError::InvalidConfig(format!(
                "agsg needs a call budget of at least {}, got {max}",
                1 + REMAINDER_RESERVE
            )));
        }
    }
    let samples = simulate(net, root, cfg)?;
    let mut engine = Engine::new(net, cfg);
    let expanded = expand(&mut engine, root, &samples)?;
    let mut remainder = Vec::new();
    for region in decompose_remainder(root, &expanded.region)? {
        remainder.push(engine.cell(region, 0)?);
    }
    let mut cells = vec![expanded];
    cells.extend(greedy_refine(&mut engine, remainder, &samples, cfg.threshold(root))?);
    engine.finish(cells, Some(samples))
}
