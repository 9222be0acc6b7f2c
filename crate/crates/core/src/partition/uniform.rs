use rayon::prelude::*;

use super::{AnalysisResult, AnalyzerConfig, Cell, Engine};
use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::Network;

/// Cell `index` of a `k^n` grid, with axis 0 varying fastest. Shared faces
/// are computed identically on both sides and the outer faces are exact.
fn grid_cell(root: &IntervalBox, k: usize, mut index: usize) -> IntervalBox {
    let dim = root.dim();
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    let edge = |axis: usize, i: usize| {
        if i == k {
            root.hi()[axis]
        } else {
            root.lo()[axis] + root.width(axis) * i as f64 / k as f64
        }
    };
    for axis in 0..dim {
        let i = index % k;
        index /= k;
        lo.push(edge(axis, i));
        hi.push(edge(axis, i + 1));
    }
    IntervalBox::from_parts_unchecked(lo, hi)
}

/// Uniform grid of `k^n_in` equal cells, each propagated once.
pub fn run_uniform(net: &Network, root: &IntervalBox, cfg: &AnalyzerConfig) -> Result<AnalysisResult> {
    cfg.validate(net, root)?;
    let k = cfg.uniform_k;
    let count = (k as u128).checked_pow(root.dim() as u32).unwrap_or(u128::MAX);
    let cap = cfg.max_grid_cells.min(cfg.budget_calls.unwrap_or(u64::MAX)) as u128;
    if count > cap {
        return Err(ReachError::TooManyCells { cells: count, cap });
    }
    let mut engine = Engine::new(net, cfg);
    let count = count as usize;
    let cells = (0..count)
        .into_par_iter()
        .map(|idx| {
            let region = grid_cell(root, k, idx);
            let output = cfg.propagator.propagate(net, &region)?;
            Ok(Cell {
                region,
                output,
                depth: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    engine.calls = count as u64;
    engine.finish(cells, None)
}
