//! Simulation-guided refinement: SG pops cells LIFO, GSG pops the cell whose
//! output reaches furthest outside the simulated boundary.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::distance::{outside_distance, sample_reference};
use super::{simulate, AnalysisResult, AnalyzerConfig, Cell, Engine};
use crate::error::Result;
use crate::geometry::BoundaryEstimate;
use crate::interval::IntervalBox;
use crate::nn::{Network, SampleSet};

fn below_threshold(cell: &Cell, eps: Option<f64>) -> bool {
    eps.is_some_and(|e| cell.region.widths().iter().all(|&w| w <= e))
}

/// SG: LIFO stack seeded with the whole input box.
pub fn run_sg(net: &Network, root: &IntervalBox, cfg: &AnalyzerConfig) -> Result<AnalysisResult> {
    cfg.validate(net, root)?;
    let samples = simulate(net, root, cfg)?;
    let mut engine = Engine::new(net, cfg);
    let eps = cfg.threshold(root);
    let mut stack = vec![engine.cell(root.clone(), 0)?];
    let mut done = Vec::new();
    while let Some(cell) = stack.pop() {
        if cell.output.is_subset_of(&samples.enclosing_box) || below_threshold(&cell, eps) {
            done.push(cell);
            continue;
        }
        if !engine.can_spend(2) {
            stack.push(cell);
            break;
        }
        let (left, right) = engine.bisect(&cell)?;
        stack.push(left);
        stack.push(right);
    }
    done.extend(stack);
    engine.finish(done, Some(samples))
}

#[derive(Debug)]
struct Ranked {
    distance: f64,
    order: u64,
    cell: Cell,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    // larger distance first, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Max-priority frontier keyed by outside distance, ties to earliest insertion.
pub(crate) struct GreedyFrontier {
    reference: BoundaryEstimate,
    heap: BinaryHeap<Ranked>,
    next_order: u64,
}

impl GreedyFrontier {
    pub fn new(reference: BoundaryEstimate) -> Self {
        Self {
            reference,
            heap: BinaryHeap::new(),
            next_order: 0,
        }
    }

    pub fn push(&mut self, cell: Cell) -> Result<()> {
        let distance = outside_distance(&cell.output, &self.reference)?;
        self.push_ranked(distance, cell);
        Ok(())
    }

    fn push_ranked(&mut self, distance: f64, cell: Cell) {
        self.heap.push(Ranked {
            distance,
            order: self.next_order,
            cell,
        });
        self.next_order += 1;
    }

    pub fn peek_distance(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.distance)
    }

    pub fn pop(&mut self) -> Option<(f64, Cell)> {
        self.heap.pop().map(|r| (r.distance, r.cell))
    }

    /// Remaining cells in insertion order.
    pub fn into_cells(self) -> Vec<Cell> {
        let mut rest = self.heap.into_vec();
        rest.sort_by_key(|r| r.order);
        rest.into_iter().map(|r| r.cell).collect()
    }
}

/// The greedy loop shared by GSG and AGSG. Returns the final frontier.
pub(crate) fn greedy_refine(
    engine: &mut Engine<'_>,
    initial: Vec<Cell>,
    samples: &SampleSet,
    eps: Option<f64>,
) -> Result<Vec<Cell>> {
    let reference = sample_reference(samples, engine.cfg.shape)?;
    let mut frontier = GreedyFrontier::new(reference);
    for cell in initial {
        frontier.push(cell)?;
    }
    let mut done = Vec::new();
    // everything left is inside the simulated boundary once the top is
    while frontier.peek_distance().is_some_and(|d| d > 0.0) {
        let (distance, cell) = frontier.pop().expect("peeked");
        if below_threshold(&cell, eps) {
            done.push(cell);
            continue;
        }
        if !engine.can_spend(2) {
            frontier.push_ranked(distance, cell);
            break;
        }
        let (left, right) = engine.bisect(&cell)?;
        frontier.push(left)?;
        frontier.push(right)?;
    }
    done.extend(frontier.into_cells());
    Ok(done)
}

/// GSG: SG with greedy, shape-aware cell selection.
pub fn run_gsg(net: &Network, root: &IntervalBox, cfg: &AnalyzerConfig) -> Result<AnalysisResult> {
    cfg.validate(net, root)?;
    let samples = simulate(net, root, cfg)?;
    let mut engine = Engine::new(net, cfg);
    let root_cell = engine.cell(root.clone(), 0)?;
    let cells = greedy_refine(&mut engine, vec![root_cell], &samples, cfg.threshold(root))?;
    engine.finish(cells, Some(samples))
}
