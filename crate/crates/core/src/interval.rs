//! Axis-aligned boxes: the input and output set currency of the analyzer.

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};

/// An axis-aligned hyperrectangle `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl IntervalBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(ReachError::InvalidBox(format!(
                "lower has {} entries, upper has {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(ReachError::InvalidBox(format!("dimension {i} is not finite")));
            }
            if l > h {
                return Err(ReachError::InvalidBox(format!("dimension {i} has lo {l} > hi {h}")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Builds a box from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds.iter().map(|b| b.0).collect(),
            bounds.iter().map(|b| b.1).collect(),
        )
    }

    /// The unit hypercube `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    /// Degenerate box holding a single point.
    pub fn point(p: &[f64]) -> Result<Self> {
        Self::new(p.to_vec(), p.to_vec())
    }

    /// Tight box around a nonempty set of points.
    pub fn enclosing<'a, I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = points.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| ReachError::InvalidBox("no points to enclose".into()))?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in iter {
            if p.len() != lo.len() {
                return Err(ReachError::Dimension {
                    expected: lo.len(),
                    actual: p.len(),
                });
            }
            for i in 0..p.len() {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Self::new(lo, hi)
    }

    pub(crate) fn from_parts_unchecked(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.widths().into_iter().fold(0.0, f64::max)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Product of the side lengths.
    pub fn volume(&self) -> f64 {
        self.widths().into_iter().product()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().enumerate().all(|(i, &x)| self.lo[i] <= x && x <= self.hi[i])
    }

    /// Containment with an absolute-plus-relative slack `tol * (1 + |x|)`.
    pub fn contains_point_tol(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim()
            && p.iter().enumerate().all(|(i, &x)| {
                let slack = tol * (1.0 + x.abs());
                self.lo[i] - slack <= x && x <= self.hi[i] + slack
            })
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim() && (0..self.dim()).all(|i| other.lo[i] <= self.lo[i] && self.hi[i] <= other.hi[i])
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        debug_assert_eq!(self.dim(), other.dim());
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect();
        let hi = self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect();
        IntervalBox { lo, hi }
    }

    /// Interval intersection, `None` when empty.
    pub fn intersection(&self, other: &IntervalBox) -> Option<IntervalBox> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let l = self.lo[i].max(other.lo[i]);
            let h = self.hi[i].min(other.hi[i]);
            if l > h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(IntervalBox { lo, hi })
    }

    /// Splits at the midpoint of `axis`.
    pub fn bisect(&self, axis: usize) -> (IntervalBox, IntervalBox) {
        let mid = self.lo[axis] + 0.5 * (self.hi[axis] - self.lo[axis]);
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[axis] = mid;
        right.lo[axis] = mid;
        (left, right)
    }

    /// Longest side, ties to the lowest index.
    pub fn longest_axis(&self) -> usize {
        let mut best = 0;
        for i in 1..self.dim() {
            if self.width(i) > self.width(best) {
                best = i;
            }
        }
        best
    }

    /// All `2^dim` corner points, in binary counting order over the axes.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }

    /// Parses the CLI grammar `"l,h;l,h;..."`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bounds = Vec::new();
        for (i, dim) in text.split(';').enumerate() {
            let parts: Vec<&str> = dim.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(ReachError::InvalidBox(format!(
                    "dimension {i}: expected \"lo,hi\", got {dim:?}"
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| ReachError::InvalidBox(format!("dimension {i}: bad number {s:?}")))
            };
            bounds.push((parse(parts[0])?, parse(parts[1])?));
        }
        Self::from_bounds(&bounds)
    }
}

impl std::fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dims: Vec<String> = (0..self.dim())
            .map(|i| format!("{},{}", self.lo[i], self.hi[i]))
            .collect();
        write!(f, "{}", dims.join(";"))
    }
}
