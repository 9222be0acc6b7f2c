//! Volume reduction from splitting a parallelotope input set before one
//! linear layer, in closed form and by brute-force vertex enumeration.
//!
//! Matrices are `n_out x n_in`; column `j` is the generator `v_j` and entry
//! `(i, j)` is its `i`-th coordinate.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::seeded_rng;

/// Largest generator count the vertex enumeration accepts.
pub const MAX_ENUM_DIM: usize = 20;
pub const REL_TOL: f64 = 1e-9;
pub const ABS_FLOOR: f64 = 1e-12;

/// `corner + sum_j t_j * generators[:, j]`, `t in [0,1]^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parallelotope {
    pub corner: Vec<f64>,
    pub generators: Array2<f64>,
}

impl Parallelotope {
    pub fn new(corner: Vec<f64>, generators: Array2<f64>) -> Result<Self> {
        if corner.len() != generators.nrows() {
            return Err(ReachError::Dimension {
                expected: generators.nrows(),
                actual: corner.len(),
            });
        }
        if generators.iter().chain(&corner).any(|v| !v.is_finite()) {
            return Err(ReachError::InvalidArgument("non-finite parallelotope".into()));
        }
        Ok(Self { corner, generators })
    }

    /// Image under a linear map: `(W c, W U)`.
    pub fn map_linear(&self, w: &Array2<f64>) -> Result<Self> {
        if w.ncols() != self.corner.len() {
            return Err(ReachError::Dimension {
                expected: self.corner.len(),
                actual: w.ncols(),
            });
        }
        let corner = w.dot(&ndarray::Array1::from(self.corner.clone())).to_vec();
        Self::new(corner, w.dot(&self.generators))
    }

    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let m = self.generators.ncols();
        if m > MAX_ENUM_DIM {
            return Err(ReachError::InvalidArgument(format!(
                "{m} generators exceeds the enumeration cap of {MAX_ENUM_DIM}"
            )));
        }
        Ok((0..1usize << m)
            .map(|mask| {
                let mut v = self.corner.clone();
                for j in (0..m).filter(|j| mask >> j & 1 == 1) {
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi += self.generators[(i, j)];
                    }
                }
                v
            })
            .collect())
    }

    /// Smallest axis-aligned box around the vertices.
    pub fn bounding_box(&self) -> Result<IntervalBox> {
        let verts = self.vertices()?;
        IntervalBox::enclosing(verts.iter().map(Vec::as_slice))
    }
}

/// Which generator to split and where.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub dim_index: usize,
    pub ratio: f64,
}

impl SplitSpec {
    pub fn new(dim_index: usize, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(ReachError::InvalidArgument(format!(
                "split ratio {ratio} outside [0, 1]"
            )));
        }
        Ok(Self { dim_index, ratio })
    }

    fn check(&self, v: &Array2<f64>) -> Result<()> {
        if self.dim_index >= v.ncols() {
            return Err(ReachError::InvalidArgument(format!(
                "split index {} but only {} generators",
                self.dim_index,
                v.ncols()
            )));
        }
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(ReachError::InvalidArgument(format!(
                "split ratio {} outside [0, 1]",
                self.ratio
            )));
        }
        Ok(())
    }
}

/// `prod_i sum_j |v_{j,i}|`: volume of the bounding box of `P(V)`.
pub fn bounding_box_volume(v: &Array2<f64>) -> f64 {
    v.rows()
        .into_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .product()
}

/// Left and right pieces of `P(V)` after splitting generator `dim_index` at `ratio`.
pub fn split_pieces(v: &Array2<f64>, spec: SplitSpec) -> Result<(Parallelotope, Parallelotope)> {
    spec.check(v)?;
    let k = spec.dim_index;
    let r = spec.ratio;
    let mut left = v.clone();
    left.column_mut(k).mapv_inplace(|x| r * x);
    let mut right = v.clone();
    right.column_mut(k).mapv_inplace(|x| (1.0 - r) * x);
    let offset: Vec<f64> = v.column(k).iter().map(|x| r * x).collect();
    Ok((
        Parallelotope::new(vec![0.0; v.nrows()], left)?,
        Parallelotope::new(offset, right)?,
    ))
}

/// `Vol(B(V)) - Vol(B(V_L) ∪ B(V_R))` by enumerating every vertex and
/// intersecting the two child boxes literally.
pub fn vred_brute(v: &Array2<f64>, spec: SplitSpec) -> Result<f64> {
    let whole = Parallelotope::new(vec![0.0; v.nrows()], v.clone())?.bounding_box()?;
    let (left, right) = split_pieces(v, spec)?;
    let bl = left.bounding_box()?;
    let br = right.bounding_box()?;
    let inter = bl.intersection(&br).map_or(0.0, |b| b.volume());
    Ok(whole.volume() - (bl.volume() + br.volume() - inter))
}

/// Closed-form volume reduction: a sum over every `k`-subset of output
/// coordinates of `(1 - r^k - (1-r)^k) prod_{S} |v_{1,i}| prod_{not S} z_i`.
pub fn vred_closed_form(v: &Array2<f64>, spec: SplitSpec) -> Result<f64> {
    spec.check(v)?;
    let n_out = v.nrows();
    if n_out > MAX_ENUM_DIM {
        return Err(ReachError::InvalidArgument(format!(
            "{n_out} outputs exceeds the subset cap of {MAX_ENUM_DIM}"
        )));
    }
    let k = spec.dim_index;
    let r = spec.ratio;
    let split: Vec<f64> = v.column(k).iter().map(|x| x.abs()).collect();
    let rest: Vec<f64> = v
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, x)| x.abs())
                .sum()
        })
        .collect();
    let mut by_size = vec![0.0; n_out + 1];
    for mask in 0usize..1 << n_out {
        let term: f64 = (0..n_out)
            .map(|i| if mask >> i & 1 == 1 { split[i] } else { rest[i] })
            .product();
        by_size[mask.count_ones() as usize] += term;
    }
    Ok((2..=n_out)
        .map(|size| {
            let s = size as i32;
            (1.0 - r.powi(s) - (1.0 - r).powi(s)) * by_size[size]
        })
        .sum())
}

/// Best split ratio of generator 0 on the grid `{0, 1/grid, ..., 1}`.
/// Near-ties (relative 1e-12) go to the ratio closest to 1/2.
pub fn optimal_ratio_scan(v: &Array2<f64>, grid: usize) -> Result<f64> {
    if !(2..=3).contains(&v.nrows()) {
        return Err(ReachError::InvalidArgument(format!(
            "ratio scan supports 2 or 3 outputs, got {}",
            v.nrows()
        )));
    }
    if grid == 0 {
        return Err(ReachError::InvalidArgument("grid must be positive".into()));
    }
    let values = (0..=grid)
        .map(|i| {
            let r = i as f64 / grid as f64;
            vred_closed_form(v, SplitSpec { dim_index: 0, ratio: r }).map(|f| (r, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = values.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * best.abs().max(ABS_FLOOR);
    Ok(values
        .into_iter()
        .filter(|(_, f)| best - f <= tie)
        .min_by(|a, b| (a.0 - 0.5).abs().total_cmp(&(b.0 - 0.5).abs()))
        .map(|p| p.0)
        .expect("grid is nonempty"))
}

/// Per-round and cumulative reduction from bisecting generator 0 of a
/// two-output layer in every cell, round after round.
///
/// Round `j` bisects `2^(j-1)` cells whose split generator is `(1/2)^(j-1) u_1`,
/// each saving `((1/2)^(j-1))^2 V_red(u_1)`.
pub fn repeated_split_reduction(v: &Array2<f64>, rounds: usize) -> Result<(Vec<f64>, f64)> {
    if v.nrows() != 2 {
        return Err(ReachError::InvalidArgument(format!(
            "repeated splitting needs 2 outputs, got {}",
            v.nrows()
        )));
    }
    let base = vred_closed_form(
        v,
        SplitSpec {
            dim_index: 0,
            ratio: 0.5,
        },
    )?;
    let per_round: Vec<f64> = (1..=rounds)
        .map(|j| {
            let scale = 0.5f64.powi(j as i32 - 1);
            let cells = 2f64.powi(j as i32 - 1);
            cells * scale * scale * base
        })
        .collect();
    let cumulative = per_round.iter().sum();
    Ok((per_round, cumulative))
}

/// `|a - b| <= max(REL_TOL * max(|a|, |b|), ABS_FLOOR)`.
pub fn within_tolerance(a: f64, b: f64) -> bool {
    (a - b).abs() <= (REL_TOL * a.abs().max(b.abs())).max(ABS_FLOOR)
}

/// One randomized closed-form vs. brute-force comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    pub dim_index: usize,
    pub r: f64,
    pub closed_form: f64,
    pub brute: f64,
    pub abs_diff: f64,
    pub ok: bool,
}

pub fn evaluate_case(v: &Array2<f64>, spec: SplitSpec) -> Result<SweepCase> {
    let closed_form = vred_closed_form(v, spec)?;
    let brute = vred_brute(v, spec)?;
    Ok(SweepCase {
        v: v.rows().into_iter().map(|r| r.to_vec()).collect(),
        dim_index: spec.dim_index,
        r: spec.ratio,
        closed_form,
        brute,
        abs_diff: (closed_form - brute).abs(),
        ok: within_tolerance(closed_form, brute) && closed_form >= -ABS_FLOOR,
    })
}

/// Random `n_out x n_in` matrix with entries uniform on `[-2, 2]`.
pub fn random_matrix(rng: &mut impl Rng, n_out: usize, n_in: usize) -> Array2<f64> {
    Array2::from_shape_fn((n_out, n_in), |_| rng.random_range(-2.0..=2.0))
}

/// `trials` random cases; shapes cycle through `dims x dims`, the split
/// index and ratio are drawn per case.
pub fn oracle_sweep(trials: usize, seed: u64, dims: &[usize]) -> Result<Vec<SweepCase>> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0 || d > MAX_ENUM_DIM) {
        return Err(ReachError::InvalidArgument(format!("bad dimension list {dims:?}")));
    }
    let mut rng = seeded_rng(seed);
    let shapes: Vec<(usize, usize)> = dims.iter().flat_map(|&o| dims.iter().map(move |&i| (o, i))).collect();
    (0..trials)
        .map(|t| {
            let (n_out, n_in) = shapes[t % shapes.len()];
            let v = random_matrix(&mut rng, n_out, n_in);
            let spec = SplitSpec {
                dim_index: rng.random_range(0..n_in),
                ratio: rng.random_range(0.0..=1.0),
            };
            evaluate_case(&v, spec)
        })
        .collect()
}
