//! Backward affine bound substitution (Fast-Lin / CROWN).
//!
//! Pre-activation bounds of every nonlinear layer come from a full backward
//! pass to the input, so the cost is quadratic in depth.

use ndarray::{Array1, Array2};

use super::relax::{relax_activation, RelaxMode, Relaxation};
use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::{Activation, Network};

/// `lower_coeffs x + lower_offset <= f(x) <= upper_coeffs x + upper_offset`
/// over the input box the bounds were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBounds {
    pub lower_coeffs: Array2<f64>,
    pub lower_offset: Array1<f64>,
    pub upper_coeffs: Array2<f64>,
    pub upper_offset: Array1<f64>,
}

impl AffineBounds {
    pub fn n_in(&self) -> usize {
        self.lower_coeffs.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.lower_coeffs.nrows()
    }
}

/// Evaluates the affine bounds at the box's extreme points.
pub fn concretize(ab: &AffineBounds, input: &IntervalBox) -> Result<IntervalBox> {
    if ab.n_in() != input.dim() {
        return Err(ReachError::Dimension {
            expected: ab.n_in(),
            actual: input.dim(),
        });
    }
    let (lo_in, hi_in) = (input.lo(), input.hi());
    let lo = ab
        .lower_coeffs
        .rows()
        .into_iter()
        .zip(&ab.lower_offset)
        .map(|(row, off)| {
            row.iter()
                .enumerate()
                .map(|(j, &c)| if c >= 0.0 { c * lo_in[j] } else { c * hi_in[j] })
                .sum::<f64>()
                + off
        })
        .collect();
    let hi = ab
        .upper_coeffs
        .rows()
        .into_iter()
        .zip(&ab.upper_offset)
        .map(|(row, off)| {
            row.iter()
                .enumerate()
                .map(|(j, &c)| if c >= 0.0 { c * hi_in[j] } else { c * lo_in[j] })
                .sum::<f64>()
                + off
        })
        .collect();
    Ok(IntervalBox::from_parts_unchecked(lo, hi))
}

/// Running backward state: upper and lower expressions in terms of the
/// post-activation output of some layer.
struct Backward {
    upper: Array2<f64>,
    upper_off: Array1<f64>,
    lower: Array2<f64>,
    lower_off: Array1<f64>,
}

impl Backward {
    fn from_affine(w: &Array2<f64>, b: &Array1<f64>) -> Self {
        Self {
            upper: w.clone(),
            upper_off: b.clone(),
            lower: w.clone(),
            lower_off: b.clone(),
        }
    }

    /// Replace `a = act(z)` by its per-neuron envelopes; positive coefficients
    /// take the upper envelope in the upper expression, negative ones the lower.
    fn through_activation(&mut self, relax: &[Relaxation]) {
        for (j, r) in relax.iter().enumerate() {
            if *r == Relaxation::IDENTITY {
                continue;
            }
            let mut ucol = self.upper.column_mut(j);
            for (i, c) in ucol.iter_mut().enumerate() {
                let (s, t) = if *c >= 0.0 {
                    (r.upper_slope, r.upper_intercept)
                } else {
                    (r.lower_slope, r.lower_intercept)
                };
                self.upper_off[i] += *c * t;
                *c *= s;
            }
            let mut lcol = self.lower.column_mut(j);
            for (i, c) in lcol.iter_mut().enumerate() {
                let (s, t) = if *c >= 0.0 {
                    (r.lower_slope, r.lower_intercept)
                } else {
                    (r.upper_slope, r.upper_intercept)
                };
                self.lower_off[i] += *c * t;
                *c *= s;
            }
        }
    }

    /// Replace `z = W a + b`.
    fn through_affine(&mut self, w: &Array2<f64>, b: &Array1<f64>) {
        self.upper_off += &self.upper.dot(b);
        self.lower_off += &self.lower.dot(b);
        self.upper = self.upper.dot(w);
        self.lower = self.lower.dot(w);
    }

    fn finish(self) -> AffineBounds {
        AffineBounds {
            lower_coeffs: self.lower,
            lower_offset: self.lower_off,
            upper_coeffs: self.upper,
            upper_offset: self.upper_off,
        }
    }
}

/// Substitutes backward from an expression over layer `top`'s output down to
/// the network input, using `relax[k]` for every layer `k <= top`.
fn substitute(net: &Network, mut state: Backward, top: Option<usize>, relax: &[Vec<Relaxation>]) -> AffineBounds {
    let Some(top) = top else {
        return state.finish();
    };
    for k in (0..=top).rev() {
        let layer = &net.layers()[k];
        if layer.activation() != Activation::Linear {
            state.through_activation(&relax[k]);
        }
        state.through_affine(layer.weights(), layer.bias());
    }
    state.finish()
}

/// Affine output bounds and their concretization over `input`.
pub fn propagate_linear(net: &Network, input: &IntervalBox, mode: RelaxMode) -> Result<(AffineBounds, IntervalBox)> {
    if input.dim() != net.input_dim() {
        return Err(ReachError::Dimension {
            expected: net.input_dim(),
            actual: input.dim(),
        });
    }
    let layers = net.layers();
    let mut relax: Vec<Vec<Relaxation>> = Vec::with_capacity(layers.len());
    for (k, layer) in layers.iter().enumerate() {
        let act = layer.activation();
        if act == Activation::Linear {
            relax.push(vec![Relaxation::IDENTITY; layer.n_out()]);
            continue;
        }
        let state = Backward::from_affine(layer.weights(), layer.bias());
        let pre = substitute(net, state, k.checked_sub(1), &relax);
        let bounds = concretize(&pre, input)?;
        let r = (0..layer.n_out())
            .map(|i| {
                // rounding can leave lo a hair above hi when the bounds are exact
                let (l, u) = (bounds.lo()[i], bounds.hi()[i]);
                relax_activation(act, l.min(u), l.max(u), mode)
            })
            .collect::<Result<Vec<_>>>()?;
        relax.push(r);
    }
    let n_out = net.output_dim();
    let last = layers.len() - 1;
    let ab = if layers[last].activation() == Activation::Linear {
        let state = Backward::from_affine(layers[last].weights(), layers[last].bias());
        substitute(net, state, last.checked_sub(1), &relax)
    } else {
        let state = Backward::from_affine(&Array2::eye(n_out), &Array1::zeros(n_out));
        substitute(net, state, Some(last), &relax)
    };
    let out = concretize(&ab, input)?;
    let (mut lo, mut hi) = (out.lo().to_vec(), out.hi().to_vec());
    for i in 0..n_out {
        if lo[i] > hi[i] {
            std::mem::swap(&mut lo[i], &mut hi[i]);
        }
    }
    Ok((ab, IntervalBox::from_parts_unchecked(lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{random_network, sample_outputs, Layer};
    use crate::propagate::ibp::propagate_ibp;
    use ndarray::array;

    fn cancellation() -> Network {
        Network::new(vec![
            Layer::new(array![[1.0], [1.0]], array![0.0, 0.0], Activation::Linear).unwrap(),
            Layer::new(array![[1.0, -1.0]], array![0.0], Activation::Linear).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn cancellation_net_is_exact() {
        let (ab, out) = propagate_linear(&cancellation(), &IntervalBox::unit(1), RelaxMode::Crown).unwrap();
        assert_eq!(out, IntervalBox::from_bounds(&[(0.0, 0.0)]).unwrap());
        assert_eq!(ab.upper_coeffs, array![[0.0]]);
    }

    #[test]
    fn identity_layer_bounds() {
        let net = Network::new(vec![Layer::new(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![0.0, 0.0],
            Activation::Linear,
        )
        .unwrap()])
        .unwrap();
        for mode in [RelaxMode::Crown, RelaxMode::FastLin] {
            let (ab, out) = propagate_linear(&net, &IntervalBox::unit(2), mode).unwrap();
            assert_eq!(ab.lower_coeffs, Array2::<f64>::eye(2));
            assert_eq!(ab.upper_coeffs, Array2::<f64>::eye(2));
            assert_eq!(ab.lower_offset, Array1::<f64>::zeros(2));
            assert_eq!(out, IntervalBox::unit(2));
        }
    }

    #[test]
    fn concretize_examples() {
        let unit = IntervalBox::unit(2);
        let mk = |c: Array2<f64>, off: f64| AffineBounds {
            lower_coeffs: c.clone(),
            lower_offset: array![off],
            upper_coeffs: c,
            upper_offset: array![off],
        };
        assert_eq!(concretize(&mk(array![[1.0, 0.0]], 0.0), &unit).unwrap().lo(), &[0.0]);
        assert_eq!(concretize(&mk(array![[-1.0, 0.0]], 0.0), &unit).unwrap().lo(), &[-1.0]);
        assert_eq!(concretize(&mk(array![[2.0, -3.0]], 1.0), &unit).unwrap().hi(), &[3.0]);
        assert!(concretize(&mk(array![[2.0, -3.0]], 1.0), &IntervalBox::unit(3)).is_err());
    }

    #[test]
    fn crown_tighter_than_ibp_on_seed_42() {
        let net = random_network(&[2, 50, 2], Activation::Relu, 42).unwrap();
        let unit = IntervalBox::unit(2);
        let (_, crown) = propagate_linear(&net, &unit, RelaxMode::Crown).unwrap();
        let ibp = propagate_ibp(&net, &unit).unwrap();
        assert!(crown.is_subset_of(&ibp), "{crown} vs {ibp}");
    }

    #[test]
    fn affine_bounds_hold_pointwise() {
        for (seed, act) in [(1, Activation::Relu), (2, Activation::Tanh), (3, Activation::Relu)] {
            let net = random_network(&[3, 16, 16, 2], act, seed).unwrap();
            let bx = IntervalBox::from_bounds(&[(-1.0, 1.0), (0.0, 2.0), (-0.5, 0.5)]).unwrap();
            for mode in [RelaxMode::Crown, RelaxMode::FastLin] {
                let (ab, _) = propagate_linear(&net, &bx, mode).unwrap();
                let s = sample_outputs(&net, &bx, 500, seed).unwrap();
                for (x, y) in s.inputs.iter().zip(&s.points) {
                    let xv = Array1::from(x.clone());
                    let lo = ab.lower_coeffs.dot(&xv) + &ab.lower_offset;
                    let hi = ab.upper_coeffs.dot(&xv) + &ab.upper_offset;
                    for i in 0..y.len() {
                        assert!(lo[i] <= y[i] + 1e-9 && y[i] <= hi[i] + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn nonlinear_output_layer_is_supported() {
        let net = Network::new(vec![
            Layer::new(array![[1.0, -2.0], [0.5, 1.0]], array![0.1, -0.2], Activation::Relu).unwrap(),
            Layer::new(array![[1.0, 1.0]], array![0.0], Activation::Tanh).unwrap(),
        ])
        .unwrap();
        let bx = IntervalBox::unit(2);
        let (_, out) = propagate_linear(&net, &bx, RelaxMode::Crown).unwrap();
        let s = sample_outputs(&net, &bx, 1000, 0).unwrap();
        assert!(s.points.iter().all(|p| out.contains_point_tol(p, 1e-9)));
    }
}
