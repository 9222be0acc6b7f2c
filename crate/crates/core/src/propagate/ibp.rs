use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::Network;

/// Interval bound propagation in center/radius form: `c' = W c + b`,
/// `r' = |W| r`, then the (monotone) activation on both endpoints.
pub fn propagate_ibp(net: &Network, input: &IntervalBox) -> Result<IntervalBox> {
    if input.dim() != net.input_dim() {
        return Err(ReachError::Dimension {
            expected: net.input_dim(),
            actual: input.dim(),
        });
    }
    let mut lo = input.lo().to_vec();
    let mut hi = input.hi().to_vec();
    for layer in net.layers() {
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        let radius: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (h - l)).collect();
        let c = layer.pre_activation(&center);
        let act = layer.activation();
        let n = layer.n_out();
        lo = Vec::with_capacity(n);
        hi = Vec::with_capacity(n);
        for (row, ci) in layer.weights().rows().into_iter().zip(c) {
            let r: f64 = row.iter().zip(&radius).map(|(w, ri)| w.abs() * ri).sum();
            lo.push(act.apply(ci - r));
            hi.push(act.apply(ci + r));
        }
    }
    Ok(IntervalBox::from_parts_unchecked(lo, hi))
}
