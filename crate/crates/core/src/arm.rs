//! Two-link planar robot arm: analytic forward kinematics and a small
//! (2,5,2) tanh network fit to it.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::{seeded_rng, Activation, Layer, Network};

pub const LINK_LENGTHS: (f64, f64) = (1.0, 1.0);
pub const HIDDEN_UNITS: usize = 5;
pub const LEARNING_RATE: f64 = 0.05;
/// Max absolute residual over the training grid that a fit must reach.
pub const FIT_TOLERANCE: f64 = 0.05;

/// Joint-angle box `[pi/3, 2pi/3]^2`.
pub fn joint_box() -> IntervalBox {
    IntervalBox::from_bounds(&[(PI / 3.0, 2.0 * PI / 3.0), (PI / 3.0, 2.0 * PI / 3.0)]).expect("constant box is valid")
}

/// End-effector position for joint angles `(theta1, theta2)`.
pub fn forward_kinematics(theta1: f64, theta2: f64) -> [f64; 2] {
    let (l1, l2) = LINK_LENGTHS;
    [
        l1 * theta1.cos() + l2 * (theta1 + theta2).cos(),
        l1 * theta1.sin() + l2 * (theta1 + theta2).sin(),
    ]
}

fn training_grid(grid_per_dim: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let bx = joint_box();
    let step = |i: usize, d: usize| bx.lo()[d] + bx.width(d) * i as f64 / (grid_per_dim - 1) as f64;
    let mut inputs = Vec::with_capacity(grid_per_dim * grid_per_dim);
    for i in 0..grid_per_dim {
        for j in 0..grid_per_dim {
            inputs.push([step(i, 0), step(j, 1)]);
        }
    }
    let targets = inputs.iter().map(|t| forward_kinematics(t[0], t[1])).collect();
    (inputs, targets)
}

/// Adam moment state for one flat parameter vector.
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], t: i32) {
        let c1 = 1.0 - Self::BETA1.powi(t);
        let c2 = 1.0 - Self::BETA2.powi(t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grads[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grads[i] * grads[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= LEARNING_RATE * mh / (vh.sqrt() + Self::EPS);
        }
    }
}

/// Max absolute residual of `net` against the kinematics on the training grid.
pub fn fit_residual(net: &Network, grid_per_dim: usize) -> Result<f64> {
    let (inputs, targets) = training_grid(grid_per_dim);
    let mut worst: f64 = 0.0;
    for (x, y) in inputs.iter().zip(&targets) {
        let out = net.forward(x)?;
        worst = worst.max((out[0] - y[0]).abs()).max((out[1] - y[1]).abs());
    }
    Ok(worst)
}

/// Fits a (2,5,2) tanh network to the arm kinematics over [`joint_box`].
///
/// Full-batch MSE minimization with Adam-scaled steps on standardized joint
/// angles; the standardization is folded into the first layer before return,
/// so the result consumes raw angles.
pub fn fit_arm_network(grid_per_dim: usize, iterations: usize, seed: u64) -> Result<Network> {
    if grid_per_dim < 4 {
        return Err(ReachError::InvalidArgument(format!(
            "grid_per_dim must be at least 4, got {grid_per_dim}"
        )));
    }
    if iterations == 0 {
        return Err(ReachError::InvalidArgument("iterations must be positive".into()));
    }
    let (raw_inputs, targets) = training_grid(grid_per_dim);
    let bx = joint_box();
    let mid = bx.center();
    let half: Vec<f64> = (0..2).map(|d| 0.5 * bx.width(d)).collect();
    let inputs: Vec<[f64; 2]> = raw_inputs
        .iter()
        .map(|t| [(t[0] - mid[0]) / half[0], (t[1] - mid[1]) / half[1]])
        .collect();

    let h = HIDDEN_UNITS;
    let mut rng = seeded_rng(seed);
    let b_in = 1.0 / 2f64.sqrt();
    let b_hid = 1.0 / (h as f64).sqrt();
    // Flat layout: w1 (h x 2, row-major), b1 (h), w2 (2 x h), b2 (2).
    let mut w1: Vec<f64> = (0..2 * h).map(|_| rng.random_range(-b_in..=b_in)).collect();
    let mut b1 = vec![0.0; h];
    let mut w2: Vec<f64> = (0..2 * h).map(|_| rng.random_range(-b_hid..=b_hid)).collect();
    let mut b2 = vec![0.0; 2];
    let mut opt = [
        Moments::new(2 * h),
        Moments::new(h),
        Moments::new(2 * h),
        Moments::new(2),
    ];

    let n = inputs.len() as f64;
    let mut hidden = vec![0.0; h];
    for it in 1..=iterations {
        let (mut gw1, mut gb1) = (vec![0.0; 2 * h], vec![0.0; h]);
        let (mut gw2, mut gb2) = (vec![0.0; 2 * h], vec![0.0; 2]);
        for (x, y) in inputs.iter().zip(&targets) {
            for j in 0..h {
                hidden[j] = (w1[2 * j] * x[0] + w1[2 * j + 1] * x[1] + b1[j]).tanh();
            }
            for o in 0..2 {
                let out = (0..h).map(|j| w2[o * h + j] * hidden[j]).sum::<f64>() + b2[o];
                // d/d(out) of the mean over samples and outputs of squared error
                let d_out = (out - y[o]) / n;
                gb2[o] += d_out;
                for j in 0..h {
                    gw2[o * h + j] += d_out * hidden[j];
                    let d_pre = d_out * w2[o * h + j] * (1.0 - hidden[j] * hidden[j]);
                    gb1[j] += d_pre;
                    gw1[2 * j] += d_pre * x[0];
                    gw1[2 * j + 1] += d_pre * x[1];
                }
            }
        }
        let t = it as i32;
        opt[0].step(&mut w1, &gw1, t);
        opt[1].step(&mut b1, &gb1, t);
        opt[2].step(&mut w2, &gw2, t);
        opt[3].step(&mut b2, &gb2, t);
    }

    let folded_w1 = Array2::from_shape_fn((h, 2), |(j, d)| w1[2 * j + d] / half[d]);
    let folded_b1 = Array1::from_shape_fn(h, |j| {
        b1[j] - (0..2).map(|d| w1[2 * j + d] * mid[d] / half[d]).sum::<f64>()
    });
    let net = Network::new(vec![
        Layer::new(folded_w1, folded_b1, Activation::Tanh)?,
        Layer::new(
            Array2::from_shape_vec((2, h), w2).expect("shape matches"),
            Array1::from(b2),
            Activation::Linear,
        )?,
    ])?;
    let residual = fit_residual(&net, grid_per_dim)?;
    tracing::debug!(residual, iterations, seed, "arm fit finished");
    if residual > FIT_TOLERANCE {
        return Err(ReachError::FitFailed {
            residual,
            tolerance: FIT_TOLERANCE,
        });
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kinematics_examples() {
        let [x, y] = forward_kinematics(PI / 2.0, 0.0);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 2.0, epsilon = 1e-12);
        let [x, y] = forward_kinematics(PI / 2.0, PI / 2.0);
        assert_abs_diff_eq!(x, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(fit_arm_network(3, 10, 0).is_err());
    }

    #[test]
    fn too_few_iterations_fail_to_fit() {
        let err = fit_arm_network(8, 5, 0).unwrap_err();
        assert!(matches!(err, ReachError::FitFailed { .. }));
    }
}
