#![allow(dead_code)]

use ndarray::array;
use reach_core::nn::random_network;
use reach_core::{Activation, IntervalBox, Layer, Network};

pub fn identity_net() -> Network {
    Network::new(vec![Layer::new(
        array![[1.0, 0.0], [0.0, 1.0]],
        array![0.0, 0.0],
        Activation::Linear,
    )
    .unwrap()])
    .unwrap()
}

/// `x -> x - x`: exact output is {0}, interval arithmetic loses the cancellation.
pub fn cancellation_net() -> Network {
    Network::new(vec![
        Layer::new(array![[1.0], [1.0]], array![0.0, 0.0], Activation::Linear).unwrap(),
        Layer::new(array![[1.0, -1.0]], array![0.0], Activation::Linear).unwrap(),
    ])
    .unwrap()
}

pub fn relu_net(seed: u64) -> Network {
    random_network(&[2, 50, 2], Activation::Relu, seed).unwrap()
}

pub fn unit_square() -> IntervalBox {
    IntervalBox::unit(2)
}
