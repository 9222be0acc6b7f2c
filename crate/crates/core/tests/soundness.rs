mod common;

use common::{relu_net, unit_square};
use proptest::prelude::*;
use reach_core::nn::{random_network, sample_outputs};
use reach_core::propagate::linear::propagate_linear;
use reach_core::propagate::relax::RelaxMode;
use reach_core::{analyze, Activation, AnalyzerConfig, IntervalBox, Partitioner, Propagator, Shape, CONTAINMENT_TOL};

fn arb_box(dim: usize) -> impl Strategy<Value = IntervalBox> {
    prop::collection::vec((-2.0f64..2.0, 0.0f64..1.5), dim).prop_map(|v| {
        let bounds: Vec<(f64, f64)> = v.into_iter().map(|(l, w)| (l, l + w)).collect();
        IntervalBox::from_bounds(&bounds).unwrap()
    })
}

fn arb_activation() -> impl Strategy<Value = Activation> {
    prop_oneof![Just(Activation::Relu), Just(Activation::Tanh), Just(Activation::Linear)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_propagator_contains_sampled_outputs(
        depth in 1usize..=7,
        width in 1usize..=100,
        act in arb_activation(),
        seed in any::<u64>(),
        input in (1usize..=3).prop_flat_map(arb_box),
    ) {
        let mut sizes = vec![input.dim()];
        sizes.extend(std::iter::repeat_n(width, depth - 1));
        sizes.push(2);
        let net = random_network(&sizes, act, seed).unwrap();
        let samples = sample_outputs(&net, &input, 1000, seed ^ 0x5eed).unwrap();
        for prop in Propagator::ALL {
            let out = prop.propagate(&net, &input).unwrap();
            for p in &samples.points {
                prop_assert!(out.contains_point_tol(p, CONTAINMENT_TOL), "{prop}: {p:?} outside {out}");
            }
        }
    }

    #[test]
    fn linear_nets_get_exact_image_boxes(
        depth in 1usize..=4,
        width in 1usize..=8,
        seed in any::<u64>(),
        input in arb_box(2),
    ) {
        let mut sizes = vec![2];
        sizes.extend(std::iter::repeat_n(width, depth - 1));
        sizes.push(2);
        let net = random_network(&sizes, Activation::Linear, seed).unwrap();
        // The image box of a box under an affine map is attained at corners.
        let corners: Vec<Vec<f64>> = input.corners().iter().map(|c| net.forward(c).unwrap()).collect();
        let exact = IntervalBox::enclosing(corners.iter().map(Vec::as_slice)).unwrap();
        for mode in [RelaxMode::FastLin, RelaxMode::Crown] {
            let (_, out) = propagate_linear(&net, &input, mode).unwrap();
            for i in 0..2 {
                let tol = 1e-9 * (1.0 + exact.lo()[i].abs().max(exact.hi()[i].abs()));
                prop_assert!((out.lo()[i] - exact.lo()[i]).abs() <= tol);
                prop_assert!((out.hi()[i] - exact.hi()[i]).abs() <= tol);
            }
        }
    }

    #[test]
    fn sample_box_lies_in_every_propagator_box(seed in any::<u64>(), input in arb_box(2)) {
        let net = random_network(&[2, 20, 20, 2], Activation::Tanh, seed).unwrap();
        let samples = sample_outputs(&net, &input, 200, seed).unwrap();
        for prop in Propagator::ALL {
            let out = prop.propagate(&net, &input).unwrap();
            let e = &samples.enclosing_box;
            for i in 0..2 {
                let tol = CONTAINMENT_TOL * (1.0 + out.lo()[i].abs().max(out.hi()[i].abs()));
                prop_assert!(e.lo()[i] >= out.lo()[i] - tol && e.hi()[i] <= out.hi()[i] + tol);
            }
        }
    }
}

#[test]
fn crown_is_inside_ibp_in_most_trials() {
    let mut inside = 0;
    for seed in 0..100 {
        let net = random_network(&[2, 30, 30, 2], Activation::Relu, seed).unwrap();
        let ibp = Propagator::Ibp.propagate(&net, &unit_square()).unwrap();
        let crown = Propagator::Crown.propagate(&net, &unit_square()).unwrap();
        if crown.is_subset_of(&ibp) {
            inside += 1;
        }
    }
    assert!(inside >= 95, "crown inside ibp on {inside}/100 nets");
}

#[test]
fn relu_sample_box_inside_ibp_seed_5() {
    let net = relu_net(5);
    let samples = sample_outputs(&net, &unit_square(), 1000, 5).unwrap();
    let ibp = Propagator::Ibp.propagate(&net, &unit_square()).unwrap();
    assert!(samples.enclosing_box.is_subset_of(&ibp));
}

#[test]
fn partitioned_estimates_are_sound_and_accounted() {
    for seed in [1u64, 2] {
        let net = relu_net(seed);
        let check = sample_outputs(&net, &unit_square(), 10_000, 10_000 + seed).unwrap();
        for prop in Propagator::ALL {
            for part in Partitioner::ALL {
                for shape in Shape::ALL {
                    let cfg = AnalyzerConfig::new(prop, part, shape)
                        .with_budget_calls(200)
                        .with_uniform_k(4)
                        .with_seed(seed);
                    let r = analyze(&net, &unit_square(), &cfg).unwrap();
                    let tag = format!("{prop}/{part}/{shape}");
                    assert!(r.propagator_calls <= 200, "{tag}: {} calls", r.propagator_calls);
                    assert_eq!(r.partitions, r.cells.len(), "{tag}");
                    if matches!(part, Partitioner::Sg | Partitioner::Gsg) {
                        assert_eq!(r.propagator_calls, 2 * r.partitions as u64 - 1, "{tag}");
                    }
                    for c in &r.cells {
                        assert!(c.region.is_subset_of(&unit_square()), "{tag}");
                    }
                    for p in &check.points {
                        assert!(r.estimate.contains(p, CONTAINMENT_TOL), "{tag} misses {p:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn analysis_is_deterministic() {
    let net = relu_net(42);
    for part in Partitioner::ALL {
        let cfg = AnalyzerConfig::new(Propagator::Crown, part, Shape::ConvexHull)
            .with_budget_calls(150)
            .with_seed(42);
        let a = analyze(&net, &unit_square(), &cfg).unwrap();
        let b = analyze(&net, &unit_square(), &cfg).unwrap();
        assert_eq!(a.estimate, b.estimate, "{part}");
        assert_eq!(a.cells, b.cells, "{part}");
        assert_eq!(a.propagator_calls, b.propagator_calls, "{part}");
    }
}
