use reach_core::arm::{fit_arm_network, fit_residual, joint_box, FIT_TOLERANCE};
use reach_core::Activation;
use std::f64::consts::PI;

fn kinematics(t1: f64, t2: f64) -> (f64, f64) {
    (t1.cos() + (t1 + t2).cos(), t1.sin() + (t1 + t2).sin())
}

#[test]
fn fitted_network_tracks_kinematics_on_grid() {
    let net = fit_arm_network(25, 20_000, 3).unwrap();
    assert_eq!(net.layer_sizes(), vec![2, 5, 2]);
    assert_eq!(net.layers()[0].activation(), Activation::Tanh);

    let (lo, hi) = (PI / 3.0, 2.0 * PI / 3.0);
    let mut worst: f64 = 0.0;
    for i in 0..25 {
        for j in 0..25 {
            let t1 = lo + (hi - lo) * i as f64 / 24.0;
            let t2 = lo + (hi - lo) * j as f64 / 24.0;
            let (x, y) = kinematics(t1, t2);
            let out = net.forward(&[t1, t2]).unwrap();
            worst = worst.max((out[0] - x).abs()).max((out[1] - y).abs());
        }
    }
    assert!(worst <= 0.05, "max residual {worst}");
    assert!((fit_residual(&net, 25).unwrap() - worst).abs() < 1e-12);
    assert!(worst <= FIT_TOLERANCE);
}

#[test]
fn fit_is_reproducible() {
    let a = fit_arm_network(8, 3_000, 11);
    let b = fit_arm_network(8, 3_000, 11);
    match (a, b) {
        (Ok(a), Ok(b)) => assert_eq!(a, b),
        (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
        _ => panic!("same seed gave different outcomes"),
    }
}

#[test]
fn joint_box_matches_arm_range() {
    let b = joint_box();
    assert_eq!(b.lo(), &[PI / 3.0, PI / 3.0]);
    assert_eq!(b.hi(), &[2.0 * PI / 3.0, 2.0 * PI / 3.0]);
}
