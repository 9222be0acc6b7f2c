//! Per-neuron linear envelopes `lower(t) <= act(t) <= upper(t)` over `[l, u]`.

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::nn::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelaxMode {
    /// Parallel lower and upper ReLU slopes.
    FastLin,
    /// Adaptive ReLU lower slope (0 or 1).
    Crown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    pub lower_slope: f64,
    pub lower_intercept: f64,
    pub upper_slope: f64,
    pub upper_intercept: f64,
}

impl Relaxation {
    pub const IDENTITY: Relaxation = Relaxation {
        lower_slope: 1.0,
        lower_intercept: 0.0,
        upper_slope: 1.0,
        upper_intercept: 0.0,
    };

    pub const ZERO: Relaxation = Relaxation {
        lower_slope: 0.0,
        lower_intercept: 0.0,
        upper_slope: 0.0,
        upper_intercept: 0.0,
    };

    pub fn lower(&self, t: f64) -> f64 {
        self.lower_slope * t + self.lower_intercept
    }

    pub fn upper(&self, t: f64) -> f64 {
        self.upper_slope * t + self.upper_intercept
    }

    fn constant(c: f64) -> Self {
        Relaxation {
            lower_slope: 0.0,
            lower_intercept: c,
            upper_slope: 0.0,
            upper_intercept: c,
        }
    }
}

pub fn relax_activation(kind: Activation, l: f64, u: f64, mode: RelaxMode) -> Result<Relaxation> {
    if l > u || !l.is_finite() || !u.is_finite() {
        return Err(ReachError::InvalidInterval { lo: l, hi: u });
    }
    Ok(match kind {
        Activation::Linear => Relaxation::IDENTITY,
        Activation::Relu => relax_relu(l, u, mode),
        Activation::Tanh => relax_tanh(l, u),
    })
}

fn relax_relu(l: f64, u: f64, mode: RelaxMode) -> Relaxation {
    if l >= 0.0 {
        return Relaxation::IDENTITY;
    }
    if u <= 0.0 {
        return Relaxation::ZERO;
    }
    let slope = u / (u - l);
    let lower_slope = match mode {
        RelaxMode::FastLin => slope,
        RelaxMode::Crown if u > -l => 1.0,
        RelaxMode::Crown => 0.0,
    };
    Relaxation {
        lower_slope,
        lower_intercept: 0.0,
        upper_slope: slope,
        upper_intercept: -u * l / (u - l),
    }
}

#[inline]
fn dtanh(t: f64) -> f64 {
    let th = t.tanh();
    1.0 - th * th
}

const TANGENT_TOL: f64 = 1e-9;

/// Upper line through `(l, tanh l)` for `l < 0 < u`.
///
/// The chord slope from `l` peaks at the tangent point `d*`; the returned slope
/// is `tanh'(d)` at the low end of the bisection bracket (never below the peak)
/// when `d* <= u`, otherwise the chord slope to `u`.
fn anchored_upper(l: f64, u: f64) -> (f64, f64) {
    let anchor = l.tanh();
    // f(d) < 0 exactly when d lies before the tangent point.
    let f = |d: f64| d.tanh() - anchor - dtanh(d) * (d - l);
    let slope = if f(u) < 0.0 {
        (u.tanh() - anchor) / (u - l)
    } else {
        let (mut lo, mut hi) = (0.0, u);
        while hi - lo > TANGENT_TOL {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        dtanh(lo)
    };
    (slope, anchor - slope * l)
}

fn relax_tanh(l: f64, u: f64) -> Relaxation {
    if l == u {
        return Relaxation::constant(l.tanh());
    }
    if l >= 0.0 {
        // concave: chord below, midpoint tangent above
        let chord = (u.tanh() - l.tanh()) / (u - l);
        let m = 0.5 * (l + u);
        let ts = dtanh(m);
        return Relaxation {
            lower_slope: chord,
            lower_intercept: l.tanh() - chord * l,
            upper_slope: ts,
            upper_intercept: m.tanh() - ts * m,
        };
    }
    if u <= 0.0 {
        let r = relax_tanh(-u, -l);
        return mirror(r);
    }
    let (us, ui) = anchored_upper(l, u);
    // tanh is odd: the lower line is the mirrored upper line of [-u, -l]
    let (ls, li) = anchored_upper(-u, -l);
    Relaxation {
        lower_slope: ls,
        lower_intercept: -li,
        upper_slope: us,
        upper_intercept: ui,
    }
}

/// Relaxation of an odd function on `[-u, -l]` from one on `[l, u]`.
fn mirror(r: Relaxation) -> Relaxation {
    Relaxation {
        lower_slope: r.upper_slope,
        lower_intercept: -r.upper_intercept,
        upper_slope: r.lower_slope,
        upper_intercept: -r.lower_intercept,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_sound(kind: Activation, l: f64, u: f64, mode: RelaxMode) {
        let r = relax_activation(kind, l, u, mode).unwrap();
        for k in 0..=1000 {
            let t = l + (u - l) * k as f64 / 1000.0;
            let y = kind.apply(t);
            let slack = 1e-12 * (1.0 + t.abs());
            assert!(r.lower(t) <= y + slack, "{kind:?} lower at {t} on [{l},{u}]: {r:?}");
            assert!(y <= r.upper(t) + slack, "{kind:?} upper at {t} on [{l},{u}]: {r:?}");
        }
    }

    #[test]
    fn relu_stable_cases() {
        let r = relax_activation(Activation::Relu, 2.0, 5.0, RelaxMode::Crown).unwrap();
        assert_eq!(r, Relaxation::IDENTITY);
        let r = relax_activation(Activation::Relu, -5.0, -2.0, RelaxMode::Crown).unwrap();
        assert_eq!(r, Relaxation::ZERO);
        // degenerate intervals follow the sign of l
        assert_eq!(
            relax_activation(Activation::Relu, 0.0, 0.0, RelaxMode::Crown).unwrap(),
            Relaxation::IDENTITY
        );
        assert_eq!(
            relax_activation(Activation::Relu, -1.0, -1.0, RelaxMode::Crown).unwrap(),
            Relaxation::ZERO
        );
    }

    #[test]
    fn relu_crossing_slopes() {
        let c = relax_activation(Activation::Relu, -1.0, 3.0, RelaxMode::Crown).unwrap();
        assert_eq!((c.upper_slope, c.upper_intercept), (0.75, 0.75));
        assert_eq!((c.lower_slope, c.lower_intercept), (1.0, 0.0));
        let f = relax_activation(Activation::Relu, -1.0, 3.0, RelaxMode::FastLin).unwrap();
        assert_eq!((f.lower_slope, f.lower_intercept), (0.75, 0.0));
        assert_sound(Activation::Relu, -1.0, 3.0, RelaxMode::Crown);
        assert_sound(Activation::Relu, -1.0, 3.0, RelaxMode::FastLin);
        // tie u = |l| picks slope 0
        let tie = relax_activation(Activation::Relu, -2.0, 2.0, RelaxMode::Crown).unwrap();
        assert_eq!(tie.lower_slope, 0.0);
    }

    #[test]
    fn tanh_regions() {
        for &(l, u) in &[
            (-2.0, 3.0),
            (-0.1, 0.2),
            (0.5, 2.0),
            (-3.0, -0.5),
            (-4.0, 0.1),
            (-0.1, 4.0),
        ] {
            assert_sound(Activation::Tanh, l, u, RelaxMode::Crown);
        }
        let r = relax_activation(Activation::Tanh, 0.4, 0.4, RelaxMode::Crown).unwrap();
        assert_eq!(r.upper_slope, 0.0);
        assert_abs_diff_eq!(r.upper_intercept, 0.4f64.tanh());
    }

    #[test]
    fn tanh_upper_touches_anchor() {
        let r = relax_activation(Activation::Tanh, -2.0, 3.0, RelaxMode::Crown).unwrap();
        assert_abs_diff_eq!(r.upper(-2.0), (-2.0f64).tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.lower(3.0), 3.0f64.tanh(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_inverted_interval() {
        assert!(relax_activation(Activation::Relu, 1.0, 0.0, RelaxMode::Crown).is_err());
        assert!(relax_activation(Activation::Tanh, f64::NAN, 0.0, RelaxMode::Crown).is_err());
    }

    fn kind_strategy() -> impl Strategy<Value = Activation> {
        prop_oneof![Just(Activation::Linear), Just(Activation::Relu), Just(Activation::Tanh)]
    }

    proptest! {
        #[test]
        fn envelopes_are_sound(kind in kind_strategy(), a in -6.0f64..6.0, w in 0.0f64..8.0,
                               point in any::<bool>(), crown in any::<bool>()) {
            let u = if point { a } else { a + w };
            let mode = if crown { RelaxMode::Crown } else { RelaxMode::FastLin };
            assert_sound(kind, a, u, mode);
        }
    }
}
