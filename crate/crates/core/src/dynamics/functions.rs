//! Probability functions of the post pipeline.
//!
//! All take an opinion distance `x ∈ [0, 2]`; a value outside that range is
//! a caller bug and panics.

use std::f64::consts::FRAC_PI_2;

use super::{DistributionKind, Phase, TransmissionFn};

#[inline]
fn check_distance(x: f64) {
    assert!(
        (0.0..=2.0).contains(&x),
        "opinion distance {x} outside [0, 2]"
    );
}

#[inline]
fn cos_sq(angle: f64) -> f64 {
    let c = angle.cos();
    c * c
}

/// Probability that a user posts content at distance `x = |θ - b_i|` from
/// their own opinion.
#[inline]
pub fn transmission_prob(kind: TransmissionFn, x: f64) -> f64 {
    check_distance(x);
    match kind {
        TransmissionFn::Polarized => cos_sq(x * FRAC_PI_2),
        TransmissionFn::Similar if x <= 1.0 => cos_sq(x * FRAC_PI_2),
        TransmissionFn::Similar => 0.0,
        TransmissionFn::Uniform => 1.0,
    }
}

/// Probability that the platform shows a post to a neighbor at opinion
/// distance `x = |b_i - b_j|` from the poster.
///
/// The phase is reduced modulo π before use, so `phi` and `phi + π` give
/// bit-identical results.
#[inline]
pub fn distribution_prob(kind: DistributionKind, x: f64, phi: impl Into<Phase>) -> f64 {
    check_distance(x);
    let shift = phi.into().reduced();
    match kind {
        DistributionKind::Steep => cos_sq(x * FRAC_PI_2 + shift),
        DistributionKind::Smooth => cos_sq(0.5 * x * FRAC_PI_2 + shift),
        DistributionKind::Uniform => 1.0,
    }
}

/// Probability that a receiver with opinion `b_j` is attracted by a post
/// with value `theta`.
#[inline]
pub fn attraction_prob(theta: f64, b_j: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&theta) && (-1.0..=1.0).contains(&b_j));
    1.0 - (theta - b_j).abs() / 2.0
}

/// Unclamped opinion after one attraction or repulsion. The step points
/// towards `theta` when attracted and away from it when repulsed; at
/// `theta == b_j` the step is `+delta` for attraction.
#[inline]
pub fn unclamped_update(b_j: f64, theta: f64, attracted: bool, delta: f64) -> f64 {
    let step = if theta < b_j { -delta } else { delta };
    if attracted {
        b_j + step
    } else {
        b_j - step
    }
}

/// New opinion of a receiver, clamped to `[-1, 1]`.
#[inline]
pub fn apply_opinion_update(b_j: f64, theta: f64, attracted: bool, delta: f64) -> f64 {
    unclamped_update(b_j, theta, attracted, delta).clamp(-1.0, 1.0)
}

/// Probability that a repulsed receiver at distance `x` from the poster
/// drops the connection. Zero unless the two strongly disagree (`x > 1`).
#[inline]
pub fn rewire_prob(x: f64) -> f64 {
    check_distance(x);
    if x > 1.0 {
        cos_sq(x * FRAC_PI_2)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const EPS: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < EPS
    }

    #[test]
    fn transmission_values() {
        use TransmissionFn::*;
        assert!(close(transmission_prob(Polarized, 0.0), 1.0));
        assert!(close(transmission_prob(Polarized, 1.0), 0.0));
        assert!(close(transmission_prob(Polarized, 2.0), 1.0));
        assert!(close(transmission_prob(Polarized, 0.5), 0.5));
        assert_eq!(transmission_prob(Similar, 1.5), 0.0);
        assert!(close(transmission_prob(Similar, 0.5), 0.5));
        assert_eq!(transmission_prob(Uniform, 1.3), 1.0);
    }

    #[test]
    fn worked_example_transmits_with_one_half() {
        // poster at -0.9, post at -0.4
        let x: f64 = (-0.4f64 - -0.9f64).abs();
        assert!(close(transmission_prob(TransmissionFn::Polarized, x), 0.5));
    }

    #[test]
    #[should_panic(expected = "outside [0, 2]")]
    fn transmission_rejects_out_of_range() {
        transmission_prob(TransmissionFn::Uniform, 2.5);
    }

    #[test]
    #[should_panic(expected = "outside [0, 2]")]
    fn distribution_rejects_negative() {
        distribution_prob(DistributionKind::Uniform, -0.1, 0.0);
    }

    #[test]
    fn distribution_values() {
        assert!(close(
            distribution_prob(DistributionKind::Steep, 1.0, 0.0),
            0.0
        ));
        assert!(close(
            distribution_prob(DistributionKind::Smooth, 2.0, 0.0),
            0.0
        ));
        assert!(close(
            distribution_prob(DistributionKind::Smooth, 0.0, 0.0),
            1.0
        ));
        assert_eq!(distribution_prob(DistributionKind::Uniform, 0.7, 1.2), 1.0);
        for phi in [0.0, 0.3, 1.47, 2.9, -4.0] {
            let a = distribution_prob(DistributionKind::Steep, 0.6, phi);
            let b = distribution_prob(DistributionKind::Steep, 0.6, phi + PI);
            assert_eq!(a, b, "phi = {phi}");
        }
    }

    #[test]
    fn attraction_values() {
        assert_eq!(attraction_prob(0.3, 0.3), 1.0);
        assert_eq!(attraction_prob(-1.0, 1.0), 0.0);
        // |-0.4 - 0.5| = 0.9, 1 - 0.45
        assert!(close(attraction_prob(-0.4, 0.5), 0.55));
    }

    #[test]
    fn opinion_update_direction_and_clamp() {
        assert!(close(apply_opinion_update(0.5, -0.4, true, 0.1), 0.4));
        assert!(close(apply_opinion_update(0.5, -0.4, false, 0.1), 0.6));
        assert_eq!(apply_opinion_update(0.95, 1.0, true, 0.1), 1.0);
        assert_eq!(apply_opinion_update(-0.95, 1.0, false, 0.1), -1.0);
        // equality: step is +delta
        assert!(close(apply_opinion_update(0.2, 0.2, true, 0.1), 0.3));
        assert!(close(apply_opinion_update(0.2, 0.2, false, 0.1), 0.1));
    }

    #[test]
    fn rewire_values() {
        assert_eq!(rewire_prob(0.9), 0.0);
        assert_eq!(rewire_prob(1.0), 0.0);
        assert_eq!(rewire_prob(2.0), 1.0);
        assert!(close(rewire_prob(1.5), 0.5));
    }
}
