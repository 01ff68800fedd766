//! Randomized checks of the trial-polynomial toolbox: the pointwise
//! envelope, the trigonometric closed form, the two-node trial properties,
//! and the derivative inequality ratios.

use opzeros::chebtools::{
    bernstein_check, dirichlet_cosine_form, dirichlet_trial, offdiag_trial, BernsteinMode,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn trial_envelope_holds_pointwise(
        n in 2u32..256,
        x0 in -1.0f64..1.0,
        a in 0.01f64..2.0,
        u in -1.0f64..1.0,
    ) {
        let trial = dirichlet_trial(n, x0, a).unwrap();
        let x = x0 + u * a;
        let value = trial.value(x).abs();
        let ceiling = trial.envelope(x);
        prop_assert!(
            value <= ceiling * (1.0 + 1e-12) + 1e-12,
            "trial value {value} over envelope {ceiling} at x = {x}"
        );
    }

    #[test]
    fn cosine_form_matches_polynomial_form(
        n in 1u32..200,
        theta in prop_oneof![0.0f64..1.42, 1.72f64..3.14],
    ) {
        let trial = dirichlet_trial(n, 0.0, 1.0).unwrap();
        let poly = trial.value(theta.cos());
        let trig = dirichlet_cosine_form(n, theta);
        prop_assert!(
            (poly - trig).abs() <= 1e-12,
            "forms disagree by {:.2e} at n = {n}, theta = {theta}",
            (poly - trig).abs()
        );
    }

    #[test]
    fn bernstein_ratio_stays_at_or_below_one(
        coeffs in proptest::collection::vec(-3.0f64..3.0, 1..12)
            .prop_filter("needs one nonzero coefficient", |c| c.iter().any(|&x| x != 0.0)),
        half_width in 0.5f64..2.0,
    ) {
        let circle = bernstein_check(&coeffs, BernsteinMode::Circle).unwrap();
        prop_assert!(circle.ratio <= 1.0 + 1e-9, "circle ratio {}", circle.ratio);
        let interval = bernstein_check(&coeffs, BernsteinMode::Interval { half_width }).unwrap();
        prop_assert!(interval.ratio <= 1.0 + 1e-9, "interval ratio {}", interval.ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn two_node_trial_keeps_its_defining_properties(
        gaps in proptest::collection::vec(0.01f64..1.0, 2..20),
        start in -2.0f64..2.0,
        j_frac in 0.0f64..1.0,
    ) {
        let mut nodes = Vec::with_capacity(gaps.len());
        let mut x = start;
        for g in &gaps {
            x += g;
            nodes.push(x);
        }
        let j = (j_frac * (nodes.len() - 2) as f64) as usize;
        let trial = offdiag_trial(&nodes, j).unwrap();

        prop_assert!((trial.value(nodes[j]) - 1.0).abs() <= 1e-9);
        prop_assert!((trial.value(nodes[j + 1]) - 1.0).abs() <= 1e-9);
        for (l, &node) in nodes.iter().enumerate() {
            if l != j && l != j + 1 {
                prop_assert!(trial.value(node).abs() <= 1e-12);
            }
        }
        prop_assert!(trial.degree < nodes.len() as u32);
        if let Some(y) = trial.extra_root {
            prop_assert!(
                y < nodes[j] || y > nodes[j + 1],
                "balancing root {y} landed inside the pair interval"
            );
        }
    }
}

#[test]
fn monomial_saturates_the_circle_inequality() {
    let mut coeffs = vec![0.0; 9];
    coeffs.push(1.0);
    let report = bernstein_check(&coeffs, BernsteinMode::Circle).unwrap();
    assert!(report.ratio > 0.999 && report.ratio <= 1.0 + 1e-9, "ratio {}", report.ratio);
}
