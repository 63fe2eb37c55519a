//! Invariants of the simple-order projection routes and the nodal-first
//! estimator.

use ordmat::{
    hp_estimate, project_simple_order_minmax, project_simple_order_pava, verify_feasible,
    OrderRestriction, WeightedVector, EQUALITY_TOL, FEASIBILITY_TOL,
};
use proptest::prelude::*;

fn values(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, p)
}

fn weights(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..10.0, p)
}

fn vector(p: usize) -> impl Strategy<Value = WeightedVector> {
    (values(p), weights(p)).prop_map(|(x, w)| WeightedVector::new(x, w).unwrap())
}

/// Every contiguous partition of `0..p`, as block means; the candidate with
/// nondecreasing means and least weighted squared error is the projection.
fn level_set_projection(x: &[f64], w: &[f64]) -> Vec<f64> {
    let p = x.len();
    assert!(p <= 16, "exhaustive search only");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1u32 << (p - 1)) {
        let mut candidate = vec![0.0; p];
        let mut start = 0;
        let mut means = Vec::new();
        for end in 0..p {
            let boundary = end == p - 1 || (mask >> end) & 1 == 1;
            if boundary {
                let swx: f64 = (start..=end).map(|k| w[k] * x[k]).sum();
                let sw: f64 = (start..=end).map(|k| w[k]).sum();
                let mean = swx / sw;
                means.push(mean);
                for slot in candidate.iter_mut().take(end + 1).skip(start) {
                    *slot = mean;
                }
                start = end + 1;
            }
        }
        if means.windows(2).any(|m| m[0] > m[1]) {
            continue;
        }
        let sse: f64 = (0..p).map(|k| w[k] * (candidate[k] - x[k]).powi(2)).sum();
        if best.as_ref().map_or(true, |(s, _)| sse < *s) {
            best = Some((sse, candidate));
        }
    }
    best.expect("the one-block partition is always feasible").1
}

proptest! {
    #[test]
    fn pava_equals_minmax(v in (1usize..9).prop_flat_map(vector)) {
        let a = project_simple_order_pava(&v);
        let b = project_simple_order_minmax(&v);
        for (x, y) in a.iter().zip(&b) {
            let scale = x.abs().max(y.abs()).max(1.0);
            prop_assert!((x - y).abs() <= EQUALITY_TOL * scale);
        }
    }

    #[test]
    fn both_routes_match_the_level_set_search(v in (1usize..7).prop_flat_map(vector)) {
        let oracle = level_set_projection(v.values(), v.weights());
        for route in [project_simple_order_pava(&v), project_simple_order_minmax(&v)] {
            for (x, y) in route.iter().zip(&oracle) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn projection_is_monotone(
        (x, bump, w) in (2usize..9).prop_flat_map(|p| (values(p), weights(p), weights(p)))
    ) {
        let y: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let lo = project_simple_order_pava(&WeightedVector::new(x, w.clone()).unwrap());
        let hi = project_simple_order_pava(&WeightedVector::new(y, w).unwrap());
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(a <= &(b + 1e-10));
        }
    }

    #[test]
    fn projection_is_idempotent(v in (1usize..9).prop_flat_map(vector)) {
        let once = project_simple_order_pava(&v);
        let again = project_simple_order_pava(
            &WeightedVector::new(once.clone(), v.weights().to_vec()).unwrap(),
        );
        for (a, b) in once.iter().zip(&again) {
            let scale = a.abs().max(1.0);
            prop_assert!((a - b).abs() <= EQUALITY_TOL * scale);
        }
    }

    #[test]
    fn projection_preserves_the_weighted_sum(v in (1usize..9).prop_flat_map(vector)) {
        let out = project_simple_order_pava(&v);
        let before: f64 = v.values().iter().zip(v.weights()).map(|(x, w)| x * w).sum();
        let after: f64 = out.iter().zip(v.weights()).map(|(x, w)| x * w).sum();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
    }

    #[test]
    fn nodal_first_matches_plain_projection_for_simple_order(
        v in (2usize..9).prop_flat_map(vector)
    ) {
        let r = OrderRestriction::simple_order(v.len()).unwrap();
        let hp = hp_estimate(&v, &r).unwrap();
        let plain = project_simple_order_pava(&v);
        for (a, b) in hp.values.iter().zip(&plain) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}

fn family_restrictions(p: usize) -> Vec<OrderRestriction> {
    let mut out = vec![OrderRestriction::simple_order(p).unwrap()];
    for peak in 0..p {
        out.push(OrderRestriction::umbrella(p, peak).unwrap());
    }
    for root in 0..p {
        out.push(OrderRestriction::simple_tree(p, root).unwrap());
    }
    out
}

proptest! {
    #[test]
    fn nodal_first_output_is_feasible(
        (x, w, pick) in (2usize..8).prop_flat_map(|p| (values(p), weights(p), any::<prop::sample::Index>()))
    ) {
        let restrictions = family_restrictions(x.len());
        let r = &restrictions[pick.index(restrictions.len())];
        let v = WeightedVector::new(x, w).unwrap();
        let hp = hp_estimate(&v, r).unwrap();
        prop_assert!(verify_feasible(&hp.values, r, FEASIBILITY_TOL).is_ok());
    }

    #[test]
    fn nodal_first_is_monotone(
        (x, bump, w, pick) in (2usize..8).prop_flat_map(|p| {
            (values(p), weights(p), weights(p), any::<prop::sample::Index>())
        })
    ) {
        let restrictions = family_restrictions(x.len());
        let r = &restrictions[pick.index(restrictions.len())];
        let y: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let lo = hp_estimate(&WeightedVector::new(x, w.clone()).unwrap(), r).unwrap();
        let hi = hp_estimate(&WeightedVector::new(y, w).unwrap(), r).unwrap();
        for (a, b) in lo.values.iter().zip(&hi.values) {
            prop_assert!(a <= &(b + 1e-8));
        }
    }

    #[test]
    fn nodal_first_is_idempotent(
        (x, w, pick) in (2usize..8).prop_flat_map(|p| (values(p), weights(p), any::<prop::sample::Index>()))
    ) {
        let restrictions = family_restrictions(x.len());
        let r = &restrictions[pick.index(restrictions.len())];
        let once = hp_estimate(&WeightedVector::new(x, w.clone()).unwrap(), r).unwrap();
        let again = hp_estimate(&WeightedVector::new(once.values.clone(), w).unwrap(), r).unwrap();
        for (a, b) in once.values.iter().zip(&again.values) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }
}
