use std::collections::BTreeMap;

use matern_thin::model::interaction::CUTOFF_LEVEL;
use matern_thin::{registry_make, InteractionFunction};
use proptest::prelude::*;

fn make(id: &str, kv: &[(&str, f64)], dim: usize) -> InteractionFunction {
    let p: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    registry_make(id, &p, dim).unwrap()
}

fn family() -> impl Strategy<Value = InteractionFunction> {
    let dim = 1usize..=3;
    prop_oneof![
        (0.0..1.0f64, dim.clone()).prop_map(|(c, d)| make("constant", &[("c", c)], d)),
        (0.01..3.0f64, dim.clone()).prop_map(|(r, d)| make("hardcore", &[("R", r)], d)),
        (0.0..1.0f64, 0.01..3.0f64, dim.clone()).prop_map(|(f0, r, d)| make("strauss", &[("f0", f0), ("R", r)], d)),
        (0.0..1.0f64, 0.1..2.0f64, dim.clone()).prop_map(|(t, r, d)| make("example1", &[("a", t * r), ("R", r)], d)),
        (0.0..8.0f64, dim.clone()).prop_map(|(a, d)| make("example2", &[("a", a)], d)),
        (0.1..2.0f64, 1.0..10.0f64, 0.05..3.0f64, dim.clone())
            .prop_map(|(r, a, b, d)| make("step-gauss", &[("R", r), ("a", a), ("b", b)], d)),
        dim.clone().prop_map(|d| make("marksum-hardcore", &[], d)),
        (1.0..100.0f64, dim).prop_map(|(c, d)| make("fc", &[("c", c)], d)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn values_are_probabilities_and_symmetric(f in family(), r in 0.0..6.0f64, m in 0.0..0.5f64, n in 0.0..0.5f64) {
        let v = f.eval(r, m, n);
        prop_assert!((0.0..=1.0).contains(&v), "{} at r={r}: {v}", f.id());
        prop_assert_eq!(v, f.eval(r, n, m));
    }

    #[test]
    fn values_beyond_the_cutoff_are_negligible(f in family().prop_filter("bounded range", |f| f.cutoff(0.3, 0.3).is_finite()), m in 0.0..0.3f64, n in 0.0..0.3f64, t in prop::collection::vec(0.0..1.0f64, 1..30)) {
        let c = f.cutoff(m, n);
        for u in t {
            let r = c * (1.0 + 3.0 * u) + f64::MIN_POSITIVE;
            let v = f.eval(r, m, n);
            prop_assert!(v <= CUTOFF_LEVEL, "{} at r={r} (cutoff {c}): {v}", f.id());
        }
    }

    #[test]
    fn soft_core_is_one_then_nonincreasing(t in 0.0..1.0f64, radius in 0.1..2.0f64, xs in prop::collection::vec(0.0..4.0f64, 2..40)) {
        let a = t * radius;
        let f = make("example1", &[("a", a), ("R", radius)], 2);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(f.eval(w[1], 0.0, 0.0) <= f.eval(w[0], 0.0, 0.0));
        }
        for x in &xs {
            if *x <= a {
                prop_assert_eq!(f.eval(*x, 0.0, 0.0), 1.0);
            }
        }
        // no jump at the knots
        for k in [a, radius] {
            if k > 0.0 {
                let step = |e: f64| (f.eval(k * (1.0 + e), 0.0, 0.0) - f.eval(k, 0.0, 0.0)).abs();
                let (near, far) = (step(1e-12), step(1e-6));
                prop_assert!(near <= 1e-4 * far + 1e-14, "jump {near} at {k} (vs {far} at 1e-6)");
            }
        }
    }
}

#[test]
fn aggregative_family_stays_below_one() {
    for i in 0..=80 {
        let a = i as f64 * 0.1;
        let f = make("example2", &[("a", a)], 2);
        let peak = (0..=4000).map(|k| f.eval(k as f64 * 1e-3, 0.0, 0.0)).fold(0.0, f64::max);
        assert!(peak <= 1.0 + 1e-12, "a={a}: sup {peak}");
    }
}
