use matern_thin::io::{read_pattern_with_sidecar, read_summary_table, write_pattern, write_summary_table, TableHeader};
use matern_thin::model::{Provenance, Statistic, SummaryTable};
use matern_thin::{PointPattern, Window};
use proptest::prelude::*;

fn pattern(dim: usize, marked: bool) -> impl Strategy<Value = PointPattern> {
    let side = 0.5..50.0f64;
    (side, prop::collection::vec((prop::collection::vec(0.0..1.0f64, 3), 0.0..2.0f64, 0.0..1.0f64), 0..60)).prop_map(
        move |(side, rows)| {
            let w = Window::cube(dim, side).unwrap();
            let mut pts: Vec<[f64; 3]> = Vec::new();
            let (mut marks, mut weights) = (Vec::new(), Vec::new());
            for (u, m, v) in rows {
                let mut p = [0.0; 3];
                for k in 0..dim {
                    p[k] = u[k] * side;
                }
                if !pts.contains(&p) {
                    pts.push(p);
                    marks.push(m);
                    weights.push(v);
                }
            }
            let (marks, weights) = if marked { (Some(marks), Some(weights)) } else { (None, None) };
            PointPattern::new(w, pts, marks, weights).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn patterns_survive_csv(p in (1usize..=3, any::<bool>()).prop_flat_map(|(d, m)| pattern(d, m))) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_pattern(&p, &path).unwrap();
        prop_assert_eq!(read_pattern_with_sidecar(&path).unwrap(), p);
    }

    #[test]
    fn tables_survive_csv(rows in prop::collection::vec(prop_oneof![Just(f64::NAN), -1e6..1e6f64], 1..80), seed in any::<u64>()) {
        let r: Vec<f64> = (0..rows.len()).map(|i| i as f64 * 0.037).collect();
        let t = SummaryTable::new(Statistic::Pcf, Provenance::Empirical, r, rows).unwrap();
        let header = TableHeader { seed: Some(seed), config: serde_json::json!({"h": 0.1}) };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_summary_table(&t, &header, &path).unwrap();
        let (back, h) = read_summary_table(&path).unwrap();
        prop_assert_eq!(h.seed, Some(seed));
        prop_assert_eq!(&back.r, &t.r);
        prop_assert_eq!(back.values.len(), t.values.len());
        for (a, b) in back.values.iter().zip(&t.values) {
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}
