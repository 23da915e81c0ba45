use proptest::prelude::*;
use sdelab::CadlagPath;

/// Scalar path on `[-1, end]` with sorted distinct breakpoints.
fn scalar_path() -> impl Strategy<Value = CadlagPath> {
    (prop::collection::btree_set(1u32..1000, 0..12), 0.0f64..2.0).prop_flat_map(|(cuts, extra)| {
        let times: Vec<f64> = std::iter::once(-1.0)
            .chain(cuts.into_iter().map(|c| -1.0 + c as f64 / 500.0))
            .collect();
        let end = times.last().copied().unwrap() + extra;
        let n = times.len();
        prop::collection::vec(-10.0f64..10.0, n)
            .prop_map(move |values| CadlagPath::scalar(times.clone(), values, end).unwrap())
    })
}

fn brute_sup(x: &CadlagPath, a: f64, b: f64) -> f64 {
    // every value on [a, b] is the value at a or at a breakpoint inside (a, b]
    std::iter::once(a)
        .chain(x.breakpoints().iter().copied().filter(|&t| a < t && t <= b))
        .map(|t| x.value_at(t).unwrap()[0].abs())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn right_continuous_with_left_limits(x in scalar_path()) {
        for (i, &t) in x.breakpoints().iter().enumerate() {
            prop_assert_eq!(x.value_at(t).unwrap(), x.segment(i));
            if i > 0 {
                prop_assert_eq!(x.left_limit(t).unwrap(), x.segment(i - 1));
                let mid = 0.5 * (x.breakpoints()[i - 1] + t);
                prop_assert_eq!(x.value_at(mid).unwrap(), x.segment(i - 1));
            }
        }
    }

    #[test]
    fn window_sup_matches_brute_force_and_is_monotone(x in scalar_path(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (s, e) = (x.start(), x.end());
        let (a, b) = { let p = s + u * (e - s); let q = s + v * (e - s); (p.min(q), p.max(q)) };
        let sup = x.window_sup(a, b).unwrap();
        prop_assert_eq!(sup, brute_sup(&x, a, b));
        prop_assert!(x.window_sup(s, e).unwrap() >= sup);
        prop_assert!(x.window_sup_open(a, b).unwrap() <= sup);
    }

    #[test]
    fn history_agrees_before_and_freezes_after(x in scalar_path(), u in 0.0f64..1.0) {
        let t = x.start() + u * (x.end() - x.start());
        let h = x.history(t).unwrap();
        prop_assert_eq!(h.end(), x.end());
        for &s in x.breakpoints().iter().filter(|&&s| s <= t) {
            prop_assert_eq!(h.value_at(s).unwrap(), x.value_at(s).unwrap());
        }
        prop_assert_eq!(h.value_at(h.end()).unwrap(), x.value_at(t).unwrap());
        prop_assert_eq!(h.history(t).unwrap(), h.clone());
    }

    #[test]
    fn sup_distance_is_a_metric(x in scalar_path(), c in -5.0f64..5.0) {
        let y = x.map(1, |_, v, o| o[0] = v[0] + c);
        let z = x.map(1, |_, v, o| o[0] = -v[0]);
        let (a, b) = (x.start(), x.end());
        prop_assert_eq!(x.sup_distance(&x, a, b).unwrap(), 0.0);
        prop_assert!((x.sup_distance(&y, a, b).unwrap() - c.abs()).abs() < 1e-12);
        prop_assert_eq!(x.sup_distance(&z, a, b).unwrap(), z.sup_distance(&x, a, b).unwrap());
        let direct = y.sup_distance(&z, a, b).unwrap();
        let via = y.sup_distance(&x, a, b).unwrap() + x.sup_distance(&z, a, b).unwrap();
        prop_assert!(direct <= via + 1e-12);
    }

    #[test]
    fn csv_round_trips_breakpoints(x in scalar_path()) {
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        prop_assert_eq!(rows[0], "t,x_1");
        prop_assert_eq!(rows.len(), x.segment_count() + 1);
        for (row, (t, v)) in rows[1..].iter().zip(x.segments()) {
            let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            prop_assert_eq!(cols, vec![t, v[0]]);
        }
    }
}
