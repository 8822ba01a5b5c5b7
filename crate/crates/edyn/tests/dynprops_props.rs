use std::collections::BTreeSet;

use serde_json::Value;

use edyn::covers::Window;
use edyn::dynprops::{
    circle_point, circle_system, least_period, periods_complement, tower_point, tower_system, weds_check, weds_refines,
};
use edyn::extension::EdsSpec;

fn set(v: &[u64]) -> BTreeSet<u64> {
    v.iter().copied().collect()
}

#[test]
fn odometer_emission_is_stable_in_fuel() {
    let e = EdsSpec::builtin("odometer", &Value::Null).unwrap();
    let mut prev: BTreeSet<i64> = BTreeSet::new();
    for f in [4, 8, 10, 12, 14] {
        let now: BTreeSet<i64> = periods_complement(&e, 1..=4, 1 << f).unwrap().iter().map(|c| c.n).collect();
        assert!(prev.is_subset(&now), "fuel 2^{f}: {prev:?} then {now:?}");
        prev = now;
    }
    assert_eq!(prev, (1..=4).collect());
}

#[test]
fn circle_points_have_the_rotation_orders() {
    for k in 1..=5u64 {
        let e = circle_system(&set(&[k])).unwrap();
        let space = e.space().clone();
        for quarter in 0..4 {
            let p = circle_point(k, quarter);
            let start = space.point_cell(&p, 64);
            for m in 1..=k as usize {
                let img = e.action.image_cell(&vec![0; m], &start, 1 << 10);
                assert_eq!(space.cell_contains_point(&img, &p), m == k as usize, "circle {k}, {m} steps: {img:?}");
            }
        }
    }
}

#[test]
fn tower_period_two_is_never_emitted() {
    let e = tower_system(&set(&[2, 3]), 3).unwrap();
    assert_eq!(least_period(&e, &tower_point(&[0, 0, 1, 0]), 10), Some(2));
    assert_eq!(least_period(&e, &tower_point(&[0, 0, 1, 2]), 10), Some(6));
    for f in [6, 10] {
        assert!(periods_complement(&e, 1..=3, 1 << f).unwrap().iter().all(|c| c.n != 2));
    }
}

#[test]
fn weds_tables_refine() {
    for name in ["odometer", "shift", "golden_mean", "full_shift"] {
        let e = EdsSpec::builtin(name, &Value::Null).unwrap();
        let ts: Vec<_> = (1..=3).map(|d| weds_check(&e, d, Window::Forward(1), 1 << 10).unwrap()).collect();
        assert!(weds_refines(&ts[0], &ts[1]) && weds_refines(&ts[1], &ts[2]), "{name}");
    }
}
