use std::sync::Arc;

use proptest::prelude::*;

use edyn::kernel::rational::q;
use edyn::kernel::{
    closed_to_compact, compact_to_closed, fixed_point_set, identity, semi_decide_cover, semi_decide_empty, whole,
    Ball, BallUnion, Cell, EffClosedSet, EnumOpen, OpenSet, Point, Space,
};
use edyn::Q;

fn word(max: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..2, 0..=max)
}

fn hulls(ws: &[Vec<u32>]) -> Vec<Ball> {
    let s = Space::cantor(2);
    ws.iter().map(|w| s.cell_hull(&Cell::word(w))).collect()
}

fn covers(w: &[u32], us: &[Vec<u32>]) -> bool {
    (0..1u32 << (8 - w.len())).all(|t| {
        let mut x = w.to_vec();
        x.extend((0..8 - w.len()).map(|i| (t >> i) & 1));
        us.iter().any(|u| x.starts_with(u))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cover_acceptance_is_sound_and_monotone(
        w in word(4),
        us in prop::collection::vec(word(8), 1..8),
        e in 0u32..12,
    ) {
        let s = Space::cantor(2);
        let k = closed_to_compact(&EffClosedSet::cell(s.clone(), Cell::word(&w)), whole(s.clone())).unwrap();
        let u = BallUnion::new(s, hulls(&us));
        let d = semi_decide_cover(&*k, &u, 1 << e).unwrap();
        if d.is_accepted() {
            prop_assert!(covers(&w, &us));
            for f in [e + 1, e + 3] {
                prop_assert_eq!(semi_decide_cover(&*k, &u, 1 << f).unwrap(), d.clone());
            }
        }
    }

    #[test]
    fn emptiness_is_sound(w in word(4), us in prop::collection::vec(word(8), 1..8), e in 0u32..12) {
        let s = Space::cantor(2);
        let c = EffClosedSet::new(Arc::new(BallUnion::new(s.clone(), hulls(&us))));
        let k = closed_to_compact(&EffClosedSet::cell(s.clone(), Cell::word(&w)), whole(s)).unwrap();
        if semi_decide_empty(&c, &*k, 1 << e).unwrap().is_accepted() {
            prop_assert!(covers(&w, &us));
        }
    }

    #[test]
    fn enumerations_grow_with_fuel(a in 0u64..1024, b in 0u64..1024, cs in prop::collection::vec((0i64..=16, 1i64..=16), 1..6)) {
        let (f, g) = (a.min(b), a.max(b));
        let balls: Vec<Ball> = cs.iter().map(|&(c, r)| Ball::new(Point::Real(q(c, 16)), q(r, 32)).unwrap()).collect();
        let u = EnumOpen::new(Space::Interval, balls.into_iter());
        let small = u.emit(f);
        let big = u.emit(g);
        prop_assert!(small.iter().all(|x| big.contains(x)));
        let c = EffClosedSet::new(Arc::new(u));
        let small = c.complement_emit(f);
        let big = c.complement_emit(g);
        prop_assert!(small.iter().all(|x| big.contains(x)));
    }

    #[test]
    fn compact_closed_round_trip(w in word(3), us in prop::collection::vec(word(4), 1..6)) {
        let s = Space::cantor(2);
        let k = closed_to_compact(&EffClosedSet::cell(s.clone(), Cell::word(&w)), whole(s.clone())).unwrap();
        let back = closed_to_compact(&compact_to_closed(k.clone()), whole(s.clone())).unwrap();
        let u = BallUnion::new(s, hulls(&us));
        let fuel = 1 << 12;
        prop_assert_eq!(
            semi_decide_cover(&*k, &u, fuel).unwrap().is_accepted(),
            semi_decide_cover(&*back, &u, fuel).unwrap().is_accepted()
        );
    }

    #[test]
    fn interval_cover_sound(x in 0i64..=64, y in 0i64..=64, bs in prop::collection::vec((0i64..=64, 1i64..=64), 1..8), e in 0u32..12) {
        let (a, b) = (q(x.min(y), 64), q(x.max(y), 64));
        let balls: Vec<(Q, Q)> = bs.iter().map(|&(c, r)| (q(c, 64), q(r, 128))).collect();
        let u = BallUnion::new(
            Space::Interval,
            balls.iter().map(|(c, r)| Ball::new(Point::Real(c.clone()), r.clone()).unwrap()).collect(),
        );
        let k = closed_to_compact(&EffClosedSet::cell(Space::Interval, Cell::Seg(a.clone(), b.clone())), whole(Space::Interval)).unwrap();
        if semi_decide_cover(&*k, &u, 1 << e).unwrap().is_accepted() {
            // every point of the 1/256 grid in [a, b] is strictly inside some ball
            let lo = x.min(y) * 4;
            let hi = x.max(y) * 4;
            for t in lo..=hi {
                let p = q(t, 256);
                let inside = balls.iter().any(|(c, r)| {
                    let d = if p > *c { &p - c } else { c - &p };
                    d < *r
                });
                prop_assert!(inside, "grid point {} not covered", p);
            }
        }
    }
}

#[test]
fn identity_has_everything_fixed() {
    for space in [Space::cantor(2), Space::Interval, Space::Circle] {
        let fix = fixed_point_set(identity(space.clone()), whole(space.clone())).unwrap();
        for e in [0, 4, 8, 12] {
            assert!(fix.complement_emit(1 << e).is_empty(), "{} at fuel 2^{e}", space.name());
        }
    }
}
