use std::collections::BTreeSet;

use serde_json::Value;

use edyn::covers::{inclusion_holds, piece_diam, subshift_cover_forbidden, CoverChain, EffectiveCover, Window};
use edyn::extension::EdsSpec;
use edyn::kernel::rational::{pow2, q};
use edyn::kernel::{whole, Space};

fn words(len: usize) -> Vec<Vec<u32>> {
    (0..1u32 << len).map(|b| (0..len).map(|i| (b >> (len - 1 - i)) & 1).collect()).collect()
}

#[test]
fn identity_forbids_exactly_the_disagreements() {
    let e = EdsSpec::builtin("identity", &Value::Null).unwrap();
    for depth in [1, 2] {
        let cover = EffectiveCover::cylinders(e.carrier.clone(), &words(depth), 1 << 12).unwrap();
        for r in [1, 2] {
            let got = subshift_cover_forbidden(&e.action, &cover, Window::Forward(r), 1 << 12).unwrap();
            let got: BTreeSet<Vec<usize>> = got.iter().map(|p| p.labels.clone()).collect();
            let n = cover.len();
            let mut want = BTreeSet::new();
            for i in 0..n.pow(r as u32 + 1) {
                let labels: Vec<usize> = (0..=r).map(|k| i / n.pow(k as u32) % n).collect();
                if labels.iter().any(|&l| l != labels[0]) {
                    want.insert(labels);
                }
            }
            assert_eq!(got, want, "depth {depth}, radius {r}");
        }
    }
}

#[test]
fn odometer_stabilizes_by_2_14() {
    let e = EdsSpec::builtin("odometer", &Value::Null).unwrap();
    let cover = EffectiveCover::cylinders(e.carrier.clone(), &words(1), 1 << 14).unwrap();
    let got = subshift_cover_forbidden(&e.action, &cover, Window::Forward(1), 1 << 14).unwrap();
    let labels: BTreeSet<Vec<usize>> = got.iter().map(|p| p.labels.clone()).collect();
    assert_eq!(labels, [vec![0, 0], vec![1, 1]].into_iter().collect());
}

#[test]
fn rotation_patterns_are_unrealizable() {
    let e = EdsSpec::rotation(&q(1, 6)).unwrap();
    let cuts: Vec<_> = (0..=6).map(|i| q(i, 6)).collect();
    let cover = EffectiveCover::arcs(e.carrier.clone(), &cuts, 1 << 12).unwrap();
    let got = subshift_cover_forbidden(&e.action, &cover, Window::Forward(1), 1 << 12).unwrap();
    for p in &got {
        let (a, b) = (p.labels[0] as i64, p.labels[1] as i64);
        // arc a shifted by 1/6 is arc a+1, which touches arcs a and a+2 only at endpoints
        let realizable = [(a + 1) % 6, a % 6, (a + 2) % 6].contains(&b);
        assert!(!realizable, "{a} then {b} was forbidden");
    }
    assert_eq!(got.len(), 36 - 18);
}

fn check_chain(carrier: edyn::kernel::CompactRef, zero_dim: bool, levels: usize) {
    let space = carrier.space().clone();
    let chain = CoverChain::new(carrier, zero_dim, 1 << 12);
    let mut prev: Option<EffectiveCover> = None;
    for n in 0..=levels {
        let c = chain.level(n).unwrap();
        for p in &c.pieces {
            assert!(piece_diam(&space, p) <= pow2(-(n as i64)), "{} level {n}", space.name());
        }
        if let Some(pc) = &prev {
            let table = c.inclusions.as_ref().expect("inclusion table");
            for (i, ps) in table.iter().enumerate() {
                assert!(!ps.is_empty(), "{} level {n}: piece {i} has no parent", space.name());
                for (j, pp) in pc.pieces.iter().enumerate() {
                    assert_eq!(ps.contains(&j), inclusion_holds(&space, &c.pieces[i], pp), "{} level {n}", space.name());
                }
            }
        }
        prev = Some(c);
    }
}

#[test]
fn refinement_chains() {
    let golden = EdsSpec::builtin("golden_mean", &Value::Null).unwrap();
    check_chain(golden.carrier, true, 4);
    check_chain(whole(Space::cantor(2)), true, 4);
    check_chain(whole(Space::Interval), false, 3);
    check_chain(whole(Space::Circle), false, 3);
}
