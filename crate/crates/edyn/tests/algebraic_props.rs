use proptest::prelude::*;

use edyn::algebraic::{box_excluded, constraint_residual, AlgebraicPresentation, GroupRingPoly, TorusPointPrefix};
use edyn::groups::{GenAlphabet, Group, Word};
use edyn::kernel::rational::q;

fn poly() -> impl Strategy<Value = GroupRingPoly> {
    prop::collection::vec((prop::collection::vec(0u32..4, 0..4), -5i64..=5), 0..=5).prop_map(GroupRingPoly::new)
}

fn window() -> Vec<Word> {
    let g = GenAlphabet::standard(2);
    ["", "a", "b", "ab", "aa", "ba", "bb", "aab", "abb"].iter().map(|w| g.parse(w).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn star_is_an_involution(p in poly()) {
        let g = GenAlphabet::standard(2);
        prop_assert_eq!(p.star(&g).star(&g), p.clone());
        prop_assert!(p.terms.values().all(|&c| c != 0));
    }

    #[test]
    fn residuals_follow_the_shift(vals in prop::collection::vec(0i64..16, 9), s in 0u32..4) {
        let h = AlgebraicPresentation::harmonic();
        let x = TorusPointPrefix::new(window().into_iter().map(|w| (0, w)).zip(vals.iter().map(|&v| q(v, 16))), 4);
        let sx = x.shifted(s);
        for v in [vec![], vec![0], vec![2]] {
            let r = constraint_residual(&x, 0, &v, &h).unwrap();
            let sv: Word = [vec![s], v.clone()].concat();
            prop_assert_eq!(constraint_residual(&sx, 0, &sv, &h).unwrap(), r);
        }
    }

    #[test]
    fn padding_with_zero_relations_changes_nothing(vals in prop::collection::vec(0i64..4, 4), p in 1u32..=3) {
        let h = AlgebraicPresentation::harmonic();
        let mut padded = h.clone();
        padded.relations.extend(std::iter::repeat(vec![GroupRingPoly::default()]).take(5));
        let g = h.gens().clone();
        let words: Vec<Word> = ["", "a", "b", "ab"].iter().map(|w| g.parse(w).unwrap()).collect();
        let x = TorusPointPrefix::new(words.into_iter().map(|w| (0, w)).zip(vals.iter().map(|&v| q(v, 4))), p);
        let cell = x.to_cell(&h);
        for fuel in [4, 64, 1024] {
            prop_assert_eq!(box_excluded(&h, &cell, fuel), box_excluded(&padded, &cell, fuel));
        }
    }
}

#[test]
fn exclusion_is_fuel_monotone() {
    let h = AlgebraicPresentation::harmonic();
    let g = h.gens().clone();
    let words: Vec<Word> = ["", "a", "b", "ab", "ba"].iter().map(|w| g.parse(w).unwrap()).collect();
    for bits in 0..4u32.pow(5) {
        let vals: Vec<_> = (0..5).map(|i| q((bits >> (2 * i) & 3) as i64, 4)).collect();
        let x = TorusPointPrefix::new(words.iter().map(|w| (0, w.clone())).zip(vals), 2);
        let cell = x.to_cell(&h);
        let at: Vec<bool> = [1, 16, 256, 4096].iter().map(|&f| box_excluded(&h, &cell, f)).collect();
        assert!(at.windows(2).all(|p| !p[0] || p[1]), "{bits}: {at:?}");
    }
}

#[test]
fn presentations_load_and_check_arity() {
    let z2 = Group::builtin("Z2").unwrap();
    let p = GroupRingPoly::parse(&z2.gens, &[("", 1)]).unwrap();
    assert!(AlgebraicPresentation::new(2, z2.clone(), vec![vec![p.clone()]]).is_err());
    assert!(AlgebraicPresentation::new(0, z2.clone(), vec![]).is_err());
    let two = AlgebraicPresentation::new(2, z2, vec![vec![p.clone(), p]]).unwrap();
    let back = AlgebraicPresentation::from_json(&two.to_json()).unwrap();
    assert_eq!(back.relations, two.relations);
}
