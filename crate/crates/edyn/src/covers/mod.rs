//! Effective covers, the subshifts they induce and the refining-cover chain.

mod action;
mod cover;

use std::sync::Arc;

use serde_json::{json, Value};

pub use action::*;
pub use cover::*;

use crate::groups::{GenAlphabet, Word};
use crate::kernel::{semi_decide_empty, Cell, EffClosedSet, Fuel, OpenSet, SemiDecision, Space};
use crate::{Error, Result};

/// p: F → {0,…,n} with F a finite set of reduced words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverPattern {
    pub support: Vec<Word>,
    pub labels: Vec<usize>,
}

impl CoverPattern {
    pub fn new(entries: Vec<(Word, usize)>) -> Self {
        let (support, labels) = entries.into_iter().unzip();
        CoverPattern { support, labels }
    }

    pub fn parse(gens: &GenAlphabet, entries: &[(&str, usize)]) -> Result<Self> {
        Ok(CoverPattern::new(entries.iter().map(|(w, l)| Ok((gens.parse(w)?, *l))).collect::<Result<_>>()?))
    }

    pub fn label(&self, w: &[u32]) -> Option<usize> {
        self.support.iter().position(|u| u == w).map(|i| self.labels[i])
    }

    pub fn to_json(&self, gens: &GenAlphabet) -> Value {
        let s: Vec<Value> =
            self.support.iter().zip(&self.labels).map(|(w, l)| json!([gens.format(w), l.to_string()])).collect();
        json!({ "support": s })
    }

    pub fn display(&self, gens: &GenAlphabet) -> String {
        let parts: Vec<String> = self
            .support
            .iter()
            .zip(&self.labels)
            .map(|(w, l)| format!("{}↦{l}", if w.is_empty() { "ε".to_string() } else { gens.format(w) }))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Complement of D(p): cells some g ∈ F moves off P̄_{p(g)}.
struct DpComplement {
    space: Space,
    action: Action,
    cover: EffectiveCover,
    pattern: CoverPattern,
}

impl OpenSet for DpComplement {
    fn space(&self) -> &Space {
        &self.space
    }

    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.pattern.support.iter().zip(&self.pattern.labels).any(|(g, &l)| {
            let img = self.action.image_cell(g, c, fuel);
            self.cover.pieces[l].parts.iter().any(|u| u.iter().all(|b| self.space.cell_disjoint_closed_ball(&img, b)))
        })
    }
}

/// D(p) = ⋂_{g ∈ F} g⁻¹(P̄_{p(g)}), to be intersected with the carrier.
pub fn dp_set(p: &CoverPattern, action: &Action, cover: &EffectiveCover) -> Result<EffClosedSet> {
    if action.space != cover.space {
        return Err(Error::SpaceMismatch(format!("action on {} vs cover on {}", action.space.name(), cover.space.name())));
    }
    for (w, &l) in p.support.iter().zip(&p.labels) {
        action.check_word(w)?;
        if l >= cover.len() {
            return Err(Error::Invalid(format!("label {l} but the cover has {} pieces", cover.len())));
        }
    }
    Ok(EffClosedSet::new(Arc::new(DpComplement {
        space: cover.space.clone(),
        action: action.clone(),
        cover: cover.clone(),
        pattern: p.clone(),
    })))
}

/// Semi-decides D(p) ∩ X = ∅.
pub fn dp_empty(p: &CoverPattern, action: &Action, cover: &EffectiveCover, fuel: Fuel) -> Result<SemiDecision> {
    semi_decide_empty(&dp_set(p, action, cover)?, &*cover.carrier, fuel)
}

/// All labelings of the window's words by cover pieces, in lexicographic order.
pub fn window_patterns(words: &[Word], pieces: usize) -> Result<Vec<CoverPattern>> {
    let total = (pieces as u128).checked_pow(words.len() as u32).filter(|&t| t <= 1 << 22);
    let Some(total) = total else {
        return Err(Error::Invalid(format!("{} labelings of {} words is too many", pieces, words.len())));
    };
    let mut out = Vec::with_capacity(total as usize);
    for mut i in 0..total {
        let mut labels = vec![0; words.len()];
        for l in labels.iter_mut().rev() {
            *l = (i % pieces as u128) as usize;
            i /= pieces as u128;
        }
        out.push(CoverPattern { support: words.to_vec(), labels });
    }
    Ok(out)
}

/// Patterns on the window whose D(p) is certified empty within `fuel`.
pub fn subshift_cover_forbidden(
    action: &Action,
    cover: &EffectiveCover,
    window: Window,
    fuel: Fuel,
) -> Result<Vec<CoverPattern>> {
    let words = window.words(&action.gens);
    for w in &words {
        action.check_word(w)?;
    }
    let mut out = Vec::new();
    for p in window_patterns(&words, cover.len())? {
        if dp_empty(&p, action, cover, fuel)?.is_accepted() {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::builtin_system;
    use crate::kernel::{closed_to_compact, whole};

    fn odometer() -> (Action, EffectiveCover) {
        let sys = builtin_system("odometer", &json!({})).unwrap();
        let act = Action::from_system(&sys).unwrap();
        let k = closed_to_compact(&sys.carrier, whole(sys.carrier.space.clone())).unwrap();
        let cover = EffectiveCover::cylinders(k, &[vec![0], vec![1]], 64).unwrap();
        (act, cover)
    }

    #[test]
    fn odometer_dp_examples() {
        let (act, cover) = odometer();
        let p = CoverPattern::parse(&act.gens, &[("", 0), ("a", 0)]).unwrap();
        assert!(dp_empty(&p, &act, &cover, 64).unwrap().is_accepted());
        let p = CoverPattern::parse(&act.gens, &[("", 0), ("a", 1)]).unwrap();
        assert!(!dp_empty(&p, &act, &cover, 1 << 12).unwrap().is_accepted());
        let e = CoverPattern::new(vec![]);
        assert!(!dp_empty(&e, &act, &cover, 1 << 10).unwrap().is_accepted());
    }

    #[test]
    fn odometer_forbidden_radius_one() {
        let (act, cover) = odometer();
        let got = subshift_cover_forbidden(&act, &cover, Window::Forward(1), 1 << 12).unwrap();
        let want = vec![
            CoverPattern::parse(&act.gens, &[("", 0), ("a", 0)]).unwrap(),
            CoverPattern::parse(&act.gens, &[("", 1), ("a", 1)]).unwrap(),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn cantor_chain_level_two() {
        let k = whole(Space::cantor(2));
        let c = refine_cover_sequence(k, 2, true, 1 << 12).unwrap();
        let cells: Vec<Cell> = c.pieces.iter().map(|p| c.space.closed_ball_cell(&p.parts[0][0])).collect();
        let want: Vec<Cell> = [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|w| Cell::word(w)).collect();
        assert_eq!(cells, want);
        assert_eq!(c.parent, Some(vec![0, 0, 1, 1]));
    }

    #[test]
    fn interval_level_one() {
        let k = whole(Space::Interval);
        let chain = CoverChain::new(k, false, 1 << 12);
        let c = chain.level(1).unwrap();
        assert!(c.diameter() <= crate::kernel::rational::q(1, 2));
        let c2 = chain.level(2).unwrap();
        assert!(c2.diameter() <= crate::kernel::rational::q(1, 4));
        let par = c2.parent.clone().unwrap();
        for (i, p) in c2.pieces.iter().enumerate() {
            assert!(inclusion_holds(&c2.space, p, &c.pieces[par[i]]));
        }
    }

    #[test]
    fn joins() {
        let (_, cover) = odometer();
        let j = join_covers(&cover, &cover, Some(256)).unwrap();
        assert_eq!(j.len(), 2);
    }
}
