//! Word-problem oracles and the groups they present.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use super::words::{GenAlphabet, Word};
use crate::kernel::Fuel;
use crate::{Error, Result};

pub type Decider = Arc<dyn Fn(&[u32]) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum WordProblem {
    /// No relations beyond free reduction.
    Free,
    /// A total decider for w̲ = 1.
    Decidable { name: String, decide: Decider },
    /// A recursive presentation; trivial words are enumerated from the relator closure.
    RecEnum(Arc<RelatorClosure>),
}

impl fmt::Debug for WordProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordProblem::Free => write!(f, "Free"),
            WordProblem::Decidable { name, .. } => write!(f, "Decidable({name})"),
            WordProblem::RecEnum(c) => write!(f, "RecEnum({} relators, {} families)", c.relators.len(), c.families.len()),
        }
    }
}

/// A relator template such as `t^k a T^k a t^k A T^k A`, instantiated at k = 1, 2, ….
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelatorFamily {
    pub template: String,
    tokens: Vec<(Word, bool)>,
}

impl RelatorFamily {
    pub fn parse(gens: &GenAlphabet, template: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for tok in template.split_whitespace() {
            match tok.strip_suffix("^k") {
                Some(w) => tokens.push((gens.parse(w)?, true)),
                None => tokens.push((gens.parse(tok)?, false)),
            }
        }
        Ok(RelatorFamily { template: template.to_string(), tokens })
    }

    pub fn at(&self, k: usize) -> Word {
        let mut w = Vec::new();
        for (t, rep) in &self.tokens {
            for _ in 0..if *rep { k } else { 1 } {
                w.extend_from_slice(t);
            }
        }
        w
    }
}

/// Normal closure of a presentation's relators, enumerated in stages.
///
/// Stage t: relators and family members k ≤ t (with inverses and cyclic rotations),
/// conjugated by reduced words of length ≤ t/2, then closed under products while the
/// reduced length stays ≤ t. New words of each stage come out in shortlex order.
pub struct RelatorClosure {
    gens: GenAlphabet,
    pub relators: Vec<Word>,
    pub families: Vec<RelatorFamily>,
    state: Mutex<ClosureState>,
}

#[derive(Default)]
struct ClosureState {
    /// Words first produced at stage t + 1.
    stages: Vec<Vec<Word>>,
    first: HashMap<Word, usize>,
}

/// Closure stage reached with a given fuel: 1 + ⌊log₄ fuel⌋, and 0 for no fuel.
pub fn closure_stage(fuel: Fuel) -> usize {
    if fuel == 0 {
        0
    } else {
        1 + (fuel.ilog2() / 2) as usize
    }
}

impl RelatorClosure {
    pub fn new(gens: GenAlphabet, relators: Vec<Word>, families: Vec<RelatorFamily>) -> Self {
        let relators = relators.into_iter().map(|r| gens.reduce(&r)).filter(|r| !r.is_empty()).collect();
        RelatorClosure { gens, relators, families, state: Mutex::new(ClosureState::default()) }
    }

    fn cyclic_reduce(&self, w: &[u32]) -> Word {
        let mut w = self.gens.reduce(w);
        while w.len() >= 2 && w[w.len() - 1] == self.gens.inv(w[0]) {
            w.pop();
            w.remove(0);
        }
        w
    }

    fn base(&self, t: usize) -> Vec<Word> {
        let mut rels: Vec<Word> = self.relators.clone();
        for fam in &self.families {
            for k in 1..=t {
                rels.push(fam.at(k));
            }
        }
        let mut out = HashSet::new();
        for r in rels {
            let c = self.cyclic_reduce(&r);
            if c.is_empty() || c.len() > t {
                continue;
            }
            for w in [c.clone(), self.gens.inverse(&c)] {
                for i in 0..w.len() {
                    let mut rot = w[i..].to_vec();
                    rot.extend_from_slice(&w[..i]);
                    out.insert(self.gens.reduce(&rot));
                }
            }
        }
        let mut v: Vec<Word> = out.into_iter().filter(|w| !w.is_empty()).collect();
        v.sort_by_key(|w| self.gens.reduced_rank(w));
        v
    }

    fn stage_words(&self, t: usize) -> HashSet<Word> {
        let base = self.base(t);
        let mut gens_n: Vec<Word> = Vec::new();
        let mut seen = HashSet::new();
        for c in self.gens.ball(t / 2) {
            let ci = self.gens.inverse(&c);
            for r in &base {
                let w = self.gens.mul(&self.gens.mul(&c, r), &ci);
                if !w.is_empty() && w.len() <= t && seen.insert(w.clone()) {
                    gens_n.push(w);
                }
            }
        }
        let mut frontier = gens_n.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for x in &frontier {
                for g in &gens_n {
                    let y = self.gens.mul(x, g);
                    if !y.is_empty() && y.len() <= t && seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        seen
    }

    fn ensure(&self, t: usize) -> std::sync::MutexGuard<'_, ClosureState> {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        while st.stages.len() < t {
            let s = st.stages.len() + 1;
            let all = self.stage_words(s);
            let mut fresh: Vec<Word> = all.into_iter().filter(|w| !st.first.contains_key(w)).collect();
            fresh.sort_by_key(|w| self.gens.reduced_rank(w));
            st.first.extend(fresh.iter().map(|w| (w.clone(), s)));
            st.stages.push(fresh);
        }
        st
    }

    /// Reduced nontrivial words certified trivial within `fuel`, in enumeration order.
    pub fn words(&self, fuel: Fuel) -> Vec<Word> {
        let t = closure_stage(fuel);
        let st = self.ensure(t);
        st.stages[..t].iter().flatten().cloned().collect()
    }

    /// Words of the stage-t closure, stage by stage, for stages 1, 2, … without end.
    pub fn stage(&self, t: usize) -> Vec<Word> {
        self.ensure(t).stages[t - 1].clone()
    }

    pub fn contains(&self, w: &[u32], fuel: Fuel) -> bool {
        let w = self.gens.reduce(w);
        if w.is_empty() {
            return true;
        }
        let t = closure_stage(fuel);
        if w.len() > t {
            return false;
        }
        let st = self.ensure(t);
        st.first.get(&w).is_some_and(|&s| s <= t)
    }
}

/// A finitely generated group: generators plus a word-problem oracle.
#[derive(Clone, Debug)]
pub struct Group {
    pub name: String,
    pub gens: GenAlphabet,
    pub wp: WordProblem,
}

fn abelian_decider(gens: &GenAlphabet) -> Decider {
    let g = gens.clone();
    Arc::new(move |w: &[u32]| {
        let mut sums = vec![0i64; g.generators()];
        for &s in w {
            if g.inv(s) == s {
                sums[g.gen_of(s)] ^= 1;
            } else {
                sums[g.gen_of(s)] += if g.is_positive(s) { 1 } else { -1 };
            }
        }
        sums.iter().all(|&x| x == 0)
    })
}

impl Group {
    pub fn free(gens: GenAlphabet) -> Self {
        Group { name: format!("F{}", gens.generators()), gens, wp: WordProblem::Free }
    }

    /// The free abelian group on the given generators; ℤ itself is free.
    pub fn abelian(gens: GenAlphabet) -> Self {
        if gens.generators() == 1 && gens.letters() == 2 {
            return Group { name: "Z".into(), gens, wp: WordProblem::Free };
        }
        let decide = abelian_decider(&gens);
        let name = format!("Z{}", gens.generators());
        Group { name: name.clone(), gens, wp: WordProblem::Decidable { name, decide } }
    }

    pub fn presented(name: &str, gens: GenAlphabet, relators: &[&str], families: &[&str]) -> Result<Self> {
        let rels = relators.iter().map(|r| gens.parse(r)).collect::<Result<Vec<_>>>()?;
        let fams = families.iter().map(|f| RelatorFamily::parse(&gens, f)).collect::<Result<Vec<_>>>()?;
        let closure = RelatorClosure::new(gens.clone(), rels, fams);
        Ok(Group { name: name.to_string(), gens, wp: WordProblem::RecEnum(Arc::new(closure)) })
    }

    /// Built-ins: `Z`, `Z2`, `F1`, `F2`, `lamplighter` (generators a, t), `Z2_presented`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "Z" => Ok(Group::abelian(GenAlphabet::standard(1))),
            "Z2" => Ok(Group::abelian(GenAlphabet::standard(2))),
            "F1" => Ok(Group::free(GenAlphabet::standard(1))),
            "F2" => Ok(Group::free(GenAlphabet::standard(2))),
            "Z2_presented" => Group::presented("Z2_presented", GenAlphabet::standard(2), &["abAB"], &[]),
            "lamplighter" => {
                let gens = GenAlphabet::from_pairs(&[('a', 'A'), ('t', 'T')])?;
                Group::presented("lamplighter", gens, &["aa"], &["t^k a T^k a t^k A T^k A"])
            }
            _ => Err(Error::Invalid(format!("unknown group {name}"))),
        }
    }

    /// u̲ = v̲ certified within `fuel`.
    pub fn certified_equal(&self, u: &[u32], v: &[u32], fuel: Fuel) -> bool {
        let w = self.gens.mul(u, &self.gens.inverse(v));
        self.certified_trivial(&w, fuel)
    }

    pub fn certified_trivial(&self, w: &[u32], fuel: Fuel) -> bool {
        let w = self.gens.reduce(w);
        if w.is_empty() {
            return true;
        }
        match &self.wp {
            WordProblem::Free => false,
            WordProblem::Decidable { decide, .. } => decide(&w),
            WordProblem::RecEnum(c) => c.contains(&w, fuel),
        }
    }

    /// Nontrivial reduced words certified trivial within `fuel`, in a fixed order.
    pub fn identity_words(&self, fuel: Fuel) -> Vec<Word> {
        match &self.wp {
            WordProblem::Free => vec![],
            WordProblem::Decidable { decide, .. } => {
                (1..fuel).map(|i| self.gens.reduced_unrank(i)).filter(|w| decide(w)).collect()
            }
            WordProblem::RecEnum(c) => c.words(fuel),
        }
    }

    /// The same enumeration as an endless sequence of steps; a step may produce nothing.
    pub fn identity_word_steps(&self) -> Box<dyn Iterator<Item = Option<Word>> + Send> {
        match &self.wp {
            WordProblem::Free => Box::new(std::iter::empty()),
            WordProblem::Decidable { decide, .. } => {
                let d = decide.clone();
                let g = self.gens.clone();
                Box::new((1u64..).map(move |i| Some(g.reduced_unrank(i)).filter(|w| d(w))))
            }
            WordProblem::RecEnum(c) => {
                let c = c.clone();
                if c.relators.is_empty() && c.families.is_empty() {
                    return Box::new(std::iter::empty());
                }
                Box::new((1usize..).flat_map(move |t| {
                    let v = c.stage(t);
                    if v.is_empty() {
                        vec![None]
                    } else {
                        v.into_iter().map(Some).collect()
                    }
                }))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let gens: Vec<String> = self.gens.positive_letters().iter().map(|&s| self.gens.name(s).to_string()).collect();
        let mut inv = serde_json::Map::new();
        for &s in &self.gens.positive_letters() {
            inv.insert(self.gens.name(s).to_string(), json!(self.gens.name(self.gens.inv(s)).to_string()));
        }
        let wp = match &self.wp {
            WordProblem::Free => json!({"kind": "free"}),
            WordProblem::Decidable { name, .. } => json!({"kind": "decidable", "builtin": name}),
            WordProblem::RecEnum(c) => json!({
                "kind": "re",
                "relators": c.relators.iter().map(|r| self.gens.format(r)).collect::<Vec<_>>(),
                "relator_families": c.families.iter().map(|f| f.template.clone()).collect::<Vec<_>>(),
            }),
        };
        json!({"generators": gens, "inverses": inv, "wp": wp})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(s) = v.as_str() {
            return Group::builtin(s);
        }
        let gl = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::spec("group.generators", "expected a list"))?;
        let mut pairs = Vec::new();
        for (i, g) in gl.iter().enumerate() {
            let name = g.as_str().and_then(one_char).ok_or_else(|| Error::spec(&format!("group.generators[{i}]"), "expected a one-letter name"))?;
            let inv = match v.get("inverses").and_then(|m| m.get(name.to_string())) {
                Some(x) => x.as_str().and_then(one_char).ok_or_else(|| Error::spec("group.inverses", "expected one-letter names"))?,
                None => name.to_ascii_uppercase(),
            };
            pairs.push((name, inv));
        }
        let gens = GenAlphabet::from_pairs(&pairs)?;
        let wp = v.get("wp").cloned().unwrap_or(json!({"kind": "free"}));
        match wp.get("kind").and_then(Value::as_str) {
            Some("free") | None => Ok(Group::free(gens)),
            Some("decidable") => match wp.get("builtin").and_then(Value::as_str) {
                Some("Z") | Some("Z2") | Some("abelian") => Ok(Group::abelian(gens)),
                Some("free") | Some("F2") | Some("F1") => Ok(Group::free(gens)),
                other => Err(Error::spec("group.wp.builtin", &format!("unknown decider {other:?}"))),
            },
            Some("re") => {
                let strs = |key: &str| -> Result<Vec<String>> {
                    match wp.get(key) {
                        None => Ok(vec![]),
                        Some(Value::Array(a)) => a
                            .iter()
                            .map(|x| x.as_str().map(String::from).ok_or_else(|| Error::spec(&format!("group.wp.{key}"), "expected strings")))
                            .collect(),
                        Some(_) => Err(Error::spec(&format!("group.wp.{key}"), "expected a list")),
                    }
                };
                let rels = strs("relators")?;
                let fams = strs("relator_families")?;
                let r: Vec<&str> = rels.iter().map(String::as_str).collect();
                let f: Vec<&str> = fams.iter().map(String::as_str).collect();
                Group::presented("presented", gens, &r, &f)
            }
            Some(k) => Err(Error::spec("group.wp.kind", &format!("unknown kind {k}"))),
        }
    }
}

fn one_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    let c = it.next()?;
    it.next().is_none().then_some(c)
}

/// Canonical names for a group with decidable word problem: the n-th name is the
/// shortlex-least word naming an element not named before.
pub struct ShortlexNamer {
    group: Group,
    state: Mutex<(Vec<Word>, u64)>,
}

impl ShortlexNamer {
    pub fn new(group: Group) -> Result<Self> {
        if matches!(group.wp, WordProblem::RecEnum(_)) {
            return Err(Error::Invalid("shortlex naming needs a decidable word problem".into()));
        }
        Ok(ShortlexNamer { group, state: Mutex::new((vec![], 0)) })
    }

    fn same(&self, u: &[u32], v: &[u32]) -> bool {
        self.group.certified_equal(u, v, 0)
    }

    fn grow(&self, st: &mut (Vec<Word>, u64)) {
        loop {
            let w = self.group.gens.reduced_unrank(st.1);
            st.1 += 1;
            if st.0.iter().all(|v| !self.same(v, &w)) {
                st.0.push(w);
                return;
            }
        }
    }

    pub fn name(&self, n: usize) -> Word {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        while st.0.len() <= n {
            self.grow(&mut st);
        }
        st.0[n].clone()
    }

    /// Index of the element named by `w`.
    pub fn index_of(&self, w: &[u32]) -> usize {
        let mut i = 0;
        loop {
            if self.same(&self.name(i), w) {
                return i;
            }
            i += 1;
        }
    }
}

pub fn shortlex_namer(group: &Group) -> Result<ShortlexNamer> {
    ShortlexNamer::new(group.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_names() {
        let z = Group::builtin("Z").unwrap();
        let n = shortlex_namer(&z).unwrap();
        let names: Vec<String> = (0..5).map(|i| z.gens.format(&n.name(i))).collect();
        assert_eq!(names, ["", "a", "A", "aa", "AA"]);
        assert_eq!(n.index_of(&z.gens.parse("aAaa").unwrap()), 3);
    }

    #[test]
    fn z2_ba_not_canonical() {
        let z2 = Group::builtin("Z2").unwrap();
        let n = shortlex_namer(&z2).unwrap();
        let ba = z2.gens.parse("ba").unwrap();
        assert!((0..40).all(|i| n.name(i) != ba));
    }

    #[test]
    fn lamplighter_closure() {
        let l = Group::builtin("lamplighter").unwrap();
        let aa = l.gens.parse("aa").unwrap();
        assert!(!l.certified_trivial(&aa, 1));
        assert!(l.certified_trivial(&aa, 4));
        let comm = l.gens.parse("taTatATA").unwrap();
        assert!(l.certified_trivial(&comm, 1 << 14));
        assert!(!l.certified_trivial(&l.gens.parse("t").unwrap(), 1 << 14));
    }

    #[test]
    fn presented_z2_commutator() {
        let g = Group::builtin("Z2_presented").unwrap();
        let w = g.gens.parse("abAB").unwrap();
        assert!(g.certified_trivial(&w, 64));
        assert!(g.identity_words(64).contains(&w));
    }

    #[test]
    fn json_round_trip() {
        let g = Group::builtin("lamplighter").unwrap();
        let back = Group::from_json(&g.to_json()).unwrap();
        assert_eq!(back.gens, g.gens);
        assert!(back.certified_trivial(&g.gens.parse("aa").unwrap(), 4));
    }
}
