//! Pattern codings, subshifts given by forbidden codings, their pullbacks to the free
//! group and the enumeration of maximal forbidden sets.

use std::sync::Arc;

use serde_json::{json, Value};

use super::words::{GenAlphabet, Word};
use super::wp::{Group, WordProblem};
use crate::kernel::{
    least_fuel, semi_decide_empty_in, Cell, Cyl, EffClosedSet, Fuel, OpenSet, RecCompact, SemiDecision, Space, Stream,
};
use crate::{Error, Result};

/// A finite partial map from words over S to alphabet indices; words are kept as given.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternCoding {
    pub entries: Vec<(Word, u32)>,
}

impl PatternCoding {
    pub fn new(entries: Vec<(Word, u32)>) -> Self {
        PatternCoding { entries }
    }

    pub fn parse(gens: &GenAlphabet, alphabet: &[String], entries: &[(&str, &str)]) -> Result<Self> {
        let mut out = Vec::new();
        for (w, s) in entries {
            out.push((gens.parse(w)?, symbol_index(alphabet, s)?));
        }
        Ok(PatternCoding { entries: out })
    }

    pub fn get(&self, w: &[u32]) -> Option<u32> {
        self.entries.iter().find(|(u, _)| u == w).map(|(_, a)| *a)
    }

    pub fn to_json(&self, gens: &GenAlphabet, alphabet: &[String]) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(w, a)| json!({"word": gens.format(w), "symbol": alphabet[*a as usize]}))
            .collect();
        json!({ "entries": entries })
    }

    pub fn from_json(v: &Value, gens: &GenAlphabet, alphabet: &[String]) -> Result<Self> {
        let arr = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::spec("coding.entries", "expected a list"))?;
        let mut out = Vec::new();
        for (i, e) in arr.iter().enumerate() {
            let w = e.get("word").and_then(Value::as_str).ok_or_else(|| Error::spec(format!("coding.entries[{i}].word"), "expected a string"))?;
            let s = match e.get("symbol") {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(Error::spec(format!("coding.entries[{i}].symbol"), "expected a symbol")),
            };
            out.push((gens.parse(w)?, symbol_index(alphabet, &s)?));
        }
        Ok(PatternCoding { entries: out })
    }

    /// Transport to F(S): words reduced, duplicates merged; `None` when two words reduce
    /// to the same element with different symbols (the cylinder is then empty).
    pub fn reduced(&self, gens: &GenAlphabet) -> Option<Vec<(Word, u32)>> {
        let mut out: Vec<(Word, u32)> = Vec::new();
        for (w, a) in &self.entries {
            let r = gens.reduce(w);
            match out.iter().find(|(u, _)| *u == r) {
                Some((_, b)) if b != a => return None,
                Some(_) => {}
                None => out.push((r, *a)),
            }
        }
        Some(out)
    }

    /// The cylinder [c] in A^{F(S)}, coordinates indexed by shortlex rank of reduced words.
    pub fn cylinder(&self, gens: &GenAlphabet) -> Option<Cyl> {
        let r = self.reduced(gens)?;
        let a: Vec<(u64, u32)> = r.iter().map(|(w, s)| (gens.reduced_rank(w), *s)).collect();
        Cyl::from_assignment(&a)
    }
}

fn symbol_index(alphabet: &[String], s: &str) -> Result<u32> {
    alphabet
        .iter()
        .position(|x| x == s)
        .map(|i| i as u32)
        .ok_or_else(|| Error::UnknownLetter(s.to_string()))
}

/// Semi-decides that c is inconsistent: two support words equal in Γ with different symbols.
pub fn coding_inconsistent(c: &PatternCoding, group: &Group, fuel: Fuel) -> SemiDecision {
    least_fuel(fuel, |f| {
        c.entries.iter().enumerate().any(|(i, (u, a))| {
            c.entries[i + 1..].iter().any(|(v, b)| a != b && group.certified_equal(u, v, f))
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubshiftKind {
    Sft,
    Ecp,
    Effective,
}

/// A Γ-subshift X_𝒞 given by an enumeration of forbidden codings.
#[derive(Clone)]
pub struct SubshiftSpec {
    pub name: String,
    pub alphabet: Vec<String>,
    pub group: Group,
    /// One enumeration step per item; `None` is a step that produced nothing.
    pub forbidden: Arc<Stream<Option<PatternCoding>>>,
    pub kind: SubshiftKind,
}

impl std::fmt::Debug for SubshiftSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SubshiftSpec({}, {:?} over {})", self.name, self.kind, self.group.name)
    }
}

pub fn binary() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

impl SubshiftSpec {
    pub fn sft(name: &str, alphabet: Vec<String>, group: Group, forbidden: Vec<PatternCoding>) -> Self {
        SubshiftSpec {
            name: name.to_string(),
            alphabet,
            group,
            forbidden: Arc::new(Stream::from_vec(forbidden.into_iter().map(Some).collect())),
            kind: SubshiftKind::Sft,
        }
    }

    pub fn enumerated(
        name: &str,
        alphabet: Vec<String>,
        group: Group,
        kind: SubshiftKind,
        forbidden: impl Iterator<Item = Option<PatternCoding>> + Send + 'static,
    ) -> Self {
        SubshiftSpec { name: name.to_string(), alphabet, group, forbidden: Arc::new(Stream::new(forbidden)), kind }
    }

    pub fn full(group: Group, alphabet: Vec<String>) -> Self {
        SubshiftSpec::sft(&format!("full_{}", group.name), alphabet, group, vec![])
    }

    /// Built-ins: `full_Z`, `golden_mean` (ℤ), `full_Z2`, `full_F2`, `full_lamplighter`, `full_Z2_presented`.
    pub fn builtin(name: &str) -> Result<Self> {
        if name == "golden_mean" {
            let z = Group::builtin("Z")?;
            let c = PatternCoding::parse(&z.gens, &binary(), &[("", "1"), ("a", "1")])?;
            return Ok(SubshiftSpec::sft("golden_mean", binary(), z, vec![c]));
        }
        match name.strip_prefix("full_") {
            Some(g) => Ok(SubshiftSpec::full(Group::builtin(g)?, binary())),
            None => Err(Error::Invalid(format!("unknown subshift {name}"))),
        }
    }

    pub fn space(&self) -> Space {
        Space::Cantor { arity: self.alphabet.len() as u32 }
    }

    /// Codings enumerated within the first `fuel` steps.
    pub fn forbidden_prefix(&self, fuel: Fuel) -> Vec<PatternCoding> {
        self.forbidden.take(fuel as usize).into_iter().flatten().collect()
    }

    /// X̂ ⊆ A^{F(S)} as an effectively closed set.
    pub fn pullback_set(&self) -> EffClosedSet {
        EffClosedSet::new(Arc::new(PullbackComplement { space: self.space(), spec: self.clone() }))
    }

    pub fn to_json(&self, fuel: Fuel) -> Value {
        let pats: Vec<Value> =
            self.forbidden_prefix(fuel).iter().map(|c| c.to_json(&self.group.gens, &self.alphabet)).collect();
        json!({
            "name": self.name,
            "alphabet": self.alphabet,
            "group": self.group.to_json(),
            "kind": format!("{:?}", self.kind),
            "forbidden": pats,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(s) = v.as_str() {
            return SubshiftSpec::builtin(s);
        }
        let alphabet: Vec<String> = match v.get("alphabet") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| match x {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(Error::spec("subshift.alphabet", "expected symbols")),
                })
                .collect::<Result<_>>()?,
            None => binary(),
            _ => return Err(Error::spec("subshift.alphabet", "expected a list")),
        };
        let group = Group::from_json(v.get("group").ok_or_else(|| Error::spec("subshift.group", "missing"))?)?;
        let forb = match v.get("forbidden") {
            None => vec![],
            Some(Value::Array(a)) => a
                .iter()
                .map(|c| PatternCoding::from_json(c, &group.gens, &alphabet))
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(Error::spec("subshift.forbidden", "expected a list")),
        };
        let name = v.get("name").and_then(Value::as_str).unwrap_or("subshift");
        Ok(SubshiftSpec::sft(name, alphabet, group, forb))
    }
}

/// The two-cell mismatch patterns {ε ↦ x, w ↦ y}, x ≠ y, over certified-trivial words w.
pub fn pullback_fullshift(group: &Group, alphabet_size: u32, fuel: Fuel) -> Vec<PatternCoding> {
    group.identity_words(fuel).iter().flat_map(|w| mismatch_patterns(w, alphabet_size)).collect()
}

fn mismatch_patterns(w: &[u32], k: u32) -> Vec<PatternCoding> {
    let mut out = Vec::new();
    for x in 0..k {
        for y in 0..k {
            if x != y {
                out.push(PatternCoding::new(vec![(vec![], x), (w.to_vec(), y)]));
            }
        }
    }
    out
}

/// Round-robin merge of several streams, skipping exhausted ones.
pub fn interleave<T: 'static>(mut its: Vec<Box<dyn Iterator<Item = T> + Send>>) -> impl Iterator<Item = T> + Send {
    let mut i = 0usize;
    std::iter::from_fn(move || {
        while !its.is_empty() {
            let k = i % its.len();
            match its[k].next() {
                Some(x) => {
                    i = k + 1;
                    return Some(x);
                }
                None => {
                    drop(its.remove(k));
                    i = k;
                }
            }
        }
        None
    })
}

/// The pullback X̂ as a subshift of the free group: transported forbidden codings interleaved
/// with consistency patterns from the word problem.
pub fn subshift_pullback(x: &SubshiftSpec) -> SubshiftSpec {
    let gens = x.group.gens.clone();
    let free = Group::free(gens.clone());
    let g2 = gens.clone();
    let src = x.forbidden.clone();
    let transported = (0usize..)
        .map_while(move |i| src.get(i))
        .map(move |c| c.and_then(|c| c.reduced(&g2)).map(PatternCoding::new));
    let k = x.alphabet.len() as u32;
    let consistency = x
        .group
        .identity_word_steps()
        .flat_map(move |w| match w {
            Some(w) => mismatch_patterns(&w, k).into_iter().map(Some).collect::<Vec<_>>(),
            None => vec![None],
        });
    let kind = if matches!(x.group.wp, WordProblem::Free) && x.kind == SubshiftKind::Sft {
        SubshiftKind::Sft
    } else {
        SubshiftKind::Effective
    };
    if kind == SubshiftKind::Sft {
        let list = x.forbidden_prefix(u64::MAX).iter().filter_map(|c| c.reduced(&gens).map(PatternCoding::new)).collect();
        return SubshiftSpec::sft(&format!("pullback_{}", x.name), x.alphabet.clone(), free, list);
    }
    SubshiftSpec::enumerated(
        &format!("pullback_{}", x.name),
        x.alphabet.clone(),
        free,
        kind,
        interleave(vec![Box::new(transported), Box::new(consistency)]),
    )
}

/// Complement of X̂: cells forcing a forbidden translate or a certified mismatch.
struct PullbackComplement {
    space: Space,
    spec: SubshiftSpec,
}

impl PullbackComplement {
    fn forced(&self, cyl: &Cyl, fuel: Fuel) -> bool {
        let g = &self.spec.group.gens;
        let asg: Vec<(Word, u32)> = cyl.assignments().map(|(i, v)| (g.reduced_unrank(i), v)).collect();
        for (i, (u, a)) in asg.iter().enumerate() {
            for (v, b) in &asg[i + 1..] {
                if a != b && self.spec.group.certified_equal(u, v, fuel) {
                    return true;
                }
            }
        }
        self.spec.forbidden.with_prefix(fuel as usize, |pats| {
            pats.iter().flatten().any(|p| match p.reduced(g) {
                Some(r) if !r.is_empty() => translate_hits(g, cyl, &asg, &r),
                _ => false,
            })
        })
    }
}

/// Some translate g·p is forced by the cylinder.
fn translate_hits(g: &GenAlphabet, cyl: &Cyl, asg: &[(Word, u32)], p: &[(Word, u32)]) -> bool {
    let (w0, a0) = &p[0];
    let w0i = g.inverse(w0);
    asg.iter().filter(|(_, v)| v == a0).any(|(u, _)| {
        let h = g.mul(u, &w0i);
        p.iter().all(|(w, a)| cyl.get(g.reduced_rank(&g.mul(&h, w))) == Some(*a))
    })
}

impl OpenSet for PullbackComplement {
    fn space(&self) -> &Space {
        &self.space
    }

    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        match c {
            Cell::Cyl(y) => self.forced(y, fuel),
            _ => false,
        }
    }
}

/// Candidate codings on a window: supports in order of size then position, labelings in
/// lexicographic order, up to `max_support` words.
pub fn window_codings(window: &[Word], alphabet_size: u32, max_support: usize) -> Vec<PatternCoding> {
    let mut out = Vec::new();
    for size in 1..=max_support.min(window.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let total = (alphabet_size as usize).pow(size as u32);
            for mut lab in 0..total {
                let mut e = Vec::with_capacity(size);
                for &i in idx.iter().rev() {
                    e.push((window[i].clone(), (lab % alphabet_size as usize) as u32));
                    lab /= alphabet_size as usize;
                }
                e.reverse();
                out.push(PatternCoding::new(e));
            }
            // next combination
            let mut k = size;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                if idx[k] < window.len() - size + k {
                    idx[k] += 1;
                    for j in k + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
                if k == 0 {
                    idx.clear();
                    break;
                }
            }
            if idx.is_empty() {
                break;
            }
        }
    }
    out
}

/// Candidate codings in a fixed order: supports are finite sets of reduced words whose
/// largest shortlex rank is n, for n = 0, 1, …, with every labeling.
pub fn coding_candidates(gens: &GenAlphabet, alphabet_size: u32) -> impl Iterator<Item = PatternCoding> + Send {
    let g = gens.clone();
    (0u64..).flat_map(move |n| {
        let g = g.clone();
        let n_sub = 1u64 << n.min(62);
        (0..n_sub).flat_map(move |mask| {
            let ranks: Vec<u64> = (0..n).filter(|i| mask >> i & 1 == 1).chain([n]).collect();
            let words: Vec<Word> = ranks.iter().map(|&r| g.reduced_unrank(r)).collect();
            let total = (alphabet_size as u64).pow(words.len() as u32);
            (0..total).map(move |mut lab| {
                let mut e: Vec<(Word, u32)> = Vec::new();
                for w in words.iter().rev() {
                    e.push((w.clone(), (lab % alphabet_size as u64) as u32));
                    lab /= alphabet_size as u64;
                }
                e.reverse();
                PatternCoding::new(e)
            })
        })
    })
}

/// Codings c among `candidates` with [c] ∩ X̂ certified empty within `fuel`.
pub fn cmax_enumerate_in(
    x: &SubshiftSpec,
    ambient: &dyn RecCompact,
    candidates: &[PatternCoding],
    fuel: Fuel,
) -> Result<Vec<PatternCoding>> {
    let set = x.pullback_set();
    let gens = &x.group.gens;
    let mut out = Vec::new();
    for c in candidates {
        let root = match c.cylinder(gens) {
            Some(y) => Cell::Cyl(y),
            None => {
                out.push(c.clone());
                continue;
            }
        };
        if semi_decide_empty_in(&set, ambient, &root, fuel)?.is_accepted() {
            out.push(c.clone());
        }
    }
    Ok(out)
}

/// 𝒞_max(X) within fuel: the first `fuel` candidate codings, each searched with inner fuel `fuel`.
pub fn cmax_enumerate(x: &SubshiftSpec, ambient: &dyn RecCompact, fuel: Fuel) -> Result<Vec<PatternCoding>> {
    let cands: Vec<PatternCoding> = coding_candidates(&x.group.gens, x.alphabet.len() as u32).take(fuel as usize).collect();
    cmax_enumerate_in(x, ambient, &cands, fuel)
}
