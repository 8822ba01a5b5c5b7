//! Recursively presented algebraic actions as effective dynamical systems on ((ℝ/ℤ)^{S*})^n.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::extension::EdsSpec;
use crate::groups::{closure_stage, GenAlphabet, Group, RelatorFamily, Word};
use crate::kernel::rational::{fmt_q, frac, parse_q, pow2};
use crate::kernel::{closed_to_compact, whole, Cell, CellPredicateOpen, EffClosedSet, FnMap, Fuel, MapRef, Space, Q};
use crate::covers::Action;
use crate::{Error, Result};

/// An element of ℤ[S*]: finitely many words with nonzero integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingPoly {
    pub terms: BTreeMap<Word, i64>,
}

impl GroupRingPoly {
    pub fn new(terms: impl IntoIterator<Item = (Word, i64)>) -> Self {
        let mut p = GroupRingPoly::default();
        for (w, c) in terms {
            *p.terms.entry(w).or_insert(0) += c;
        }
        p.terms.retain(|_, c| *c != 0);
        p
    }

    pub fn parse(gens: &GenAlphabet, terms: &[(&str, i64)]) -> Result<Self> {
        Ok(GroupRingPoly::new(terms.iter().map(|(w, c)| Ok((gens.parse(w)?, *c))).collect::<Result<Vec<_>>>()?))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// p* = Σ c g⁻¹.
    pub fn star(&self, gens: &GenAlphabet) -> Self {
        GroupRingPoly::new(self.terms.iter().map(|(w, c)| (gens.inverse(w), *c)))
    }

    pub fn to_json(&self, gens: &GenAlphabet) -> Value {
        json!({"terms": self.terms.iter().map(|(w, c)| json!({"word": gens.format(w), "coef": c})).collect::<Vec<_>>()})
    }

    pub fn from_json(gens: &GenAlphabet, v: &Value, path: &str) -> Result<Self> {
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::spec(format!("{path}.terms"), "expected an array"))?;
        let mut out = Vec::new();
        for (i, t) in terms.iter().enumerate() {
            let w = t
                .get("word")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::spec(format!("{path}.terms[{i}].word"), "expected a string"))?;
            let c = t
                .get("coef")
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::spec(format!("{path}.terms[{i}].coef"), "expected an integer"))?;
            out.push((gens.parse(w)?, c));
        }
        Ok(GroupRingPoly::new(out))
    }
}

/// A polynomial whose words are relator templates instantiated at k = 1, 2, ….
#[derive(Clone, Debug)]
pub struct PolyFamily {
    pub terms: Vec<(RelatorFamily, i64)>,
}

impl PolyFamily {
    pub fn at(&self, k: usize) -> GroupRingPoly {
        GroupRingPoly::new(self.terms.iter().map(|(f, c)| (f.at(k), *c)))
    }
}

/// J = image of a total map k ↦ (g(k)_1, …, g(k)_n): the listed relations first, then the
/// family members round-robin, then zero.
#[derive(Clone, Debug)]
pub struct AlgebraicPresentation {
    pub n: usize,
    pub group: Group,
    pub relations: Vec<Vec<GroupRingPoly>>,
    /// Each family yields one n-tuple per k ≥ 1.
    pub families: Vec<Vec<PolyFamily>>,
}

impl AlgebraicPresentation {
    pub fn new(n: usize, group: Group, relations: Vec<Vec<GroupRingPoly>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::spec("n", "need at least one component"));
        }
        if let Some(i) = relations.iter().position(|r| r.len() != n) {
            return Err(Error::spec(format!("relations[{i}]"), format!("expected {n} polynomials")));
        }
        Ok(AlgebraicPresentation { n, group, relations, families: vec![] })
    }

    /// ℤ² ↷ (ℝ/ℤ)^{ℤ²} cut out by x(g) + x(ga) + x(gb) = 0.
    pub fn harmonic() -> Self {
        let group = Group::builtin("Z2").expect("builtin");
        let p = GroupRingPoly::parse(&group.gens, &[("", 1), ("a", 1), ("b", 1)]).expect("letters");
        AlgebraicPresentation::new(1, group, vec![vec![p]]).expect("arity")
    }

    pub fn gens(&self) -> &GenAlphabet {
        &self.group.gens
    }

    /// g(k); zero past the end of a finite presentation.
    pub fn relation(&self, k: usize) -> Vec<GroupRingPoly> {
        if k < self.relations.len() {
            return self.relations[k].clone();
        }
        if self.families.is_empty() {
            return vec![GroupRingPoly::default(); self.n];
        }
        let j = k - self.relations.len();
        let (q, r) = j.div_rem(&self.families.len());
        self.families[r].iter().map(|f| f.at(q + 1)).collect()
    }

    pub fn space(&self) -> Space {
        Space::power(Space::Circle)
    }

    /// Coordinate index of x_i(w) in the product.
    pub fn coord(&self, i: usize, w: &[u32]) -> usize {
        self.n * self.gens().word_rank(w) as usize + i
    }

    pub fn coord_of(&self, j: usize) -> (usize, Word) {
        (j % self.n, self.gens().word_unrank((j / self.n) as u64))
    }

    pub fn to_json(&self) -> Value {
        let g = self.gens();
        json!({
            "n": self.n,
            "group": self.group.to_json(),
            "relations": self.relations.iter().map(|r| {
                if self.n == 1 { r[0].to_json(g) } else { json!(r.iter().map(|p| p.to_json(g)).collect::<Vec<_>>()) }
            }).collect::<Vec<_>>(),
            "relation_families": self.families.iter().map(|f| {
                let one = |p: &PolyFamily| json!({"terms": p.terms.iter().map(|(t, c)| json!({"word": t.template, "coef": c})).collect::<Vec<_>>()});
                if self.n == 1 { one(&f[0]) } else { json!(f.iter().map(one).collect::<Vec<_>>()) }
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).unwrap_or(1) as usize;
        let group = Group::from_json(v.get("group").ok_or_else(|| Error::spec("group", "missing"))?)?;
        let tuple = |x, path: &str| poly_tuple(n, x, path);
        let mut relations = Vec::new();
        for (k, r) in v.get("relations").and_then(Value::as_array).into_iter().flatten().enumerate() {
            let path = format!("relations[{k}]");
            let polys = tuple(r, &path)?
                .into_iter()
                .enumerate()
                .map(|(i, p)| GroupRingPoly::from_json(&group.gens, p, &format!("{path}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            relations.push(polys);
        }
        let mut families = Vec::new();
        for (k, r) in v.get("relation_families").and_then(Value::as_array).into_iter().flatten().enumerate() {
            let path = format!("relation_families[{k}]");
            let mut fam = Vec::new();
            for (i, p) in tuple(r, &path)?.into_iter().enumerate() {
                let terms = p
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::spec(format!("{path}[{i}].terms"), "expected an array"))?;
                let mut out = Vec::new();
                for (j, t) in terms.iter().enumerate() {
                    let w = t.get("word").and_then(Value::as_str).ok_or_else(|| {
                        Error::spec(format!("{path}[{i}].terms[{j}].word"), "expected a template string")
                    })?;
                    let c = t.get("coef").and_then(Value::as_i64).ok_or_else(|| {
                        Error::spec(format!("{path}[{i}].terms[{j}].coef"), "expected an integer")
                    })?;
                    out.push((RelatorFamily::parse(&group.gens, w)?, c));
                }
                fam.push(PolyFamily { terms: out });
            }
            families.push(fam);
        }
        let mut p = AlgebraicPresentation::new(n, group, relations)?;
        p.families = families;
        Ok(p)
    }
}

fn poly_tuple<'a>(n: usize, x: &'a Value, path: &str) -> Result<Vec<&'a Value>> {
    match x.as_array() {
        Some(a) => {
            if a.len() != n {
                return Err(Error::spec(path, format!("expected {n} polynomials")));
            }
            Ok(a.iter().collect())
        }
        None if n == 1 => Ok(vec![x]),
        None => Err(Error::spec(path, format!("expected {n} polynomials"))),
    }
}

/// Finitely many coordinates x_i(w) given as rationals mod 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TorusPointPrefix {
    pub assignments: BTreeMap<(usize, Word), Q>,
    pub precision: u32,
}

impl TorusPointPrefix {
    pub fn new(entries: impl IntoIterator<Item = ((usize, Word), Q)>, precision: u32) -> Self {
        TorusPointPrefix { assignments: entries.into_iter().map(|(k, x)| (k, frac(&x))).collect(), precision }
    }

    /// x_i(w) = c for every listed word.
    pub fn constant(words: &[Word], c: Q, precision: u32) -> Self {
        TorusPointPrefix::new(words.iter().map(|w| ((0, w.clone()), c.clone())), precision)
    }

    pub fn get(&self, i: usize, w: &[u32]) -> Option<&Q> {
        self.assignments.get(&(i, w.to_vec()))
    }

    /// (s·x)(s w) = x(w): the prefix moved by the generator letter s.
    pub fn shifted(&self, s: u32) -> Self {
        TorusPointPrefix {
            assignments: self
                .assignments
                .iter()
                .map(|((i, w), x)| {
                    let mut sw = vec![s];
                    sw.extend_from_slice(w);
                    ((*i, sw), x.clone())
                })
                .collect(),
            precision: self.precision,
        }
    }

    /// The box of arcs of length 2^-precision centered at the assigned values.
    pub fn to_cell(&self, pres: &AlgebraicPresentation) -> Cell {
        let half = pow2(-(self.precision as i64) - 1);
        let by_coord: BTreeMap<usize, &Q> = self.assignments.iter().map(|((i, w), x)| (pres.coord(*i, w), x)).collect();
        let len = by_coord.keys().next_back().map_or(0, |j| j + 1);
        Cell::Tuple(
            (0..len)
                .map(|j| match by_coord.get(&j) {
                    Some(x) => {
                        let a = frac(&(*x - &half));
                        let b = &a + &half + &half;
                        Cell::Seg(a, b)
                    }
                    None => Cell::Seg(Q::zero(), Q::one()),
                })
                .collect(),
        )
    }
}

fn concat(v: &[u32], u: &[u32]) -> Word {
    let mut w = v.to_vec();
    w.extend_from_slice(u);
    w
}

/// h_{k,v}(x) = Σ_i Σ_u x_i(vu) g(k)_i(u) mod 1.
pub fn constraint_residual(x: &TorusPointPrefix, k: usize, v: &[u32], pres: &AlgebraicPresentation) -> Result<Q> {
    let g = pres.relation(k);
    let mut sum = Q::zero();
    let mut missing = Vec::new();
    for (i, p) in g.iter().enumerate() {
        for (u, c) in &p.terms {
            let w = concat(v, u);
            match x.get(i, &w) {
                Some(val) => sum += val * Q::from_integer(BigInt::from(*c)),
                None => missing.push(format!("({i}, \"{}\")", pres.gens().format(&w))),
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Invalid(format!("missing coordinates {}", missing.join(", "))));
    }
    Ok(frac(&sum))
}

/// f_{u,v}(x)_i = x_i(u) − x_i(v) mod 1.
pub fn consistency_residual(x: &TorusPointPrefix, i: usize, u: &[u32], v: &[u32], gens: &GenAlphabet) -> Result<Q> {
    let get = |w: &[u32]| {
        x.get(i, w).ok_or_else(|| Error::Invalid(format!("missing coordinate ({i}, \"{}\")", gens.format(w))))
    };
    Ok(frac(&(get(u)? - get(v)?)))
}

/// Lifted real interval of a circle arc; None when it is the whole circle.
fn arc(c: &Cell) -> Option<(Q, Q)> {
    match c {
        Cell::Seg(a, b) if b - a < Q::one() => Some((a.clone(), b.clone())),
        _ => None,
    }
}

/// Whether the interval sum Σ c·[a, b] misses every integer.
fn misses_integers(terms: &[(i64, (Q, Q))]) -> bool {
    let (mut lo, mut hi) = (Q::zero(), Q::zero());
    for (c, (a, b)) in terms {
        let cq = Q::from_integer(BigInt::from(*c));
        if c.is_positive() {
            lo += &cq * a;
            hi += &cq * b;
        } else {
            lo += &cq * b;
            hi += &cq * a;
        }
    }
    lo.ceil() > hi
}

/// Relations, shifts v and word lengths examined at a fuel: all equal to the closure stage.
pub fn exclusion_stage(fuel: Fuel) -> usize {
    closure_stage(fuel)
}

/// Whether some residual is certifiably nonzero on the whole box at this fuel.
pub fn box_excluded(pres: &AlgebraicPresentation, c: &Cell, fuel: Fuel) -> bool {
    let Cell::Tuple(v) = c else { return false };
    let stage = exclusion_stage(fuel);
    // x_i(su) has index at least that of x_i(s)
    let gens = pres.gens();
    let arcs: Vec<Option<(Q, Q)>> = v.iter().map(arc).collect();
    let live: Vec<usize> = (0..v.len()).filter(|&j| arcs[j].is_some()).collect();
    let at = |i: usize, w: &[u32]| -> Option<&(Q, Q)> { arcs.get(pres.coord(i, w))?.as_ref() };
    // consistency: x_i(u) = x_i(w) whenever u and w name the same element
    for (a, &j) in live.iter().enumerate() {
        let (i, u) = pres.coord_of(j);
        if u.len() > stage {
            continue;
        }
        for &j2 in &live[a + 1..] {
            let (i2, w) = pres.coord_of(j2);
            if i2 != i || w.len() > stage {
                continue;
            }
            if pres.action_space_disjoint(&v[j], &v[j2]) && pres.group.certified_equal(&u, &w, fuel) {
                return true;
            }
        }
    }
    // relations: h_{k,v} ≠ 0
    let shifts: Vec<Word> = (0..words_up_to(gens, stage).min((v.len() / pres.n) as u64 + 1)).map(|r| gens.word_unrank(r)).collect();
    for k in 0..stage {
        let g = pres.relation(k);
        if g.iter().all(GroupRingPoly::is_zero) {
            continue;
        }
        'shift: for s in &shifts {
            let mut terms = Vec::new();
            for (i, p) in g.iter().enumerate() {
                for (u, cf) in &p.terms {
                    match at(i, &concat(s, u)) {
                        Some(iv) => terms.push((*cf, iv.clone())),
                        None => continue 'shift,
                    }
                }
            }
            if misses_integers(&terms) {
                return true;
            }
        }
    }
    false
}

fn words_up_to(gens: &GenAlphabet, len: usize) -> u64 {
    let l = gens.letters() as u64;
    (0..=len as u32).map(|k| l.pow(k)).sum()
}

impl AlgebraicPresentation {
    fn action_space_disjoint(&self, a: &Cell, b: &Cell) -> bool {
        Space::Circle.cells_disjoint(a, b)
    }

    /// Y as an effectively closed subset of the product.
    pub fn carrier(&self) -> EffClosedSet {
        let pres = self.clone();
        EffClosedSet::new(Arc::new(CellPredicateOpen {
            space: self.space(),
            pred: move |c: &Cell, f: Fuel| box_excluded(&pres, c, f),
        }))
    }

    /// t_s(x)_i(u) = x_i(s⁻¹u).
    pub fn shift_map(&self, s: u32) -> MapRef {
        let pres = self.clone();
        let si = self.gens().inv(s);
        Arc::new(FnMap {
            source: self.space(),
            target: self.space(),
            cell: Box::new(move |c, _| {
                let Cell::Tuple(v) = c else { panic!("shift applied to {c:?}") };
                let mut out = Vec::new();
                for j in 0.. {
                    let (i, u) = pres.coord_of(j);
                    let src = pres.coord(i, &concat(&[si], &u));
                    if src >= v.len() {
                        break;
                    }
                    out.push(v[src].clone());
                }
                Cell::Tuple(out)
            }),
            point: None,
        })
    }
}

/// Γ ↷ Y with Y = Y_(1) ∩ Y_(2) cut out by consistency and relation residuals.
pub fn algebraic_to_eds(pres: &AlgebraicPresentation) -> Result<EdsSpec> {
    let gens = pres.gens();
    let maps = (0..gens.letters() as u32).map(|s| (gens.name(s), pres.shift_map(s))).collect();
    let carrier = closed_to_compact(&pres.carrier(), whole(pres.space()))?;
    EdsSpec::new("algebraic", carrier, Action::new(maps)?, pres.group.clone())
}

/// Outcome for one box of an exclusion sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub values: Vec<Q>,
    pub excluded: bool,
}

/// Every box of arcs of length 2^-precision centered at the grid 2^-precision ℤ/ℤ on the window words.
pub fn exclusion_sweep(pres: &AlgebraicPresentation, window: &[Word], precision: u32, fuel: Fuel) -> Vec<SweepRow> {
    let m = 1u64 << precision;
    let coords: Vec<(usize, Word)> = (0..pres.n).flat_map(|i| window.iter().map(move |w| (i, w.clone()))).collect();
    let total = (m as u128).pow(coords.len() as u32);
    let mut out = Vec::new();
    for idx in 0..total.min(1 << 16) {
        let mut r = idx;
        let values: Vec<Q> = coords
            .iter()
            .map(|_| {
                let d = (r % m as u128) as i64;
                r /= m as u128;
                Q::new(d.into(), (m as i64).into())
            })
            .collect();
        let x = TorusPointPrefix::new(coords.iter().cloned().zip(values.iter().cloned()), precision);
        let excluded = box_excluded(pres, &x.to_cell(pres), fuel);
        out.push(SweepRow { values, excluded });
    }
    out
}

pub fn format_values(v: &[Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}

pub fn parse_values(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(|t| parse_q(t.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::q;

    fn words(g: &GenAlphabet, ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| g.parse(w).unwrap()).collect()
    }

    #[test]
    fn star_examples() {
        let h = AlgebraicPresentation::harmonic();
        let g = h.gens();
        let p = GroupRingPoly::parse(g, &[("", 1), ("a", 1), ("b", 1)]).unwrap();
        assert_eq!(p.star(g), GroupRingPoly::parse(g, &[("", 1), ("A", 1), ("B", 1)]).unwrap());
        let p = GroupRingPoly::parse(g, &[("ab", 2)]).unwrap();
        assert_eq!(p.star(g), GroupRingPoly::parse(g, &[("BA", 2)]).unwrap());
    }

    #[test]
    fn residual_examples() {
        let h = AlgebraicPresentation::harmonic();
        let ws = words(h.gens(), &["", "a", "b"]);
        let x = TorusPointPrefix::constant(&ws, q(1, 3), 4);
        assert_eq!(constraint_residual(&x, 0, &[], &h).unwrap(), Q::zero());
        let x = TorusPointPrefix::constant(&ws, q(1, 2), 4);
        assert_eq!(constraint_residual(&x, 0, &[], &h).unwrap(), q(1, 2));
        assert_eq!(constraint_residual(&x, 5, &[], &h).unwrap(), Q::zero());
        assert!(constraint_residual(&x, 0, &[0], &h).is_err());
        let g = h.gens();
        let y = TorusPointPrefix::new(
            vec![((0, g.parse("ab").unwrap()), q(1, 4)), ((0, g.parse("ba").unwrap()), q(3, 4))],
            4,
        );
        assert_eq!(consistency_residual(&y, 0, &g.parse("ab").unwrap(), &g.parse("ba").unwrap(), g).unwrap(), q(1, 2));
    }

    #[test]
    fn harmonic_boxes() {
        let h = AlgebraicPresentation::harmonic();
        let ws = words(h.gens(), &["", "a", "b", "ab"]);
        for p in 0..8 {
            let third = TorusPointPrefix::constant(&ws, q(1, 3), p);
            assert!(!box_excluded(&h, &third.to_cell(&h), 1 << 16));
        }
        let half = TorusPointPrefix::constant(&ws, q(1, 2), 2);
        assert!(box_excluded(&h, &half.to_cell(&h), 1 << 4));
        let half1 = TorusPointPrefix::constant(&ws, q(1, 2), 1);
        assert!(!box_excluded(&h, &half1.to_cell(&h), 1 << 16));
    }

    #[test]
    fn doubling_map() {
        let z = Group::builtin("Z").unwrap();
        let p = GroupRingPoly::parse(&z.gens, &[("a", 1), ("", -2)]).unwrap();
        let pres = AlgebraicPresentation::new(1, z, vec![vec![p]]).unwrap();
        let g = pres.gens().clone();
        let ok = TorusPointPrefix::new(vec![((0, vec![]), q(1, 3)), ((0, g.parse("a").unwrap()), q(2, 3))], 6);
        let bad = TorusPointPrefix::new(vec![((0, vec![]), q(1, 3)), ((0, g.parse("a").unwrap()), q(1, 2))], 6);
        assert!(!box_excluded(&pres, &ok.to_cell(&pres), 1 << 16));
        assert!(box_excluded(&pres, &bad.to_cell(&pres), 1 << 4));
    }

    #[test]
    fn consistency_exclusion() {
        let h = AlgebraicPresentation::harmonic();
        let g = h.gens();
        let x = TorusPointPrefix::new(
            vec![((0, g.parse("ab").unwrap()), q(1, 4)), ((0, g.parse("ba").unwrap()), q(3, 4))],
            3,
        );
        assert!(box_excluded(&h, &x.to_cell(&h), 1 << 4));
    }

    #[test]
    fn trivial_presentation_excludes_nothing() {
        let z = Group::builtin("Z").unwrap();
        let pres = AlgebraicPresentation::new(1, z, vec![]).unwrap();
        for row in exclusion_sweep(&pres, &words(pres.gens(), &["", "a"]), 2, 1 << 10) {
            assert!(!row.excluded);
        }
    }

    #[test]
    fn json_round_trip() {
        let h = AlgebraicPresentation::harmonic();
        let back = AlgebraicPresentation::from_json(&h.to_json()).unwrap();
        assert_eq!(back.relations, h.relations);
        assert_eq!(back.n, 1);
    }
}
