//! Period enumeration, the circle-of-circles and cyclic-tower systems, and WEDS tables.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::cantor::{brouwer_encode, BrouwerOptions};
use crate::covers::{subshift_cover_forbidden, Action, CoverPattern, EffectiveCover, Window};
use crate::extension::{cover_codings, factor_through, inverse_limit, EdsSpec};
use crate::groups::{subshift_pullback, Group, SubshiftKind, SubshiftSpec};
use crate::kernel::cell::box_sq_dist;
use crate::kernel::rational::{pow2, sqrt_bounds};
use crate::kernel::trig::{cos_sin_turn_range, Iv};
use crate::kernel::{
    closed_to_compact, cover_certificate, image_compact, iterate, product_space, whole, Cell, CellPredicateOpen,
    Certificate, DiagonalComplement, EffClosedSet, FnMap, Fuel, MapRef, OpenRef, Point, PreimageOpen, ProductMap,
    Space, Union, Q, identity,
};
use crate::{Error, Result};

/// n with Y_n ∩ Δ² certified empty, so that no point has period n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodCertificate {
    pub n: i64,
    pub fuel: Fuel,
    pub witness: Certificate,
}

impl PeriodCertificate {
    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "fuel": self.fuel, "witness": self.witness.to_json()})
    }
}

/// T^n for the single generator; negative n uses the inverse letter.
pub fn power_map(e: &EdsSpec, n: i64) -> Result<MapRef> {
    let gens = &e.group.gens;
    if gens.generators() != 1 {
        return Err(Error::Invalid(format!("periods need a ℤ-action, got {} generators", gens.generators())));
    }
    let s = if n >= 0 { 0 } else { gens.inv(0) };
    let m = e.action.map(s)?;
    iterate(m.clone(), n.unsigned_abs() as u32)
}

/// Checks one n: f_n(x, y) = (T^n x, y), and K² ⊆ (X² ∖ Δ²) ∪ f_n⁻¹(X² ∖ Δ²).
pub fn period_query(e: &EdsSpec, n: i64, fuel: Fuel) -> Result<Certificate> {
    let t = power_map(e, n)?;
    let (space, k2) = product_space(vec![e.carrier.clone(), e.carrier.clone()]);
    let off: OpenRef = Arc::new(DiagonalComplement { space: space.clone() });
    let f: MapRef = Arc::new(ProductMap::list(vec![t, identity(e.space().clone())]));
    let pre: OpenRef = Arc::new(PreimageOpen { map: f, open: off.clone() });
    let u = Union { space, parts: vec![off, pre] };
    cover_certificate(&format!("no point of period {n}"), &*k2, &u, fuel)
}

/// Certificates for the n in the range that are certified not to be periods, in increasing |n| then sign.
pub fn periods_complement(e: &EdsSpec, range: std::ops::RangeInclusive<i64>, fuel: Fuel) -> Result<Vec<PeriodCertificate>> {
    let mut out = Vec::new();
    for n in range {
        let c = period_query(e, n, fuel)?;
        if let Some(f) = c.fuel.filter(|_| c.outcome == "accepted") {
            out.push(PeriodCertificate { n, fuel: f, witness: c });
        }
    }
    Ok(out)
}

fn iv_of(a: &Q, b: &Q) -> Iv {
    Iv::new(a.clone(), b.clone())
}

/// Enclosure of z·exp(±2πi|z|) over a box, clamped to the square.
fn swirl_box(c: &Cell, sign: i64) -> Cell {
    let Cell::Box(x0, x1, y0, y1) = c else { panic!("swirl applied to {c:?}") };
    let diam = (x1 - x0) + (y1 - y0);
    let bits = if diam.is_zero() {
        64
    } else {
        let mut b = 8u32;
        while pow2(-(b as i64) + 8) > diam && b < 160 {
            b += 1;
        }
        b
    };
    let zero = Q::zero();
    let (lo2, hi2) = box_sq_dist(&zero, &zero, x0, x1, y0, y1);
    let r = Iv::new(sqrt_bounds(&lo2, bits).0, sqrt_bounds(&hi2, bits).1);
    let turns = if sign > 0 { r } else { Iv::new(-r.hi, -r.lo) };
    let (co, si) = cos_sin_turn_range(&turns, bits);
    let (x, y) = (iv_of(x0, x1), iv_of(y0, y1));
    let nx = x.mul(&co).sub(&y.mul(&si)).round(bits);
    let ny = x.mul(&si).add(&y.mul(&co)).round(bits);
    let one = Q::one();
    let nx = nx.clamp(&-one.clone(), &one);
    let ny = ny.clamp(&-one.clone(), &one);
    Cell::Box(nx.lo, nx.hi, ny.lo, ny.hi)
}

fn swirl_map(sign: i64) -> MapRef {
    Arc::new(FnMap {
        source: Space::Square,
        target: Space::Square,
        cell: Box::new(move |c, _| swirl_box(c, sign)),
        point: Some(Box::new(|p| match p {
            Point::Plane(x, y) if x.is_zero() && y.is_zero() => Some(p.clone()),
            _ => None,
        })),
    })
}

/// {0} (when `origin`) ∪ ⋃_{n ∈ A} {|z| = 1/n} inside [-1,1]².
pub fn circles_carrier(a: &BTreeSet<u64>, origin: bool) -> EffClosedSet {
    let radii2: Vec<Q> = a.iter().map(|&n| Q::new(1.into(), (n * n).into())).collect();
    EffClosedSet::new(Arc::new(CellPredicateOpen {
        space: Space::Square,
        pred: move |c: &Cell, _f: Fuel| {
            let Cell::Box(x0, x1, y0, y1) = c else { return false };
            let zero = Q::zero();
            let (lo2, hi2) = box_sq_dist(&zero, &zero, x0, x1, y0, y1);
            (!origin || lo2 > zero) && radii2.iter().all(|r| *r < lo2 || *r > hi2)
        },
    }))
}

fn circles_eds(name: &str, a: &BTreeSet<u64>, origin: bool) -> Result<EdsSpec> {
    if let Some(&n) = a.iter().find(|&&n| n == 0) {
        return Err(Error::spec("A", format!("radius 1/{n} is undefined")));
    }
    let carrier = closed_to_compact(&circles_carrier(a, origin), whole(Space::Square))?;
    let action = Action::new(vec![('a', swirl_map(1)), ('A', swirl_map(-1))])?;
    EdsSpec::new(name, carrier, action, Group::builtin("Z")?)
}

/// Y = {0} ∪ {|z| = 1/n : n ∈ A} with T(z) = z·exp(2πi|z|).
pub fn circle_system(a: &BTreeSet<u64>) -> Result<EdsSpec> {
    circles_eds("circle_system", a, true)
}

/// The circles of `circle_system` without the fixed origin.
pub fn circle_system_punctured(a: &BTreeSet<u64>) -> Result<EdsSpec> {
    if a.is_empty() {
        return Err(Error::EmptySpace);
    }
    circles_eds("circle_system_punctured", a, false)
}

/// The point of the circle of radius 1/n at `quarter` quarter turns.
pub fn circle_point(n: u64, quarter: u32) -> Point {
    let r = Q::new(1.into(), (n as i64).into());
    match quarter % 4 {
        0 => Point::Plane(r, Q::zero()),
        1 => Point::Plane(Q::zero(), r),
        2 => Point::Plane(-r, Q::zero()),
        _ => Point::Plane(Q::zero(), -r),
    }
}

fn perm_map(size: u32, shift: i64) -> MapRef {
    let space = Space::Finite { size };
    let n = size as i64 - 1;
    let t = move |x: u32| -> u32 {
        if x == 0 || n == 0 {
            x
        } else {
            ((x as i64 - 1 + shift).rem_euclid(n) + 1) as u32
        }
    };
    Arc::new(FnMap {
        source: space.clone(),
        target: space,
        cell: Box::new(move |c, _| match c {
            Cell::Sym(Some(x)) => Cell::Sym(Some(t(*x))),
            other => other.clone(),
        }),
        point: Some(Box::new(move |p| match p {
            Point::Sym(x) => Some(Point::Sym(t(*x))),
            _ => None,
        })),
    })
}

fn level_space(n: usize) -> Space {
    Space::product((0..=n).map(|k| Space::Finite { size: k as u32 + 1 }).collect())
}

/// f_n on Y_n = X_0 × … × X_n: g_k = id for k ∈ A, constant 0 otherwise.
fn collapse_map(n: usize, a: &BTreeSet<u64>) -> MapRef {
    let space = level_space(n);
    let keep: Vec<bool> = (0..=n).map(|k| a.contains(&(k as u64))).collect();
    let keep2 = keep.clone();
    Arc::new(FnMap {
        source: space.clone(),
        target: space,
        cell: Box::new(move |c, _| {
            let Cell::Tuple(v) = c else { panic!("collapse applied to {c:?}") };
            Cell::Tuple(
                (0..keep.len())
                    .map(|k| if keep[k] { v.get(k).cloned().unwrap_or(Cell::Sym(None)) } else { Cell::Sym(Some(0)) })
                    .collect(),
            )
        }),
        point: Some(Box::new(move |p| match p {
            Point::Tuple(v) => Some(Point::Tuple(
                v.iter().enumerate().map(|(k, x)| if keep2[k] { x.clone() } else { Point::Sym(0) }).collect(),
            )),
            _ => None,
        })),
    })
}

/// π: Y_{n+1} → Y_n drops the last component.
fn drop_last(n: usize) -> MapRef {
    Arc::new(FnMap {
        source: level_space(n + 1),
        target: level_space(n),
        cell: Box::new(move |c, _| {
            let Cell::Tuple(v) = c else { panic!("projection applied to {c:?}") };
            Cell::Tuple(v.iter().take(n + 1).cloned().collect())
        }),
        point: Some(Box::new(move |p| match p {
            Point::Tuple(v) => Some(Point::Tuple(v.iter().take(n + 1).cloned().collect())),
            _ => None,
        })),
    })
}

fn level_action(n: usize, shift: i64) -> MapRef {
    Arc::new(ProductMap::list((0..=n).map(|k| perm_map(k as u32 + 1, shift)).collect()))
}

/// Y_A truncated at `depth`: the inverse limit of f_n(Y_n), n ≤ depth, with t_k = (1 2 … k) on every level.
pub fn tower_system(a: &BTreeSet<u64>, depth: usize) -> Result<EdsSpec> {
    if let Some(k) = a.iter().find(|&&k| k == 0 || k as usize > depth) {
        return Err(Error::spec("A", format!("level {k} is outside 1..={depth}")));
    }
    let levels = (0..=depth)
        .map(|n| image_compact(collapse_map(n, a), whole(level_space(n))))
        .collect::<Result<Vec<_>>>()?;
    let projections = (0..depth).map(drop_last).collect();
    let lim = inverse_limit(levels, projections)?;
    let carrier = closed_to_compact(&lim.set, lim.product)?;
    let act = |shift: i64| -> MapRef { Arc::new(ProductMap::list((0..=depth).map(|n| level_action(n, shift)).collect())) };
    let action = Action::new(vec![('a', act(1)), ('A', act(-1))])?;
    EdsSpec::new("tower_system", carrier, action, Group::builtin("Z")?)
}

/// The tower point whose top level is `top` (all lower levels are its prefixes).
pub fn tower_point(top: &[u32]) -> Point {
    Point::Tuple(
        (0..top.len())
            .map(|n| Point::Tuple(top[..=n].iter().map(|&x| Point::Sym(x)).collect()))
            .collect(),
    )
}

/// The same action moved to {0,1}^ℕ through the Brouwer encoding of a zero-dimensional carrier.
pub fn encode_system(e: &EdsSpec, levels: usize, fuel: Fuel) -> Result<(EdsSpec, crate::cantor::BrouwerEncoding)> {
    let enc = brouwer_encode(e.carrier.clone(), &BrouwerOptions { levels, fuel, ..Default::default() })?;
    let f: MapRef = enc.forward.clone();
    let mut out = factor_through(f, e)?;
    out.name = format!("{}_encoded", e.name);
    Ok((out, enc))
}

/// Y(Γ ↷ X, 𝒫_d) for the depth-d cylinder partition.
#[derive(Clone, Debug)]
pub struct WedsTable {
    pub depth: usize,
    /// Pieces: the depth-d words not certified to miss the carrier.
    pub words: Vec<Vec<u32>>,
    pub forbidden: Vec<CoverPattern>,
    pub subshift: SubshiftSpec,
}

impl WedsTable {
    pub fn piece_of(&self, w: &[u32]) -> Option<usize> {
        self.words.iter().position(|x| x == w)
    }
}

pub fn weds_check(e: &EdsSpec, depth: usize, window: Window, fuel: Fuel) -> Result<WedsTable> {
    let Space::Cantor { arity } = e.space() else {
        return Err(Error::Invalid(format!("WEDS tables need a Cantor carrier, got {}", e.space().name())));
    };
    if depth == 0 {
        return Err(Error::spec("depth", "need depth ≥ 1"));
    }
    let words: Vec<Vec<u32>> = Space::cantor(*arity)
        .cells_at_depth(depth)
        .into_iter()
        .filter(|c| !e.carrier.misses_cell(c, fuel))
        .map(|c| c.as_cyl().expect("cylinder").prefix.clone())
        .collect();
    let mut cover = EffectiveCover::cylinders(e.carrier.clone(), &words, fuel)?;
    cover.partition = true;
    let forbidden = subshift_cover_forbidden(&e.action, &cover, window, fuel)?;
    let gamma = SubshiftSpec::sft(
        &format!("Y({}, P{depth})", e.name),
        words.iter().map(|w| w.iter().map(|s| s.to_string()).collect()).collect(),
        e.group.clone(),
        cover_codings(&e.group.gens, &forbidden),
    );
    let subshift = subshift_pullback(&SubshiftSpec { kind: SubshiftKind::Effective, ..gamma });
    Ok(WedsTable { depth, words, forbidden, subshift })
}

/// Every depth-d forbidden pattern's lifts (labels extending each word) are forbidden at depth d+1.
pub fn weds_refines(coarse: &WedsTable, fine: &WedsTable) -> bool {
    let fine_set: BTreeSet<(Vec<crate::groups::Word>, Vec<usize>)> =
        fine.forbidden.iter().map(|p| (p.support.clone(), p.labels.clone())).collect();
    let parent: Vec<Option<usize>> = fine.words.iter().map(|w| coarse.piece_of(&w[..coarse.depth])).collect();
    for p in &coarse.forbidden {
        let opts: Vec<Vec<usize>> = p
            .labels
            .iter()
            .map(|&l| (0..fine.words.len()).filter(|&i| parent[i] == Some(l)).collect())
            .collect();
        let mut idx = vec![0usize; opts.len()];
        if opts.iter().any(Vec::is_empty) {
            continue;
        }
        loop {
            let labels: Vec<usize> = idx.iter().zip(&opts).map(|(&i, o)| o[i]).collect();
            if !fine_set.contains(&(p.support.clone(), labels)) {
                return false;
            }
            let mut j = idx.len();
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < opts[j].len() {
                    break;
                }
                idx[j] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    true
}

/// Least n ≥ 1 with T^n p = p, searched up to `bound`, for points the action evaluates exactly.
pub fn least_period(e: &EdsSpec, p: &Point, bound: u32) -> Option<u32> {
    let mut q = p.clone();
    for n in 1..=bound {
        q = e.action.eval(&[0], &q)?;
        if q == *p {
            return Some(n);
        }
    }
    None
}

fn index_set(params: &Value, key: &str) -> Result<BTreeSet<u64>> {
    let arr = params
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::spec(format!("params.{key}"), "expected an array of positive integers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| match v.as_u64() {
            Some(k) if k >= 1 => Ok(k),
            _ => Err(Error::spec(format!("params.{key}[{i}]"), "expected a positive integer")),
        })
        .collect()
}

/// Any named system: the Cantor built-ins, `rotation`, `identity`, `circles` and `tower`.
pub fn system_by_name(name: &str, params: &Value) -> Result<EdsSpec> {
    match name {
        "circles" => {
            let a = index_set(params, "A")?;
            if params.get("punctured").and_then(Value::as_bool).unwrap_or(false) {
                circle_system_punctured(&a)
            } else {
                circle_system(&a)
            }
        }
        "tower" => {
            let a = index_set(params, "A")?;
            let depth = params.get("depth").and_then(Value::as_u64).unwrap_or(4) as usize;
            tower_system(&a, depth)
        }
        _ => EdsSpec::builtin(name, params),
    }
}

/// `{"builtin": name, "params": {...}}`.
pub fn system_from_json(v: &Value) -> Result<EdsSpec> {
    let name = v
        .get("builtin")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::spec("builtin", "expected a system name"))?;
    system_by_name(name, v.get("params").unwrap_or(&Value::Null))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> BTreeSet<u64> {
        v.iter().copied().collect()
    }

    #[test]
    fn systems_load_from_json() {
        let e = system_from_json(&json!({"builtin": "circles", "params": {"A": [2, 3]}})).unwrap();
        assert_eq!(e.space(), &Space::Square);
        assert!(system_from_json(&json!({"builtin": "tower", "params": {"A": [1, 2], "depth": 2}})).is_ok());
        let err = system_from_json(&json!({"builtin": "circles", "params": {"A": [0]}})).unwrap_err();
        assert!(err.to_string().contains("params.A[0]"));
        assert!(system_from_json(&json!({"params": {}})).is_err());
    }

    #[test]
    fn odometer_has_no_periods() {
        let e = EdsSpec::builtin("odometer", &Value::Null).unwrap();
        let got: Vec<i64> = periods_complement(&e, -4..=4, 1 << 16).unwrap().iter().map(|c| c.n).collect();
        assert_eq!(got, vec![-4, -3, -2, -1, 1, 2, 3, 4]);
    }

    #[test]
    fn circles_with_origin_emit_nothing() {
        let e = circle_system(&set(&[2, 3])).unwrap();
        assert!(periods_complement(&e, 1..=3, 1 << 10).unwrap().is_empty());
    }

    #[test]
    fn punctured_circles_period_set() {
        let e = circle_system_punctured(&set(&[2])).unwrap();
        let got: Vec<i64> = periods_complement(&e, 1..=2, 1 << 12).unwrap().iter().map(|c| c.n).collect();
        assert_eq!(got, vec![1]);
    }

    #[test]
    fn tower_orbit() {
        let e = tower_system(&set(&[2, 3]), 3).unwrap();
        let p = tower_point(&[0, 0, 1, 0]);
        assert_eq!(least_period(&e, &p, 10), Some(2));
        assert!(periods_complement(&e, 1..=3, 1 << 10).unwrap().is_empty());
    }

    #[test]
    fn tower_carrier_collapses() {
        let e = tower_system(&set(&[2, 3]), 4).unwrap();
        let space = e.space().clone();
        let cell = space.point_cell(&tower_point(&[0, 1, 0, 0, 0]), 64);
        assert!(e.carrier.misses_cell(&cell, 1 << 10));
        let cell = space.point_cell(&tower_point(&[0, 0, 2, 3, 0]), 64);
        assert!(!e.carrier.misses_cell(&cell, 1 << 10));
    }

    #[test]
    fn weds_odometer() {
        let e = EdsSpec::builtin("odometer", &Value::Null).unwrap();
        let t1 = weds_check(&e, 1, Window::Forward(1), 1 << 12).unwrap();
        assert_eq!(t1.forbidden.len(), 2);
        let t2 = weds_check(&e, 2, Window::Forward(1), 1 << 12).unwrap();
        assert!(weds_refines(&t1, &t2));
    }

    #[test]
    fn circle_point_is_on_carrier() {
        let e = circle_system(&set(&[2])).unwrap();
        let c = e.space().point_cell(&circle_point(2, 1), 20);
        assert!(!e.carrier.misses_cell(&c, 1 << 10));
    }
}
