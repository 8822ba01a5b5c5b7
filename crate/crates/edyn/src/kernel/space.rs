//! Computable metric spaces: ideal points, distances, basic balls and their indices.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::rational::*;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// A^ℕ with d(x,y) = 2^-min{i : x_i ≠ y_i}.
    Cantor { arity: u32 },
    /// {0,…,size-1} with the discrete metric.
    Finite { size: u32 },
    /// [0,1].
    Interval,
    /// ℝ/ℤ with arc-length distance (diameter 1/2).
    Circle,
    /// [-1,1]² with the Euclidean metric.
    Square,
    /// d((x_i),(y_i)) = Σ 2^-i d_i(x_i,y_i).
    Product(Product),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Product {
    List(Vec<Space>),
    Power(Box<Space>),
}

impl Product {
    pub fn component(&self, i: usize) -> Option<&Space> {
        match self {
            Product::List(v) => v.get(i),
            Product::Power(b) => Some(b),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            Product::List(v) => Some(v.len()),
            Product::Power(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }
}

/// An eventually constant sequence `prefix · tail^∞`, kept in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeqPoint {
    pub prefix: Vec<u32>,
    pub tail: u32,
}

impl SeqPoint {
    pub fn new(mut prefix: Vec<u32>, tail: u32) -> Self {
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        SeqPoint { prefix, tail }
    }

    pub fn at(&self, i: usize) -> u32 {
        self.prefix.get(i).copied().unwrap_or(self.tail)
    }

    /// First coordinate where the two sequences differ.
    pub fn first_diff(&self, other: &SeqPoint) -> Option<usize> {
        let n = self.prefix.len().max(other.prefix.len());
        (0..n)
            .find(|&i| self.at(i) != other.at(i))
            .or(if self.tail != other.tail { Some(n) } else { None })
    }

    pub fn word(&self, len: usize) -> Vec<u32> {
        (0..len).map(|i| self.at(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Seq(SeqPoint),
    Sym(u32),
    Real(Q),
    Plane(Q, Q),
    /// Listed components; unlisted ones are the component's default point.
    Tuple(Vec<Point>),
}

impl Point {
    pub fn seq(prefix: &[u32], tail: u32) -> Point {
        Point::Seq(SeqPoint::new(prefix.to_vec(), tail))
    }

    pub fn real(x: Q) -> Point {
        Point::Real(x)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Seq(s) => {
                for c in &s.prefix {
                    write!(f, "{c}")?;
                }
                write!(f, "({})^inf", s.tail)
            }
            Point::Sym(s) => write!(f, "{s}"),
            Point::Real(x) => write!(f, "{}", fmt_q(x)),
            Point::Plane(x, y) => write!(f, "({}, {})", fmt_q(x), fmt_q(y)),
            Point::Tuple(v) => {
                write!(f, "(")?;
                for (i, p) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Open basic ball B(center, radius).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    pub center: Point,
    pub radius: Q,
}

impl Ball {
    pub fn new(center: Point, radius: Q) -> Result<Ball> {
        if !radius.is_positive() {
            return Err(Error::Invalid("ball radius must be positive".into()));
        }
        Ok(Ball { center, radius })
    }
}

pub(crate) const SQRT_BITS: u32 = 48;

impl Space {
    pub fn cantor(arity: u32) -> Space {
        Space::Cantor { arity }
    }

    pub fn product(components: Vec<Space>) -> Space {
        Space::Product(Product::List(components))
    }

    pub fn power(base: Space) -> Space {
        Space::Product(Product::Power(Box::new(base)))
    }

    pub fn name(&self) -> String {
        match self {
            Space::Cantor { arity } => format!("cantor({arity})"),
            Space::Finite { size } => format!("finite({size})"),
            Space::Interval => "interval".into(),
            Space::Circle => "circle".into(),
            Space::Square => "square".into(),
            Space::Product(Product::List(v)) => {
                format!("product[{}]", v.iter().map(|s| s.name()).collect::<Vec<_>>().join(","))
            }
            Space::Product(Product::Power(b)) => format!("power[{}]", b.name()),
        }
    }

    pub fn diameter_bound(&self) -> Q {
        match self {
            Space::Cantor { .. } | Space::Finite { .. } | Space::Interval => qi(1),
            Space::Circle => q(1, 2),
            Space::Square => qi(3),
            Space::Product(Product::List(v)) => {
                v.iter().enumerate().map(|(i, s)| pow2(-(i as i64)) * s.diameter_bound()).sum()
            }
            Space::Product(Product::Power(b)) => qi(2) * b.diameter_bound(),
        }
    }

    pub fn default_point(&self) -> Point {
        match self {
            Space::Cantor { .. } => Point::seq(&[], 0),
            Space::Finite { .. } => Point::Sym(0),
            Space::Interval | Space::Circle => Point::Real(Q::zero()),
            Space::Square => Point::Plane(Q::zero(), Q::zero()),
            Space::Product(_) => Point::Tuple(vec![]),
        }
    }

    pub fn component_point<'a>(&self, p: &'a Point, i: usize) -> Option<std::borrow::Cow<'a, Point>> {
        let Space::Product(pr) = self else { return None };
        let c = pr.component(i)?;
        match p {
            Point::Tuple(v) => Some(match v.get(i) {
                Some(x) => std::borrow::Cow::Borrowed(x),
                None => std::borrow::Cow::Owned(c.default_point()),
            }),
            _ => None,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        let bad = || Error::Invalid(format!("point {p} does not belong to {}", self.name()));
        match (self, p) {
            (Space::Cantor { arity }, Point::Seq(s)) => {
                if s.tail < *arity && s.prefix.iter().all(|c| c < arity) {
                    Ok(())
                } else {
                    Err(bad())
                }
            }
            (Space::Finite { size }, Point::Sym(s)) if s < size => Ok(()),
            (Space::Interval, Point::Real(x)) if !x.is_negative() && *x <= Q::one() => Ok(()),
            (Space::Circle, Point::Real(x)) if !x.is_negative() && *x < Q::one() => Ok(()),
            (Space::Square, Point::Plane(x, y)) if x.abs() <= Q::one() && y.abs() <= Q::one() => Ok(()),
            (Space::Product(pr), Point::Tuple(v)) => {
                if let Some(n) = pr.len() {
                    if v.len() > n {
                        return Err(bad());
                    }
                }
                for (i, x) in v.iter().enumerate() {
                    pr.component(i).ok_or_else(bad)?.check_point(x)?;
                }
                Ok(())
            }
            _ => Err(bad()),
        }
    }

    /// Lower and upper bounds on d(a,b); equal when the distance is rational.
    pub fn dist_bounds(&self, a: &Point, b: &Point, bits: u32) -> (Q, Q) {
        match (self, a, b) {
            (Space::Cantor { .. }, Point::Seq(x), Point::Seq(y)) => {
                let d = match x.first_diff(y) {
                    Some(i) => pow2(-(i as i64)),
                    None => Q::zero(),
                };
                (d.clone(), d)
            }
            (Space::Finite { .. }, Point::Sym(x), Point::Sym(y)) => {
                let d = if x == y { Q::zero() } else { Q::one() };
                (d.clone(), d)
            }
            (Space::Interval, Point::Real(x), Point::Real(y)) => {
                let d = (x - y).abs();
                (d.clone(), d)
            }
            (Space::Circle, Point::Real(x), Point::Real(y)) => {
                let d = circ_dist(x, y);
                (d.clone(), d)
            }
            (Space::Square, Point::Plane(x0, y0), Point::Plane(x1, y1)) => {
                let dx = x0 - x1;
                let dy = y0 - y1;
                sqrt_bounds(&(&dx * &dx + &dy * &dy), bits)
            }
            (Space::Product(pr), _, _) => {
                let n = match pr.len() {
                    Some(n) => n,
                    None => tuple_len(a).max(tuple_len(b)),
                };
                let mut lo = Q::zero();
                let mut hi = Q::zero();
                for i in 0..n {
                    let c = pr.component(i).unwrap();
                    let pa = self.component_point(a, i).unwrap();
                    let pb = self.component_point(b, i).unwrap();
                    let (l, h) = c.dist_bounds(&pa, &pb, bits + i as u32 + 2);
                    let w = pow2(-(i as i64));
                    lo += &w * l;
                    hi += w * h;
                }
                (lo, hi)
            }
            _ => panic!("point kinds do not match space {}", self.name()),
        }
    }

    pub fn point_index(&self, p: &Point) -> Result<BigUint> {
        self.check_point(p)?;
        Ok(match (self, p) {
            (Space::Cantor { arity }, Point::Seq(s)) => {
                shortlex_rank(&s.prefix, *arity) * *arity + s.tail
            }
            (Space::Finite { .. }, Point::Sym(s)) => BigUint::from(*s),
            (Space::Interval, Point::Real(x)) | (Space::Circle, Point::Real(x)) => unit_rational_index(x)?,
            (Space::Square, Point::Plane(x, y)) => pair(&rational_index(x)?, &rational_index(y)?),
            (Space::Product(pr), Point::Tuple(v)) => {
                let mut idx = Vec::new();
                let n = pr.len().unwrap_or(v.len());
                for i in 0..n {
                    let c = pr.component(i).unwrap();
                    let x = self.component_point(p, i).unwrap();
                    idx.push(c.point_index(&x)?);
                }
                encode_seq(&idx)
            }
            _ => unreachable!(),
        })
    }

    pub fn point_from_index(&self, i: &BigUint) -> Result<Point> {
        let invalid = || Error::InvalidIndex { index: i.to_string(), space: self.name() };
        let p = match self {
            Space::Cantor { arity } => {
                let a = BigUint::from(*arity);
                let tail = (i % &a).to_u32().unwrap();
                let w = shortlex_unrank(&(i / &a), *arity);
                Point::Seq(SeqPoint::new(w, tail))
            }
            Space::Finite { size } => {
                let s = i.to_u32().filter(|s| s < size).ok_or_else(invalid)?;
                Point::Sym(s)
            }
            Space::Interval => Point::Real(unit_rational_from_index(i).map_err(|_| invalid())?),
            Space::Circle => {
                let x = unit_rational_from_index(i).map_err(|_| invalid())?;
                if x.is_one() {
                    return Err(invalid());
                }
                Point::Real(x)
            }
            Space::Square => {
                let (a, b) = unpair(i);
                Point::Plane(
                    rational_from_index(&a).map_err(|_| invalid())?,
                    rational_from_index(&b).map_err(|_| invalid())?,
                )
            }
            Space::Product(pr) => {
                let parts = decode_seq(i);
                if let Some(n) = pr.len() {
                    if parts.len() != n && !(n == 0 && parts.is_empty()) {
                        return Err(invalid());
                    }
                }
                let mut v = Vec::new();
                for (k, x) in parts.iter().enumerate() {
                    v.push(pr.component(k).ok_or_else(invalid)?.point_from_index(x)?);
                }
                Point::Tuple(v)
            }
        };
        self.check_point(&p).map_err(|_| invalid())?;
        Ok(p)
    }

    pub fn ball_index(&self, b: &Ball) -> Result<BigUint> {
        Ok(pair(&self.point_index(&b.center)?, &pos_rational_index(&b.radius)?))
    }

    pub fn ball_from_index(&self, i: &BigUint) -> Result<Ball> {
        let (c, r) = unpair(i);
        Ball::new(self.point_from_index(&c)?, pos_rational_from_index(&r)?)
    }

    /// A rational q with |d(s_i, s_j) − q| ≤ 2^-n.
    pub fn approx_distance(&self, i: &BigUint, j: &BigUint, n: u32) -> Result<Q> {
        let a = self.point_from_index(i)?;
        let b = self.point_from_index(j)?;
        let (lo, _) = self.dist_bounds(&a, &b, n + 1);
        Ok(lo)
    }

    pub fn to_json(&self) -> Value {
        match self {
            Space::Cantor { arity } => {
                json!({"space": "cantor", "alphabet": (0..*arity).map(|a| a.to_string()).collect::<Vec<_>>()})
            }
            Space::Finite { size } => json!({"space": "finite", "size": size}),
            Space::Interval => json!({"space": "interval"}),
            Space::Circle => json!({"space": "circle"}),
            Space::Square => json!({"space": "square"}),
            Space::Product(Product::List(v)) => {
                json!({"space": "product", "components": v.iter().map(|s| s.to_json()).collect::<Vec<_>>(), "uniform": false})
            }
            Space::Product(Product::Power(b)) => {
                json!({"space": "product", "components": [b.to_json()], "uniform": true})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Space> {
        Self::from_json_at(v, "$")
    }

    fn from_json_at(v: &Value, path: &str) -> Result<Space> {
        let kind = v
            .get("space")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::spec(format!("{path}.space"), "missing string field"))?;
        match kind {
            "cantor" => {
                let a = v
                    .get("alphabet")
                    .and_then(|a| a.as_array())
                    .ok_or_else(|| Error::spec(format!("{path}.alphabet"), "missing array"))?;
                if a.len() < 2 {
                    return Err(Error::spec(format!("{path}.alphabet"), "needs at least two symbols"));
                }
                Ok(Space::Cantor { arity: a.len() as u32 })
            }
            "finite" => {
                let n = v
                    .get("size")
                    .and_then(|a| a.as_u64())
                    .ok_or_else(|| Error::spec(format!("{path}.size"), "missing integer"))?;
                Ok(Space::Finite { size: n as u32 })
            }
            "interval" => Ok(Space::Interval),
            "circle" => Ok(Space::Circle),
            "square" => Ok(Space::Square),
            "product" => {
                let comps = v
                    .get("components")
                    .and_then(|a| a.as_array())
                    .ok_or_else(|| Error::spec(format!("{path}.components"), "missing array"))?;
                let parsed = comps
                    .iter()
                    .enumerate()
                    .map(|(i, c)| Self::from_json_at(c, &format!("{path}.components[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let uniform = v.get("uniform").and_then(|u| u.as_bool()).unwrap_or(false);
                if uniform {
                    if parsed.len() != 1 {
                        return Err(Error::spec(
                            format!("{path}.components"),
                            "a uniform product takes exactly one component",
                        ));
                    }
                    Ok(Space::power(parsed.into_iter().next().unwrap()))
                } else {
                    Ok(Space::product(parsed))
                }
            }
            other => Err(Error::spec(format!("{path}.space"), format!("unknown space {other:?}"))),
        }
    }
}

fn tuple_len(p: &Point) -> usize {
    match p {
        Point::Tuple(v) => v.len(),
        _ => 0,
    }
}

pub fn circ_dist(x: &Q, y: &Q) -> Q {
    let d = frac(&(x - y));
    let e = Q::one() - &d;
    if d < e {
        d
    } else {
        e
    }
}

/// Rank of a word among all words over `arity` letters in shortlex order.
pub fn shortlex_rank(w: &[u32], arity: u32) -> BigUint {
    let a = BigUint::from(arity);
    let mut shorter = BigUint::zero();
    let mut p = BigUint::one();
    for _ in 0..w.len() {
        shorter += &p;
        p *= &a;
    }
    let mut lex = BigUint::zero();
    for c in w {
        lex = lex * &a + *c;
    }
    shorter + lex
}

pub fn shortlex_unrank(i: &BigUint, arity: u32) -> Vec<u32> {
    let a = BigUint::from(arity);
    let mut rem = i.clone();
    let mut len = 0usize;
    let mut p = BigUint::one();
    while rem >= p {
        rem -= &p;
        p *= &a;
        len += 1;
    }
    let mut w = vec![0u32; len];
    for k in (0..len).rev() {
        w[k] = (&rem % &a).to_u32().unwrap();
        rem /= &a;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_distances() {
        let s = Space::cantor(2);
        let zero = Point::seq(&[], 0);
        let one_zero = Point::seq(&[1], 0);
        let z1z = Point::seq(&[0, 1], 0);
        let i = s.point_index(&zero).unwrap();
        let j = s.point_index(&one_zero).unwrap();
        let k = s.point_index(&z1z).unwrap();
        assert_eq!(s.approx_distance(&i, &j, 4).unwrap(), qi(1));
        assert_eq!(s.approx_distance(&i, &k, 4).unwrap(), q(1, 2));
    }

    #[test]
    fn interval_distance() {
        let s = Space::Interval;
        let i = s.point_index(&Point::Real(q(1, 3))).unwrap();
        let j = s.point_index(&Point::Real(q(1, 2))).unwrap();
        assert_eq!(s.approx_distance(&i, &j, 3).unwrap(), q(1, 6));
    }

    #[test]
    fn indices_round_trip() {
        let spaces = vec![
            Space::cantor(3),
            Space::Interval,
            Space::Circle,
            Space::Square,
            Space::product(vec![Space::cantor(2), Space::Interval]),
            Space::power(Space::Finite { size: 4 }),
        ];
        for s in spaces {
            let mut seen = 0;
            for i in 0u32..300 {
                if let Ok(p) = s.point_from_index(&i.into()) {
                    let j = s.point_index(&p).unwrap();
                    assert_eq!(s.point_from_index(&j).unwrap(), p, "{}", s.name());
                    seen += 1;
                }
            }
            assert!(seen > 10, "{}", s.name());
        }
        let s = Space::cantor(2);
        let b = Ball::new(Point::seq(&[1, 0, 1], 0), q(1, 8)).unwrap();
        let idx = s.ball_index(&b).unwrap();
        assert_eq!(s.ball_from_index(&idx).unwrap(), b);
    }

    #[test]
    fn self_distance_and_consistency() {
        let s = Space::Square;
        for i in 0u32..50 {
            let i = BigUint::from(i);
            if s.point_from_index(&i).is_err() {
                continue;
            }
            for j in 0u32..30 {
                let j = BigUint::from(j);
                if s.point_from_index(&j).is_err() {
                    continue;
                }
                let a = s.approx_distance(&i, &j, 4).unwrap();
                let b = s.approx_distance(&i, &j, 12).unwrap();
                assert!((a - b).abs() <= pow2(-4) + pow2(-12));
            }
            assert!(s.approx_distance(&i, &i, 5).unwrap() <= pow2(-5));
        }
    }

    #[test]
    fn json_round_trip() {
        let s = Space::product(vec![Space::cantor(2), Space::Circle]);
        assert_eq!(Space::from_json(&s.to_json()).unwrap(), s);
        let p = Space::power(Space::Interval);
        assert_eq!(Space::from_json(&p.to_json()).unwrap(), p);
        let e = Space::from_json(&json!({"space": "product", "components": [{"space": "blob"}]})).unwrap_err();
        assert!(e.to_string().contains("components[0].space"));
    }
}
