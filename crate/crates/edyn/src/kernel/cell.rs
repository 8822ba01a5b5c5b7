//! Closed cells: the finite, splittable pieces every semi-decision in the kernel works with.
//!
//! Each space has a root cell and a split rule whose iterates have diameters tending to
//! zero. All geometric predicates here are conservative: `true` is a proof.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::rational::*;
use super::space::*;

/// Cantor cell: a prefix cylinder plus sparse assignments strictly beyond the prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cyl {
    pub prefix: Vec<u32>,
    pub extra: BTreeMap<u64, u32>,
}

impl Cyl {
    pub fn word(w: &[u32]) -> Cyl {
        Cyl { prefix: w.to_vec(), extra: BTreeMap::new() }
    }

    /// Cylinder of a finite assignment; returns `None` when it assigns a coordinate twice.
    pub fn from_assignment(entries: &[(u64, u32)]) -> Option<Cyl> {
        let mut extra = BTreeMap::new();
        for (k, v) in entries {
            if let Some(old) = extra.insert(*k, *v) {
                if old != *v {
                    return None;
                }
            }
        }
        let mut c = Cyl { prefix: vec![], extra };
        c.normalize();
        Some(c)
    }

    fn normalize(&mut self) {
        while let Some(v) = self.extra.remove(&(self.prefix.len() as u64)) {
            self.prefix.push(v);
        }
    }

    pub fn get(&self, i: u64) -> Option<u32> {
        if (i as usize) < self.prefix.len() {
            Some(self.prefix[i as usize])
        } else {
            self.extra.get(&i).copied()
        }
    }

    pub fn assignments(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.prefix
            .iter()
            .enumerate()
            .map(|(i, v)| (i as u64, *v))
            .chain(self.extra.iter().map(|(k, v)| (*k, *v)))
    }

    pub fn with(&self, i: u64, v: u32) -> Cyl {
        let mut c = self.clone();
        if (i as usize) < c.prefix.len() {
            c.prefix[i as usize] = v;
        } else {
            c.extra.insert(i, v);
            c.normalize();
        }
        c
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Cyl(Cyl),
    /// A finite-space cell: everything or one point.
    Sym(Option<u32>),
    /// Interval [a,b], or on the circle the arc from a ∈ [0,1) to b with 0 ≤ b − a ≤ 1.
    Seg(Q, Q),
    /// [x0,x1] × [y0,y1].
    Box(Q, Q, Q, Q),
    /// Product cell: listed components, the rest whole.
    Tuple(Vec<Cell>),
}

impl Cell {
    pub fn word(w: &[u32]) -> Cell {
        Cell::Cyl(Cyl::word(w))
    }

    pub fn as_cyl(&self) -> Option<&Cyl> {
        match self {
            Cell::Cyl(c) => Some(c),
            _ => None,
        }
    }
}

fn in_arc(x: &Q, a: &Q, b: &Q) -> bool {
    frac(&(x - a)) <= b - a
}

fn minq(a: Q, b: Q) -> Q {
    if a < b {
        a
    } else {
        b
    }
}

fn maxq(a: Q, b: Q) -> Q {
    if a > b {
        a
    } else {
        b
    }
}

impl Space {
    pub fn root_cell(&self) -> Cell {
        match self {
            Space::Cantor { .. } => Cell::Cyl(Cyl::default()),
            Space::Finite { .. } => Cell::Sym(None),
            Space::Interval | Space::Circle => Cell::Seg(Q::zero(), Q::one()),
            Space::Square => Cell::Box(qi(-1), qi(1), qi(-1), qi(1)),
            Space::Product(_) => Cell::Tuple(vec![]),
        }
    }

    fn comp(&self, i: usize) -> &Space {
        match self {
            Space::Product(p) => p.component(i).expect("component index"),
            _ => panic!("not a product"),
        }
    }

    fn comp_cell<'a>(&self, c: &'a [Cell], i: usize) -> std::borrow::Cow<'a, Cell> {
        match c.get(i) {
            Some(x) => std::borrow::Cow::Borrowed(x),
            None => std::borrow::Cow::Owned(self.comp(i).root_cell()),
        }
    }

    /// Upper bound of Σ_{i ≥ n} 2^-i diam_i.
    fn tail_diam(&self, n: usize) -> Q {
        match self {
            Space::Product(Product::List(v)) => v
                .iter()
                .enumerate()
                .skip(n)
                .map(|(i, s)| pow2(-(i as i64)) * s.diameter_bound())
                .sum(),
            Space::Product(Product::Power(b)) => pow2(1 - n as i64) * b.diameter_bound(),
            _ => Q::zero(),
        }
    }

    pub fn is_atomic(&self, c: &Cell) -> bool {
        self.split(c).is_empty()
    }

    /// Children covering the cell; empty when the cell is a single point.
    pub fn split(&self, c: &Cell) -> Vec<Cell> {
        match (self, c) {
            (Space::Cantor { arity }, Cell::Cyl(y)) => {
                let i = y.prefix.len() as u64;
                (0..*arity).map(|v| Cell::Cyl(y.with(i, v))).collect()
            }
            (Space::Finite { size }, Cell::Sym(None)) => {
                if *size <= 1 {
                    vec![]
                } else {
                    (0..*size).map(|s| Cell::Sym(Some(s))).collect()
                }
            }
            (Space::Finite { .. }, Cell::Sym(Some(_))) => vec![],
            (Space::Interval, Cell::Seg(a, b)) | (Space::Circle, Cell::Seg(a, b)) => {
                if a == b {
                    return vec![];
                }
                let m = (a + b) / qi(2);
                vec![Cell::Seg(a.clone(), m.clone()), Cell::Seg(m, b.clone())]
            }
            (Space::Square, Cell::Box(x0, x1, y0, y1)) => {
                if x0 == x1 && y0 == y1 {
                    return vec![];
                }
                let xm = (x0 + x1) / qi(2);
                let ym = (y0 + y1) / qi(2);
                let xs = if x0 == x1 { vec![(x0, x1)] } else { vec![(x0, &xm), (&xm, x1)] };
                let ys = if y0 == y1 { vec![(y0, y1)] } else { vec![(y0, &ym), (&ym, y1)] };
                let mut out = vec![];
                for (a, b) in &xs {
                    for (c, d) in &ys {
                        out.push(Cell::Box((*a).clone(), (*b).clone(), (*c).clone(), (*d).clone()));
                    }
                }
                out
            }
            (Space::Product(pr), Cell::Tuple(v)) => {
                let n = v.len();
                let mut best: Option<(Q, usize)> = None;
                for i in 0..n {
                    let ci = self.comp(i);
                    let d = pow2(-(i as i64)) * ci.cell_diam(&v[i]);
                    if !d.is_zero() && best.as_ref().map_or(true, |(b, _)| d > *b) {
                        best = Some((d, i));
                    }
                }
                let more = pr.len().map_or(true, |l| n < l);
                if more {
                    let d = self.tail_diam(n);
                    if !d.is_zero() && best.as_ref().map_or(true, |(b, _)| d > *b) {
                        best = Some((d, n));
                    }
                }
                let Some((_, i)) = best else { return vec![] };
                let ci = self.comp(i);
                let mut base = v.clone();
                while base.len() <= i {
                    base.push(self.comp(base.len()).root_cell());
                }
                let kids = ci.split(&base[i]);
                if kids.is_empty() {
                    // a zero-diameter tail component; extend the tuple instead
                    return vec![Cell::Tuple(base)];
                }
                kids.into_iter()
                    .map(|k| {
                        let mut t = base.clone();
                        t[i] = k;
                        Cell::Tuple(t)
                    })
                    .collect()
            }
            _ => panic!("cell {c:?} does not belong to {}", self.name()),
        }
    }

    /// Upper bound on the diameter of the cell.
    pub fn cell_diam(&self, c: &Cell) -> Q {
        match (self, c) {
            (Space::Cantor { .. }, Cell::Cyl(y)) => pow2(-(y.prefix.len() as i64)),
            (Space::Finite { size }, Cell::Sym(None)) => {
                if *size > 1 {
                    Q::one()
                } else {
                    Q::zero()
                }
            }
            (Space::Finite { .. }, Cell::Sym(Some(_))) => Q::zero(),
            (Space::Interval, Cell::Seg(a, b)) => b - a,
            (Space::Circle, Cell::Seg(a, b)) => minq(b - a, q(1, 2)),
            (Space::Square, Cell::Box(x0, x1, y0, y1)) => (x1 - x0) + (y1 - y0),
            (Space::Product(_), Cell::Tuple(v)) => {
                let mut s = self.tail_diam(v.len());
                for (i, ci) in v.iter().enumerate() {
                    s += pow2(-(i as i64)) * self.comp(i).cell_diam(ci);
                }
                s
            }
            _ => panic!("cell {c:?} does not belong to {}", self.name()),
        }
    }

    /// Bounds (lo, hi) with lo ≤ inf_{y∈c} d(p,y) and sup_{y∈c} d(p,y) ≤ hi.
    pub fn dist_point_cell(&self, p: &Point, c: &Cell) -> (Q, Q) {
        match (self, p, c) {
            (Space::Cantor { .. }, Point::Seq(s), Cell::Cyl(y)) => {
                for (i, v) in y.prefix.iter().enumerate() {
                    if s.at(i) != *v {
                        let d = pow2(-(i as i64));
                        return (d.clone(), d);
                    }
                }
                let hi = pow2(-(y.prefix.len() as i64));
                let lo = y
                    .extra
                    .iter()
                    .find(|(k, v)| s.at(**k as usize) != **v)
                    .map(|(k, _)| pow2(-(*k as i64)))
                    .unwrap_or_else(Q::zero);
                (lo, hi)
            }
            (Space::Finite { size }, Point::Sym(s), Cell::Sym(x)) => match x {
                Some(x) => {
                    let d = if x == s { Q::zero() } else { Q::one() };
                    (d.clone(), d)
                }
                None => (Q::zero(), if *size > 1 { Q::one() } else { Q::zero() }),
            },
            (Space::Interval, Point::Real(x), Cell::Seg(a, b)) => {
                let lo = maxq(Q::zero(), maxq(a - x, x - b));
                let hi = maxq((x - a).abs(), (x - b).abs());
                (lo, hi)
            }
            (Space::Circle, Point::Real(x), Cell::Seg(a, b)) => {
                let lo = if in_arc(x, a, b) { Q::zero() } else { minq(circ_dist(x, a), circ_dist(x, b)) };
                let anti = frac(&(x + q(1, 2)));
                let hi = if in_arc(&anti, a, b) { q(1, 2) } else { maxq(circ_dist(x, a), circ_dist(x, b)) };
                (lo, hi)
            }
            (Space::Square, Point::Plane(px, py), Cell::Box(x0, x1, y0, y1)) => {
                let (lo2, hi2) = box_sq_dist(px, py, x0, x1, y0, y1);
                (sqrt_bounds(&lo2, SQRT_BITS).0, sqrt_bounds(&hi2, SQRT_BITS).1)
            }
            (Space::Product(_), _, Cell::Tuple(v)) => {
                let n = v.len();
                let mut lo = Q::zero();
                let mut hi = Q::zero();
                for (i, ci) in v.iter().enumerate() {
                    let pi = self.component_point(p, i).unwrap();
                    let (l, h) = self.comp(i).dist_point_cell(&pi, ci);
                    let w = pow2(-(i as i64));
                    lo += &w * l;
                    hi += w * h;
                }
                hi += self.tail_diam(n);
                (lo, hi)
            }
            _ => panic!("point {p} / cell {c:?} do not belong to {}", self.name()),
        }
    }

    /// Least coordinate count m such that the open ball is the cylinder of its centre's first m symbols.
    fn cantor_open_depth(r: &Q) -> usize {
        depth_for_radius(r, true)
    }

    pub fn cell_in_open_ball(&self, c: &Cell, b: &Ball) -> bool {
        match (self, c, &b.center) {
            (Space::Cantor { .. }, Cell::Cyl(y), Point::Seq(s)) => {
                let m = Self::cantor_open_depth(&b.radius);
                (0..m).all(|i| y.get(i as u64) == Some(s.at(i)))
            }
            (Space::Finite { .. }, Cell::Sym(x), Point::Sym(s)) => {
                b.radius > Q::one() || (*x == Some(*s))
            }
            (Space::Square, Cell::Box(x0, x1, y0, y1), Point::Plane(px, py)) => {
                let (_, hi2) = box_sq_dist(px, py, x0, x1, y0, y1);
                hi2 < &b.radius * &b.radius
            }
            _ => self.dist_point_cell(&b.center, c).1 < b.radius,
        }
    }

    pub fn cell_in_closed_ball(&self, c: &Cell, b: &Ball) -> bool {
        match (self, c, &b.center) {
            (Space::Cantor { .. }, Cell::Cyl(y), Point::Seq(s)) => {
                let m = depth_for_radius(&b.radius, false);
                (0..m).all(|i| y.get(i as u64) == Some(s.at(i)))
            }
            (Space::Square, Cell::Box(x0, x1, y0, y1), Point::Plane(px, py)) => {
                let (_, hi2) = box_sq_dist(px, py, x0, x1, y0, y1);
                hi2 <= &b.radius * &b.radius
            }
            _ => self.dist_point_cell(&b.center, c).1 <= b.radius,
        }
    }

    pub fn cell_disjoint_closed_ball(&self, c: &Cell, b: &Ball) -> bool {
        match (self, c, &b.center) {
            (Space::Cantor { .. }, Cell::Cyl(y), Point::Seq(s)) => {
                let m = depth_for_radius(&b.radius, false);
                (0..m).any(|i| matches!(y.get(i as u64), Some(v) if v != s.at(i)))
            }
            (Space::Square, Cell::Box(x0, x1, y0, y1), Point::Plane(px, py)) => {
                let (lo2, _) = box_sq_dist(px, py, x0, x1, y0, y1);
                lo2 > &b.radius * &b.radius
            }
            _ => self.dist_point_cell(&b.center, c).0 > b.radius,
        }
    }

    /// A cell containing the closed ball; exact for the one-dimensional and symbolic spaces.
    pub fn closed_ball_cell(&self, b: &Ball) -> Cell {
        match (self, &b.center) {
            (Space::Cantor { .. }, Point::Seq(s)) => {
                Cell::word(&s.word(depth_for_radius(&b.radius, false)))
            }
            (Space::Finite { .. }, Point::Sym(s)) => {
                if b.radius >= Q::one() {
                    Cell::Sym(None)
                } else {
                    Cell::Sym(Some(*s))
                }
            }
            (Space::Interval, Point::Real(x)) => {
                Cell::Seg(maxq(Q::zero(), x - &b.radius), minq(Q::one(), x + &b.radius))
            }
            (Space::Circle, Point::Real(x)) => {
                if b.radius >= q(1, 2) {
                    Cell::Seg(Q::zero(), Q::one())
                } else {
                    let a = frac(&(x - &b.radius));
                    let e = &a + qi(2) * &b.radius;
                    Cell::Seg(a, e)
                }
            }
            (Space::Square, Point::Plane(x, y)) => {
                let one = Q::one();
                Cell::Box(
                    maxq(-one.clone(), x - &b.radius),
                    minq(one.clone(), x + &b.radius),
                    maxq(-one.clone(), y - &b.radius),
                    minq(one, y + &b.radius),
                )
            }
            (Space::Product(pr), _) => {
                let mut v = vec![];
                let mut i = 0usize;
                loop {
                    if pr.len().map_or(false, |l| i >= l) {
                        break;
                    }
                    let ci = pr.component(i).unwrap();
                    let rho = pow2(i as i64) * &b.radius;
                    if rho >= ci.diameter_bound() {
                        if pr.len().is_none() {
                            break;
                        }
                        v.push(ci.root_cell());
                    } else {
                        let pi = self.component_point(&b.center, i).unwrap();
                        v.push(ci.closed_ball_cell(&Ball { center: pi.into_owned(), radius: rho }));
                    }
                    i += 1;
                }
                while let Some(last) = v.last() {
                    if *last == self.comp(v.len() - 1).root_cell() {
                        v.pop();
                    } else {
                        break;
                    }
                }
                Cell::Tuple(v)
            }
            _ => panic!("ball centre {} does not belong to {}", b.center, self.name()),
        }
    }

    /// Whether `closed_ball_cell` is exactly the closed ball.
    pub fn closed_ball_is_cell(&self) -> bool {
        matches!(self, Space::Cantor { .. } | Space::Finite { .. } | Space::Interval | Space::Circle)
    }

    pub fn cells_disjoint(&self, a: &Cell, b: &Cell) -> bool {
        match (self, a, b) {
            (Space::Cantor { .. }, Cell::Cyl(x), Cell::Cyl(y)) => {
                let (s, l) = if x.prefix.len() <= y.prefix.len() { (x, y) } else { (y, x) };
                if s.prefix.iter().zip(&l.prefix).any(|(p, q)| p != q) {
                    return true;
                }
                s.assignments().any(|(k, v)| matches!(l.get(k), Some(w) if w != v))
                    || l.extra.iter().any(|(k, v)| matches!(s.get(*k), Some(w) if w != *v))
            }
            (Space::Finite { .. }, Cell::Sym(Some(x)), Cell::Sym(Some(y))) => x != y,
            (Space::Finite { .. }, _, _) => false,
            (Space::Interval, Cell::Seg(a0, a1), Cell::Seg(b0, b1)) => a1 < b0 || b1 < a0,
            (Space::Circle, Cell::Seg(a0, a1), Cell::Seg(b0, b1)) => {
                !(in_arc(b0, a0, a1) || in_arc(a0, b0, b1))
            }
            (Space::Square, Cell::Box(a0, a1, a2, a3), Cell::Box(b0, b1, b2, b3)) => {
                a1 < b0 || b1 < a0 || a3 < b2 || b3 < a2
            }
            (Space::Product(_), Cell::Tuple(x), Cell::Tuple(y)) => x
                .iter()
                .zip(y.iter())
                .enumerate()
                .any(|(i, (p, q))| self.comp(i).cells_disjoint(p, q)),
            _ => panic!("cells {a:?} / {b:?} do not belong to {}", self.name()),
        }
    }

    /// Conservative a ⊆ b.
    pub fn cell_subset(&self, a: &Cell, b: &Cell) -> bool {
        match (self, a, b) {
            (Space::Cantor { .. }, Cell::Cyl(x), Cell::Cyl(y)) => {
                y.assignments().all(|(k, v)| x.get(k) == Some(v))
            }
            (Space::Finite { .. }, _, Cell::Sym(None)) => true,
            (Space::Finite { .. }, Cell::Sym(x), Cell::Sym(y)) => x == y,
            (Space::Interval, Cell::Seg(a0, a1), Cell::Seg(b0, b1)) => b0 <= a0 && a1 <= b1,
            (Space::Circle, Cell::Seg(a0, a1), Cell::Seg(b0, b1)) => {
                let la = a1 - a0;
                let lb = b1 - b0;
                lb >= Q::one() || (la <= lb && frac(&(a0 - b0)) + la <= lb)
            }
            (Space::Square, Cell::Box(a0, a1, a2, a3), Cell::Box(b0, b1, b2, b3)) => {
                b0 <= a0 && a1 <= b1 && b2 <= a2 && a3 <= b3
            }
            (Space::Product(_), Cell::Tuple(x), Cell::Tuple(y)) => (0..y.len()).all(|i| {
                let xi = self.comp_cell(x, i);
                self.comp(i).cell_subset(&xi, &y[i])
            }),
            _ => panic!("cells {a:?} / {b:?} do not belong to {}", self.name()),
        }
    }

    /// An open ball containing the cell, with radius comparable to the cell's diameter.
    pub fn cell_hull(&self, c: &Cell) -> Ball {
        let tiny = || pow2(-64);
        match (self, c) {
            // 2^-l < r < 2^(1-l): open and closed balls are both the cylinder itself
            (Space::Cantor { .. }, Cell::Cyl(y)) => Ball {
                center: Point::seq(&y.prefix, 0),
                radius: q(3, 2) * pow2(-(y.prefix.len() as i64)),
            },
            (Space::Finite { .. }, Cell::Sym(Some(s))) => Ball { center: Point::Sym(*s), radius: Q::one() },
            (Space::Finite { .. }, Cell::Sym(None)) => Ball { center: Point::Sym(0), radius: qi(2) },
            (Space::Interval, Cell::Seg(a, b)) | (Space::Circle, Cell::Seg(a, b)) => {
                let w = b - a;
                let center = (a + b) / qi(2);
                let center = if *self == Space::Circle { frac(&center) } else { center };
                Ball { center: Point::Real(center), radius: if w.is_zero() { tiny() } else { w } }
            }
            (Space::Square, Cell::Box(x0, x1, y0, y1)) => {
                let w = maxq(x1 - x0, y1 - y0);
                Ball {
                    center: Point::Plane((x0 + x1) / qi(2), (y0 + y1) / qi(2)),
                    radius: if w.is_zero() { tiny() } else { w },
                }
            }
            (Space::Product(_), Cell::Tuple(v)) => {
                let mut center = vec![];
                let mut r = self.tail_diam(v.len());
                for (i, ci) in v.iter().enumerate() {
                    let h = self.comp(i).cell_hull(ci);
                    center.push(h.center);
                    r += pow2(-(i as i64)) * h.radius;
                }
                if v.is_empty() {
                    r += Q::one();
                }
                Ball { center: Point::Tuple(center), radius: r }
            }
            _ => panic!("cell {c:?} does not belong to {}", self.name()),
        }
    }

    /// A point of the cell.
    pub fn cell_center(&self, c: &Cell) -> Point {
        match (self, c) {
            (Space::Cantor { .. }, Cell::Cyl(y)) => {
                let mut w = y.prefix.clone();
                if let Some((&last, _)) = y.extra.iter().next_back() {
                    w.resize(last as usize + 1, 0);
                    for (k, v) in &y.extra {
                        w[*k as usize] = *v;
                    }
                }
                Point::seq(&w, 0)
            }
            (Space::Finite { .. }, Cell::Sym(s)) => Point::Sym(s.unwrap_or(0)),
            (Space::Interval, Cell::Seg(a, b)) => Point::Real((a + b) / qi(2)),
            (Space::Circle, Cell::Seg(a, b)) => Point::Real(frac(&((a + b) / qi(2)))),
            (Space::Square, Cell::Box(x0, x1, y0, y1)) => Point::Plane((x0 + x1) / qi(2), (y0 + y1) / qi(2)),
            (Space::Product(_), Cell::Tuple(v)) => {
                Point::Tuple(v.iter().enumerate().map(|(i, ci)| self.comp(i).cell_center(ci)).collect())
            }
            _ => panic!("cell {c:?} does not belong to {}", self.name()),
        }
    }

    pub fn cell_contains_point(&self, c: &Cell, p: &Point) -> bool {
        match (self, c, p) {
            (Space::Cantor { .. }, Cell::Cyl(y), Point::Seq(s)) => {
                y.assignments().all(|(k, v)| s.at(k as usize) == v)
            }
            (Space::Finite { .. }, Cell::Sym(x), Point::Sym(s)) => x.map_or(true, |x| x == *s),
            (Space::Interval, Cell::Seg(a, b), Point::Real(x)) => a <= x && x <= b,
            (Space::Circle, Cell::Seg(a, b), Point::Real(x)) => in_arc(x, a, b),
            (Space::Square, Cell::Box(x0, x1, y0, y1), Point::Plane(x, y)) => {
                x0 <= x && x <= x1 && y0 <= y && y <= y1
            }
            (Space::Product(_), Cell::Tuple(v), _) => v.iter().enumerate().all(|(i, ci)| {
                let pi = self.component_point(p, i).unwrap();
                self.comp(i).cell_contains_point(ci, &pi)
            }),
            _ => false,
        }
    }

    /// A cell containing both cells.
    pub fn cell_join(&self, a: &Cell, b: &Cell) -> Cell {
        match (self, a, b) {
            (Space::Cantor { .. }, Cell::Cyl(x), Cell::Cyl(y)) => {
                let n = x.prefix.iter().zip(&y.prefix).take_while(|(p, q)| p == q).count();
                Cell::word(&x.prefix[..n])
            }
            (Space::Finite { .. }, Cell::Sym(x), Cell::Sym(y)) => {
                if x == y {
                    Cell::Sym(*x)
                } else {
                    Cell::Sym(None)
                }
            }
            (Space::Interval, Cell::Seg(a0, a1), Cell::Seg(b0, b1)) => {
                Cell::Seg(minq(a0.clone(), b0.clone()), maxq(a1.clone(), b1.clone()))
            }
            (Space::Circle, Cell::Seg(a0, a1), Cell::Seg(b0, b1)) => {
                let la = a1 - a0;
                let lb = b1 - b0;
                // arc starting at a0 reaching the end of b, or starting at b0 reaching the end of a
                let from_a = maxq(la.clone(), frac(&(b0 - a0)) + &lb);
                let from_b = maxq(lb, frac(&(a0 - b0)) + &la);
                let (s, l) = if from_a <= from_b { (a0, from_a) } else { (b0, from_b) };
                if l >= Q::one() {
                    Cell::Seg(Q::zero(), Q::one())
                } else {
                    Cell::Seg(s.clone(), s + l)
                }
            }
            (Space::Square, Cell::Box(a0, a1, a2, a3), Cell::Box(b0, b1, b2, b3)) => Cell::Box(
                minq(a0.clone(), b0.clone()),
                maxq(a1.clone(), b1.clone()),
                minq(a2.clone(), b2.clone()),
                maxq(a3.clone(), b3.clone()),
            ),
            (Space::Product(_), Cell::Tuple(x), Cell::Tuple(y)) => {
                let n = x.len().min(y.len());
                Cell::Tuple((0..n).map(|i| self.comp(i).cell_join(&x[i], &y[i])).collect())
            }
            _ => panic!("cells {a:?} / {b:?} do not belong to {}", self.name()),
        }
    }

    /// A cell around p of diameter at most about 2^-k.
    pub fn point_cell(&self, p: &Point, k: u32) -> Cell {
        let e = pow2(-(k as i64) - 2);
        match (self, p) {
            (Space::Cantor { .. }, Point::Seq(s)) => Cell::word(&s.word(k as usize)),
            (Space::Finite { .. }, Point::Sym(s)) => Cell::Sym(Some(*s)),
            (Space::Interval, Point::Real(x)) => Cell::Seg(maxq(Q::zero(), x - &e), minq(Q::one(), x + &e)),
            (Space::Circle, Point::Real(x)) => {
                let a = frac(&(x - &e));
                let b = &a + qi(2) * &e;
                Cell::Seg(a, b)
            }
            (Space::Square, Point::Plane(x, y)) => {
                let one = Q::one();
                Cell::Box(
                    maxq(-one.clone(), x - &e),
                    minq(one.clone(), x + &e),
                    maxq(-one.clone(), y - &e),
                    minq(one, y + &e),
                )
            }
            (Space::Product(pr), _) => {
                let n = match pr.len() {
                    Some(n) => n,
                    None => k as usize + 2,
                };
                Cell::Tuple(
                    (0..n)
                        .map(|i| {
                            let pi = self.component_point(p, i).unwrap();
                            self.comp(i).point_cell(&pi, k + 1)
                        })
                        .collect(),
                )
            }
            _ => panic!("point {p} does not belong to {}", self.name()),
        }
    }

    /// The cells at split-depth d below the root (atomic cells are carried down unchanged).
    pub fn cells_at_depth(&self, d: usize) -> Vec<Cell> {
        let mut level = vec![self.root_cell()];
        for _ in 0..d {
            let mut next = Vec::new();
            for c in &level {
                let kids = self.split(c);
                if kids.is_empty() {
                    next.push(c.clone());
                } else {
                    next.extend(kids);
                }
            }
            level = next;
        }
        level
    }
}

/// Squared distance bounds from (px,py) to the box.
pub(crate) fn box_sq_dist(px: &Q, py: &Q, x0: &Q, x1: &Q, y0: &Q, y1: &Q) -> (Q, Q) {
    let zero = Q::zero();
    let dx = maxq(zero.clone(), maxq(x0 - px, px - x1));
    let dy = maxq(zero, maxq(y0 - py, py - y1));
    let fx = maxq((px - x0).abs(), (px - x1).abs());
    let fy = maxq((py - y0).abs(), (py - y1).abs());
    (&dx * &dx + &dy * &dy, &fx * &fx + &fy * &fy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_ball_cells() {
        let s = Space::cantor(2);
        let b = Ball { center: Point::seq(&[0, 1], 0), radius: q(1, 2) };
        // B(010…, 1/2) = [01]
        assert!(s.cell_in_open_ball(&Cell::word(&[0, 1]), &b));
        assert!(!s.cell_in_open_ball(&Cell::word(&[0]), &b));
        assert_eq!(s.closed_ball_cell(&b), Cell::word(&[0]));
        assert!(s.cell_disjoint_closed_ball(&Cell::word(&[1]), &b));
        let h = s.cell_hull(&Cell::word(&[1, 1]));
        assert!(s.cell_in_open_ball(&Cell::word(&[1, 1]), &h));
    }

    #[test]
    fn circle_arcs() {
        let s = Space::Circle;
        let a = Cell::Seg(q(3, 4), q(5, 4));
        let b = Cell::Seg(q(3, 8), q(1, 2));
        assert!(s.cells_disjoint(&a, &b));
        assert!(!s.cells_disjoint(&a, &Cell::Seg(q(0, 1), q(1, 8))));
        assert!(s.cell_subset(&Cell::Seg(q(7, 8), q(9, 8)), &a));
        let j = s.cell_join(&a, &Cell::Seg(q(1, 4), q(3, 8)));
        assert!(s.cell_subset(&a, &j));
        assert_eq!(s.cell_diam(&j), q(1, 2));
    }

    #[test]
    fn product_split_shrinks() {
        let s = Space::power(Space::Circle);
        let mut c = s.root_cell();
        for _ in 0..40 {
            c = s.split(&c).into_iter().next().unwrap();
        }
        assert!(s.cell_diam(&c) < q(1, 16));
        let t = Space::product(vec![Space::Finite { size: 2 }, Space::Finite { size: 3 }]);
        let all = t.cells_at_depth(5);
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|c| t.is_atomic(c)));
    }

    #[test]
    fn pattern_cylinder_normalizes() {
        let c = Cyl::from_assignment(&[(1, 1), (0, 0), (4, 1)]).unwrap();
        assert_eq!(c.prefix, vec![0, 1]);
        assert_eq!(c.get(4), Some(1));
        assert!(Cyl::from_assignment(&[(2, 1), (2, 0)]).is_none());
    }
}
