//! Effective covers made of closed balls, their refinement chain and joins.

use std::sync::{Arc, Mutex};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::kernel::rational::{fmt_q, pow2, q, qi};
use crate::kernel::{
    cover_certificate, covered_by, semi_decide_empty_in, Ball, BallUnion, Cell, Certificate, CompactRef,
    EffClosedSet, Fuel, OpenSet, Point, Space, Q,
};
use crate::{Error, Result};

/// ⋂ over parts of the union of the part's closed balls, intersected with the carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub parts: Vec<Vec<Ball>>,
}

impl Piece {
    pub fn ball(b: Ball) -> Self {
        Piece { parts: vec![vec![b]] }
    }

    pub fn union(balls: Vec<Ball>) -> Self {
        Piece { parts: vec![balls] }
    }

    pub fn meet(&self, other: &Piece) -> Piece {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Piece { parts }
    }

    pub fn to_json(&self, space: &Space) -> Result<Value> {
        let part = |bs: &Vec<Ball>| -> Result<Value> {
            let balls = bs
                .iter()
                .map(|b| Ok(json!({"center": space.point_index(&b.center)?.to_string(), "radius": fmt_q(&b.radius)})))
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({ "balls": balls }))
        };
        if self.parts.len() == 1 {
            part(&self.parts[0])
        } else {
            Ok(json!({"meet": self.parts.iter().map(part).collect::<Result<Vec<_>>>()?}))
        }
    }

    pub fn from_json(space: &Space, v: &Value) -> Result<Piece> {
        if let Some(m) = v.get("meet").and_then(Value::as_array) {
            let mut parts = Vec::new();
            for p in m {
                parts.extend(Piece::from_json(space, p)?.parts);
            }
            return Ok(Piece { parts });
        }
        let arr = v.get("balls").and_then(Value::as_array).ok_or_else(|| Error::spec("piece.balls", "expected a list"))?;
        let mut balls = Vec::new();
        for (i, b) in arr.iter().enumerate() {
            let path = format!("piece.balls[{i}]");
            let center = match b.get("center") {
                Some(Value::Number(n)) => n.to_string(),
                Some(Value::String(s)) => s.clone(),
                _ => return Err(Error::spec(path, "center must be an ideal-point index")),
            };
            let idx: num_bigint::BigUint = center.parse().map_err(|_| Error::spec(&path, "bad index"))?;
            let r = match b.get("radius") {
                Some(Value::String(s)) => crate::kernel::rational::parse_q(s)?,
                Some(Value::Number(n)) => crate::kernel::rational::parse_q(&n.to_string())?,
                _ => return Err(Error::spec(&path, "radius must be a rational")),
            };
            balls.push(Ball::new(space.point_from_index(&idx)?, r)?);
        }
        Ok(Piece::union(balls))
    }
}

/// Cells disjoint from some part of a piece.
pub struct PieceComplement {
    pub space: Space,
    pub piece: Piece,
}

impl OpenSet for PieceComplement {
    fn space(&self) -> &Space {
        &self.space
    }

    fn contains_cell(&self, c: &Cell, _fuel: Fuel) -> bool {
        self.piece.parts.iter().any(|u| u.iter().all(|b| self.space.cell_disjoint_closed_ball(c, b)))
    }
}

fn real(p: &Point) -> Option<&Q> {
    match p {
        Point::Real(x) => Some(x),
        _ => None,
    }
}

/// Closed segments covering [a,b] on the line, swept left to right.
fn segments_cover(a: &Q, b: &Q, mut segs: Vec<(Q, Q)>) -> bool {
    segs.sort();
    let mut cur = a.clone();
    for (s, e) in segs {
        if s > cur {
            break;
        }
        if e > cur {
            cur = e;
        }
        if cur >= *b {
            return true;
        }
    }
    cur >= *b
}

/// Conservative test that a cell lies in a finite union of closed balls.
pub fn cell_in_closed_union(space: &Space, c: &Cell, balls: &[Ball]) -> bool {
    if balls.iter().any(|b| space.cell_in_closed_ball(c, b)) {
        return true;
    }
    match (space, c) {
        (Space::Interval, Cell::Seg(a, b)) => {
            let segs = balls
                .iter()
                .filter_map(|x| real(&x.center).map(|m| (m - &x.radius, m + &x.radius)))
                .collect();
            segments_cover(a, b, segs)
        }
        (Space::Circle, Cell::Seg(a, b)) => {
            let mut segs = Vec::new();
            for x in balls {
                let Some(m) = real(&x.center) else { continue };
                if x.radius >= q(1, 2) {
                    return true;
                }
                for k in -1..=2 {
                    segs.push((m - &x.radius + qi(k), m + &x.radius + qi(k)));
                }
            }
            segments_cover(a, b, segs)
        }
        _ => false,
    }
}

/// Cells inside a union of closed balls; used only as the leaf test of a cover search.
struct ClosedUnionCells<'a> {
    space: &'a Space,
    balls: Vec<Ball>,
}

impl OpenSet for ClosedUnionCells<'_> {
    fn space(&self) -> &Space {
        self.space
    }

    fn contains_cell(&self, c: &Cell, _fuel: Fuel) -> bool {
        cell_in_closed_union(self.space, c, &self.balls)
    }
}

/// Upper bound on the diameter of a closed ball.
pub fn ball_diam(space: &Space, b: &Ball) -> Q {
    let d = match space {
        Space::Cantor { .. } => space.cell_diam(&space.closed_ball_cell(b)),
        _ => &b.radius * qi(2),
    };
    let s = space.diameter_bound();
    if d < s {
        d
    } else {
        s
    }
}

/// Upper bound on the diameter of a piece.
pub fn piece_diam(space: &Space, p: &Piece) -> Q {
    let mut best = space.diameter_bound();
    for part in &p.parts {
        let mut d = Q::zero();
        for (i, a) in part.iter().enumerate() {
            let da = ball_diam(space, a);
            if da > d {
                d = da;
            }
            for b in &part[i + 1..] {
                let (_, hi) = space.dist_bounds(&a.center, &b.center, 48);
                let x = hi + &a.radius + &b.radius;
                if x > d {
                    d = x;
                }
            }
        }
        if d < best {
            best = d;
        }
    }
    best
}

/// A finite cover of a recursively compact carrier by effectively closed pieces, with its
/// coverage certificate.
#[derive(Clone)]
pub struct EffectiveCover {
    pub space: Space,
    pub carrier: CompactRef,
    pub pieces: Vec<Piece>,
    pub certificate: Certificate,
    /// For chain levels above 0: index of a piece of the previous level containing each piece.
    pub parent: Option<Vec<usize>>,
    /// For chain levels above 0: every previous-level piece certified to contain each piece.
    pub inclusions: Option<Vec<Vec<usize>>>,
    /// Pieces certified pairwise disjoint on the carrier.
    pub partition: bool,
}

impl std::fmt::Debug for EffectiveCover {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EffectiveCover({} pieces on {})", self.pieces.len(), self.space.name())
    }
}

impl EffectiveCover {
    /// Certifies that the pieces cover the carrier within `fuel`.
    pub fn new(carrier: CompactRef, pieces: Vec<Piece>, fuel: Fuel) -> Result<Self> {
        let space = carrier.space().clone();
        let mut all = Vec::new();
        for p in &pieces {
            if p.parts.len() != 1 {
                return Err(Error::Invalid("coverage is certified for unions of balls only".into()));
            }
            for b in &p.parts[0] {
                space.check_point(&b.center)?;
                all.push(b.clone());
            }
        }
        let test = ClosedUnionCells { space: &space, balls: all };
        let certificate = cover_certificate("cover", &*carrier, &test, fuel)?;
        if certificate.outcome != "accepted" {
            return Err(Error::NeedsMoreFuel(format!("coverage of {} not certified at fuel {fuel}", space.name())));
        }
        Ok(EffectiveCover { space, carrier, pieces, certificate, parent: None, inclusions: None, partition: false })
    }

    /// Cylinders of the given words on a Cantor carrier.
    pub fn cylinders(carrier: CompactRef, words: &[Vec<u32>], fuel: Fuel) -> Result<Self> {
        let space = carrier.space().clone();
        let pieces = words.iter().map(|w| Piece::ball(space.cell_hull(&Cell::word(w)))).collect();
        EffectiveCover::new(carrier, pieces, fuel)
    }

    /// Closed arcs [t_i, t_{i+1}] on the circle, or segments on [0,1], from sorted cut points.
    pub fn arcs(carrier: CompactRef, cuts: &[Q], fuel: Fuel) -> Result<Self> {
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let c = (&w[0] + &w[1]) / qi(2);
            let r = (&w[1] - &w[0]) / qi(2);
            pieces.push(Piece::ball(Ball::new(Point::Real(c), r)?));
        }
        EffectiveCover::new(carrier, pieces, fuel)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// P̄_i as an effectively closed set (intersect with the carrier through the ambient).
    pub fn piece_set(&self, i: usize) -> EffClosedSet {
        EffClosedSet::new(Arc::new(PieceComplement { space: self.space.clone(), piece: self.pieces[i].clone() }))
    }

    pub fn diameter(&self) -> Q {
        self.pieces.iter().map(|p| piece_diam(&self.space, p)).max().unwrap_or_else(Q::zero)
    }

    pub fn to_json(&self) -> Result<Value> {
        let pieces = self.pieces.iter().map(|p| p.to_json(&self.space)).collect::<Result<Vec<_>>>()?;
        let mut v = json!({"pieces": pieces, "certificate": self.certificate.to_json()});
        if let Some(p) = &self.inclusions {
            v["inclusions"] = json!(p);
        }
        v["partition"] = json!(self.partition);
        Ok(v)
    }

    pub fn from_json(carrier: CompactRef, v: &Value, fuel: Fuel) -> Result<Self> {
        let arr = v.get("pieces").and_then(Value::as_array).ok_or_else(|| Error::spec("cover.pieces", "expected a list"))?;
        let space = carrier.space().clone();
        let pieces = arr.iter().map(|p| Piece::from_json(&space, p)).collect::<Result<Vec<_>>>()?;
        EffectiveCover::new(carrier, pieces, fuel)
    }
}

fn ball_misses(carrier: &dyn crate::kernel::RecCompact, b: &Ball, fuel: Fuel) -> Result<bool> {
    let space = carrier.space();
    let set = EffClosedSet::new(Arc::new(crate::kernel::ClosedBallComplement { space: space.clone(), ball: b.clone() }));
    let root = if space.closed_ball_is_cell() { space.closed_ball_cell(b) } else { space.root_cell() };
    Ok(semi_decide_empty_in(&set, carrier, &root, fuel)?.is_accepted())
}

fn closed_meet_empty(carrier: &dyn crate::kernel::RecCompact, a: &Ball, b: &Ball, fuel: Fuel) -> Result<bool> {
    let space = carrier.space();
    let ca = space.closed_ball_cell(a);
    let cb = space.closed_ball_cell(b);
    if space.cells_disjoint(&ca, &cb) {
        return Ok(true);
    }
    let p = Piece { parts: vec![vec![a.clone()], vec![b.clone()]] };
    let set = EffClosedSet::new(Arc::new(PieceComplement { space: space.clone(), piece: p }));
    Ok(semi_decide_empty_in(&set, carrier, &space.root_cell(), fuel)?.is_accepted())
}

/// Memoized chain 𝒫_0, 𝒫_1, … of covers with diameter ≤ 2^-n, each refining the last.
pub struct CoverChain {
    pub carrier: CompactRef,
    pub zero_dim: bool,
    pub fuel: Fuel,
    levels: Mutex<Vec<EffectiveCover>>,
}

/// Extra net resolutions tried past n before giving up.
const NET_LEVELS: usize = 10;
/// Largest net examined.
const NET_CELLS: usize = 1 << 14;

impl CoverChain {
    pub fn new(carrier: CompactRef, zero_dim: bool, fuel: Fuel) -> Self {
        CoverChain { carrier, zero_dim, fuel, levels: Mutex::new(Vec::new()) }
    }

    pub fn level(&self, n: usize) -> Result<EffectiveCover> {
        let mut lv = self.levels.lock().unwrap_or_else(|e| e.into_inner());
        while lv.len() <= n {
            let next = self.build(lv.len(), lv.last())?;
            lv.push(next);
        }
        Ok(lv[n].clone())
    }

    fn radius(&self, n: usize) -> Q {
        let space = self.carrier.space();
        let target = pow2(-(n as i64));
        let cands = [q(3, 2) * &target, target.clone(), &target / qi(2), &target / qi(4)];
        for r in cands {
            let b = Ball { center: space.default_point(), radius: r.clone() };
            if ball_diam(space, &b) <= target {
                return r;
            }
        }
        &target / qi(4)
    }

    fn build(&self, n: usize, prev: Option<&EffectiveCover>) -> Result<EffectiveCover> {
        let space = self.carrier.space().clone();
        let rho = self.radius(n);
        let fuel = self.fuel;
        for m in n..n + NET_LEVELS {
            let cells = space.cells_at_depth(m);
            if cells.len() > NET_CELLS {
                break;
            }
            let mut balls: Vec<Ball> = Vec::new();
            let mut keys: Vec<Cell> = Vec::new();
            for c in &cells {
                let b = Ball { center: space.cell_center(c), radius: rho.clone() };
                let key = space.closed_ball_cell(&b);
                if keys.contains(&key) {
                    continue;
                }
                keys.push(key);
                if !ball_misses(&*self.carrier, &b, fuel)? {
                    balls.push(b);
                }
            }
            let (parent, inclusions) = match prev {
                None => (None, None),
                Some(p) => {
                    let incl: Vec<Vec<usize>> = balls
                        .iter()
                        .map(|b| {
                            let cb = space.closed_ball_cell(b);
                            (0..p.pieces.len())
                                .filter(|&j| {
                                    let pc = &p.pieces[j];
                                    pc.parts.len() == 1 && pc.parts[0].iter().any(|pb| space.cell_in_open_ball(&cb, pb))
                                })
                                .collect()
                        })
                        .collect();
                    if incl.iter().any(Vec::is_empty) {
                        continue;
                    }
                    (Some(incl.iter().map(|v| v[0]).collect()), Some(incl))
                }
            };
            let open = BallUnion::new(space.clone(), balls.clone());
            if !covered_by(&*self.carrier, &open, fuel) {
                continue;
            }
            if self.zero_dim {
                let mut ok = true;
                'outer: for i in 0..balls.len() {
                    for j in i + 1..balls.len() {
                        if !closed_meet_empty(&*self.carrier, &balls[i], &balls[j], fuel)? {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                if !ok {
                    continue;
                }
            }
            let certificate = cover_certificate(&format!("cover level {n}"), &*self.carrier, &open, fuel)?;
            return Ok(EffectiveCover {
                space,
                carrier: self.carrier.clone(),
                pieces: balls.into_iter().map(Piece::ball).collect(),
                certificate,
                parent,
                inclusions,
                partition: self.zero_dim,
            });
        }
        Err(Error::NeedsMoreFuel(format!("no cover at level {n} found within fuel {fuel}")))
    }
}

/// 𝒫_n of a fresh chain.
pub fn refine_cover_sequence(carrier: CompactRef, n: usize, zero_dim: bool, fuel: Fuel) -> Result<EffectiveCover> {
    CoverChain::new(carrier, zero_dim, fuel).level(n)
}

/// 𝒫 ∨ 𝒫′; with `prune`, pieces whose carrier trace is certified empty at that fuel are dropped.
pub fn join_covers(a: &EffectiveCover, b: &EffectiveCover, prune: Option<Fuel>) -> Result<EffectiveCover> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch(format!("{} vs {}", a.space.name(), b.space.name())));
    }
    let mut pieces = Vec::new();
    for p in &a.pieces {
        for r in &b.pieces {
            let m = p.meet(r);
            if let Some(f) = prune {
                let set = EffClosedSet::new(Arc::new(PieceComplement { space: a.space.clone(), piece: m.clone() }));
                if semi_decide_empty_in(&set, &*a.carrier, &a.space.root_cell(), f)?.is_accepted() {
                    continue;
                }
            }
            pieces.push(m);
        }
    }
    Ok(EffectiveCover {
        space: a.space.clone(),
        carrier: a.carrier.clone(),
        pieces,
        certificate: Certificate {
            query: format!("join of ({}) and ({})", a.certificate.query, b.certificate.query),
            outcome: if a.certificate.outcome == "accepted" && b.certificate.outcome == "accepted" {
                "accepted"
            } else {
                "undetermined"
            },
            fuel: a.certificate.fuel.max(b.certificate.fuel),
            witness: vec![],
        },
        parent: None,
        inclusions: None,
        partition: a.partition && b.partition,
    })
}

/// Whether the recorded inclusion of a piece in its parent holds by a direct cell check.
pub fn inclusion_holds(space: &Space, child: &Piece, parent: &Piece) -> bool {
    child.parts.len() == 1
        && child.parts[0].iter().all(|b| {
            let cb = space.closed_ball_cell(b);
            parent.parts.iter().all(|u| u.iter().any(|pb| space.cell_subset(&cb, &space.closed_ball_cell(pb))))
        })
}
