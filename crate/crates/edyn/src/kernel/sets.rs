//! Effectively open, effectively closed and recursively compact sets, and the semi-decisions
//! connecting them.

use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;

use super::cell::Cell;
use super::map::ComputableMap;
use super::space::{Ball, Space};
use super::stream::Stream;
use crate::{Error, Result};

pub type Fuel = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiDecision {
    /// Accepted, carrying the least fuel that accepts.
    Accepted(Fuel),
    Undetermined,
}

impl SemiDecision {
    pub fn is_accepted(&self) -> bool {
        matches!(self, SemiDecision::Accepted(_))
    }

    pub fn fuel(&self) -> Option<Fuel> {
        match self {
            SemiDecision::Accepted(f) => Some(*f),
            SemiDecision::Undetermined => None,
        }
    }
}

/// Least fuel ≤ `fuel` at which a fuel-monotone test passes.
pub fn least_fuel(fuel: Fuel, test: impl Fn(Fuel) -> bool) -> SemiDecision {
    if !test(fuel) {
        return SemiDecision::Undetermined;
    }
    let (mut lo, mut hi) = (0, fuel);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if test(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    SemiDecision::Accepted(lo)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub query: String,
    pub outcome: &'static str,
    pub fuel: Option<Fuel>,
    /// Ball indices of the leaves of the certified subdivision.
    pub witness: Vec<String>,
}

impl Certificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serializes")
    }
}

/// An effectively open set, queried through closed cells.
///
/// `contains_cell(c, f) == true` proves `c ⊆ U`, and stays true for larger `f`.
pub trait OpenSet: Send + Sync {
    fn space(&self) -> &Space;
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool;

    /// Balls of U found within the first `fuel` cells of the space's breadth-first cell order.
    fn emit(&self, fuel: Fuel) -> Vec<Ball> {
        bfs_emit(self.space(), fuel, |c| self.contains_cell(c, fuel))
    }
}

pub type OpenRef = Arc<dyn OpenSet>;

pub(crate) fn bfs_emit(space: &Space, fuel: Fuel, contains: impl Fn(&Cell) -> bool) -> Vec<Ball> {
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::from([space.root_cell()]);
    let mut seen = 0u64;
    while let Some(c) = queue.pop_front() {
        if seen >= fuel {
            break;
        }
        seen += 1;
        let h = space.cell_hull(&c);
        if contains(&space.closed_ball_cell(&h)) {
            out.push(h);
        }
        queue.extend(space.split(&c));
    }
    out
}

/// A finite union of open balls.
pub struct BallUnion {
    pub space: Space,
    pub balls: Vec<Ball>,
}

impl BallUnion {
    pub fn new(space: Space, balls: Vec<Ball>) -> Self {
        BallUnion { space, balls }
    }

    pub fn empty(space: Space) -> Self {
        BallUnion { space, balls: vec![] }
    }
}

impl OpenSet for BallUnion {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, _fuel: Fuel) -> bool {
        self.balls.iter().any(|b| self.space.cell_in_open_ball(c, b))
    }
    fn emit(&self, fuel: Fuel) -> Vec<Ball> {
        self.balls.iter().take(fuel as usize).cloned().collect()
    }
}

/// An r.e. union of balls: `emit(f)` is the first `f` items of a fixed stream.
pub struct EnumOpen {
    pub space: Space,
    pub stream: Arc<Stream<Ball>>,
}

impl EnumOpen {
    pub fn new(space: Space, it: impl Iterator<Item = Ball> + Send + 'static) -> Self {
        EnumOpen { space, stream: Arc::new(Stream::new(it)) }
    }
}

impl OpenSet for EnumOpen {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.stream
            .with_prefix(fuel as usize, |bs| bs.iter().any(|b| self.space.cell_in_open_ball(c, b)))
    }
    fn emit(&self, fuel: Fuel) -> Vec<Ball> {
        self.stream.take(fuel as usize)
    }
}

/// The complement of a closed cell.
pub struct CellComplement {
    pub space: Space,
    pub cell: Cell,
}

impl OpenSet for CellComplement {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, _fuel: Fuel) -> bool {
        self.space.cells_disjoint(c, &self.cell)
    }
}

/// The complement of a closed ball.
pub struct ClosedBallComplement {
    pub space: Space,
    pub ball: Ball,
}

impl OpenSet for ClosedBallComplement {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, _fuel: Fuel) -> bool {
        self.space.cell_disjoint_closed_ball(c, &self.ball)
    }
}

pub struct Union {
    pub space: Space,
    pub parts: Vec<OpenRef>,
}

impl OpenSet for Union {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.parts.iter().any(|p| p.contains_cell(c, fuel))
    }
    fn emit(&self, fuel: Fuel) -> Vec<Ball> {
        self.parts.iter().flat_map(|p| p.emit(fuel)).collect()
    }
}

/// Borrowed union, for short-lived queries.
pub struct UnionParts<'a> {
    pub space: &'a Space,
    pub parts: Vec<&'a dyn OpenSet>,
}

impl OpenSet for UnionParts<'_> {
    fn space(&self) -> &Space {
        self.space
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.parts.iter().any(|p| p.contains_cell(c, fuel))
    }
    fn emit(&self, fuel: Fuel) -> Vec<Ball> {
        self.parts.iter().flat_map(|p| p.emit(fuel)).collect()
    }
}

/// f⁻¹(U).
pub struct PreimageOpen {
    pub map: Arc<dyn ComputableMap>,
    pub open: OpenRef,
}

impl OpenSet for PreimageOpen {
    fn space(&self) -> &Space {
        self.map.source()
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.open.contains_cell(&self.map.image_cell(c, fuel), fuel)
    }
}

pub struct PreimageRef<'a> {
    pub map: &'a dyn ComputableMap,
    pub open: &'a dyn OpenSet,
}

impl OpenSet for PreimageRef<'_> {
    fn space(&self) -> &Space {
        self.map.source()
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.open.contains_cell(&self.map.image_cell(c, fuel), fuel)
    }
}

/// {(x,y) : x ≠ y} in a two-component product.
pub struct DiagonalComplement {
    pub space: Space,
}

impl OpenSet for DiagonalComplement {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, _fuel: Fuel) -> bool {
        let Cell::Tuple(v) = c else { return false };
        let (Some(a), Some(b)) = (v.first(), v.get(1)) else { return false };
        let Space::Product(p) = &self.space else { return false };
        p.component(0).unwrap().cells_disjoint(a, b)
    }
}

/// {x : x_index ∈ U} in a product.
pub struct CylinderLift {
    pub space: Space,
    pub index: usize,
    pub inner: OpenRef,
}

impl OpenSet for CylinderLift {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        let Cell::Tuple(v) = c else { return false };
        match v.get(self.index) {
            Some(ci) => self.inner.contains_cell(ci, fuel),
            None => self.inner.contains_cell(&self.inner.space().root_cell(), fuel),
        }
    }
}

/// {x : f(x) ≠ x}, certified on cells disjoint from their image enclosure.
pub struct FixedExclusion {
    pub map: Arc<dyn ComputableMap>,
}

impl OpenSet for FixedExclusion {
    fn space(&self) -> &Space {
        self.map.source()
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.map.source().cells_disjoint(c, &self.map.image_cell(c, fuel))
    }
}

/// X ∖ K for a recursively compact K.
pub struct CompactComplement {
    pub compact: CompactRef,
}

impl OpenSet for CompactComplement {
    fn space(&self) -> &Space {
        self.compact.space()
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.compact.covered_by_in(c, &BallUnion::empty(self.compact.space().clone()), fuel)
    }
}

/// Closure-free open set defined by a cell predicate.
pub struct CellPredicateOpen<F> {
    pub space: Space,
    pub pred: F,
}

impl<F: Fn(&Cell, Fuel) -> bool + Send + Sync> OpenSet for CellPredicateOpen<F> {
    fn space(&self) -> &Space {
        &self.space
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        (self.pred)(c, fuel)
    }
}

/// A set whose complement is effectively open.
#[derive(Clone)]
pub struct EffClosedSet {
    pub space: Space,
    pub complement: OpenRef,
}

impl EffClosedSet {
    pub fn new(complement: OpenRef) -> Self {
        EffClosedSet { space: complement.space().clone(), complement }
    }

    pub fn whole(space: Space) -> Self {
        EffClosedSet { space: space.clone(), complement: Arc::new(BallUnion::empty(space)) }
    }

    pub fn cell(space: Space, cell: Cell) -> Self {
        EffClosedSet::new(Arc::new(CellComplement { space, cell }))
    }

    pub fn intersect(&self, other: &EffClosedSet) -> Result<Self> {
        check_same(&self.space, &other.space)?;
        Ok(EffClosedSet::new(Arc::new(Union {
            space: self.space.clone(),
            parts: vec![self.complement.clone(), other.complement.clone()],
        })))
    }

    pub fn preimage(&self, map: Arc<dyn ComputableMap>) -> Result<Self> {
        check_same(map.target(), &self.space)?;
        Ok(EffClosedSet::new(Arc::new(PreimageOpen { map, open: self.complement.clone() })))
    }

    /// Balls of the complement emitted at `fuel`.
    pub fn complement_emit(&self, fuel: Fuel) -> Vec<Ball> {
        self.complement.emit(fuel)
    }
}

pub(crate) fn check_same(a: &Space, b: &Space) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{} vs {}", a.name(), b.name())))
    }
}

/// A recursively compact set, queried through closed cells.
pub trait RecCompact: Send + Sync {
    fn space(&self) -> &Space;

    /// Proves K ∩ c = ∅ without subdividing `c`.
    fn misses_cell(&self, c: &Cell, fuel: Fuel) -> bool;

    /// Semi-decides K ∩ root ⊆ U: a depth-first subdivision of `root` with at most `fuel` nodes.
    fn covered_by_in(&self, root: &Cell, open: &dyn OpenSet, fuel: Fuel) -> bool {
        cover_leaves(self.space(), root, fuel, |c| self.misses_cell(c, fuel) || open.contains_cell(c, fuel))
            .is_some()
    }
}

pub type CompactRef = Arc<dyn RecCompact>;

/// Subdivision depth allowed at a given fuel.
pub fn depth_cap(fuel: Fuel) -> usize {
    4 * (fuel.max(1).ilog2() as usize + 1) + 16
}

/// Depth-first subdivision; returns the leaves when every leaf passes `done`.
pub(crate) fn cover_leaves(
    space: &Space,
    root: &Cell,
    fuel: Fuel,
    mut done: impl FnMut(&Cell) -> bool,
) -> Option<Vec<Cell>> {
    let cap = depth_cap(fuel);
    let mut stack = vec![(root.clone(), 0usize)];
    let mut leaves = Vec::new();
    let mut nodes = 0u64;
    while let Some((c, d)) = stack.pop() {
        nodes += 1;
        if nodes > fuel {
            return None;
        }
        if done(&c) {
            leaves.push(c);
            continue;
        }
        let kids = space.split(&c);
        if kids.is_empty() || d >= cap {
            return None;
        }
        stack.extend(kids.into_iter().rev().map(|k| (k, d + 1)));
    }
    Some(leaves)
}

pub fn covered_by(k: &dyn RecCompact, open: &dyn OpenSet, fuel: Fuel) -> bool {
    k.covered_by_in(&k.space().root_cell(), open, fuel)
}

/// Semi-decides whether a finite ball list covers K.
pub fn accept_cover(k: &dyn RecCompact, balls: &[Ball], fuel: Fuel) -> SemiDecision {
    let u = BallUnion::new(k.space().clone(), balls.to_vec());
    least_fuel(fuel, |f| covered_by(k, &u, f))
}

/// The whole (compact) space.
pub struct WholeSpace {
    pub space: Space,
}

impl RecCompact for WholeSpace {
    fn space(&self) -> &Space {
        &self.space
    }
    fn misses_cell(&self, _c: &Cell, _fuel: Fuel) -> bool {
        false
    }
}

pub fn whole(space: Space) -> CompactRef {
    Arc::new(WholeSpace { space })
}

/// An effectively closed subset of a recursively compact set.
pub struct ClosedInCompact {
    pub set: EffClosedSet,
    pub ambient: CompactRef,
}

impl RecCompact for ClosedInCompact {
    fn space(&self) -> &Space {
        &self.set.space
    }
    fn misses_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        self.set.complement.contains_cell(c, fuel) || self.ambient.misses_cell(c, fuel)
    }
}

/// f(K).
pub struct ImageCompact {
    pub map: Arc<dyn ComputableMap>,
    pub compact: CompactRef,
}

impl RecCompact for ImageCompact {
    fn space(&self) -> &Space {
        self.map.target()
    }
    fn misses_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        let out = CellComplement { space: self.map.target().clone(), cell: c.clone() };
        covered_by(&*self.compact, &PreimageRef { map: &*self.map, open: &out }, fuel)
    }
    fn covered_by_in(&self, root: &Cell, open: &dyn OpenSet, fuel: Fuel) -> bool {
        let out = CellComplement { space: self.map.target().clone(), cell: root.clone() };
        let u = UnionParts { space: self.map.target(), parts: vec![open, &out] };
        covered_by(&*self.compact, &PreimageRef { map: &*self.map, open: &u }, fuel)
    }
}

pub type CoverAcceptor = Arc<dyn Fn(&[Ball], Fuel) -> bool + Send + Sync>;

/// A compact set given only by a fuel-monotone acceptor of finite ball covers.
pub struct AcceptorCompact {
    pub space: Space,
    pub acceptor: CoverAcceptor,
}

impl RecCompact for AcceptorCompact {
    fn space(&self) -> &Space {
        &self.space
    }
    fn misses_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        let out = CellComplement { space: self.space.clone(), cell: c.clone() };
        (self.acceptor)(&out.emit(fuel), fuel)
    }
    fn covered_by_in(&self, root: &Cell, open: &dyn OpenSet, fuel: Fuel) -> bool {
        let out = CellComplement { space: self.space.clone(), cell: root.clone() };
        let u = UnionParts { space: &self.space, parts: vec![open, &out] };
        (self.acceptor)(&u.emit(fuel), fuel)
    }
}

/// ∏ K_i, for a finite list or a uniform power.
pub struct ProductCompact {
    pub space: Space,
    pub parts: ProductParts,
}

pub enum ProductParts {
    List(Vec<CompactRef>),
    Power(CompactRef),
}

impl RecCompact for ProductCompact {
    fn space(&self) -> &Space {
        &self.space
    }
    fn misses_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        let Cell::Tuple(v) = c else { return false };
        v.iter().enumerate().any(|(i, ci)| {
            let k = match &self.parts {
                ProductParts::List(l) => &l[i],
                ProductParts::Power(k) => k,
            };
            k.misses_cell(ci, fuel)
        })
    }
}

/// Semi-decides K ⊆ U.
pub fn semi_decide_cover(k: &dyn RecCompact, u: &dyn OpenSet, fuel: Fuel) -> Result<SemiDecision> {
    check_same(k.space(), u.space())?;
    Ok(least_fuel(fuel, |f| covered_by(k, u, f)))
}

/// Semi-decides C ∩ K = ∅.
pub fn semi_decide_empty(c: &EffClosedSet, ambient: &dyn RecCompact, fuel: Fuel) -> Result<SemiDecision> {
    semi_decide_cover(ambient, &*c.complement, fuel)
}

/// Semi-decides C ∩ K ∩ root = ∅.
pub fn semi_decide_empty_in(
    c: &EffClosedSet,
    ambient: &dyn RecCompact,
    root: &Cell,
    fuel: Fuel,
) -> Result<SemiDecision> {
    check_same(&c.space, ambient.space())?;
    Ok(least_fuel(fuel, |f| ambient.covered_by_in(root, &*c.complement, f)))
}

/// Cover certificate: outcome, least fuel and the hull-ball indices of the subdivision's leaves.
pub fn cover_certificate(query: &str, k: &dyn RecCompact, u: &dyn OpenSet, fuel: Fuel) -> Result<Certificate> {
    let d = semi_decide_cover(k, u, fuel)?;
    let space = k.space();
    let witness = match d {
        SemiDecision::Accepted(f) => {
            let leaves = cover_leaves(space, &space.root_cell(), f, |c| {
                k.misses_cell(c, f) || u.contains_cell(c, f)
            })
            .unwrap_or_default();
            leaves
                .iter()
                .map(|c| space.ball_index(&space.cell_hull(c)).map(|i: BigUint| i.to_string()))
                .collect::<Result<Vec<_>>>()?
        }
        SemiDecision::Undetermined => vec![],
    };
    Ok(Certificate {
        query: query.to_string(),
        outcome: if d.is_accepted() { "accepted" } else { "undetermined" },
        fuel: d.fuel(),
        witness,
    })
}

pub fn closed_to_compact(c: &EffClosedSet, ambient: CompactRef) -> Result<CompactRef> {
    check_same(&c.space, ambient.space())?;
    Ok(Arc::new(ClosedInCompact { set: c.clone(), ambient }))
}

pub fn compact_to_closed(k: CompactRef) -> EffClosedSet {
    EffClosedSet::new(Arc::new(CompactComplement { compact: k }))
}

pub fn image_compact(map: Arc<dyn ComputableMap>, k: CompactRef) -> Result<CompactRef> {
    check_same(map.source(), k.space())?;
    Ok(Arc::new(ImageCompact { map, compact: k }))
}

/// U_B = Y ∖ f(K ∖ B), so that f(B ∩ K) ⊇ f(K) ∩ U_B with equality for injective f.
pub struct PushforwardOpen {
    pub map: Arc<dyn ComputableMap>,
    pub compact: CompactRef,
    pub ball: Ball,
}

impl OpenSet for PushforwardOpen {
    fn space(&self) -> &Space {
        self.map.target()
    }
    fn contains_cell(&self, c: &Cell, fuel: Fuel) -> bool {
        let out = CellComplement { space: self.map.target().clone(), cell: c.clone() };
        let pre = PreimageRef { map: &*self.map, open: &out };
        let b = BallUnion::new(self.map.source().clone(), vec![self.ball.clone()]);
        let u = UnionParts { space: self.map.source(), parts: vec![&b, &pre] };
        covered_by(&*self.compact, &u, fuel)
    }
}

pub fn pushforward_open(map: Arc<dyn ComputableMap>, k: CompactRef, ball: Ball) -> Result<OpenRef> {
    check_same(map.source(), k.space())?;
    map.source().check_point(&ball.center)?;
    Ok(Arc::new(PushforwardOpen { map, compact: k, ball }))
}

/// {x ∈ K : f(x) = x}.
pub fn fixed_point_set(map: Arc<dyn ComputableMap>, k: CompactRef) -> Result<EffClosedSet> {
    if map.source() != map.target() {
        return Err(Error::SpaceMismatch(format!(
            "fixed points need a self-map, got {} -> {}",
            map.source().name(),
            map.target().name()
        )));
    }
    check_same(map.source(), k.space())?;
    let space = map.source().clone();
    Ok(EffClosedSet::new(Arc::new(Union {
        space,
        parts: vec![Arc::new(FixedExclusion { map }), Arc::new(CompactComplement { compact: k })],
    })))
}

/// The product space and product compact set of a finite list.
pub fn product_space(compacts: Vec<CompactRef>) -> (Space, CompactRef) {
    let space = Space::product(compacts.iter().map(|k| k.space().clone()).collect());
    (space.clone(), Arc::new(ProductCompact { space, parts: ProductParts::List(compacts) }))
}

/// The countable power K^ℕ.
pub fn power_space(k: CompactRef) -> (Space, CompactRef) {
    let space = Space::power(k.space().clone());
    (space.clone(), Arc::new(ProductCompact { space, parts: ProductParts::Power(k) }))
}
