//! Effective dynamical systems: products, inverse limits, factors and the zero-dimensional
//! extension tower.

mod tower;

use std::sync::Arc;

use num_traits::One;
use serde_json::Value;

pub use tower::*;

use crate::cantor::{builtin_system, BuiltinSystem};
use crate::covers::Action;
use crate::groups::Group;
use crate::kernel::rational::{fmt_q, frac, parse_q};
use crate::kernel::{
    closed_to_compact, fixed_point_set, identity, image_compact, power_space, product_space, whole, Cell, CompactRef,
    ComputableMap, EffClosedSet, FnMap, Fuel, MapRef, Point, ProductMap, Space, Q,
};
use crate::{Error, Result};

/// Γ ↷ X: a recursively compact carrier, one map per generator letter, and Γ's word problem.
#[derive(Clone)]
pub struct EdsSpec {
    pub name: String,
    pub carrier: CompactRef,
    pub action: Action,
    pub group: Group,
}

impl std::fmt::Debug for EdsSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EdsSpec({}: {} ↷ {})", self.name, self.group.name, self.action.space.name())
    }
}

impl EdsSpec {
    pub fn new(name: &str, carrier: CompactRef, action: Action, group: Group) -> Result<Self> {
        if action.gens != group.gens {
            return Err(Error::Invalid(format!("action letters do not match the generators of {}", group.name)));
        }
        if carrier.space() != &action.space {
            return Err(Error::SpaceMismatch(format!(
                "carrier in {} but action on {}",
                carrier.space().name(),
                action.space.name()
            )));
        }
        Ok(EdsSpec { name: name.to_string(), carrier, action, group })
    }

    pub fn from_system(sys: &BuiltinSystem, group: Group) -> Result<Self> {
        let action = Action::from_system(sys)?;
        let carrier = closed_to_compact(&sys.carrier, whole(sys.carrier.space.clone()))?;
        EdsSpec::new(&sys.name, carrier, action, group)
    }

    /// Built-in Cantor systems with their acting groups (ℤ, or the lamplighter group).
    pub fn builtin(name: &str, params: &Value) -> Result<Self> {
        match name {
            "rotation" => {
                let t = params
                    .get("theta")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::spec("params.theta", "expected a rational string"))?;
                return EdsSpec::rotation(&parse_q(t)?);
            }
            "identity" => {
                let space = Space::cantor(2);
                let action = Action::new(vec![('a', identity(space.clone())), ('A', identity(space.clone()))])?;
                return EdsSpec::new("identity", whole(space), action, Group::builtin("Z")?);
            }
            _ => {}
        }
        let sys = builtin_system(name, params)?;
        let group = match name {
            "lamplighter" => Group::builtin("lamplighter")?,
            _ => Group::builtin("Z")?,
        };
        EdsSpec::from_system(&sys, group)
    }

    /// x ↦ x + θ on ℝ/ℤ.
    pub fn rotation(theta: &Q) -> Result<Self> {
        let rot = |t: Q| -> MapRef {
            Arc::new(FnMap {
                source: Space::Circle,
                target: Space::Circle,
                cell: Box::new({
                    let t = t.clone();
                    move |c, _| match c {
                        Cell::Seg(a, b) if b - a >= Q::one() => c.clone(),
                        Cell::Seg(a, b) => {
                            let a2 = frac(&(a + &t));
                            let b2 = &a2 + (b - a);
                            Cell::Seg(a2, b2)
                        }
                        other => panic!("rotation applied to {other:?}"),
                    }
                }),
                point: Some(Box::new(move |p| match p {
                    Point::Real(x) => Some(Point::Real(frac(&(x + &t)))),
                    _ => None,
                })),
            })
        };
        let action = Action::new(vec![('a', rot(theta.clone())), ('A', rot(-theta.clone()))])?;
        EdsSpec::new(&format!("rotation({})", fmt_q(theta)), whole(Space::Circle), action, Group::builtin("Z")?)
    }

    pub fn space(&self) -> &Space {
        &self.action.space
    }

    /// Whether s and its inverse letter undo each other on the given points (where evaluable).
    pub fn check_inverses(&self, points: &[Point]) -> bool {
        let g = &self.group.gens;
        (0..g.letters() as u32).all(|s| {
            points.iter().all(|p| match self.action.eval(&[s, g.inv(s)], p) {
                Some(q) => q == *p,
                None => true,
            })
        })
    }
}

/// Γ ↷ ∏ X_i acting coordinate-wise.
pub fn product_action(systems: &[EdsSpec]) -> Result<EdsSpec> {
    let first = systems.first().ok_or_else(|| Error::Invalid("empty product".into()))?;
    for e in systems {
        if e.group.gens != first.group.gens {
            return Err(Error::Invalid("product components act by different groups".into()));
        }
    }
    let (_, carrier) = product_space(systems.iter().map(|e| e.carrier.clone()).collect());
    let gens = &first.group.gens;
    let mut maps = Vec::new();
    for s in 0..gens.letters() as u32 {
        let comps: Option<Vec<MapRef>> = systems.iter().map(|e| e.action.maps[s as usize].clone()).collect();
        if let Some(c) = comps {
            maps.push((gens.name(s), Arc::new(ProductMap::list(c)) as MapRef));
        }
    }
    let action = Action::new(maps)?;
    let name = systems.iter().map(|e| e.name.as_str()).collect::<Vec<_>>().join("×");
    EdsSpec::new(&name, carrier, action, first.group.clone())
}

/// Γ ↷ X^ℕ acting coordinate-wise.
pub fn power_action(e: &EdsSpec) -> Result<EdsSpec> {
    let (_, carrier) = power_space(e.carrier.clone());
    let gens = &e.group.gens;
    let mut maps = Vec::new();
    for s in 0..gens.letters() as u32 {
        if let Some(m) = &e.action.maps[s as usize] {
            maps.push((gens.name(s), Arc::new(ProductMap::power(m.clone())) as MapRef));
        }
    }
    EdsSpec::new(&format!("{}^N", e.name), carrier, Action::new(maps)?, e.group.clone())
}

enum Bonds {
    List(Vec<MapRef>),
    Uniform(MapRef),
}

/// (x_n) ↦ (π_n(x_{n+1})); on a finite list the last coordinate is kept.
struct ShiftBack {
    space: Space,
    bonds: Bonds,
}

impl ComputableMap for ShiftBack {
    fn source(&self) -> &Space {
        &self.space
    }
    fn target(&self) -> &Space {
        &self.space
    }
    fn image_cell(&self, c: &Cell, fuel: Fuel) -> Cell {
        let Cell::Tuple(v) = c else { panic!("inverse limit map applied to a non-product cell") };
        let comp = |i: usize| -> Cell {
            v.get(i).cloned().unwrap_or_else(|| match &self.space {
                Space::Product(p) => p.component(i).expect("component").root_cell(),
                _ => unreachable!(),
            })
        };
        match &self.bonds {
            Bonds::List(pi) => {
                let n = pi.len() + 1;
                let mut out: Vec<Cell> = (0..n - 1).map(|i| pi[i].image_cell(&comp(i + 1), fuel)).collect();
                out.push(comp(n - 1));
                Cell::Tuple(out)
            }
            Bonds::Uniform(pi) => {
                Cell::Tuple((0..v.len().saturating_sub(1)).map(|i| pi.image_cell(&comp(i + 1), fuel)).collect())
            }
        }
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        let Bonds::List(pi) = &self.bonds else { return None };
        let n = pi.len() + 1;
        let mut out = Vec::with_capacity(n);
        for i in 0..n - 1 {
            out.push(pi[i].eval(&*self.space.component_point(p, i + 1)?)?);
        }
        out.push(self.space.component_point(p, n - 1)?.into_owned());
        Some(Point::Tuple(out))
    }
}

/// lim← (Y_n, π_n) inside ∏ Y_n.
#[derive(Clone)]
pub struct InverseLimit {
    pub space: Space,
    pub product: CompactRef,
    pub set: EffClosedSet,
}

/// Finite chain Y_0 ← Y_1 ← … ← Y_N with π_n: Y_{n+1} → Y_n, as the fixed-point set of the shift-back map.
pub fn inverse_limit(levels: Vec<CompactRef>, projections: Vec<MapRef>) -> Result<InverseLimit> {
    if projections.len() + 1 != levels.len() {
        return Err(Error::Invalid("need one projection between consecutive levels".into()));
    }
    for (n, p) in projections.iter().enumerate() {
        if p.source() != levels[n + 1].space() || p.target() != levels[n].space() {
            return Err(Error::SpaceMismatch(format!("projection {n} does not map level {} to level {n}", n + 1)));
        }
    }
    let (space, product) = product_space(levels);
    let map = Arc::new(ShiftBack { space: space.clone(), bonds: Bonds::List(projections) });
    let set = fixed_point_set(map, product.clone())?;
    Ok(InverseLimit { space, product, set })
}

/// Uniform chain Y ← Y ← … with a single bonding map.
pub fn inverse_limit_uniform(level: CompactRef, projection: MapRef) -> Result<InverseLimit> {
    if projection.source() != level.space() || projection.target() != level.space() {
        return Err(Error::SpaceMismatch("bonding map must be a self-map of the level".into()));
    }
    let (space, product) = power_space(level);
    let map = Arc::new(ShiftBack { space: space.clone(), bonds: Bonds::Uniform(projection) });
    let set = fixed_point_set(map, product.clone())?;
    Ok(InverseLimit { space, product, set })
}

/// s' on f(X): a cell containing f(s(x)) for every x with f(x) in the given cell.
struct FactorMap {
    f: MapRef,
    s: MapRef,
    carrier: CompactRef,
}

/// Source cells examined per image query.
const FACTOR_CELLS: usize = 1 << 12;

impl ComputableMap for FactorMap {
    fn source(&self) -> &Space {
        self.f.target()
    }
    fn target(&self) -> &Space {
        self.f.target()
    }
    fn image_cell(&self, c: &Cell, fuel: Fuel) -> Cell {
        let src = self.f.source();
        let tgt = self.f.target();
        let mut level = vec![src.root_cell()];
        let budget = (fuel as usize).clamp(1, FACTOR_CELLS);
        loop {
            let next: Vec<Cell> = level
                .iter()
                .flat_map(|d| src.split(d))
                .filter(|d| !self.carrier.misses_cell(d, fuel) && !tgt.cells_disjoint(&self.f.image_cell(d, fuel), c))
                .collect();
            if next.is_empty() || next.len() > budget {
                break;
            }
            let atomic = next.iter().all(|d| src.is_atomic(d));
            level = next;
            if atomic {
                break;
            }
        }
        let mut out: Option<Cell> = None;
        for d in &level {
            let img = self.f.image_cell(&self.s.image_cell(d, fuel), fuel);
            out = Some(match out {
                None => img,
                Some(o) => tgt.cell_join(&o, &img),
            });
        }
        out.unwrap_or_else(|| tgt.root_cell())
    }
}

/// Γ ↷ f(X) for an equivariant computable f (the equivariance is the caller's contract).
pub fn factor_through(f: MapRef, e: &EdsSpec) -> Result<EdsSpec> {
    if f.source() != e.space() {
        return Err(Error::SpaceMismatch(format!("factor map from {} but system on {}", f.source().name(), e.space().name())));
    }
    let carrier = image_compact(f.clone(), e.carrier.clone())?;
    let gens = &e.group.gens;
    let mut maps = Vec::new();
    for s in 0..gens.letters() as u32 {
        if let Some(m) = &e.action.maps[s as usize] {
            let fm = FactorMap { f: f.clone(), s: m.clone(), carrier: e.carrier.clone() };
            maps.push((gens.name(s), Arc::new(fm) as MapRef));
        }
    }
    EdsSpec::new(&format!("f({})", e.name), carrier, Action::new(maps)?, e.group.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::Window;
    use crate::kernel::SeqPoint;

    #[test]
    fn odometer_tower() {
        let e = EdsSpec::builtin("odometer", &Value::Null).unwrap();
        let t = build_extension(&e, 2, Window::Forward(1), 1 << 12).unwrap();
        assert!(t.nesting_holds());
        let zero = Point::Seq(SeqPoint::new(vec![], 0));
        let words = e.group.gens.ball(2);
        let z = t.orbit_coding(&zero, &words).unwrap();
        for n in 0..=3 {
            let b = t.factor_eval(&z, n).unwrap();
            let (_, hi) = e.space().dist_bounds(&b.center, &zero, 64);
            assert!(hi <= b.radius, "precision {n}");
        }
        assert!(t.equivariance_holds(&z, 0, 0, 1).unwrap());
    }
}
