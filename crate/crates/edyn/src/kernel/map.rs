//! Computable maps, presented by outer enclosures of cell images.

use std::collections::VecDeque;
use std::sync::Arc;

use super::cell::Cell;
use super::sets::Fuel;
use super::space::{Ball, Point, Space};
use crate::{Error, Result};

pub trait ComputableMap: Send + Sync {
    fn source(&self) -> &Space;
    fn target(&self) -> &Space;

    /// A target cell containing f(c). Must shrink to f(x) along cells shrinking to x.
    fn image_cell(&self, c: &Cell, fuel: Fuel) -> Cell;

    /// Source balls whose images lie in `b`, found within the first `fuel` source cells.
    fn preimage(&self, b: &Ball, fuel: Fuel) -> Vec<Ball> {
        default_preimage(self, b, fuel)
    }

    /// Exact image of a point when the map can produce it.
    fn eval(&self, _p: &Point) -> Option<Point> {
        None
    }
}

pub type MapRef = Arc<dyn ComputableMap>;

pub(crate) fn default_preimage<M: ComputableMap + ?Sized>(m: &M, b: &Ball, fuel: Fuel) -> Vec<Ball> {
    let (src, tgt) = (m.source(), m.target());
    let mut out = Vec::new();
    let mut queue = VecDeque::from([src.root_cell()]);
    let mut seen = 0u64;
    while let Some(c) = queue.pop_front() {
        if seen >= fuel {
            break;
        }
        seen += 1;
        let h = src.cell_hull(&c);
        let hc = src.closed_ball_cell(&h);
        if tgt.cell_in_open_ball(&m.image_cell(&hc, fuel), b) {
            out.push(h);
        }
        // the traversal itself must not depend on fuel
        let img0 = m.image_cell(&c, 0);
        if tgt.cell_disjoint_closed_ball(&img0, b) || tgt.cell_in_open_ball(&m.image_cell(&hc, 0), b) {
            continue;
        }
        queue.extend(src.split(&c));
    }
    out
}

pub struct Identity {
    pub space: Space,
}

impl ComputableMap for Identity {
    fn source(&self) -> &Space {
        &self.space
    }
    fn target(&self) -> &Space {
        &self.space
    }
    fn image_cell(&self, c: &Cell, _fuel: Fuel) -> Cell {
        c.clone()
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        Some(p.clone())
    }
}

pub fn identity(space: Space) -> MapRef {
    Arc::new(Identity { space })
}

/// `second ∘ first`.
pub struct Compose {
    pub first: MapRef,
    pub second: MapRef,
}

impl ComputableMap for Compose {
    fn source(&self) -> &Space {
        self.first.source()
    }
    fn target(&self) -> &Space {
        self.second.target()
    }
    fn image_cell(&self, c: &Cell, fuel: Fuel) -> Cell {
        self.second.image_cell(&self.first.image_cell(c, fuel), fuel)
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        self.second.eval(&self.first.eval(p)?)
    }
}

/// g ∘ f, defined when f's target is g's source.
pub fn map_compose(f: MapRef, g: MapRef) -> Result<MapRef> {
    if f.target() != g.source() {
        return Err(Error::SpaceMismatch(format!(
            "cannot compose {} -> {} with {} -> {}",
            f.source().name(),
            f.target().name(),
            g.source().name(),
            g.target().name()
        )));
    }
    Ok(Arc::new(Compose { first: f, second: g }))
}

/// f^n for a self-map, n ≥ 0.
pub fn iterate(f: MapRef, n: u32) -> Result<MapRef> {
    if f.source() != f.target() {
        return Err(Error::SpaceMismatch("iterates need a self-map".into()));
    }
    let mut g = identity(f.source().clone());
    for _ in 0..n {
        g = map_compose(g, f.clone())?;
    }
    Ok(g)
}

pub enum MapFamily {
    List(Vec<MapRef>),
    Power(MapRef),
}

/// Coordinate-wise action on a product.
pub struct ProductMap {
    pub source: Space,
    pub target: Space,
    pub maps: MapFamily,
}

impl ProductMap {
    pub fn list(maps: Vec<MapRef>) -> Self {
        ProductMap {
            source: Space::product(maps.iter().map(|m| m.source().clone()).collect()),
            target: Space::product(maps.iter().map(|m| m.target().clone()).collect()),
            maps: MapFamily::List(maps),
        }
    }

    pub fn power(map: MapRef) -> Self {
        ProductMap {
            source: Space::power(map.source().clone()),
            target: Space::power(map.target().clone()),
            maps: MapFamily::Power(map),
        }
    }

    fn at(&self, i: usize) -> &MapRef {
        match &self.maps {
            MapFamily::List(v) => &v[i],
            MapFamily::Power(m) => m,
        }
    }
}

impl ComputableMap for ProductMap {
    fn source(&self) -> &Space {
        &self.source
    }
    fn target(&self) -> &Space {
        &self.target
    }
    fn image_cell(&self, c: &Cell, fuel: Fuel) -> Cell {
        let Cell::Tuple(v) = c else { panic!("product map applied to a non-product cell") };
        Cell::Tuple(v.iter().enumerate().map(|(i, ci)| self.at(i).image_cell(ci, fuel)).collect())
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        let Point::Tuple(v) = p else { return None };
        let n = match &self.maps {
            MapFamily::List(l) => l.len(),
            MapFamily::Power(_) => {
                // the image of the implicit default tail must itself be the default
                let m = self.at(0);
                let d = m.source().default_point();
                if m.eval(&d)? != m.target().default_point() {
                    return None;
                }
                v.len()
            }
        };
        (0..n)
            .map(|i| self.at(i).eval(&*self.source.component_point(p, i)?))
            .collect::<Option<Vec<_>>>()
            .map(Point::Tuple)
    }
}

/// x ↦ x_index.
pub struct Projection {
    pub source: Space,
    pub target: Space,
    pub index: usize,
}

impl Projection {
    pub fn new(source: Space, index: usize) -> Result<Self> {
        let Space::Product(p) = &source else {
            return Err(Error::SpaceMismatch(format!("{} is not a product", source.name())));
        };
        let target = p
            .component(index)
            .ok_or_else(|| Error::InvalidIndex { index: index.to_string(), space: source.name() })?
            .clone();
        Ok(Projection { source, target, index })
    }
}

impl ComputableMap for Projection {
    fn source(&self) -> &Space {
        &self.source
    }
    fn target(&self) -> &Space {
        &self.target
    }
    fn image_cell(&self, c: &Cell, _fuel: Fuel) -> Cell {
        let Cell::Tuple(v) = c else { panic!("projection applied to a non-product cell") };
        v.get(self.index).cloned().unwrap_or_else(|| self.target.root_cell())
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        self.source.component_point(p, self.index).map(|c| c.into_owned())
    }
}

/// x ↦ p.
pub struct ConstMap {
    pub source: Space,
    pub target: Space,
    pub point: Point,
}

impl ComputableMap for ConstMap {
    fn source(&self) -> &Space {
        &self.source
    }
    fn target(&self) -> &Space {
        &self.target
    }
    fn image_cell(&self, _c: &Cell, fuel: Fuel) -> Cell {
        self.target.point_cell(&self.point, fuel.min(256) as u32)
    }
    fn eval(&self, _p: &Point) -> Option<Point> {
        Some(self.point.clone())
    }
}

type CellFn = dyn Fn(&Cell, Fuel) -> Cell + Send + Sync;
type PointFn = dyn Fn(&Point) -> Option<Point> + Send + Sync;

/// A map given by closures.
pub struct FnMap {
    pub source: Space,
    pub target: Space,
    pub cell: Box<CellFn>,
    pub point: Option<Box<PointFn>>,
}

impl ComputableMap for FnMap {
    fn source(&self) -> &Space {
        &self.source
    }
    fn target(&self) -> &Space {
        &self.target
    }
    fn image_cell(&self, c: &Cell, fuel: Fuel) -> Cell {
        (self.cell)(c, fuel)
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        self.point.as_ref().and_then(|f| f(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational::q;

    #[test]
    fn projection_and_product_images() {
        let s = Space::product(vec![Space::cantor(2), Space::Interval]);
        let p = Projection::new(s.clone(), 1).unwrap();
        let c = Cell::Tuple(vec![Cell::word(&[1]), Cell::Seg(q(0, 1), q(1, 2))]);
        assert_eq!(p.image_cell(&c, 0), Cell::Seg(q(0, 1), q(1, 2)));
        let m = ProductMap::list(vec![identity(Space::cantor(2)), identity(Space::Interval)]);
        assert_eq!(m.image_cell(&c, 0), c);
    }

    #[test]
    fn identity_preimage_of_a_cylinder() {
        let s = Space::cantor(2);
        let id = Identity { space: s.clone() };
        let b = s.cell_hull(&Cell::word(&[0, 1]));
        let pre = id.preimage(&b, 16);
        assert!(pre.contains(&b));
        assert!(pre.iter().all(|x| s.cell_in_open_ball(&s.closed_ball_cell(x), &b)));
    }
}
