//! Prefix-monotone word machines and the Cantor-space maps they induce.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::kernel::rational::depth_for_radius;
use crate::kernel::{Ball, Cell, ComputableMap, EffClosedSet, Fuel, Point, SeqPoint, Space};
use crate::{Error, Result};

type StepFn = dyn Fn(&[u32]) -> Option<Vec<u32>> + Send + Sync;
type PointFn = dyn Fn(&SeqPoint) -> Option<SeqPoint> + Send + Sync;

/// A partial map g: A* → B* with u ⊑ v ⟹ g(u) ⊑ g(v).
#[derive(Clone)]
pub struct MonotoneMachine {
    pub name: String,
    pub source_arity: u32,
    pub target_arity: u32,
    step: Arc<StepFn>,
    point: Option<Arc<PointFn>>,
}

impl std::fmt::Debug for MonotoneMachine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MonotoneMachine({}: {} -> {})", self.name, self.source_arity, self.target_arity)
    }
}

pub fn is_prefix(u: &[u32], v: &[u32]) -> bool {
    u.len() <= v.len() && v[..u.len()] == *u
}

impl MonotoneMachine {
    pub fn new(
        name: &str,
        source_arity: u32,
        target_arity: u32,
        step: impl Fn(&[u32]) -> Option<Vec<u32>> + Send + Sync + 'static,
    ) -> Self {
        MonotoneMachine { name: name.into(), source_arity, target_arity, step: Arc::new(step), point: None }
    }

    /// Attaches an exact evaluator on eventually constant sequences.
    pub fn with_point(mut self, f: impl Fn(&SeqPoint) -> Option<SeqPoint> + Send + Sync + 'static) -> Self {
        self.point = Some(Arc::new(f));
        self
    }

    pub fn step(&self, w: &[u32]) -> Option<Vec<u32>> {
        (self.step)(w)
    }

    pub fn eval_point(&self, x: &SeqPoint) -> Option<SeqPoint> {
        self.point.as_ref().and_then(|f| f(x))
    }

    pub fn identity(arity: u32) -> Self {
        MonotoneMachine::new("identity", arity, arity, |w| Some(w.to_vec())).with_point(|x| Some(x.clone()))
    }

    /// Words of length ≤ `depth` in shortlex order.
    pub fn words(arity: u32, depth: usize) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        let mut level = vec![vec![]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for w in &level {
                for a in 0..arity {
                    let mut v: Vec<u32> = w.clone();
                    v.push(a);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }

    /// Checks prefix-monotonicity on all words of length ≤ `depth`.
    pub fn check_monotone(&self, depth: usize) -> Result<()> {
        for w in Self::words(self.source_arity, depth) {
            let Some(gw) = self.step(&w) else { continue };
            if gw.iter().any(|&b| b >= self.target_arity) {
                return Err(Error::InvalidMachine(format!("{}: output symbol out of range on {:?}", self.name, w)));
            }
            if let Some(last) = w.len().checked_sub(1) {
                if let Some(gp) = self.step(&w[..last]) {
                    if !is_prefix(&gp, &gw) {
                        return Err(Error::InvalidMachine(format!(
                            "{}: step({:?}) = {:?} does not extend step({:?}) = {:?}",
                            self.name,
                            w,
                            gw,
                            &w[..last],
                            gp
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The step table on words of length ≤ `depth`.
    pub fn table(&self, depth: usize) -> Value {
        let rows: Vec<Value> = Self::words(self.source_arity, depth)
            .into_iter()
            .map(|w| {
                json!({
                    "input": word_str(&w),
                    "output": self.step(&w).map(|o| word_str(&o)),
                })
            })
            .collect();
        json!({"machine": self.name, "rows": rows, "partial_beyond_depth": depth})
    }
}

pub fn word_str(w: &[u32]) -> String {
    w.iter().map(|c| char::from_digit(*c, 36).unwrap_or('?')).collect()
}

pub fn parse_word(s: &str, arity: u32) -> Result<Vec<u32>> {
    s.chars()
        .map(|c| match c.to_digit(36) {
            Some(d) if d < arity => Ok(d),
            _ => Err(Error::Invalid(format!("symbol '{c}' is not in an alphabet of size {arity}"))),
        })
        .collect()
}

fn monotone_check_depth(arity: u32) -> usize {
    let mut d = 0;
    while (arity as u64).pow(d as u32 + 1) <= 4096 && d < 12 {
        d += 1;
    }
    d
}

/// The Cantor-space map of a monotone machine.
pub struct MachineMap {
    pub machine: MonotoneMachine,
    pub source: Space,
    pub target: Space,
    pub domain: EffClosedSet,
}

impl ComputableMap for MachineMap {
    fn source(&self) -> &Space {
        &self.source
    }
    fn target(&self) -> &Space {
        &self.target
    }
    fn image_cell(&self, c: &Cell, _fuel: Fuel) -> Cell {
        match c {
            Cell::Cyl(y) => match self.machine.step(&y.prefix) {
                Some(out) => Cell::word(&out),
                None => self.target.root_cell(),
            },
            _ => self.target.root_cell(),
        }
    }
    /// Minimal source cylinders [v] with step(v) extending the target cylinder, among the first `fuel` words.
    fn preimage(&self, b: &Ball, fuel: Fuel) -> Vec<Ball> {
        let Point::Seq(s) = &b.center else { return vec![] };
        let w = s.word(depth_for_radius(&b.radius, true));
        let mut found: Vec<Vec<u32>> = Vec::new();
        let mut count = 0u64;
        let mut level: Vec<Vec<u32>> = vec![vec![]];
        'outer: while !level.is_empty() {
            let mut next = Vec::new();
            for v in level {
                if count >= fuel {
                    break 'outer;
                }
                count += 1;
                if found.iter().any(|f| is_prefix(f, &v)) {
                    continue;
                }
                if matches!(self.machine.step(&v), Some(out) if is_prefix(&w, &out)) {
                    found.push(v);
                    continue;
                }
                for a in 0..self.machine.source_arity {
                    let mut x = v.clone();
                    x.push(a);
                    next.push(x);
                }
            }
            level = next;
        }
        found.iter().map(|v| self.source.cell_hull(&Cell::word(v))).collect()
    }
    fn eval(&self, p: &Point) -> Option<Point> {
        match p {
            Point::Seq(s) => self.machine.eval_point(s).map(Point::Seq),
            _ => None,
        }
    }
}

/// The computable map of a monotone machine restricted to a domain.
pub fn machine_to_map(m: MonotoneMachine, domain: EffClosedSet) -> Result<Arc<MachineMap>> {
    let source = Space::cantor(m.source_arity);
    if domain.space != source {
        return Err(Error::SpaceMismatch(format!(
            "machine domain lives in {}, expected {}",
            domain.space.name(),
            source.name()
        )));
    }
    m.check_monotone(monotone_check_depth(m.source_arity))?;
    let target = Space::cantor(m.target_arity);
    Ok(Arc::new(MachineMap { machine: m, source, target, domain }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_monotone_machines_are_rejected() {
        let bad = MonotoneMachine::new("reverse", 2, 2, |w| Some(w.iter().rev().copied().collect()));
        let e = machine_to_map(bad, EffClosedSet::whole(Space::cantor(2)));
        assert!(matches!(e, Err(Error::InvalidMachine(_))));
    }

    #[test]
    fn identity_preimage_is_the_cylinder() {
        let m = machine_to_map(MonotoneMachine::identity(2), EffClosedSet::whole(Space::cantor(2))).unwrap();
        let b = m.target.cell_hull(&Cell::word(&[1, 0]));
        let pre = m.preimage(&b, 64);
        assert_eq!(pre, vec![m.source.cell_hull(&Cell::word(&[1, 0]))]);
    }
}
