//! The computable Brouwer encoding of a zero-dimensional recursively compact set into {0,1}^ℕ.

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Value};

use super::machine::word_str;
use crate::kernel::{
    covered_by, Cell, CellPredicateOpen, CompactRef, ComputableMap, EffClosedSet, Fuel, Point, RecCompact,
    Space, Stream, BallUnion,
};
use crate::{Error, Result};

#[derive(Clone)]
pub struct BrouwerOptions {
    /// A dense sequence of the carrier; presence makes the carrier computably closed.
    pub dense: Option<Arc<Stream<Point>>>,
    /// The carrier has no isolated points; with `dense` this makes the image all of {0,1}^ℕ.
    pub no_isolated: bool,
    /// Number of partition levels materialized.
    pub levels: usize,
    pub fuel: Fuel,
}

impl Default for BrouwerOptions {
    fn default() -> Self {
        BrouwerOptions { dense: None, no_isolated: false, levels: 8, fuel: 1 << 12 }
    }
}

/// v_0 = 0, v_1 = 10, …, v_{m-1} = 1^{m-1}0, v_m = 1^m.
pub fn suffix_code(i: usize, m: usize) -> Vec<u32> {
    let mut v = vec![1; i];
    if i < m {
        v.push(0);
    }
    v
}

pub fn suffix_codes(m: usize) -> Vec<Vec<u32>> {
    (0..=m).map(|i| suffix_code(i, m)).collect()
}

/// The tree of nested partition pieces and its binary code.
pub struct EncoderTree {
    pub space: Space,
    /// Children are only the nonempty pieces nested in the parent.
    pub nested: bool,
    /// Split depth of each partition level.
    pub depths: Vec<usize>,
    /// Level-n pieces; in nested mode only the nonempty ones.
    pub pieces: Vec<Vec<Cell>>,
    index: Vec<HashMap<Cell, usize>>,
    /// Nested mode: children[n][i] lists indices into pieces[n+1].
    children: Vec<Vec<Vec<usize>>>,
}

enum Kids<'a> {
    All(usize),
    Some(&'a [usize]),
}

impl Kids<'_> {
    fn len(&self) -> usize {
        match self {
            Kids::All(n) => *n,
            Kids::Some(v) => v.len(),
        }
    }
    fn pos(&self, j: usize) -> Option<usize> {
        match self {
            Kids::All(n) => (j < *n).then_some(j),
            Kids::Some(v) => v.binary_search(&j).ok(),
        }
    }
    fn at(&self, p: usize) -> usize {
        match self {
            Kids::All(_) => p,
            Kids::Some(v) => v[p],
        }
    }
}

impl EncoderTree {
    pub fn levels(&self) -> usize {
        self.pieces.len()
    }

    /// Children of the node ending in piece `parent` at level n-1 (or the root), as indices into level n.
    fn kids(&self, n: usize, parent: Option<usize>) -> Kids<'_> {
        match (self.nested, parent) {
            (true, Some(p)) => Kids::Some(&self.children[n - 1][p]),
            _ => Kids::All(self.pieces[n].len()),
        }
    }

    /// Decidable tree membership of a word y_0 … y_k.
    pub fn is_node(&self, w: &[usize]) -> bool {
        if w.len() > self.levels() {
            return false;
        }
        let mut parent = None;
        for (n, &j) in w.iter().enumerate() {
            if self.kids(n, parent).pos(j).is_none() {
                return false;
            }
            parent = Some(j);
        }
        true
    }

    /// The suffix codes attached to the children of a node.
    pub fn node_suffix_codes(&self, w: &[usize]) -> Option<Vec<Vec<u32>>> {
        if !self.is_node(w) || w.len() >= self.levels() {
            return None;
        }
        let k = self.kids(w.len(), w.last().copied()).len();
        Some(suffix_codes(k - 1))
    }

    /// h(w).
    pub fn code(&self, w: &[usize]) -> Option<Vec<u32>> {
        let mut out = Vec::new();
        let mut parent = None;
        for (n, &j) in w.iter().enumerate() {
            if n >= self.levels() {
                return None;
            }
            let kids = self.kids(n, parent);
            let p = kids.pos(j)?;
            out.extend(suffix_code(p, kids.len() - 1));
            parent = Some(j);
        }
        Some(out)
    }

    /// Longest node whose code is a prefix of `bits`, with the number of bits consumed.
    pub fn decode(&self, bits: &[u32]) -> (Vec<usize>, usize) {
        let mut pos = 0;
        let mut w = Vec::new();
        let mut parent = None;
        for n in 0..self.levels() {
            let kids = self.kids(n, parent);
            let m = kids.len() - 1;
            let ones = bits[pos..].iter().take(m).take_while(|&&b| b == 1).count();
            let p = if ones == m {
                ones
            } else if pos + ones < bits.len() {
                ones
            } else {
                break;
            };
            let used = suffix_code(p, m).len();
            if pos + used > bits.len() {
                break;
            }
            pos += used;
            let j = kids.at(p);
            w.push(j);
            parent = Some(j);
        }
        (w, pos)
    }

    /// The level-n piece of the first n+1 entries of `w`.
    pub fn piece(&self, n: usize, j: usize) -> &Cell {
        &self.pieces[n][j]
    }

    /// Refines `from` down to the split depth of level n, following the child that contains `c`.
    fn locate(&self, n: usize, from: &Cell, from_depth: usize, c: &Cell) -> Option<usize> {
        let mut cur = from.clone();
        for _ in from_depth..self.depths[n] {
            let kids = self.space.split(&cur);
            if kids.is_empty() {
                continue;
            }
            cur = kids.into_iter().find(|k| self.space.cell_subset(c, k))?;
        }
        self.index[n].get(&cur).copied()
    }

    /// The node path of the pieces containing the cell, as deep as the cell determines.
    pub fn path_of_cell(&self, c: &Cell) -> Vec<usize> {
        let mut w = Vec::new();
        let mut from = self.space.root_cell();
        let mut from_depth = 0;
        let mut parent = None;
        for n in 0..self.levels() {
            let Some(j) = self.locate(n, &from, from_depth, c) else { break };
            if self.kids(n, parent).pos(j).is_none() {
                break;
            }
            w.push(j);
            parent = Some(j);
            from = self.pieces[n][j].clone();
            from_depth = self.depths[n];
        }
        w
    }

    /// Nodes up to `depth` levels with their codes.
    pub fn to_json(&self, depth: usize) -> Value {
        let mut nodes = vec![json!({"word": [], "code": ""})];
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for n in 0..depth.min(self.levels()) {
            let mut next = Vec::new();
            for w in &frontier {
                let kids = self.kids(n, w.last().copied());
                for p in 0..kids.len() {
                    let mut x = w.clone();
                    x.push(kids.at(p));
                    let code = self.code(&x).unwrap_or_default();
                    nodes.push(json!({"word": x, "code": word_str(&code)}));
                    next.push(x);
                }
            }
            frontier = next;
        }
        json!({"nested": self.nested, "depths": self.depths, "nodes": nodes})
    }
}

/// X → {0,1}^ℕ.
pub struct EncodeMap {
    pub tree: Arc<EncoderTree>,
    target: Space,
}

impl ComputableMap for EncodeMap {
    fn source(&self) -> &Space {
        &self.tree.space
    }
    fn target(&self) -> &Space {
        &self.target
    }
    fn image_cell(&self, c: &Cell, _fuel: Fuel) -> Cell {
        let w = self.tree.path_of_cell(c);
        Cell::word(&self.tree.code(&w).unwrap_or_default())
    }
}

/// {0,1}^ℕ ⊇ E → X.
pub struct DecodeMap {
    pub tree: Arc<EncoderTree>,
    source: Space,
}

impl ComputableMap for DecodeMap {
    fn source(&self) -> &Space {
        &self.source
    }
    fn target(&self) -> &Space {
        &self.tree.space
    }
    fn image_cell(&self, c: &Cell, _fuel: Fuel) -> Cell {
        let Cell::Cyl(y) = c else { return self.tree.space.root_cell() };
        let (w, _) = self.tree.decode(&y.prefix);
        match w.last() {
            Some(&j) => self.tree.pieces[w.len() - 1][j].clone(),
            None => self.tree.space.root_cell(),
        }
    }
}

pub struct BrouwerEncoding {
    pub tree: Arc<EncoderTree>,
    pub forward: Arc<EncodeMap>,
    pub backward: Arc<DecodeMap>,
    /// E = H(Y) ⊆ {0,1}^ℕ.
    pub image: EffClosedSet,
}

fn zero_dim_cells(space: &Space) -> bool {
    match space {
        Space::Cantor { .. } | Space::Finite { .. } => true,
        Space::Product(p) => match p {
            crate::kernel::Product::List(v) => v.iter().all(zero_dim_cells),
            crate::kernel::Product::Power(b) => zero_dim_cells(b),
        },
        _ => false,
    }
}

const MAX_DEPTH_SEARCH: usize = 64;
const MAX_LEVEL_CELLS: usize = 1 << 14;

fn max_diam(space: &Space, cells: &[Cell]) -> crate::Q {
    cells.iter().map(|c| space.cell_diam(c)).max().unwrap_or_default()
}

fn descendants(space: &Space, c: &Cell, steps: usize) -> Vec<Cell> {
    let mut level = vec![c.clone()];
    for _ in 0..steps {
        let mut next = Vec::new();
        for x in &level {
            let kids = space.split(x);
            if kids.is_empty() {
                next.push(x.clone());
            } else {
                next.extend(kids);
            }
        }
        level = next;
    }
    level
}

struct Nonempty<'a> {
    k: &'a dyn RecCompact,
    points: Vec<Point>,
    fuel: Fuel,
}

impl Nonempty<'_> {
    /// Some(true) nonempty, Some(false) empty, None undecided at the current budget.
    fn decide(&self, c: &Cell, bucket: &[usize]) -> (Option<bool>, Vec<usize>) {
        let space = self.k.space();
        let inside: Vec<usize> =
            bucket.iter().copied().filter(|&i| space.cell_contains_point(c, &self.points[i])).collect();
        if !inside.is_empty() {
            return (Some(true), inside);
        }
        let empty = BallUnion::empty(space.clone());
        let mut f = 16;
        loop {
            if self.k.covered_by_in(c, &empty, f) {
                return (Some(false), inside);
            }
            if f >= self.fuel {
                return (None, inside);
            }
            f = (f * 4).min(self.fuel);
        }
    }
}

/// Computes the encoder tree and the forward/backward maps.
pub fn brouwer_encode(k: CompactRef, opts: &BrouwerOptions) -> Result<BrouwerEncoding> {
    let space = k.space().clone();
    if !zero_dim_cells(&space) {
        return Err(Error::Invalid(format!(
            "the Brouwer encoding needs clopen cells (Cantor, finite or products of these), got {}",
            space.name()
        )));
    }
    if covered_by(&*k, &BallUnion::empty(space.clone()), opts.fuel) {
        return Err(Error::EmptySpace);
    }
    let nested = opts.no_isolated && opts.dense.is_some();
    if opts.no_isolated && opts.dense.is_none() {
        return Err(Error::Invalid("the no-isolated-points option needs a dense sequence".into()));
    }
    let tree = if nested { nested_tree(&*k, opts)? } else { full_tree(&space, opts.levels)? };
    let tree = Arc::new(tree);
    let forward = Arc::new(EncodeMap { tree: tree.clone(), target: Space::cantor(2) });
    let backward = Arc::new(DecodeMap { tree: tree.clone(), source: Space::cantor(2) });
    let image = image_set(tree.clone(), k, nested);
    Ok(BrouwerEncoding { tree, forward, backward, image })
}

fn full_tree(space: &Space, levels: usize) -> Result<EncoderTree> {
    let mut depths = Vec::new();
    let mut pieces = Vec::new();
    let mut d = 0usize;
    for n in 0..levels {
        let bound = crate::kernel::rational::pow2(-(n as i64));
        let mut found = None;
        for cand in d + 1..=d + MAX_DEPTH_SEARCH {
            let cells = space.cells_at_depth(cand);
            if cells.len() > MAX_LEVEL_CELLS {
                break;
            }
            if max_diam(space, &cells) <= bound && (n > 0 || cells.len() >= 2) {
                found = Some((cand, cells));
                break;
            }
        }
        let Some((cand, cells)) = found else {
            if n == 0 {
                return Err(Error::Invalid(format!("{} has a single point", space.name())));
            }
            break;
        };
        d = cand;
        depths.push(d);
        pieces.push(cells);
    }
    let index = pieces.iter().map(|l| l.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect()).collect();
    Ok(EncoderTree { space: space.clone(), nested: false, depths, pieces, index, children: vec![] })
}

fn nested_tree(k: &dyn RecCompact, opts: &BrouwerOptions) -> Result<EncoderTree> {
    let space = k.space().clone();
    let dense = opts.dense.as_ref().expect("dense points");
    let mut npts = 256usize;
    loop {
        let points = dense.take(npts);
        let ne = Nonempty { k, points, fuel: opts.fuel };
        match nested_tree_with(&space, &ne, opts.levels)? {
            Some(t) => return Ok(t),
            None => {
                if npts as u64 >= opts.fuel || ne.points.len() < npts {
                    return Err(Error::NeedsMoreFuel("deciding which partition pieces meet the carrier".into()));
                }
                npts *= 2;
            }
        }
    }
}

/// None when some piece stays undecided with the current dense prefix.
fn nested_tree_with(space: &Space, ne: &Nonempty, levels: usize) -> Result<Option<EncoderTree>> {
    let mut depths = Vec::new();
    let mut pieces: Vec<Vec<Cell>> = Vec::new();
    let mut children: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut buckets: Vec<Vec<usize>> = Vec::new();
    let all: Vec<usize> = (0..ne.points.len()).collect();
    let mut d = 0usize;
    for n in 0..levels {
        let bound = crate::kernel::rational::pow2(-(n as i64));
        let parents: Vec<(Cell, Vec<usize>)> = if n == 0 {
            vec![(space.root_cell(), all.clone())]
        } else {
            pieces[n - 1].iter().cloned().zip(buckets.iter().cloned()).collect()
        };
        let mut chosen = None;
        for cand in d + 1..=d + MAX_DEPTH_SEARCH {
            let mut ok = true;
            let mut level: Vec<(Cell, Vec<usize>)> = Vec::new();
            let mut kids_of: Vec<Vec<usize>> = Vec::new();
            for (pc, pb) in &parents {
                let mut kids = Vec::new();
                for c in descendants(space, pc, cand - d) {
                    if space.cell_diam(&c) > bound {
                        ok = false;
                    }
                    match ne.decide(&c, pb) {
                        (Some(true), inside) => {
                            kids.push(level.len());
                            level.push((c, inside));
                        }
                        (Some(false), _) => {}
                        (None, _) => return Ok(None),
                    }
                }
                if kids.len() < 2 {
                    ok = false;
                }
                kids_of.push(kids);
                if !ok {
                    break;
                }
            }
            if level.len() > MAX_LEVEL_CELLS {
                break;
            }
            if ok {
                chosen = Some((cand, level, kids_of));
                break;
            }
        }
        let Some((cand, level, kids_of)) = chosen else {
            if n == 0 {
                return Err(Error::NeedsMoreFuel(
                    "no partition level splits the carrier; it may be a single point".into(),
                ));
            }
            break;
        };
        d = cand;
        depths.push(d);
        if n > 0 {
            children.push(kids_of);
        }
        let (cells, bs): (Vec<Cell>, Vec<Vec<usize>>) = level.into_iter().unzip();
        pieces.push(cells);
        buckets = bs;
    }
    let index = pieces.iter().map(|l| l.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect()).collect();
    Ok(Some(EncoderTree { space: space.clone(), nested: true, depths, pieces, index, children }))
}

/// E = H(Y): codes of nested paths through nonempty pieces.
fn image_set(tree: Arc<EncoderTree>, k: CompactRef, nested: bool) -> EffClosedSet {
    let cantor = Space::cantor(2);
    if nested {
        return EffClosedSet::whole(cantor);
    }
    EffClosedSet::new(Arc::new(CellPredicateOpen {
        space: cantor,
        pred: move |c: &Cell, fuel: Fuel| {
            let Cell::Cyl(y) = c else { return false };
            let (w, _) = tree.decode(&y.prefix);
            let space = &tree.space;
            let empty = BallUnion::empty(space.clone());
            for (n, &j) in w.iter().enumerate() {
                let p = &tree.pieces[n][j];
                if n > 0 && !space.cell_subset(p, &tree.pieces[n - 1][w[n - 1]]) {
                    return true;
                }
                if k.covered_by_in(p, &empty, fuel) {
                    return true;
                }
            }
            false
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_children_get_the_three_suffixes() {
        assert_eq!(suffix_codes(2), vec![vec![0], vec![1, 0], vec![1, 1]]);
        assert_eq!(suffix_codes(1), vec![vec![0], vec![1]]);
    }
}
