//! Clopen pieces of zero-dimensional compact sets in Cantor space.

use serde_json::{json, Value};

use super::machine::word_str;
use crate::kernel::{
    covered_by, Ball, BallUnion, Cell, CellPredicateOpen, Fuel, OpenSet, RecCompact, Space, UnionParts,
};
use crate::{Error, Result};

/// A finite union of cylinders, in normal form (no cylinder inside another).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClopenPiece {
    pub balls: Vec<Vec<u32>>,
}

impl ClopenPiece {
    pub fn to_json(&self) -> Value {
        json!({"balls": self.balls.iter().map(|w| word_str(w)).collect::<Vec<_>>()})
    }

    pub fn contains_word(&self, w: &[u32]) -> bool {
        self.balls.iter().any(|b| super::machine::is_prefix(b, w))
    }
}

/// Finite subsets of ℕ ordered by maximum, then lexicographically.
pub fn finite_subsets() -> impl Iterator<Item = Vec<usize>> {
    (0usize..).flat_map(|m| {
        let mut out = Vec::new();
        fn visit(prefix: &mut Vec<usize>, next: usize, m: usize, out: &mut Vec<Vec<usize>>) {
            let mut s = prefix.clone();
            s.push(m);
            out.push(s);
            for j in next..m {
                prefix.push(j);
                visit(prefix, j + 1, m, out);
                prefix.pop();
            }
        }
        visit(&mut Vec::new(), 0, m, &mut out);
        out.into_iter()
    })
}

fn nth_cylinder(arity: u32, i: usize) -> Vec<u32> {
    // non-empty words in shortlex order
    let mut n = i as u128;
    let mut len = 1u32;
    loop {
        let count = (arity as u128).pow(len);
        if n < count {
            let mut w = vec![0u32; len as usize];
            for k in (0..len as usize).rev() {
                w[k] = (n % arity as u128) as u32;
                n /= arity as u128;
            }
            return w;
        }
        n -= count;
        len += 1;
    }
}

/// Certified clopen pieces among the first `fuel` candidate unions (cylinder unions in normal form).
///
/// A union V qualifies when K ∖ V avoids the closure of V; cylinders are closed, so on Cantor
/// carriers every normal-form union qualifies once the cover check runs.
pub fn clopen_basis(k: &dyn RecCompact, fuel: Fuel) -> Result<Vec<ClopenPiece>> {
    let Space::Cantor { arity } = *k.space() else {
        return Err(Error::Invalid(format!("clopen_basis needs a Cantor carrier, got {}", k.space().name())));
    };
    let space = k.space().clone();
    let mut out = Vec::new();
    let mut seen = 0u64;
    for set in finite_subsets() {
        if seen >= fuel {
            break;
        }
        let words: Vec<Vec<u32>> = set.iter().map(|&i| nth_cylinder(arity, i)).collect();
        let nested = words.iter().enumerate().any(|(i, u)| {
            words.iter().enumerate().any(|(j, v)| i != j && super::machine::is_prefix(u, v))
        });
        if nested {
            continue;
        }
        seen += 1;
        let balls: Vec<Ball> = words.iter().map(|w| space.cell_hull(&Cell::word(w))).collect();
        let v = BallUnion::new(space.clone(), balls.clone());
        let outside = CellPredicateOpen {
            space: space.clone(),
            pred: |c: &Cell, _f: Fuel| balls.iter().all(|b| space.cell_disjoint_closed_ball(c, b)),
        };
        let u = UnionParts { space: &space, parts: vec![&v as &dyn OpenSet, &outside] };
        if covered_by(k, &u, fuel) {
            out.push(ClopenPiece { balls: words });
        }
    }
    Ok(out)
}
