//! Built-in Cantor-space systems: shift, odometer, Thompson prefix maps, lamplighter, golden mean.

use std::sync::Arc;

use serde_json::Value;

use super::machine::{is_prefix, machine_to_map, parse_word, MonotoneMachine};
use crate::kernel::{Cell, CellPredicateOpen, EffClosedSet, Fuel, MapRef, SeqPoint, Space};
use crate::{Error, Result};

/// A carrier with named generator maps; an upper-case name is the inverse of its lower-case letter.
pub struct BuiltinSystem {
    pub name: String,
    pub carrier: EffClosedSet,
    pub maps: Vec<(String, MapRef)>,
}

pub fn shift_machine(arity: u32) -> MonotoneMachine {
    MonotoneMachine::new("shift", arity, arity, |w| Some(w.get(1..).unwrap_or(&[]).to_vec()))
        .with_point(|x| Some(SeqPoint::new(x.prefix.get(1..).unwrap_or(&[]).to_vec(), x.tail)))
}

/// Adds one with carry, reading left to right: step("110") = "001", step(1^n) = 0^n.
pub fn odometer_machine() -> MonotoneMachine {
    MonotoneMachine::new("odometer", 2, 2, |w| Some(carry(w, 1)))
        .with_point(|x| Some(carry_point(x, 1)))
}

/// Subtracts one with borrow.
pub fn odometer_inverse_machine() -> MonotoneMachine {
    MonotoneMachine::new("odometer_inverse", 2, 2, |w| Some(carry(w, 0)))
        .with_point(|x| Some(carry_point(x, 0)))
}

/// toggle_at = 1: flip leading 1s to 0 and the first 0 to 1 (increment).
/// toggle_at = 0: flip leading 0s to 1 and the first 1 to 0 (decrement).
fn carry(w: &[u32], toggle_at: u32) -> Vec<u32> {
    let mut out = w.to_vec();
    for c in out.iter_mut() {
        if *c == toggle_at {
            *c = 1 - toggle_at;
        } else {
            *c = toggle_at;
            break;
        }
    }
    out
}

fn carry_point(x: &SeqPoint, toggle_at: u32) -> SeqPoint {
    match x.prefix.iter().position(|&c| c != toggle_at) {
        Some(_) => SeqPoint::new(carry(&x.prefix, toggle_at), x.tail),
        None if x.tail != toggle_at => {
            let mut p = vec![1 - toggle_at; x.prefix.len()];
            p.push(toggle_at);
            SeqPoint::new(p, x.tail)
        }
        None => SeqPoint::new(vec![], 1 - toggle_at),
    }
}

fn check_prefix_code(code: &[Vec<u32>]) -> Result<()> {
    if code.is_empty() {
        return Err(Error::InvalidPrefixCode("empty code".into()));
    }
    for (i, u) in code.iter().enumerate() {
        for (j, v) in code.iter().enumerate() {
            if i != j && is_prefix(u, v) {
                return Err(Error::InvalidPrefixCode(format!(
                    "{} is a prefix of {}",
                    super::machine::word_str(u),
                    super::machine::word_str(v)
                )));
            }
        }
    }
    let max = code.iter().map(|w| w.len()).max().unwrap_or(0);
    let kraft: u128 = code.iter().map(|w| 1u128 << (max - w.len())).sum();
    if max > 100 || kraft != 1u128 << max {
        return Err(Error::InvalidPrefixCode("the code does not partition the space".into()));
    }
    Ok(())
}

/// f(u_i x) = v_i x for complete binary prefix codes U, V of equal size.
pub fn thompson_machine(u: Vec<Vec<u32>>, v: Vec<Vec<u32>>) -> Result<MonotoneMachine> {
    check_prefix_code(&u)?;
    check_prefix_code(&v)?;
    if u.len() != v.len() {
        return Err(Error::InvalidPrefixCode(format!("|U| = {} but |V| = {}", u.len(), v.len())));
    }
    let (u2, v2) = (u.clone(), v.clone());
    let m = MonotoneMachine::new("thompson_prefix", 2, 2, move |w| {
        for (ui, vi) in u.iter().zip(&v) {
            if is_prefix(ui, w) {
                let mut out = vi.clone();
                out.extend_from_slice(&w[ui.len()..]);
                return Some(out);
            }
        }
        // w is a proper prefix of some u_i: emit what all compatible v_i agree on
        let compat: Vec<&Vec<u32>> =
            u.iter().zip(&v).filter(|(ui, _)| is_prefix(w, ui)).map(|(_, vi)| vi).collect();
        let first = compat.first()?;
        let n = (0..first.len())
            .take_while(|&k| compat.iter().all(|c| c.get(k) == first.get(k)))
            .count();
        Some(first[..n].to_vec())
    });
    Ok(m.with_point(move |x| {
        for (ui, vi) in u2.iter().zip(&v2) {
            if x.word(ui.len()) == *ui {
                let mut p = vi.clone();
                p.extend((ui.len()..x.prefix.len().max(ui.len())).map(|k| x.at(k)));
                return Some(SeqPoint::new(p, x.tail));
            }
        }
        None
    }))
}

/// φ(n) = (−1)^n ⌈n/2⌉.
pub fn phi(n: u64) -> i64 {
    let h = n.div_ceil(2) as i64;
    if n % 2 == 0 {
        h
    } else {
        -h
    }
}

pub fn phi_inv(z: i64) -> u64 {
    if z >= 0 {
        2 * z as u64
    } else {
        (-2 * z - 1) as u64
    }
}

/// Output coordinate i reads input coordinate `src(i)`, optionally flipped.
fn coordinate_machine(
    name: &str,
    src: impl Fn(u64) -> u64 + Send + Sync + Copy + 'static,
    flip0: bool,
) -> MonotoneMachine {
    let step = move |w: &[u32]| {
        let mut out = Vec::new();
        for i in 0.. {
            let j = src(i) as usize;
            if j >= w.len() {
                break;
            }
            let b = w[j];
            out.push(if flip0 && i == 0 { 1 - b } else { b });
        }
        Some(out)
    };
    MonotoneMachine::new(name, 2, 2, step).with_point(move |x| {
        let n = x.prefix.len() as u64 + 4;
        let p = (0..n)
            .map(|i| {
                let b = x.at(src(i) as usize);
                if flip0 && i == 0 {
                    1 - b
                } else {
                    b
                }
            })
            .collect();
        Some(SeqPoint::new(p, x.tail))
    })
}

/// Lamplighter generator a: flip the lamp at the origin.
pub fn lamplighter_a() -> MonotoneMachine {
    coordinate_machine("lamplighter_a", |i| i, true)
}

/// Lamplighter generator t: t(x)_n = x_{n+1} on ℤ, read through φ.
pub fn lamplighter_t() -> MonotoneMachine {
    coordinate_machine("lamplighter_t", |i| phi_inv(phi(i) + 1), false)
}

pub fn lamplighter_t_inverse() -> MonotoneMachine {
    coordinate_machine("lamplighter_t_inverse", |i| phi_inv(phi(i) - 1), false)
}

/// Sequences with no two adjacent 1s; the complement is every cell forcing a factor 11.
pub fn golden_mean_carrier() -> EffClosedSet {
    EffClosedSet::new(Arc::new(CellPredicateOpen {
        space: Space::cantor(2),
        pred: |c: &Cell, _f: Fuel| match c {
            Cell::Cyl(y) => y.assignments().any(|(k, v)| v == 1 && y.get(k + 1) == Some(1)),
            _ => false,
        },
    }))
}

fn words_param(params: &Value, key: &str) -> Result<Vec<Vec<u32>>> {
    let arr = params
        .get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::spec(format!("params.{key}"), "expected an array of binary words"))?;
    arr.iter()
        .enumerate()
        .map(|(i, w)| {
            let s = w.as_str().ok_or_else(|| Error::spec(format!("params.{key}[{i}]"), "expected a string"))?;
            parse_word(s, 2)
        })
        .collect()
}

/// Carrier and generator maps of a named built-in.
pub fn builtin_system(name: &str, params: &Value) -> Result<BuiltinSystem> {
    let whole = EffClosedSet::whole(Space::cantor(2));
    let mk = |m: MonotoneMachine, d: &EffClosedSet| -> Result<MapRef> { Ok(machine_to_map(m, d.clone())?) };
    let (carrier, maps): (EffClosedSet, Vec<(&str, MonotoneMachine)>) = match name {
        "shift" => {
            let arity = params.get("arity").and_then(|a| a.as_u64()).unwrap_or(2) as u32;
            if arity < 2 {
                return Err(Error::spec("params.arity", "need at least two symbols"));
            }
            let c = EffClosedSet::whole(Space::cantor(arity));
            (c, vec![("a", shift_machine(arity))])
        }
        "odometer" => (whole, vec![("a", odometer_machine()), ("A", odometer_inverse_machine())]),
        "thompson_prefix" => {
            let u = words_param(params, "U")?;
            let v = words_param(params, "V")?;
            let f = thompson_machine(u.clone(), v.clone())?;
            let g = thompson_machine(v, u)?;
            (whole, vec![("a", f), ("A", g)])
        }
        "lamplighter" => (
            whole,
            vec![
                ("a", lamplighter_a()),
                ("A", lamplighter_a()),
                ("t", lamplighter_t()),
                ("T", lamplighter_t_inverse()),
            ],
        ),
        "full_shift" => (whole, vec![("a", lamplighter_t()), ("A", lamplighter_t_inverse())]),
        "golden_mean_carrier" | "golden_mean" => (golden_mean_carrier(), vec![("a", shift_machine(2))]),
        _ => return Err(Error::spec("builtin", format!("unknown built-in system '{name}'"))),
    };
    let maps = maps
        .into_iter()
        .map(|(l, m)| Ok((l.to_string(), mk(m, &carrier)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BuiltinSystem { name: name.into(), carrier, maps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odometer_steps() {
        let t = odometer_machine();
        assert_eq!(t.step(&[1, 1, 0]), Some(vec![0, 0, 1]));
        assert_eq!(t.step(&[1, 1, 1]), Some(vec![0, 0, 0]));
        assert_eq!(t.eval_point(&SeqPoint::new(vec![], 1)), Some(SeqPoint::new(vec![], 0)));
        let ti = odometer_inverse_machine();
        for w in MonotoneMachine::words(2, 6) {
            assert_eq!(ti.step(&t.step(&w).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn thompson_replaces_prefixes() {
        let f = thompson_machine(vec![vec![0], vec![1, 0], vec![1, 1]], vec![vec![0, 0], vec![0, 1], vec![1]]).unwrap();
        assert_eq!(f.step(&[0, 1, 1]), Some(vec![0, 0, 1, 1]));
        assert_eq!(f.step(&[1]), Some(vec![]));
        assert!(thompson_machine(vec![vec![0]], vec![vec![0], vec![1]]).is_err());
        assert!(thompson_machine(vec![vec![0], vec![0, 1]], vec![vec![0], vec![1]]).is_err());
    }

    #[test]
    fn phi_is_a_bijection() {
        for n in 0..100u64 {
            assert_eq!(phi_inv(phi(n)), n);
        }
        assert_eq!((0..5).map(phi).collect::<Vec<_>>(), vec![0, -1, 1, -2, 2]);
    }

    #[test]
    fn lamplighter_t_and_inverse_cancel() {
        let t = lamplighter_t();
        let ti = lamplighter_t_inverse();
        for w in MonotoneMachine::words(2, 9).into_iter().filter(|w| w.len() == 9) {
            let out = ti.step(&t.step(&w).unwrap()).unwrap();
            assert!(is_prefix(&out, &w), "{w:?} -> {out:?}");
            assert!(out.len() >= 5);
        }
    }
}
