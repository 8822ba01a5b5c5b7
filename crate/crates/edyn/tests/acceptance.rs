//! The ten acceptance criteria, one pass/fail line each.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use edyn::algebraic::{box_excluded, AlgebraicPresentation, TorusPointPrefix};
use edyn::cantor::{brouwer_encode, odometer_machine, BrouwerOptions};
use edyn::covers::{inclusion_holds, subshift_cover_forbidden, CoverPattern, EffectiveCover, Window};
use edyn::dynprops::{circle_system, periods_complement, weds_check, weds_refines};
use edyn::extension::{build_extension, EdsSpec};
use edyn::groups::{binary, cmax_enumerate_in, window_codings, Group, PatternCoding, SubshiftSpec, Word};
use edyn::kernel::rational::{frac, pow2, q};
use edyn::kernel::{
    closed_to_compact, fixed_point_set, semi_decide_cover, semi_decide_empty, whole, Ball, BallUnion, Cell,
    EffClosedSet, Point, SeqPoint, Space, Stream,
};
use edyn::{Fuel, Q};

type Outcome = Result<(), String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_words(arity: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..arity).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

fn pattern_set(ps: &[CoverPattern]) -> BTreeSet<(Vec<Word>, Vec<usize>)> {
    ps.iter().map(|p| (p.support.clone(), p.labels.clone())).collect()
}

fn odometer_forbid() -> Outcome {
    let e = EdsSpec::builtin("odometer", &Value::Null).map_err(|e| e.to_string())?;
    let fuel: Fuel = 1 << 16;
    let cover = EffectiveCover::cylinders(e.carrier.clone(), &[vec![0], vec![1]], fuel).map_err(|e| e.to_string())?;
    let got = subshift_cover_forbidden(&e.action, &cover, Window::Forward(1), fuel).map_err(|e| e.to_string())?;
    let t = odometer_machine();
    let realizable: BTreeSet<(usize, usize)> = all_words(2, 8)
        .iter()
        .map(|w| (w[0] as usize, t.step(w).expect("total")[0] as usize))
        .collect();
    let words = Window::Forward(1).words(&e.group.gens);
    let mut oracle = BTreeSet::new();
    for a in 0..2 {
        for b in 0..2 {
            if !realizable.contains(&(a, b)) {
                oracle.insert((words.clone(), vec![a, b]));
            }
        }
    }
    check(got.len() == 2 && pattern_set(&got) == oracle, || format!("emitted {} patterns, oracle {}", got.len(), oracle.len()))
}

/// Whether closed arcs [a, a + len] of the circle have a common point.
fn arcs_meet(arcs: &[(Q, Q)]) -> bool {
    let inside = |x: &Q, (a, l): &(Q, Q)| frac(&(x - a)) <= *l;
    arcs.iter()
        .flat_map(|(a, l)| [frac(a), frac(&(a + l))])
        .any(|x| arcs.iter().all(|arc| inside(&x, arc)))
}

fn rotations() -> Outcome {
    for (theta, m) in [(q(1, 3), 3i64), (q(1, 4), 4i64)] {
        let e = EdsSpec::rotation(&theta).map_err(|e| e.to_string())?;
        let cuts: Vec<Q> = (0..=m).map(|i| q(i, m)).collect();
        let cover = EffectiveCover::arcs(e.carrier.clone(), &cuts, 1 << 12).map_err(|e| e.to_string())?;
        let window = Window::Forward(2);
        let got = subshift_cover_forbidden(&e.action, &cover, window, 1 << 12).map_err(|e| e.to_string())?;
        let words = window.words(&e.group.gens);
        let mut oracle = BTreeSet::new();
        for lab in all_words(m as u32, words.len()) {
            let arcs: Vec<(Q, Q)> = words
                .iter()
                .zip(&lab)
                .map(|(w, &l)| (q(l as i64, m) - &theta * Q::from_integer((w.len() as i64).into()), q(1, m)))
                .collect();
            if !arcs_meet(&arcs) {
                oracle.insert((words.clone(), lab.iter().map(|&l| l as usize).collect::<Vec<_>>()));
            }
        }
        let got = pattern_set(&got);
        check(got == oracle, || format!("rotation {theta}: emitted {} patterns, oracle {}", got.len(), oracle.len()))?;
    }
    Ok(())
}

fn golden_words(max_len: usize) -> Vec<Vec<u32>> {
    (0..=max_len)
        .flat_map(|l| all_words(2, l))
        .filter(|w| !w.windows(2).any(|p| p == [1, 1]))
        .collect()
}

fn golden_mean_encoding() -> Outcome {
    let e = EdsSpec::builtin("golden_mean", &Value::Null).map_err(|e| e.to_string())?;
    let pts: Vec<Point> = golden_words(14).into_iter().map(|w| Point::Seq(SeqPoint::new(w, 0))).collect();
    let dense = Arc::new(Stream::new(pts.clone().into_iter()));
    let opts = BrouwerOptions { dense: Some(dense), no_isolated: true, levels: 6, fuel: 1 << 12 };
    let enc = brouwer_encode(e.carrier.clone(), &opts).map_err(|e| e.to_string())?;
    let tree = &enc.tree;
    check(tree.levels() >= 6, || format!("only {} levels", tree.levels()))?;
    let mut nodes: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..6 {
        let mut next = Vec::new();
        for w in &nodes {
            for j in 0..tree.pieces[w.len()].len() {
                let mut x = w.clone();
                x.push(j);
                if tree.is_node(&x) {
                    next.push(x);
                }
            }
        }
        nodes = next;
    }
    let codes: Vec<Vec<u32>> = nodes.iter().map(|w| tree.code(w).expect("node code")).collect();
    let kraft: Q = codes.iter().map(|c| pow2(-(c.len() as i64))).sum();
    check(kraft == Q::one(), || format!("Kraft sum {kraft}"))?;
    for (i, a) in codes.iter().enumerate() {
        for b in &codes[i + 1..] {
            let n = a.len().min(b.len());
            check(a[..n] != b[..n], || "codes are not prefix-free".into())?;
        }
    }
    for u in all_words(2, 6) {
        let reach = codes.iter().any(|c| {
            let n = c.len().min(6);
            c[..n] == u[..n]
        });
        check(reach, || format!("word {u:?} is not reached"))?;
    }
    for (w, c) in nodes.iter().zip(&codes) {
        let (back, used) = tree.decode(c);
        check(back == *w && used == c.len(), || format!("node {w:?} decodes to {back:?}"))?;
    }
    let space = e.space().clone();
    for p in pts.iter().take(200) {
        let cell = space.point_cell(p, 64);
        let path = tree.path_of_cell(&cell);
        check(path.len() >= 6, || format!("point {p} has a path of {} levels", path.len()))?;
        let code = tree.code(&path[..6]).expect("code");
        let (back, _) = tree.decode(&code);
        check(back[..6] == path[..6], || format!("round trip of {p} fails"))?;
        check(space.cell_contains_point(tree.piece(5, path[5]), p), || format!("piece misses {p}"))?;
    }
    let plain = brouwer_encode(e.carrier.clone(), &BrouwerOptions { levels: 6, ..Default::default() })
        .map_err(|e| e.to_string())?;
    for p in pts.iter().take(200) {
        let path = plain.tree.path_of_cell(&space.point_cell(p, 64));
        let code = plain.tree.code(&path).expect("code");
        let (back, _) = plain.tree.decode(&code);
        check(back.len() >= 6 && back[..6] == path[..6], || format!("plain round trip of {p} fails"))?;
    }
    Ok(())
}

/// Whether [w] ⊆ ⋃ [u_i], all words of length ≤ 8.
fn cylinders_cover(w: &[u32], us: &[Vec<u32>]) -> bool {
    all_words(2, 8 - w.len()).iter().all(|tail| {
        let mut x = w.to_vec();
        x.extend(tail);
        us.iter().any(|u| x.starts_with(u))
    })
}

/// Whether [a, b] ⊆ ⋃ (c_i - r_i, c_i + r_i).
fn intervals_cover(a: &Q, b: &Q, balls: &[(Q, Q)]) -> bool {
    let mut cur = a.clone();
    loop {
        let best = balls.iter().filter(|(c, r)| (&cur - c).abs() < *r).map(|(c, r)| c + r).max();
        match best {
            None => return false,
            Some(hi) if hi > *b => return true,
            Some(hi) => cur = hi,
        }
    }
}

trait Abs {
    fn abs(&self) -> Self;
}

impl Abs for Q {
    fn abs(&self) -> Q {
        if *self < Q::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

fn kernel_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cantor = Space::cantor(2);
    let mut accepted = 0;
    for i in 0..1000 {
        let fuel: Fuel = 1 << rng.gen_range(2..12);
        let (truth, small, big) = if i % 2 == 0 {
            let w: Vec<u32> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..2)).collect();
            let us: Vec<Vec<u32>> = (0..rng.gen_range(1..10))
                .map(|_| (0..rng.gen_range(1..=8)).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            let balls: Vec<Ball> = us.iter().map(|u| cantor.cell_hull(&Cell::word(u))).collect();
            let u = BallUnion::new(cantor.clone(), balls);
            let k = closed_to_compact(&EffClosedSet::cell(cantor.clone(), Cell::word(&w)), whole(cantor.clone()))
                .map_err(|e| e.to_string())?;
            let truth = cylinders_cover(&w, &us);
            if i % 4 == 0 {
                let c = EffClosedSet::new(Arc::new(u));
                (truth, semi_decide_empty(&c, &*k, fuel), semi_decide_empty(&c, &*k, 4 * fuel))
            } else {
                (truth, semi_decide_cover(&*k, &u, fuel), semi_decide_cover(&*k, &u, 4 * fuel))
            }
        } else {
            let d = rng.gen_range(1..=64i64);
            let x = rng.gen_range(0..=d);
            let y = rng.gen_range(x..=d);
            let (a, b) = (q(x, d), q(y, d));
            let balls: Vec<(Q, Q)> = (0..rng.gen_range(1..8))
                .map(|_| {
                    let dd = rng.gen_range(1..=64i64);
                    (q(rng.gen_range(0..=dd), dd), q(rng.gen_range(1..=dd), 2 * dd))
                })
                .collect();
            let u = BallUnion::new(
                Space::Interval,
                balls.iter().map(|(c, r)| Ball::new(Point::Real(c.clone()), r.clone()).expect("ball")).collect(),
            );
            let k = closed_to_compact(&EffClosedSet::cell(Space::Interval, Cell::Seg(a.clone(), b.clone())), whole(Space::Interval))
                .map_err(|e| e.to_string())?;
            let truth = intervals_cover(&a, &b, &balls);
            (truth, semi_decide_cover(&*k, &u, fuel), semi_decide_cover(&*k, &u, 4 * fuel))
        };
        let (small, big) = (small.map_err(|e| e.to_string())?, big.map_err(|e| e.to_string())?);
        check(!small.is_accepted() || truth, || format!("query {i}: unsound acceptance"))?;
        check(!small.is_accepted() || big == small, || format!("query {i}: not fuel-monotone ({small:?} vs {big:?})"))?;
        accepted += small.is_accepted() as usize;
    }
    check(accepted > 100, || format!("only {accepted} acceptances"))
}

fn fixed_points() -> Outcome {
    let shift = EdsSpec::builtin("shift", &Value::Null).map_err(|e| e.to_string())?;
    let fix = fixed_point_set(shift.action.map(0).map_err(|e| e.to_string())?.clone(), shift.carrier.clone())
        .map_err(|e| e.to_string())?;
    let cantor = Space::cantor(2);
    for w in all_words(2, 6) {
        if w.iter().all(|&s| s == w[0]) {
            continue;
        }
        let k = closed_to_compact(&EffClosedSet::cell(cantor.clone(), Cell::word(&w)), whole(cantor.clone()))
            .map_err(|e| e.to_string())?;
        let d = semi_decide_cover(&*k, &*fix.complement, 1 << 14).map_err(|e| e.to_string())?;
        check(d.is_accepted(), || format!("[{w:?}] not covered by the complement of Fix"))?;
    }
    let od = EdsSpec::builtin("odometer", &Value::Null).map_err(|e| e.to_string())?;
    let fix = fixed_point_set(od.action.map(0).map_err(|e| e.to_string())?.clone(), od.carrier.clone())
        .map_err(|e| e.to_string())?;
    let d = semi_decide_empty(&fix, &*whole(cantor), 1 << 14).map_err(|e| e.to_string())?;
    check(d.is_accepted(), || "odometer fixed set not certified empty".into())
}

/// Position in ℤ² of a word over a/A/b/B.
fn z2_pos(w: &[u32]) -> (i64, i64) {
    w.iter().fold((0, 0), |(x, y), &s| match s {
        0 => (x + 1, y),
        1 => (x - 1, y),
        2 => (x, y + 1),
        _ => (x, y - 1),
    })
}

fn z2_cmax() -> Outcome {
    let z2 = Group::builtin("Z2").map_err(|e| e.to_string())?;
    let x = SubshiftSpec::full(z2.clone(), binary());
    let ball = z2.gens.ball(2);
    let cands = window_codings(&ball, 2, 2);
    let got = cmax_enumerate_in(&x, &*whole(x.space()), &cands, 1 << 10).map_err(|e| e.to_string())?;
    let realizable = |c: &PatternCoding| {
        let pos: Vec<(i64, i64)> = c.entries.iter().map(|(w, _)| z2_pos(w)).collect();
        let (x0, y0) = (pos.iter().map(|p| p.0).min().unwrap_or(0), pos.iter().map(|p| p.1).min().unwrap_or(0));
        let mut boxv: BTreeMap<(i64, i64), u32> = BTreeMap::new();
        for ((w, s), p) in c.entries.iter().zip(&pos) {
            let _ = w;
            let key = (p.0 - x0, p.1 - y0);
            if key.0 > 4 || key.1 > 4 {
                return true;
            }
            if let Some(&t) = boxv.get(&key) {
                if t != *s {
                    return false;
                }
            }
            boxv.insert(key, *s);
        }
        true
    };
    for c in &got {
        check(!realizable(c), || format!("emitted a realizable coding {:?}", c.entries))?;
    }
    let got_set: BTreeSet<&PatternCoding> = got.iter().collect();
    let mut expected = 0;
    for c in &cands {
        if c.entries.len() == 2 && z2_pos(&c.entries[0].0) == z2_pos(&c.entries[1].0) && c.entries[0].1 != c.entries[1].1 {
            expected += 1;
            check(got_set.contains(c), || format!("missed mismatch coding {:?}", c.entries))?;
        }
    }
    check(expected > 0 && got.len() == expected, || format!("emitted {} codings, {expected} mismatches", got.len()))
}

fn odometer_tower() -> Outcome {
    let e = EdsSpec::builtin("odometer", &Value::Null).map_err(|e| e.to_string())?;
    let t = build_extension(&e, 2, Window::Forward(1), 1 << 12).map_err(|e| e.to_string())?;
    check(t.levels.len() <= 3, || format!("{} levels", t.levels.len()))?;
    check(t.nesting_holds(), || "recorded inclusions break a chain".into())?;
    let space = e.space().clone();
    for (k, l) in t.levels.iter().enumerate() {
        let incl = l.cover.inclusions.as_ref().ok_or("no inclusion table")?;
        let parents = if k == 0 { &t.base } else { &t.levels[k - 1].cover };
        for (i, ps) in incl.iter().enumerate() {
            for (j, pp) in parents.pieces.iter().enumerate() {
                let direct = inclusion_holds(&space, &l.cover.pieces[i], pp);
                check(ps.contains(&j) == direct, || format!("level {k}: table entry ({i},{j}) disagrees"))?;
            }
        }
    }
    let words = e.group.gens.ball(2);
    let zero = Point::Seq(SeqPoint::new(vec![], 0));
    let z = t.orbit_coding(&zero, &words).map_err(|e| e.to_string())?;
    for n in 0..=3 {
        let b = t.factor_eval(&z, n).map_err(|e| e.to_string())?;
        let (_, hi) = space.dist_bounds(&b.center, &zero, 64);
        check(hi <= b.radius, || format!("precision {n}: ball misses 0^∞"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let w: Vec<u32> = (0..8).map(|_| rng.gen_range(0..2)).collect();
        let x = Point::Seq(SeqPoint::new(w, rng.gen_range(0..2)));
        let z = t.orbit_coding(&x, &words).map_err(|e| e.to_string())?;
        for s in 0..2 {
            for n in 0..=2 {
                let ok = t.equivariance_holds(&z, s, n, 1).map_err(|e| e.to_string())?;
                check(ok, || format!("equivariance fails at {x}, letter {s}, precision {n}"))?;
            }
        }
    }
    Ok(())
}

fn harmonic() -> Outcome {
    let h = AlgebraicPresentation::harmonic();
    let g = h.gens().clone();
    let window: Vec<Word> = ["", "a", "b", "ab"].iter().map(|w| g.parse(w).expect("word")).collect();
    let pos: Vec<(i64, i64)> = window.iter().map(|w| z2_pos(w)).collect();
    let fuel: Fuel = 1 << 10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut excluded = 0;
    for _ in 0..400 {
        let p = rng.gen_range(1..=4u32);
        let m = 1i64 << p;
        let vals: Vec<Q> = (0..window.len()).map(|_| q(rng.gen_range(0..m), m)).collect();
        let x = TorusPointPrefix::new(window.iter().map(|w| (0, w.clone())).zip(vals.iter().cloned()), p);
        let cell = x.to_cell(&h);
        if !box_excluded(&h, &cell, fuel) {
            continue;
        }
        excluded += 1;
        let half = pow2(-(p as i64) - 1);
        for qd in 1..=24i64 {
            let opts: Vec<Vec<i64>> = vals
                .iter()
                .map(|v| (0..qd).filter(|&k| frac(&(q(k, qd) - v + &half)) <= &half + &half).collect())
                .collect();
            if opts.iter().any(Vec::is_empty) {
                continue;
            }
            // grid solutions: harmonic at ε, coordinates of one group element equal
            for &e0 in &opts[0] {
                for &ea in &opts[1] {
                    for &eb in &opts[2] {
                        if (e0 + ea + eb) % qd != 0 {
                            continue;
                        }
                        for &eab in &opts[3] {
                            let vals = [e0, ea, eb, eab];
                            let consistent = (0..4).all(|i| (0..4).all(|j| pos[i] != pos[j] || vals[i] == vals[j]));
                            check(!consistent, || format!("excluded box {x:?} holds a solution on the 1/{qd} grid"))?;
                        }
                    }
                }
            }
        }
    }
    check(excluded > 0, || "no box was excluded".into())?;
    for p in 0..=6 {
        let third = TorusPointPrefix::constant(&window, q(1, 3), p);
        check(!box_excluded(&h, &third.to_cell(&h), 1 << 16), || format!("1/3 box excluded at precision {p}"))?;
    }
    let half = TorusPointPrefix::constant(&window, q(1, 2), 2);
    check(box_excluded(&h, &half.to_cell(&h), fuel), || "1/2 box not excluded at precision 2".into())
}

fn periods() -> Outcome {
    let e = EdsSpec::builtin("odometer", &Value::Null).map_err(|e| e.to_string())?;
    let got: BTreeSet<i64> = periods_complement(&e, -4..=4, 1 << 16)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|c| c.n)
        .collect();
    let want: BTreeSet<i64> = [-4, -3, -2, -1, 1, 2, 3, 4].into_iter().collect();
    check(got == want, || format!("odometer emitted {got:?}"))?;
    for mask in 0u32..32 {
        let a: BTreeSet<u64> = (1..=5).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        let c = circle_system(&a).map_err(|e| e.to_string())?;
        for cert in periods_complement(&c, 1..=5, 1 << 8).map_err(|e| e.to_string())? {
            // the origin is fixed; circle 1/k has points of every period that k divides
            check(false, || format!("A = {a:?}: emitted {} although 0 is periodic", cert.n))?;
        }
    }
    Ok(())
}

fn weds() -> Outcome {
    for name in ["odometer", "shift", "golden_mean", "identity", "lamplighter"] {
        let e = EdsSpec::builtin(name, &Value::Null).map_err(|e| e.to_string())?;
        let tables = (1..=3)
            .map(|d| weds_check(&e, d, Window::Forward(1), 1 << 10))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        for d in 0..2 {
            check(weds_refines(&tables[d], &tables[d + 1]), || format!("{name}: depth {} does not refine", d + 1))?;
        }
    }
    Ok(())
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome, u64)> = vec![
        ("odometer forbidden patterns", odometer_forbid, 1),
        ("rotation realizability tables", rotations, 10),
        ("golden-mean Brouwer encoding", golden_mean_encoding, 1),
        ("kernel soundness", kernel_soundness, 30),
        ("fixed-point sets", fixed_points, 5),
        ("Z2 maximal inconsistent codings", z2_cmax, 30),
        ("odometer extension tower", odometer_tower, 30),
        ("harmonic model exclusions", harmonic, 30),
        ("period complements", periods, 60),
        ("WEDS refinement", weds, 10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, secs)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let took = start.elapsed();
        let r = r.and_then(|_| {
            check(took <= Duration::from_secs(secs), || format!("took {:.2}s, budget {secs}s", took.as_secs_f64()))
        });
        match &r {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(m) => {
                println!("criterion {:>2} FAIL  {name} ({:.2}s): {m}", i + 1, took.as_secs_f64());
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
