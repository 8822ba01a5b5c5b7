//! The tower Z_0 ← Z_1 ← … of subshift covers whose inverse limit is a zero-dimensional
//! extension, and the expansive case.

use std::sync::Arc;


use super::{inverse_limit, EdsSpec, InverseLimit};
use crate::covers::{piece_diam, subshift_cover_forbidden, CoverChain, CoverPattern, EffectiveCover, Window};
use crate::groups::{subshift_pullback, GenAlphabet, PatternCoding, SubshiftKind, SubshiftSpec, Word};
use crate::kernel::{
    closed_to_compact, semi_decide_empty_in, whole, Ball, Cell, Cyl, EffClosedSet, FnMap, Fuel,
    MapRef, Point, SeqPoint, Space,
};
use crate::{Error, Result};

/// Cover-forbidden patterns as codings in the orbit convention y(g) = label of g⁻¹x.
pub fn cover_codings(gens: &GenAlphabet, pats: &[CoverPattern]) -> Vec<PatternCoding> {
    pats.iter()
        .map(|p| {
            PatternCoding::new(p.support.iter().zip(&p.labels).map(|(w, &l)| (gens.inverse(w), l as u32)).collect())
        })
        .collect()
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

#[derive(Clone, Debug)]
pub struct TowerLevel {
    /// 𝒫^{n+1} of the refining chain; 𝒫^0 is the one-piece base.
    pub cover: EffectiveCover,
    /// Patterns p on the window with D(p) certified empty.
    pub forbidden: Vec<CoverPattern>,
    /// Y_n over the free group: cover codings interleaved with consistency patterns.
    pub y: SubshiftSpec,
    /// B_n: label chains (e_0, …, e_n) with each piece inside the previous one.
    pub chains: Vec<Vec<usize>>,
    /// Z_n over the free group, alphabet indexed like `chains`.
    pub z: SubshiftSpec,
}

#[derive(Clone, Debug)]
pub struct ExtensionTower {
    pub eds: EdsSpec,
    pub base: EffectiveCover,
    pub levels: Vec<TowerLevel>,
    pub window: Window,
    pub fuel: Fuel,
}

fn chain_name(c: &[usize]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
}

/// Z_0 … Z_levels from the refining chain, patterns on `window`, searches at `fuel`.
pub fn build_extension(e: &EdsSpec, levels: usize, window: Window, fuel: Fuel) -> Result<ExtensionTower> {
    let zero_dim = matches!(e.space(), Space::Cantor { .. });
    let chain = CoverChain::new(e.carrier.clone(), zero_dim, fuel);
    let base = chain.level(0)?;
    let gens = &e.group.gens;
    let mut out: Vec<TowerLevel> = Vec::new();
    for n in 0..=levels {
        let cover = chain.level(n + 1)?;
        let forbidden = subshift_cover_forbidden(&e.action, &cover, window, fuel)?;
        let gamma_y = SubshiftSpec::sft(
            &format!("Y{n}"),
            labels(cover.len()),
            e.group.clone(),
            cover_codings(gens, &forbidden),
        );
        let y = subshift_pullback(&SubshiftSpec { kind: SubshiftKind::Effective, ..gamma_y });
        let chains: Vec<Vec<usize>> = match out.last() {
            None => (0..cover.len()).map(|i| vec![i]).collect(),
            Some(prev) => {
                let incl = cover.inclusions.as_ref().expect("chain levels record inclusions");
                let mut v = Vec::new();
                for c in &prev.chains {
                    for (i, parents) in incl.iter().enumerate() {
                        if parents.contains(c.last().expect("nonempty chain")) {
                            let mut d = c.clone();
                            d.push(i);
                            v.push(d);
                        }
                    }
                }
                v
            }
        };
        let mut zc: Vec<PatternCoding> = Vec::new();
        for k in 0..=n {
            let pats = if k == n { &forbidden } else { &out[k].forbidden };
            for p in cover_codings(gens, pats) {
                lift_into(&mut zc, &p, &chains, k);
            }
        }
        let gamma_z = SubshiftSpec::sft(
            &format!("Z{n}"),
            chains.iter().map(|c| chain_name(c)).collect(),
            e.group.clone(),
            zc,
        );
        let z = subshift_pullback(&SubshiftSpec { kind: SubshiftKind::Effective, ..gamma_z });
        out.push(TowerLevel { cover, forbidden, y, chains, z });
    }
    Ok(ExtensionTower { eds: e.clone(), base, levels: out, window, fuel })
}

/// Every chain-labeled coding whose k-th coordinates spell `p`.
fn lift_into(out: &mut Vec<PatternCoding>, p: &PatternCoding, chains: &[Vec<usize>], k: usize) {
    let opts: Vec<Vec<u32>> = p
        .entries
        .iter()
        .map(|(_, l)| (0..chains.len() as u32).filter(|&i| chains[i as usize][k] == *l as usize).collect())
        .collect();
    if opts.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; opts.len()];
    loop {
        out.push(PatternCoding::new(
            p.entries.iter().zip(&idx).zip(&opts).map(|(((w, _), &i), o)| (w.clone(), o[i])).collect(),
        ));
        let mut j = idx.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < opts[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

impl ExtensionTower {
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Level-(n+1) chains truncate to level-n chains.
    pub fn project_chain(&self, n: usize, symbol: usize) -> usize {
        let c = &self.levels[n + 1].chains[symbol];
        self.levels[n].chains.iter().position(|d| d[..] == c[..=n]).expect("chains are closed under truncation")
    }

    /// Symbol-wise projection A^{F(S)} for B_{n+1} → B_n.
    pub fn projection(&self, n: usize) -> MapRef {
        let table: Vec<u32> = (0..self.levels[n + 1].chains.len()).map(|i| self.project_chain(n, i) as u32).collect();
        let src = Space::cantor(table.len() as u32);
        let tgt = Space::cantor(self.levels[n].chains.len() as u32);
        let t1 = table.clone();
        Arc::new(FnMap {
            source: src,
            target: tgt,
            cell: Box::new(move |c, _| match c {
                Cell::Cyl(y) => Cell::Cyl(Cyl {
                    prefix: y.prefix.iter().map(|&s| t1[s as usize]).collect(),
                    extra: y.extra.iter().map(|(k, &s)| (*k, t1[s as usize])).collect(),
                }),
                other => panic!("projection applied to {other:?}"),
            }),
            point: Some(Box::new(move |p| match p {
                Point::Seq(s) => Some(Point::Seq(SeqPoint::new(
                    s.prefix.iter().map(|&x| table[x as usize]).collect(),
                    table[s.tail as usize],
                ))),
                _ => None,
            })),
        })
    }

    /// Z = lim← Z_n inside ∏ A_n^{F(S)}.
    pub fn limit(&self) -> Result<InverseLimit> {
        let ks = self
            .levels
            .iter()
            .map(|l| closed_to_compact(&l.z.pullback_set(), whole(l.z.space())))
            .collect::<Result<Vec<_>>>()?;
        let ps = (0..self.top()).map(|n| self.projection(n)).collect();
        inverse_limit(ks, ps)
    }

    /// Whether every chain is nested per the recorded inclusion tables.
    pub fn nesting_holds(&self) -> bool {
        self.levels.iter().all(|l| {
            l.chains.iter().all(|c| {
                c.windows(2).enumerate().all(|(k, w)| {
                    self.levels[k + 1].cover.inclusions.as_ref().is_some_and(|t| t[w[1]].contains(&w[0]))
                })
            })
        })
    }

    /// A ball of radius ≤ 2^-n around the level-n piece named by z(ε), z labeled by top-level chains.
    pub fn factor_eval(&self, z: &PatternCoding, n: usize) -> Result<Ball> {
        let gens = &self.eds.group.gens;
        let root = z
            .entries
            .iter()
            .find(|(w, _)| gens.reduce(w).is_empty())
            .ok_or_else(|| Error::Invalid("the coding does not label the identity".into()))?;
        let chain = self.levels[self.top()]
            .chains
            .get(root.1 as usize)
            .ok_or_else(|| Error::Invalid(format!("symbol {} is not a top-level chain", root.1)))?;
        let space = self.eds.space();
        let (piece, p) = if n == 0 {
            let parent = self.levels[0].cover.inclusions.as_ref().map_or(0, |t| t[chain[0]][0]);
            (&self.base.pieces[parent], parent)
        } else {
            if n - 1 > self.top() {
                return Err(Error::NeedsMoreFuel(format!("precision {n} needs {} tower levels", n)));
            }
            (&self.levels[n - 1].cover.pieces[chain[n - 1]], chain[n - 1])
        };
        let b = piece.parts[0].first().ok_or_else(|| Error::Invalid(format!("piece {p} has no ball")))?;
        let d = piece_diam(space, piece);
        let r = if b.radius < d { b.radius.clone() } else { d };
        Ok(Ball { center: b.center.clone(), radius: r })
    }

    /// Top-level chain of the first piece certified to contain x, completed by first parents.
    pub fn chain_of(&self, x: &Point) -> Option<usize> {
        let space = self.eds.space();
        let top = &self.levels[self.top()];
        let inside = |b: &Ball| space.dist_bounds(&b.center, x, 64).1 <= b.radius;
        let e = top.cover.pieces.iter().position(|p| p.parts[0].iter().any(inside))?;
        let mut chain = vec![e];
        for k in (1..=self.top()).rev() {
            let par = self.levels[k].cover.parent.as_ref()?[*chain.last()?];
            chain.push(par);
        }
        chain.reverse();
        top.chains.iter().position(|c| *c == chain)
    }

    /// The coding z(g) = chain of g⁻¹x on the given words.
    pub fn orbit_coding(&self, x: &Point, words: &[Word]) -> Result<PatternCoding> {
        let gens = &self.eds.group.gens;
        let mut entries = Vec::new();
        for w in words {
            let y = self
                .eds
                .action
                .eval(&gens.inverse(w), x)
                .ok_or_else(|| Error::Invalid(format!("cannot evaluate {} on the point", gens.format(w))))?;
            let c = self.chain_of(&y).ok_or_else(|| Error::NeedsMoreFuel("no piece certified to contain the point".into()))?;
            entries.push((w.clone(), c as u32));
        }
        Ok(PatternCoding::new(entries))
    }

    /// The shifted coding s·z, with (s·z)(s w) = z(w).
    pub fn shift_coding(&self, z: &PatternCoding, s: u32) -> PatternCoding {
        let gens = &self.eds.group.gens;
        PatternCoding::new(z.entries.iter().map(|(w, l)| (gens.mul(&[s], w), *l)).collect())
    }

    /// φ(s·z) at precision n meets s applied to φ(z) at precision n + k.
    pub fn equivariance_holds(&self, z: &PatternCoding, s: u32, n: usize, k: usize) -> Result<bool> {
        let space = self.eds.space();
        let a = self.factor_eval(&self.shift_coding(z, s), n)?;
        let b = self.factor_eval(z, n + k)?;
        let img = self.eds.action.image_cell(&[s], &space.closed_ball_cell(&b), self.fuel);
        Ok(!space.cells_disjoint(&img, &space.closed_ball_cell(&a)))
    }
}

/// Y(F(S)↷X, 𝒫) ∩ Â^Γ for a caller-supplied generating cover.
#[derive(Clone, Debug)]
pub struct ExpansiveSubshift {
    pub subshift: SubshiftSpec,
    pub forbidden: Vec<CoverPattern>,
    /// The pieces were certified pairwise disjoint on a zero-dimensional carrier.
    pub conjugacy: bool,
}

pub fn expansive_conjugacy(e: &EdsSpec, cover: &EffectiveCover, window: Window, fuel: Fuel) -> Result<ExpansiveSubshift> {
    let forbidden = subshift_cover_forbidden(&e.action, cover, window, fuel)?;
    let gens = &e.group.gens;
    let gamma = SubshiftSpec::sft("Y", labels(cover.len()), e.group.clone(), cover_codings(gens, &forbidden));
    let subshift = subshift_pullback(&SubshiftSpec { kind: SubshiftKind::Effective, ..gamma });
    let zero_dim = matches!(e.space(), Space::Cantor { .. });
    let conjugacy = zero_dim && (cover.partition || pieces_disjoint(cover, fuel)?);
    Ok(ExpansiveSubshift { subshift, forbidden, conjugacy })
}

fn pieces_disjoint(cover: &EffectiveCover, fuel: Fuel) -> Result<bool> {
    let space = &cover.space;
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            let m = cover.pieces[i].meet(&cover.pieces[j]);
            let set = EffClosedSet::new(Arc::new(crate::covers::PieceComplement { space: space.clone(), piece: m }));
            if !semi_decide_empty_in(&set, &*cover.carrier, &space.root_cell(), fuel)?.is_accepted() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether distinct depth-d cylinders of the carrier get distinct codings on the window.
pub fn coding_separates(e: &EdsSpec, cover: &EffectiveCover, window: Window, depth: usize) -> Option<bool> {
    let space = e.space();
    let words = window.words(&e.group.gens);
    let mut seen: Vec<(Vec<usize>, Cell)> = Vec::new();
    for c in space.cells_at_depth(depth) {
        if e.carrier.misses_cell(&c, 64) {
            continue;
        }
        let x = space.cell_center(&c);
        let mut code = Vec::new();
        for w in &words {
            let y = e.action.eval(w, &x)?;
            let inside = |b: &Ball| space.dist_bounds(&b.center, &y, 64).1 <= b.radius;
            code.push(cover.pieces.iter().position(|p| p.parts[0].iter().any(inside))?);
        }
        if seen.iter().any(|(k, d)| *k == code && *d != c) {
            return Some(false);
        }
        seen.push((code, c));
    }
    Some(true)
}

