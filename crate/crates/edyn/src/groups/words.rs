//! Generator alphabets, free reduction and shortlex orders on words.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::{Error, Result};

pub type Word = Vec<u32>;

/// A finite symmetric generating set; letters are ordered generator-then-inverse (a < A < b < B).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenAlphabet {
    names: Vec<char>,
    inv: Vec<u32>,
    /// Index of the positive generator each letter belongs to.
    gen_of: Vec<usize>,
    positive: Vec<bool>,
}

impl GenAlphabet {
    /// Each pair is (generator, inverse); a pair (x, x) declares a self-inverse generator.
    pub fn from_pairs(pairs: &[(char, char)]) -> Result<Self> {
        let mut names = Vec::new();
        let mut inv = Vec::new();
        let mut gen_of = Vec::new();
        let mut positive = Vec::new();
        for (g, (a, b)) in pairs.iter().enumerate() {
            let i = names.len() as u32;
            if a == b {
                names.push(*a);
                inv.push(i);
                gen_of.push(g);
                positive.push(true);
            } else {
                names.push(*a);
                names.push(*b);
                inv.push(i + 1);
                inv.push(i);
                gen_of.extend([g, g]);
                positive.extend([true, false]);
            }
        }
        let mut seen = names.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != names.len() {
            return Err(Error::Invalid("generator letters must be distinct".into()));
        }
        Ok(GenAlphabet { names, inv, gen_of, positive })
    }

    /// Generators a, b, … with upper-case inverses.
    pub fn standard(n: usize) -> Self {
        let pairs: Vec<(char, char)> =
            (0..n).map(|i| (char::from(b'a' + i as u8), char::from(b'A' + i as u8))).collect();
        GenAlphabet::from_pairs(&pairs).expect("distinct letters")
    }

    pub fn letters(&self) -> usize {
        self.names.len()
    }

    pub fn generators(&self) -> usize {
        self.gen_of.last().map_or(0, |g| g + 1)
    }

    pub fn name(&self, s: u32) -> char {
        self.names[s as usize]
    }

    pub fn letter(&self, c: char) -> Option<u32> {
        self.names.iter().position(|&x| x == c).map(|i| i as u32)
    }

    pub fn inv(&self, s: u32) -> u32 {
        self.inv[s as usize]
    }

    pub fn gen_of(&self, s: u32) -> usize {
        self.gen_of[s as usize]
    }

    pub fn is_positive(&self, s: u32) -> bool {
        self.positive[s as usize]
    }

    /// Positive letters, in order.
    pub fn positive_letters(&self) -> Vec<u32> {
        (0..self.letters() as u32).filter(|&s| self.positive[s as usize]).collect()
    }

    pub fn parse(&self, s: &str) -> Result<Word> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| self.letter(c).ok_or_else(|| Error::UnknownLetter(c.to_string())))
            .collect()
    }

    pub fn format(&self, w: &[u32]) -> String {
        w.iter().map(|&s| self.name(s)).collect()
    }

    pub fn inverse(&self, w: &[u32]) -> Word {
        w.iter().rev().map(|&s| self.inv(s)).collect()
    }

    /// Freely reduced normal form.
    pub fn reduce(&self, w: &[u32]) -> Word {
        let mut out: Word = Vec::with_capacity(w.len());
        for &s in w {
            if out.last() == Some(&self.inv(s)) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        out
    }

    pub fn is_reduced(&self, w: &[u32]) -> bool {
        w.windows(2).all(|p| p[1] != self.inv(p[0]))
    }

    /// Reduced form of u·v.
    pub fn mul(&self, u: &[u32], v: &[u32]) -> Word {
        let mut w = u.to_vec();
        w.extend_from_slice(v);
        self.reduce(&w)
    }

    /// Number of reduced words of length `len`.
    pub fn reduced_count(&self, len: usize) -> u128 {
        let k = self.letters() as u128;
        if len == 0 {
            1
        } else {
            k * (k - 1).pow(len as u32 - 1)
        }
    }

    /// Shortlex rank among reduced words.
    pub fn reduced_rank(&self, w: &[u32]) -> u64 {
        debug_assert!(self.is_reduced(w));
        let mut r: u128 = (0..w.len()).map(|l| self.reduced_count(l)).sum();
        let k = self.letters() as u128;
        let mut prev: Option<u32> = None;
        for (i, &s) in w.iter().enumerate() {
            let rest = (k - 1).pow((w.len() - i - 1) as u32);
            let smaller = (0..s).filter(|&t| prev.map_or(true, |p| t != self.inv(p))).count() as u128;
            r += smaller * rest;
            prev = Some(s);
        }
        r as u64
    }

    pub fn reduced_unrank(&self, mut r: u64) -> Word {
        let mut len = 0usize;
        loop {
            let c = self.reduced_count(len);
            if (r as u128) < c {
                break;
            }
            r -= c as u64;
            len += 1;
        }
        let k = self.letters() as u128;
        let mut w = Vec::with_capacity(len);
        let mut r = r as u128;
        for i in 0..len {
            let rest = (k - 1).pow((len - i - 1) as u32);
            let choices: Vec<u32> =
                (0..k as u32).filter(|&t| w.last().map_or(true, |&p| t != self.inv(p))).collect();
            let idx = (r / rest) as usize;
            w.push(choices[idx]);
            r %= rest;
        }
        w
    }

    /// Shortlex rank among all words.
    pub fn word_rank(&self, w: &[u32]) -> u64 {
        crate::kernel::space::shortlex_rank(w, self.letters() as u32).to_u64().unwrap_or(u64::MAX)
    }

    pub fn word_unrank(&self, r: u64) -> Word {
        crate::kernel::space::shortlex_unrank(&BigUint::from(r), self.letters() as u32)
    }

    /// Reduced words of length ≤ r, in shortlex order.
    pub fn ball(&self, r: usize) -> Vec<Word> {
        let n: u128 = (0..=r).map(|l| self.reduced_count(l)).sum();
        (0..n as u64).map(|i| self.reduced_unrank(i)).collect()
    }

    /// Words over positive letters of length ≤ r, in shortlex order.
    pub fn forward_ball(&self, r: usize) -> Vec<Word> {
        let pos = self.positive_letters();
        let mut out = vec![vec![]];
        let mut level: Vec<Word> = vec![vec![]];
        for _ in 0..r {
            let mut next = Vec::new();
            for w in &level {
                for &s in &pos {
                    let mut x = w.clone();
                    x.push(s);
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_examples() {
        let g = GenAlphabet::standard(2);
        assert_eq!(g.format(&g.reduce(&g.parse("aAb").unwrap())), "b");
        assert_eq!(g.format(&g.reduce(&g.parse("abBA").unwrap())), "");
        assert_eq!(g.format(&g.reduce(&g.parse("abAB").unwrap())), "abAB");
        assert!(matches!(g.parse("ax"), Err(Error::UnknownLetter(_))));
    }

    #[test]
    fn reduced_ranks_round_trip() {
        let g = GenAlphabet::standard(2);
        let ball = g.ball(3);
        assert_eq!(ball.len(), 1 + 4 + 12 + 36);
        for (i, w) in ball.iter().enumerate() {
            assert!(g.is_reduced(w));
            assert_eq!(g.reduced_rank(w), i as u64);
        }
        assert_eq!(g.format(&ball[1]), "a");
        assert_eq!(g.format(&ball[2]), "A");
    }
}
