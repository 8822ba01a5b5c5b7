//! Free-group actions given by one computable map per generator letter.

use crate::cantor::BuiltinSystem;
use crate::groups::{GenAlphabet, Word};
use crate::kernel::{Cell, Fuel, MapRef, Point, Space};
use crate::{Error, Result};

/// F(S) ↷ X: letter s acts by `maps[s]`; a missing map means that letter cannot be used.
#[derive(Clone)]
pub struct Action {
    pub space: Space,
    pub gens: GenAlphabet,
    pub maps: Vec<Option<MapRef>>,
}

impl std::fmt::Debug for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = (0..self.gens.letters() as u32)
            .filter(|&s| self.maps[s as usize].is_some())
            .map(|s| self.gens.name(s).to_string())
            .collect();
        write!(f, "Action({} on {})", names.join(","), self.space.name())
    }
}

impl Action {
    /// Letters are paired lower/upper case; a lower-case letter without its upper-case
    /// partner acts without an inverse.
    pub fn new(maps: Vec<(char, MapRef)>) -> Result<Self> {
        let mut pairs: Vec<(char, char)> = Vec::new();
        for (c, _) in &maps {
            let lo = c.to_ascii_lowercase();
            if !pairs.iter().any(|p| p.0 == lo) {
                pairs.push((lo, lo.to_ascii_uppercase()));
            }
        }
        let gens = GenAlphabet::from_pairs(&pairs)?;
        let space = maps.first().map(|m| m.1.source().clone()).ok_or_else(|| Error::Invalid("action without maps".into()))?;
        let mut slots: Vec<Option<MapRef>> = vec![None; gens.letters()];
        for (c, m) in maps {
            if m.source() != &space || m.target() != &space {
                return Err(Error::SpaceMismatch(format!("map {c} is not a self-map of {}", space.name())));
            }
            let s = gens.letter(c).ok_or_else(|| Error::UnknownLetter(c.to_string()))?;
            slots[s as usize] = Some(m);
        }
        Ok(Action { space, gens, maps: slots })
    }

    pub fn from_system(sys: &BuiltinSystem) -> Result<Self> {
        let maps = sys
            .maps
            .iter()
            .map(|(n, m)| {
                let c = n.chars().next().ok_or_else(|| Error::Invalid("empty map name".into()))?;
                Ok((c, m.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Action::new(maps)
    }

    pub fn map(&self, s: u32) -> Result<&MapRef> {
        self.maps
            .get(s as usize)
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::Invalid(format!("letter {} has no map", self.gens.name(s))))
    }

    pub fn has_inverses(&self) -> bool {
        self.maps.iter().all(Option::is_some)
    }

    pub fn check_word(&self, w: &[u32]) -> Result<()> {
        w.iter().try_for_each(|&s| self.map(s).map(|_| ()))
    }

    /// A cell containing w·c, applying the rightmost letter first.
    pub fn image_cell(&self, w: &[u32], c: &Cell, fuel: Fuel) -> Cell {
        let mut cell = c.clone();
        for &s in w.iter().rev() {
            cell = self.map(s).expect("checked word").image_cell(&cell, fuel);
        }
        cell
    }

    pub fn eval(&self, w: &[u32], p: &Point) -> Option<Point> {
        let mut x = p.clone();
        for &s in w.iter().rev() {
            x = self.map(s).ok()?.eval(&x)?;
        }
        Some(x)
    }
}

/// Pattern supports: words over positive letters (`Forward`) or the reduced-word ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Forward(usize),
    Ball(usize),
}

impl Window {
    pub fn words(&self, gens: &GenAlphabet) -> Vec<Word> {
        match self {
            Window::Forward(r) => gens.forward_ball(*r),
            Window::Ball(r) => gens.ball(*r),
        }
    }
}
