//! Finitely generated groups through words and word-problem oracles; pattern codings and
//! subshifts pulled back to the free group.

mod patterns;
mod words;
mod wp;

pub use patterns::*;
pub use words::*;
pub use wp::*;
