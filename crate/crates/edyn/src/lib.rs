//! Effective dynamical systems on computable metric spaces.
//!
//! Open, closed and compact sets are represented by fuel-bounded semi-decisions over
//! exact rational cells. On top of the kernel sit Cantor-space machines and the Brouwer
//! encoding, word problems and pattern codings, subshift covers, zero-dimensional
//! extensions, algebraic actions and period enumeration.

pub mod algebraic;
pub mod cantor;
pub mod covers;
mod error;
pub mod extension;
pub mod dynprops;
pub mod groups;
pub mod kernel;

pub use error::{Error, Result};
pub use kernel::{Fuel, SemiDecision, Q};
