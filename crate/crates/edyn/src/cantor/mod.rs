//! Cantor space: monotone word machines, built-in systems, clopen bases and the Brouwer encoding.

mod brouwer;
mod builtins;
mod clopen;
mod machine;

pub use brouwer::*;
pub use builtins::*;
pub use clopen::*;
pub use machine::*;
