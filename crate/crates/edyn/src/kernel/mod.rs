//! Computable metric spaces, the effective set hierarchy, and fuel-bounded semi-decisions.

pub mod cell;
pub mod map;
pub mod rational;
pub mod sets;
pub mod space;
pub mod stream;
pub mod trig;

pub use cell::{Cell, Cyl};
pub use map::*;
pub use rational::Q;
pub use sets::*;
pub use space::{Ball, Point, Product, SeqPoint, Space};
pub use stream::Stream;
