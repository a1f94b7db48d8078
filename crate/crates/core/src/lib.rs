//! Numerical toolkit for a non-entangling, measurement-and-feedback model of a
//! two-body potential ("strongly incoherent gravity").
//!
//! Units are natural (`hbar = c = k_B = 1`) everywhere except in [`bounds`],
//! which owns the conversion to SI.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod evolve;
pub mod interferometry;
pub mod linalg;
pub mod observables;
pub mod povm;
pub mod state;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/interferometry.md")]
    mod interferometry {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
