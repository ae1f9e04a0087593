//! Lieb-Robinson speeds from the cycles of an interaction-type graph.
//!
//! [`model`] reads and validates a transition table, [`cycles`] enumerates
//! its elementary cycles, and [`solver`] minimizes the envelope of their
//! curves. [`regions`] sweeps two couplings and labels each point by the
//! formula that gives the speed. [`chains`] counts operator chains exactly
//! on explicit lattices and [`dynamics`] evolves short spin chains to
//! measure their light cone.

pub mod chains;
pub mod cli;
pub mod cycles;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod regions;
pub mod solver;

pub use error::{Error, Result};
pub use model::{validate, Model, ModelSpec};
pub use solver::{solve_speed, SpeedForm, SpeedResult};

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    pub mod models {}
    #[doc = include_str!("../../../book/src/speed.md")]
    pub mod speed {}
    #[doc = include_str!("../../../book/src/regions.md")]
    pub mod regions {}
    #[doc = include_str!("../../../book/src/chains.md")]
    pub mod chains {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
