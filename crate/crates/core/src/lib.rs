//! Discrete weak KAM theory on flat tori and the vanishing discount limit.
//!
//! Everything lives on a node-to-node hop graph ([`grid::EdgeGraph`]): the
//! critical value and Aubry set ([`weakkam`]), Mather measures as linear
//! programs ([`mather`]), discounted Bellman operators ([`discounted`]) and the
//! limit `u0` with the convergence/divergence classifier ([`limit`]).

pub mod cli;
pub mod discounted;
pub mod error;
pub mod field;
pub mod grid;
pub mod limit;
pub mod lp;
pub mod models;
pub mod mather;
pub mod weakkam;

pub use error::{Error, Result};
