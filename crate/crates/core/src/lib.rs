//! Core library for exploring the diversity of intersecting permutation
//! families: exact enumeration over small symmetric groups, r-spreadness and
//! the spread-approximation decomposition, pseudo-sunflower basis
//! compression, certified (interval/big-integer) inequality checking,
//! seeded Monte Carlo experiments, and small-scale extremal search.

pub mod bounds;
pub mod error;
pub mod family;
pub mod search;
pub mod spread;
pub mod stochastic;
pub mod sunflower;
pub mod textio;

pub use error::{Error, Result};
