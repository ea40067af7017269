//! Analysis of k-uniform set families: d-cluster detection, the link and
//! exchange operators with their counting identities, the cyclic
//! permutation double count, and exact extremal search.

pub mod cli;
pub mod clusters;
pub mod cycle;
pub mod error;
pub mod ground;
pub mod operators;
pub mod random;
pub mod search;

pub use error::{Error, Result};
pub use ground::{binom, Family, KSet, Params};
