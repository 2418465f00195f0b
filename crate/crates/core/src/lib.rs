//! Compile–embed–solve–measure toolchain for hard planning problems on a
//! Chimera-topology annealer stand-in.
//!
//! The pipeline: generate hard planning instances at their phase transition
//! ([`gen`]), compile them to quadratic binary optimization problems by one
//! of three mappings ([`mappings`], [`pubo`]), minor-embed the result into a
//! Chimera hardware graph and set the embedded Ising parameters
//! ([`chimera`], [`embedding`]), sample with a simulated annealer and turn
//! ground-state hit rates into expected-total-anneal-time statistics
//! ([`anneal`]), and sweep/summarize whole benchmark sets ([`bench`]).

pub mod anneal;
pub mod bench;
pub mod chimera;
pub mod embedding;
pub mod error;
pub mod gen;
pub mod graph;
pub mod mappings;
pub mod planning;
pub mod pubo;

pub use error::{Error, Result};
