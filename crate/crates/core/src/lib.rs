//! Subsequential failure transducers.
//!
//! The crate covers evaluation and expansion of failure transducers, their
//! composition with conditional probabilistic transducers, the Kleene star of
//! a conditional model, a specialized composition that only builds
//! co-accessible states, and weight pushing in the plus-times and max-times
//! semirings. A plain-text format and a command-line front end live in
//! [`text`] and the `phi-fst` binary.

pub mod algebra;
pub mod compose;
pub mod error;
pub mod failure;
pub mod fixtures;
pub mod properties;
pub mod push;
pub mod specialized;
pub mod star;
pub mod text;
pub mod transducer;

pub use algebra::{Alphabet, Monoid, PairOutput, Semiring, Symbol, Weight, Word, END_MARKER};
pub use error::{Error, Result};
pub use failure::{FailureTransducer, MonotonicReport, MonotonicViolation};
pub use transducer::{Automaton, EnumerationEntry, StateId, Transducer};
