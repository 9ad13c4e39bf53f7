use thiserror::Error;

use crate::algebra::Symbol;
use crate::transducer::StateId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input word leaves the domain of the transition function")]
    UndefinedPath,
    #[error("symbol {0} is not in the input alphabet")]
    UnknownSymbol(Symbol),
    #[error("state {0} does not exist")]
    UnknownState(StateId),
    #[error("trimming removed the initial state")]
    EmptyMachine,
    #[error("failure transitions form a cycle through state {0}")]
    FailureCycle(StateId),
    #[error("failure transducer is not monotonic ({0} violations)")]
    NotMonotonic(usize),
    #[error("initial output word cannot be walked from the right operand's initial state")]
    InitialUndefined,
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("the empty word is in the domain; cannot normalize for Kleene star")]
    EpsilonInDomain,
    #[error("arc {state} --{symbol}--> emits a word of length {len}")]
    MultiSymbolOutput {
        state: StateId,
        symbol: Symbol,
        len: usize,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("graph has a cycle; plus-times path sums need a DAG")]
    CyclicGraph,
    #[error("edge weight {0} exceeds 1 (negative -log weight)")]
    NegativeLogWeight(f64),
    #[error("state {0} has a non-positive sum")]
    ZeroSumState(StateId),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// Stable kebab-case name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::UndefinedPath => "undefined-path",
            Error::UnknownSymbol(_) => "unknown-symbol",
            Error::UnknownState(_) => "unknown-state",
            Error::EmptyMachine => "empty-machine",
            Error::FailureCycle(_) => "failure-cycle",
            Error::NotMonotonic(_) => "not-monotonic",
            Error::InitialUndefined => "initial-undefined",
            Error::AlphabetMismatch(_) => "alphabet-mismatch",
            Error::EpsilonInDomain => "epsilon-in-domain",
            Error::MultiSymbolOutput { .. } => "multi-symbol-output",
            Error::PreconditionViolation(_) => "precondition-violation",
            Error::CyclicGraph => "cyclic-graph",
            Error::NegativeLogWeight(_) => "negative-log-weight",
            Error::ZeroSumState(_) => "zero-sum-state",
            Error::Syntax { .. } => "syntax-error",
            Error::InvariantViolation(_) => "invariant-violation",
        }
    }
}
