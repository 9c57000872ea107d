use std::io;

use thiserror::Error;

use crate::symbol::{RuleId, Symbol};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty token")]
    EmptyToken,

    #[error("sequence {index} is empty")]
    EmptySequence { index: usize },

    #[error("no training sequences")]
    EmptyTrainingSet,

    #[error("unknown rule {0}")]
    UnknownRule(RuleId),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid automaton: {0}")]
    Automaton(String),

    #[error("unsupported model format version {found:?}")]
    VersionMismatch { found: String },

    #[error("model file truncated: expected {expected}")]
    Truncated { expected: &'static str },

    #[error("model line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("model declares {declared} {what} but holds {actual}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        actual: usize,
    },

    #[error("rule {rule} references missing {target}")]
    DanglingReference { rule: RuleId, target: Symbol },

    #[error("grammar invariant violated: {0}")]
    Invariant(#[from] InvariantViolation),

    #[error("recorded {field} is {recorded}, recomputed {computed}")]
    Integrity {
        field: &'static str,
        recorded: u64,
        computed: u64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors that mean a model file is corrupt or inconsistent, as
    /// opposed to bad input data or I/O trouble.
    pub fn is_integrity(&self) -> bool {
        matches!(
            self,
            Error::VersionMismatch { .. }
                | Error::Truncated { .. }
                | Error::Format { .. }
                | Error::CountMismatch { .. }
                | Error::DanglingReference { .. }
                | Error::Invariant(_)
                | Error::Integrity { .. }
                | Error::UnknownRule(_)
        )
    }
}

/// A broken structural guarantee of a finalized or in-progress grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("rule {rule} is part of a cycle")]
    Cycle { rule: RuleId },

    #[error("rule {rule} references missing {target}")]
    Dangling { rule: RuleId, target: Symbol },

    #[error("internal rule {rule} is used {uses} time(s)")]
    Underused { rule: RuleId, uses: u32 },

    #[error("rule {rule} has {len} right-side symbol(s)")]
    ShortRule { rule: RuleId, len: usize },

    #[error("rule {rule} is not reachable from the start rule")]
    Unreachable { rule: RuleId },

    #[error("digram ({first}, {second}) occurs {count} times")]
    RepeatedDigram {
        first: Symbol,
        second: Symbol,
        count: usize,
    },

    #[error("rules {first} and {second} expand to the same string")]
    DuplicateExpansion { first: RuleId, second: RuleId },

    #[error("start rule is malformed: {0}")]
    Start(String),

    #[error("index out of sync: {0}")]
    IndexDrift(String),
}
