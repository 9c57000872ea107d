//! Grammar-based compression for anomaly detection over event sequences.
//!
//! Normal sequences are folded into a single admissible grammar by a greedy
//! grammar transform. A questionable sequence is then scored by how many
//! grammar symbols its incorporation adds (`I`) and by that count per entry
//! (`D`). Sequences that the grammar already explains cost little; novel ones
//! cost close to one symbol per entry.

pub mod error;
pub mod evaluate;
pub mod grammar;
pub mod ingest;
pub mod interner;
pub mod model;
pub mod symbol;
pub mod synth;
pub mod transform;

pub use error::{Error, InvariantViolation, Result};
pub use evaluate::{
    evaluate_sequence, evaluate_set, evaluate_set_parallel, rank, CopyMode, Evaluator, Report,
    Score,
};
pub use grammar::{Grammar, RuleView};
pub use ingest::{InputFormat, LabeledSequence, LineFilter, SequenceSet};
pub use interner::Interner;
pub use model::{Model, ModelMeta, FORMAT_VERSION};
pub use symbol::{RuleId, RuleKind, Symbol, TerminalId};
pub use synth::{synthesize, to_blankline, Automaton, Corpus, SynthConfig};
pub use transform::{greedy_match, train, MatchResult, PrefixIndex, SequenceOutcome, Trainer};
