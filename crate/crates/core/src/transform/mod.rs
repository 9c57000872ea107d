//! The greedy grammar transform and the training wrapper around it.

mod prefix;
mod reduce;

pub use prefix::PrefixIndex;

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::interner::Interner;
use crate::model::Model;
use crate::symbol::{RuleId, RuleKind, Symbol, TerminalId};

/// A rule whose full expansion is a prefix of the remaining input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    pub rule: RuleId,
    /// Length of the rule's expansion, i.e. input entries consumed.
    pub consumed: usize,
}

/// Finds the rule with the longest expansion that is a prefix of
/// `input[pos..]`. The rule being transformed is never a candidate.
pub fn greedy_match(input: &[TerminalId], pos: usize, g: &Grammar) -> Option<MatchResult> {
    g.prefix
        .longest_match(&input[pos..])
        .map(|(rule, consumed)| MatchResult { rule, consumed })
}

impl Grammar {
    /// Transforms `x` into a new sequence rule whose expansion is `x`.
    ///
    /// The new rule stays active (in reduction scope, invisible to matching)
    /// until the caller retires it.
    pub fn seq_transform(&mut self, x: &[TerminalId]) -> Result<RuleId> {
        if x.is_empty() {
            return Err(Error::EmptySequence { index: 0 });
        }
        let rule = self.new_rule(RuleKind::Sequence);
        self.set_active(Some(rule));
        let mut pos = 0;
        while pos < x.len() {
            let (sym, step) = match greedy_match(x, pos, self) {
                Some(m) => (Symbol::Rule(m.rule), m.consumed),
                None => (Symbol::Terminal(x[pos]), 1),
            };
            self.append_symbol(rule, sym);
            pos += step;
            self.apply_reductions();
        }
        Ok(rule)
    }

    /// Either discards the active rule, when its body collapsed to one
    /// symbol, or admits it into the grammar and the start rule.
    fn retire_active(&mut self, x: &[TerminalId]) -> SequenceOutcome {
        let rule = self.active.expect("active rule");
        let guard = self.guard_of(rule);
        let only = self.node(guard).next;
        let outcome = if self.node(only).next == guard {
            let sym = self.node(only).sym;
            // The surviving symbol now stands for a whole training sequence,
            // so it must not be inlined away later.
            if let Symbol::Rule(v) = sym {
                if self.kind(v) == Some(RuleKind::Internal) {
                    self.set_kind(v, RuleKind::Sequence);
                }
            }
            self.remove_node(only);
            self.delete_rule(rule);
            SequenceOutcome::Dropped(sym)
        } else {
            let clash = self.prefix.insert(x, rule);
            debug_assert!(clash.is_none(), "sequence {rule} duplicates {clash:?}");
            self.push_start(rule);
            SequenceOutcome::Retained(rule)
        };
        self.set_active(None);
        outcome
    }
}

/// What became of one training sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceOutcome {
    /// Kept as a sequence rule listed by the start rule.
    Retained(RuleId),
    /// Reduced to this single existing symbol and dropped as redundant.
    Dropped(Symbol),
}

/// Incremental training over a stream of sequences.
#[derive(Debug, Default)]
pub struct Trainer {
    grammar: Grammar,
    interner: Interner,
    outcomes: Vec<SequenceOutcome>,
    entries: u64,
    singletons: Vec<usize>,
}

impl Trainer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<SequenceOutcome> {
        let index = self.outcomes.len();
        if tokens.is_empty() {
            return Err(Error::EmptySequence { index });
        }
        if tokens.iter().any(|t| t.as_ref().is_empty()) {
            return Err(Error::EmptyToken);
        }
        let ids = tokens
            .iter()
            .map(|t| self.interner.intern(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.grammar.seq_transform(&ids)?;
        let outcome = self.grammar.retire_active(&ids);
        if ids.len() == 1 {
            self.singletons.push(index);
        }
        self.entries += ids.len() as u64;
        self.outcomes.push(outcome);
        Ok(outcome)
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn interner(&self) -> &Interner {
        &self.interner
    }

    /// Outcome per pushed sequence, in push order.
    pub fn outcomes(&self) -> &[SequenceOutcome] {
        &self.outcomes
    }

    /// Indexes of length-1 training sequences. They are always dropped.
    pub fn singleton_sequences(&self) -> &[usize] {
        &self.singletons
    }

    pub fn entries(&self) -> u64 {
        self.entries
    }

    pub fn finish(self) -> Result<Model> {
        if self.outcomes.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        Model::from_trained(
            &self.grammar,
            self.interner,
            self.outcomes.len() as u64,
            self.entries,
        )
    }
}

/// Trains a model on `sequences`, in order.
pub fn train<T, S>(sequences: &[T]) -> Result<Model>
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut trainer = Trainer::new();
    for seq in sequences {
        trainer.push(seq.as_ref())?;
    }
    trainer.finish()
}
