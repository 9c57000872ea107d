//! Scoring questionable sequences against a trained model.
//!
//! A sequence is transformed into a private scratch copy of the model's
//! grammar. Its information quantity `I` is the number of grammar symbols
//! that incorporation adds; its density `D` is `I` per entry.

use std::cmp::Ordering;
use std::thread;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::model::Model;
use crate::symbol::{RuleId, TerminalId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub index: usize,
    /// Entries in the sequence as ingested.
    pub length: usize,
    /// Symbols added to the grammar. Reported raw; zero or below means the
    /// model already explains the sequence completely.
    pub info: i64,
}

impl Score {
    pub fn density(&self) -> f64 {
        self.info as f64 / self.length as f64
    }

    pub fn fully_explained(&self) -> bool {
        self.info <= 0
    }

    /// Exact comparison of densities by cross-multiplication.
    pub fn cmp_density(&self, other: &Score) -> Ordering {
        let lhs = self.info as i128 * other.length as i128;
        let rhs = other.info as i128 * self.length as i128;
        lhs.cmp(&rhs)
    }
}

/// Top sequences by information quantity and by density.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub top_by_info: Vec<Score>,
    pub top_by_density: Vec<Score>,
}

/// How the scratch grammar is separated from the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CopyMode {
    /// One working copy per evaluator, restored from an undo journal after
    /// each sequence. Size is read off a running symbol total.
    #[default]
    Journal,
    /// A fresh full copy of the grammar per sequence, sized by walking the
    /// rules reachable from the start and new sequence rules.
    FullCopy,
}

/// Reusable scoring state bound to one model.
pub struct Evaluator<'m> {
    model: &'m Model,
    mode: CopyMode,
    scratch: Option<Grammar>,
    fresh: FxHashMap<String, TerminalId>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Self {
        Self::with_mode(model, CopyMode::default())
    }

    pub fn with_mode(model: &'m Model, mode: CopyMode) -> Self {
        Self {
            model,
            mode,
            scratch: None,
            fresh: FxHashMap::default(),
        }
    }

    pub fn score<S: AsRef<str>>(&mut self, index: usize, tokens: &[S]) -> Result<Score> {
        self.score_inspect(index, tokens, |_, _| {})
    }

    /// Scores a sequence and hands the scratch grammar, with the new sequence
    /// rule still in place, to `inspect` before it is discarded.
    pub fn score_inspect<S: AsRef<str>>(
        &mut self,
        index: usize,
        tokens: &[S],
        inspect: impl FnOnce(&Grammar, RuleId),
    ) -> Result<Score> {
        if tokens.is_empty() {
            return Err(Error::EmptySequence { index });
        }
        let ids = self.terminal_ids(tokens)?;
        let info_old = self.model.info_old() as i64;
        let info = match self.mode {
            CopyMode::Journal => {
                let model = self.model;
                let scratch = self.scratch.get_or_insert_with(|| model.grammar().clone());
                scratch.begin_journal();
                let result = scratch.seq_transform(&ids);
                let info = result.map(|rule| {
                    inspect(scratch, rule);
                    scratch.total_symbols() as i64 - info_old
                });
                scratch.rollback();
                info?
            }
            CopyMode::FullCopy => {
                let mut scratch = self.model.grammar().clone();
                let rule = scratch.seq_transform(&ids)?;
                inspect(&scratch, rule);
                let start = scratch.start();
                scratch.size(&[start, rule])? as i64 - info_old
            }
        };
        Ok(Score {
            index,
            length: tokens.len(),
            info,
        })
    }

    /// Maps tokens to terminal ids. Tokens the model never saw get ids past
    /// the end of its table, private to this sequence.
    fn terminal_ids<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<Vec<TerminalId>> {
        self.fresh.clear();
        let interner = self.model.interner();
        let base = interner.len() as u32;
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                if t.is_empty() {
                    return Err(Error::EmptyToken);
                }
                if let Some(id) = interner.get(t) {
                    return Ok(id);
                }
                let next = TerminalId(base + self.fresh.len() as u32);
                Ok(*self.fresh.entry(t.to_owned()).or_insert(next))
            })
            .collect()
    }
}

/// Scores one sequence against `model`, leaving the model untouched.
pub fn evaluate_sequence<S: AsRef<str>>(tokens: &[S], model: &Model) -> Result<Score> {
    Evaluator::new(model).score(0, tokens)
}

/// Scores each sequence independently, in input order.
pub fn evaluate_set<T, S>(sequences: &[T], model: &Model) -> Vec<Result<Score>>
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut evaluator = Evaluator::new(model);
    sequences
        .iter()
        .enumerate()
        .map(|(i, seq)| evaluator.score(i, seq.as_ref()))
        .collect()
}

/// Like [`evaluate_set`], spread over `threads` workers. Results come back
/// in input order.
pub fn evaluate_set_parallel<T, S>(
    sequences: &[T],
    model: &Model,
    threads: usize,
) -> Vec<Result<Score>>
where
    T: AsRef<[S]> + Sync,
    S: AsRef<str>,
{
    let threads = threads.max(1).min(sequences.len().max(1));
    if threads == 1 {
        return evaluate_set(sequences, model);
    }
    let chunk = sequences.len().div_ceil(threads);
    thread::scope(|scope| {
        let workers: Vec<_> = sequences
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                scope.spawn(move || {
                    let mut evaluator = Evaluator::new(model);
                    part.iter()
                        .enumerate()
                        .map(|(i, seq)| evaluator.score(c * chunk + i, seq.as_ref()))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("scoring worker panicked"))
            .collect()
    })
}

/// Picks the `m1` largest by `I` and the `m2` largest by `D`. Ties go to the
/// lower sequence index.
pub fn rank(scores: &[Score], m1: usize, m2: usize) -> Report {
    let mut by_info = scores.to_vec();
    by_info.sort_by(|a, b| b.info.cmp(&a.info).then(a.index.cmp(&b.index)));
    by_info.truncate(m1);
    let mut by_density = scores.to_vec();
    by_density.sort_by(|a, b| b.cmp_density(a).then(a.index.cmp(&b.index)));
    by_density.truncate(m2);
    Report {
        top_by_info: by_info,
        top_by_density: by_density,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::train;

    fn digits(s: &str) -> Vec<String> {
        s.chars().map(String::from).collect()
    }

    fn worked_model() -> Model {
        let seqs: Vec<_> = ["1234", "1235", "1234", "1237"]
            .iter()
            .map(|s| digits(s))
            .collect();
        train(&seqs).unwrap()
    }

    fn score(index: usize, length: usize, info: i64) -> Score {
        Score {
            index,
            length,
            info,
        }
    }

    #[test]
    fn novel_digits_cost_one_symbol_each() {
        let model = worked_model();
        let s = evaluate_sequence(&digits("2238"), &model).unwrap();
        assert_eq!((s.info, s.density()), (4, 1.0));
    }

    #[test]
    fn known_prefix_is_cheap() {
        let model = worked_model();
        let s = evaluate_sequence(&digits("1239"), &model).unwrap();
        assert_eq!((s.info, s.density()), (2, 0.5));
    }

    #[test]
    fn trained_sequence_costs_one_symbol() {
        let model = worked_model();
        let s = evaluate_sequence(&digits("1234"), &model).unwrap();
        assert_eq!((s.info, s.density()), (1, 0.25));
    }

    #[test]
    fn set_scores_are_independent() {
        let model = worked_model();
        let seqs = [digits("2238"), digits("1239"), digits("2238")];
        let scores: Vec<_> = evaluate_set(&seqs, &model)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        assert_eq!(
            scores
                .iter()
                .map(|s| (s.info, s.density()))
                .collect::<Vec<_>>(),
            [(4, 1.0), (2, 0.5), (4, 1.0)]
        );
        let empty: [Vec<String>; 0] = [];
        assert!(evaluate_set(&empty, &model).is_empty());
    }

    #[test]
    fn errors_are_per_sequence() {
        let model = worked_model();
        let seqs = [digits("12"), vec![], digits("2238")];
        let results = evaluate_set(&seqs, &model);
        assert!(results[0].is_ok());
        assert!(matches!(results[1], Err(Error::EmptySequence { index: 1 })));
        assert_eq!(results[2].as_ref().unwrap().info, 4);
    }

    #[test]
    fn parallel_matches_sequential() {
        let model = worked_model();
        let seqs: Vec<_> = ["2238", "1239", "1234", "99", "123123", "7"]
            .iter()
            .map(|s| digits(s))
            .collect();
        let seq: Vec<_> = evaluate_set(&seqs, &model)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        let par: Vec<_> = evaluate_set_parallel(&seqs, &model, 4)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        assert_eq!(seq, par);
    }

    #[test]
    fn rank_orders_by_info_then_index() {
        let mut scores: Vec<Score> = (0..5000).map(|i| score(i, 40, (i % 2) as i64)).collect();
        scores[654].info = 41;
        scores[3990].info = 41;
        scores[1172].info = 3;
        let report = rank(&scores, 2, 0);
        let top: Vec<_> = report.top_by_info.iter().map(|s| s.index).collect();
        assert_eq!(top, [654, 3990]);
        assert!(report.top_by_density.is_empty());
    }

    #[test]
    fn rank_with_zero_limits_is_empty() {
        let report = rank(&[score(0, 1, 1)], 0, 0);
        assert_eq!(report, Report::default());
    }

    #[test]
    fn equal_info_ties_break_on_index() {
        let scores: Vec<Score> = [7, 3, 9, 1].iter().map(|&i| score(i, 4, 2)).collect();
        let report = rank(&scores, 3, 3);
        let top: Vec<_> = report.top_by_info.iter().map(|s| s.index).collect();
        assert_eq!(top, [1, 3, 7]);
    }

    #[test]
    fn shorter_sequence_wins_on_density_at_equal_info() {
        let long = score(0, 100, 10);
        let short = score(1, 20, 10);
        let report = rank(&[long, short], 0, 2);
        assert_eq!(report.top_by_density[0].index, 1);
        assert!(short.density() > long.density());
    }
}
