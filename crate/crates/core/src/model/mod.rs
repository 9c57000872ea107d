//! The immutable trained artifact and its on-disk form.

mod format;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::interner::Interner;
use crate::symbol::{RuleId, RuleKind, Symbol};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelMeta {
    pub format_version: u32,
    pub training_sequences: u64,
    pub retained_sequences: u64,
    pub total_entries: u64,
    /// Size of the grammar reachable from the start rule.
    pub info_old: u64,
}

/// A finalized grammar together with the terminal table it was trained on.
///
/// Models are never mutated after construction and can be shared freely
/// between threads scoring against them.
#[derive(Debug, Clone)]
pub struct Model {
    grammar: Grammar,
    interner: Interner,
    meta: ModelMeta,
}

impl Model {
    /// Rebuilds the trained grammar from its rule list so that a freshly
    /// trained model and one loaded from disk share identical internal state.
    pub(crate) fn from_trained(
        grammar: &Grammar,
        interner: Interner,
        training_sequences: u64,
        total_entries: u64,
    ) -> Result<Self> {
        let grammar = Grammar::from_rules(grammar.start(), grammar.to_rules())?;
        let meta = ModelMeta {
            format_version: FORMAT_VERSION,
            training_sequences,
            retained_sequences: grammar.start_rhs().len() as u64,
            total_entries,
            info_old: grammar.size(&[grammar.start()])?,
        };
        Ok(Self {
            grammar,
            interner,
            meta,
        })
    }

    /// Assembles and validates a model from its serialized parts.
    pub(crate) fn from_parts(
        interner: Interner,
        start: RuleId,
        rules: Vec<(RuleId, RuleKind, Vec<Symbol>)>,
        meta: ModelMeta,
    ) -> Result<Self> {
        for (id, _, rhs) in &rules {
            for &sym in rhs {
                if let Symbol::Terminal(t) = sym {
                    if t.index() >= interner.len() {
                        return Err(Error::DanglingReference {
                            rule: *id,
                            target: sym,
                        });
                    }
                }
            }
        }
        let grammar = Grammar::from_rules(start, rules)?;
        let info_old = grammar.size(&[start])?;
        if meta.info_old != info_old {
            return Err(Error::Integrity {
                field: "info_old",
                recorded: meta.info_old,
                computed: info_old,
            });
        }
        let retained = grammar.start_rhs().len() as u64;
        if meta.retained_sequences != retained {
            return Err(Error::Integrity {
                field: "retained sequence count",
                recorded: meta.retained_sequences,
                computed: retained,
            });
        }
        if meta.training_sequences < retained {
            return Err(Error::Integrity {
                field: "training sequence count",
                recorded: meta.training_sequences,
                computed: retained,
            });
        }
        let retained_entries = expansion_lengths(&grammar)
            .map(|lens| grammar.start_rhs().iter().map(|r| lens[r]).sum::<u64>())?;
        if meta.total_entries < retained_entries {
            return Err(Error::Integrity {
                field: "total entries",
                recorded: meta.total_entries,
                computed: retained_entries,
            });
        }
        Ok(Self {
            grammar,
            interner,
            meta,
        })
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn interner(&self) -> &Interner {
        &self.interner
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    pub fn info_old(&self) -> u64 {
        self.meta.info_old
    }

    /// Token string for a terminal, or its id if it is not in the table.
    pub fn token(&self, sym: Symbol) -> String {
        match sym {
            Symbol::Terminal(t) => self
                .interner
                .resolve(t)
                .map(str::to_owned)
                .unwrap_or_else(|| t.to_string()),
            Symbol::Rule(r) => r.to_string(),
        }
    }

    /// Rule structure up to renaming, terminals shown as their tokens.
    pub fn canonical_form(&self) -> String {
        self.grammar
            .canonical_form(&|t| self.token(Symbol::Terminal(t)))
    }

    /// Expansion of `sym` as token strings.
    pub fn expand_tokens(&self, sym: Symbol) -> Result<Vec<&str>> {
        Ok(self
            .grammar
            .expand(sym)?
            .into_iter()
            .map(|t| self.interner.resolve(t).unwrap_or("?"))
            .collect())
    }
}

/// Expansion length of every non-start rule.
pub(crate) fn expansion_lengths(g: &Grammar) -> Result<FxHashMap<RuleId, u64>> {
    let mut lens: FxHashMap<RuleId, u64> = FxHashMap::default();
    for root in g.rule_ids() {
        if g.kind(root) == Some(RuleKind::Start) || lens.contains_key(&root) {
            continue;
        }
        // post-order over unresolved children
        let mut stack = vec![root];
        while let Some(&rule) = stack.last() {
            let rhs = g.rhs(rule).ok_or(Error::UnknownRule(rule))?;
            let pending: Vec<RuleId> = rhs
                .iter()
                .filter_map(|s| s.rule())
                .filter(|c| !lens.contains_key(c))
                .collect();
            if pending.is_empty() {
                let len = rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::Terminal(_) => 1,
                        Symbol::Rule(c) => lens[c],
                    })
                    .sum();
                lens.insert(rule, len);
                stack.pop();
            } else {
                stack.extend(pending);
            }
        }
    }
    Ok(lens)
}
