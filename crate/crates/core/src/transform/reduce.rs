//! Reduction rules applied to the rules in scope (every rule except the
//! start rule).
//!
//! Repeated substrings are factored through repeated digrams: a digram seen
//! twice without overlap is replaced at both sites by a nonterminal, either a
//! rule whose whole body already is that digram or a fresh internal rule.
//! Internal rules left with a single use are inlined. Work is driven by two
//! stacks, digrams to (re)check and rules that may have become underused, and
//! `settle` drains them to a fixed point.

use crate::grammar::{Digram, Grammar};
use crate::symbol::{RuleId, RuleKind, Symbol};

impl Grammar {
    /// Appends `sym` to the body of `rule` and queues the digram it closes.
    pub(crate) fn append_symbol(&mut self, rule: RuleId, sym: Symbol) {
        let guard = self.guard_of(rule);
        let last = self.node(guard).prev;
        self.insert_after(last, sym);
        if !self.node(last).guard {
            self.pending_checks.push(last);
        }
    }

    /// Applies reductions until none is applicable.
    pub fn apply_reductions(&mut self) {
        loop {
            if let Some(n) = self.pending_checks.pop() {
                self.check_digram(n);
                continue;
            }
            if let Some(rule) = self.underused.pop() {
                let still = self
                    .slot(rule)
                    .is_some_and(|s| s.kind == RuleKind::Internal && s.uses == 1);
                if still {
                    self.inline_rule(rule);
                }
                continue;
            }
            break;
        }
    }

    /// Drops the index entry for the digram starting at `n`, if `n` holds it.
    /// Call before `n` or its successor changes.
    fn forget_digram(&mut self, n: u32) {
        let Some(key) = self.digram_at(n) else { return };
        if self.digrams.get(&key) != Some(&n) {
            return;
        }
        self.digram_remove(&key);
        if key.0 == key.1 {
            // In a run like `aaa` the overlapping neighbour was never indexed.
            let prev = self.node(n).prev;
            let next = self.node(n).next;
            if !self.node(prev).guard {
                self.pending_checks.push(prev);
            }
            self.pending_checks.push(next);
        }
    }

    fn check_digram(&mut self, n: u32) {
        let Some(key) = self.digram_at(n) else { return };
        match self.digrams.get(&key).copied() {
            None => self.digram_set(key, n),
            Some(m) if m == n => {}
            Some(m) => {
                if self.node(m).next == n || self.node(n).next == m {
                    return;
                }
                self.reduce_repeat(n, m, key);
            }
        }
    }

    /// The rule whose entire body is the digram starting at `n`, if that rule
    /// may stand in for the digram elsewhere.
    fn whole_rule(&self, n: u32) -> Option<RuleId> {
        let prev = self.node(n).prev;
        let after = self.node(self.node(n).next).next;
        if !(self.node(prev).guard && self.node(after).guard) {
            return None;
        }
        let rule = self.node(prev).sym.rule()?;
        let reusable = Some(rule) != self.active
            && matches!(
                self.kind(rule),
                Some(RuleKind::Internal | RuleKind::Sequence)
            );
        reusable.then_some(rule)
    }

    /// `n` is a fresh occurrence of a digram already indexed at `m`.
    fn reduce_repeat(&mut self, n: u32, m: u32, key: Digram) {
        if let Some(rule) = self.whole_rule(m) {
            self.substitute(n, rule);
        } else if let Some(rule) = self.whole_rule(n) {
            self.substitute(m, rule);
            self.pending_checks.push(n);
        } else {
            let rule = self.new_rule(RuleKind::Internal);
            let guard = self.guard_of(rule);
            let first = self.insert_after(guard, key.0);
            self.insert_after(first, key.1);
            self.substitute(m, rule);
            self.substitute(n, rule);
            self.digram_set(key, first);
            let expansion = self.expand(Symbol::Rule(rule)).expect("fresh rule expands");
            let clash = self.prefix.insert(&expansion, rule);
            debug_assert!(
                clash.is_none(),
                "{rule} duplicates the expansion of {clash:?}"
            );
        }
    }

    /// Replaces the digram starting at `n` with a single `rule` symbol.
    fn substitute(&mut self, n: u32, rule: RuleId) {
        let prev = self.node(n).prev;
        let second = self.node(n).next;
        self.forget_digram(prev);
        self.forget_digram(n);
        self.forget_digram(second);
        self.remove_node(n);
        self.remove_node(second);
        let k = self.insert_after(prev, Symbol::Rule(rule));
        self.pending_checks.push(k);
        if !self.node(prev).guard {
            self.pending_checks.push(prev);
        }
    }

    /// Replaces the single occurrence of `rule` with its body and deletes it.
    fn inline_rule(&mut self, rule: RuleId) {
        let slot = *self.slot(rule).expect("live rule");
        let k = slot.occ_xor;
        debug_assert_eq!(self.node(k).sym, Symbol::Rule(rule));
        let prev = self.node(k).prev;
        let next = self.node(k).next;
        self.forget_digram(prev);
        self.forget_digram(k);

        let expansion = self.expand(Symbol::Rule(rule)).expect("live rule expands");
        self.prefix.remove(&expansion, rule);

        let last = self.node(slot.guard).prev;
        self.remove_node(k);
        self.splice_body(rule, prev, next);
        self.delete_rule(rule);
        self.pending_checks.push(last);
        if !self.node(prev).guard {
            self.pending_checks.push(prev);
        }
    }
}
