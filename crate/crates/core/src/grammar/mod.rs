//! Symbols, rules and the grammar store.
//!
//! Rule bodies live in a node arena as circular doubly-linked lists, one guard
//! node per rule. Node indices stay stable while symbols are substituted or
//! rules are spliced into each other, which is what lets the digram index
//! point straight at occurrences.
//!
//! Every mutation goes through a handful of primitives that can record their
//! inverse into an undo journal. Evaluation uses this to transform a sequence
//! against a trained grammar and then restore it exactly.

mod invariants;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, InvariantViolation, Result};
use crate::symbol::{RuleId, RuleKind, Symbol, TerminalId};
use crate::transform::PrefixIndex;

pub(crate) use invariants::find_cycle;

pub(crate) const NIL: u32 = u32::MAX;

pub(crate) type Digram = (Symbol, Symbol);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Node {
    pub(crate) sym: Symbol,
    pub(crate) guard: bool,
    pub(crate) live: bool,
    pub(crate) prev: u32,
    pub(crate) next: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RuleSlot {
    pub(crate) kind: RuleKind,
    pub(crate) guard: u32,
    /// Occurrences on the right side of in-scope rules.
    pub(crate) uses: u32,
    /// XOR of the node indices of those occurrences; names the occurrence
    /// directly once `uses == 1`.
    pub(crate) occ_xor: u32,
}

#[derive(Debug, Clone)]
enum Undo {
    Node(u32, Node),
    NodePush,
    FreePush,
    FreePop(u32),
    Digram(Digram, Option<u32>),
    Rule(u32, Option<RuleSlot>),
    RulePush,
    Total(u64),
    Active(Option<RuleId>),
}

/// A read-only snapshot of one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleView {
    pub id: RuleId,
    pub kind: RuleKind,
    pub rhs: Vec<Symbol>,
    /// Right-side occurrences, plus one for sequence rules to account for the
    /// reference held by the start rule (or by the dropped sequence they
    /// stand for).
    pub usage: u32,
}

/// An admissible grammar under construction or finalized inside a model.
#[derive(Debug, Clone)]
pub struct Grammar {
    pub(crate) nodes: Vec<Node>,
    free: Vec<u32>,
    pub(crate) rules: Vec<Option<RuleSlot>>,
    pub(crate) digrams: FxHashMap<Digram, u32>,
    pub(crate) prefix: PrefixIndex,
    start: RuleId,
    start_rhs: Vec<RuleId>,
    total: u64,
    pub(crate) pending_checks: Vec<u32>,
    pub(crate) underused: Vec<RuleId>,
    /// The sequence rule currently being transformed. It is in reduction
    /// scope but not yet visible to greedy matching.
    pub(crate) active: Option<RuleId>,
    journal: Option<Vec<Undo>>,
}

impl Default for Grammar {
    fn default() -> Self {
        Self::new()
    }
}

impl Grammar {
    /// An empty grammar holding only the start rule `p0`.
    pub fn new() -> Self {
        let start_slot = RuleSlot {
            kind: RuleKind::Start,
            guard: NIL,
            uses: 0,
            occ_xor: 0,
        };
        Self {
            nodes: Vec::new(),
            free: Vec::new(),
            rules: vec![Some(start_slot)],
            digrams: FxHashMap::default(),
            prefix: PrefixIndex::new(),
            start: RuleId(0),
            start_rhs: Vec::new(),
            total: 0,
            pending_checks: Vec::new(),
            underused: Vec::new(),
            active: None,
            journal: None,
        }
    }

    pub fn start(&self) -> RuleId {
        self.start
    }

    pub fn start_rhs(&self) -> &[RuleId] {
        &self.start_rhs
    }

    pub fn contains(&self, id: RuleId) -> bool {
        self.slot(id).is_some()
    }

    pub fn kind(&self, id: RuleId) -> Option<RuleKind> {
        self.slot(id).map(|s| s.kind)
    }

    /// Number of live rules, the start rule included.
    pub fn rule_count(&self) -> usize {
        self.rules.iter().filter(|s| s.is_some()).count()
    }

    /// Next id that a new rule would receive.
    pub fn next_rule_id(&self) -> RuleId {
        RuleId(self.rules.len() as u32)
    }

    pub fn rhs(&self, id: RuleId) -> Option<Vec<Symbol>> {
        let slot = self.slot(id)?;
        if slot.kind == RuleKind::Start {
            return Some(self.start_rhs.iter().map(|&r| Symbol::Rule(r)).collect());
        }
        Some(
            self.body(slot.guard)
                .map(|n| self.nodes[n as usize].sym)
                .collect(),
        )
    }

    pub fn rhs_len(&self, id: RuleId) -> Option<usize> {
        let slot = self.slot(id)?;
        if slot.kind == RuleKind::Start {
            return Some(self.start_rhs.len());
        }
        Some(self.body(slot.guard).count())
    }

    pub fn usage(&self, id: RuleId) -> Option<u32> {
        let slot = self.slot(id)?;
        Some(match slot.kind {
            RuleKind::Start => 0,
            RuleKind::Sequence => slot.uses + 1,
            RuleKind::Internal => slot.uses,
        })
    }

    pub fn rule(&self, id: RuleId) -> Option<RuleView> {
        Some(RuleView {
            id,
            kind: self.kind(id)?,
            rhs: self.rhs(id)?,
            usage: self.usage(id)?,
        })
    }

    /// All live rules in ascending id order.
    pub fn rules(&self) -> impl Iterator<Item = RuleView> + '_ {
        (0..self.rules.len() as u32).filter_map(move |i| self.rule(RuleId(i)))
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| RuleId(i as u32))
    }

    pub fn prefix_index(&self) -> &PrefixIndex {
        &self.prefix
    }

    /// Total right-side length of every rule, start rule included. Equals
    /// `size` over the start rule (plus the active rule, if any) whenever every
    /// rule is reachable.
    pub fn total_symbols(&self) -> u64 {
        self.total + self.start_rhs.len() as u64
    }

    /// Fully expands a symbol into the terminal string it derives.
    pub fn expand(&self, sym: Symbol) -> Result<Vec<TerminalId>> {
        let mut out = Vec::new();
        self.expand_into(sym, &mut out)?;
        Ok(out)
    }

    pub fn expand_into(&self, sym: Symbol, out: &mut Vec<TerminalId>) -> Result<()> {
        let root = match sym {
            Symbol::Terminal(t) => {
                out.push(t);
                return Ok(());
            }
            Symbol::Rule(r) => r,
        };
        let slot = self.slot(root).ok_or(Error::UnknownRule(root))?;
        if slot.kind == RuleKind::Start {
            for &r in &self.start_rhs {
                self.expand_into(Symbol::Rule(r), out)?;
            }
            return Ok(());
        }
        let mut stack = vec![self.nodes[slot.guard as usize].next];
        while let Some(cursor) = stack.last_mut() {
            let node = self.nodes[*cursor as usize];
            if node.guard {
                stack.pop();
                continue;
            }
            *cursor = node.next;
            match node.sym {
                Symbol::Terminal(t) => out.push(t),
                Symbol::Rule(r) => {
                    let child = self.slot(r).ok_or(Error::UnknownRule(r))?;
                    if child.kind == RuleKind::Start {
                        return Err(Error::UnknownRule(r));
                    }
                    stack.push(self.nodes[child.guard as usize].next);
                }
            }
        }
        Ok(())
    }

    /// Number of symbols needed to write down every rule reachable from
    /// `roots`, each rule counted once.
    pub fn size(&self, roots: &[RuleId]) -> Result<u64> {
        let mut seen = FxHashSet::default();
        let mut queue = roots.to_vec();
        let mut total = 0u64;
        let mut i = 0;
        while i < queue.len() {
            let rule = queue[i];
            i += 1;
            if !seen.insert(rule) {
                continue;
            }
            let rhs = self.rhs(rule).ok_or(Error::UnknownRule(rule))?;
            total += rhs.len() as u64;
            for sym in rhs {
                if let Symbol::Rule(child) = sym {
                    if !seen.contains(&child) {
                        queue.push(child);
                    }
                }
            }
        }
        Ok(total)
    }

    /// Structure up to rule renaming: rules are renumbered in depth-first,
    /// left-to-right order of first reference from the start rule. Rules not
    /// reachable from the start are listed afterwards in id order.
    pub fn canonical_form(&self, terminal: &dyn Fn(TerminalId) -> String) -> String {
        let mut order = Vec::new();
        let mut names: FxHashMap<RuleId, usize> = FxHashMap::default();
        let mut visit = vec![self.start];
        while let Some(r) = visit.pop() {
            if names.contains_key(&r) {
                continue;
            }
            names.insert(r, order.len());
            order.push(r);
            if let Some(rhs) = self.rhs(r) {
                for sym in rhs.iter().rev() {
                    if let Symbol::Rule(c) = sym {
                        if !names.contains_key(c) {
                            visit.push(*c);
                        }
                    }
                }
            }
        }
        for id in self.rule_ids() {
            if let std::collections::hash_map::Entry::Vacant(e) = names.entry(id) {
                e.insert(order.len());
                order.push(id);
            }
        }
        let mut out = String::new();
        for r in order {
            let kind = self.kind(r).map(|k| k.code()).unwrap_or('?');
            out.push_str(&format!("r{} {} ->", names[&r], kind));
            for sym in self.rhs(r).unwrap_or_default() {
                match sym {
                    Symbol::Terminal(t) => out.push_str(&format!(" {}", terminal(t))),
                    Symbol::Rule(c) => out.push_str(&format!(" r{}", names[&c])),
                }
            }
            out.push('\n');
        }
        out
    }

    // ---- store primitives -------------------------------------------------

    pub(crate) fn slot(&self, id: RuleId) -> Option<&RuleSlot> {
        self.rules.get(id.index()).and_then(Option::as_ref)
    }

    pub(crate) fn guard_of(&self, id: RuleId) -> u32 {
        self.rules[id.index()].expect("live rule").guard
    }

    /// Node indices of a rule body, guard excluded.
    pub(crate) fn body(&self, guard: u32) -> impl Iterator<Item = u32> + '_ {
        let mut cursor = self.nodes[guard as usize].next;
        std::iter::from_fn(move || {
            if cursor == guard {
                return None;
            }
            let here = cursor;
            cursor = self.nodes[here as usize].next;
            Some(here)
        })
    }

    #[inline]
    pub(crate) fn node(&self, n: u32) -> &Node {
        &self.nodes[n as usize]
    }

    fn log(&mut self, undo: Undo) {
        if let Some(journal) = self.journal.as_mut() {
            journal.push(undo);
        }
    }

    fn write_node(&mut self, n: u32, f: impl FnOnce(&mut Node)) {
        if let Some(journal) = self.journal.as_mut() {
            journal.push(Undo::Node(n, self.nodes[n as usize]));
        }
        f(&mut self.nodes[n as usize]);
    }

    pub(crate) fn link(&mut self, left: u32, right: u32) {
        self.write_node(left, |n| n.next = right);
        self.write_node(right, |n| n.prev = left);
    }

    fn alloc_node(&mut self, sym: Symbol, guard: bool) -> u32 {
        let node = Node {
            sym,
            guard,
            live: true,
            prev: NIL,
            next: NIL,
        };
        if let Some(n) = self.free.pop() {
            self.log(Undo::FreePop(n));
            self.write_node(n, |slot| *slot = node);
            n
        } else {
            self.nodes.push(node);
            self.log(Undo::NodePush);
            (self.nodes.len() - 1) as u32
        }
    }

    fn release_node(&mut self, n: u32) {
        self.write_node(n, |node| node.live = false);
        self.free.push(n);
        self.log(Undo::FreePush);
    }

    fn write_rule(&mut self, id: RuleId, f: impl FnOnce(&mut Option<RuleSlot>)) {
        if let Some(journal) = self.journal.as_mut() {
            journal.push(Undo::Rule(id.0, self.rules[id.index()]));
        }
        f(&mut self.rules[id.index()]);
    }

    fn add_total(&mut self, delta: i64) {
        self.log(Undo::Total(self.total));
        self.total = self.total.wrapping_add_signed(delta);
    }

    pub(crate) fn set_active(&mut self, rule: Option<RuleId>) {
        self.log(Undo::Active(self.active));
        self.active = rule;
    }

    pub(crate) fn set_kind(&mut self, id: RuleId, kind: RuleKind) {
        self.write_rule(id, |s| s.as_mut().expect("live rule").kind = kind);
    }

    pub(crate) fn push_start(&mut self, rule: RuleId) {
        debug_assert!(self.journal.is_none());
        self.start_rhs.push(rule);
    }

    /// Allocates an empty rule with a fresh id.
    pub(crate) fn new_rule(&mut self, kind: RuleKind) -> RuleId {
        let id = RuleId(self.rules.len() as u32);
        let guard = self.alloc_node(Symbol::Rule(id), true);
        self.link(guard, guard);
        self.rules.push(Some(RuleSlot {
            kind,
            guard,
            uses: 0,
            occ_xor: 0,
        }));
        self.log(Undo::RulePush);
        id
    }

    /// Deletes an empty-bodied or fully spliced-out rule and its guard.
    pub(crate) fn delete_rule(&mut self, id: RuleId) {
        let guard = self.guard_of(id);
        self.release_node(guard);
        self.write_rule(id, |s| *s = None);
    }

    fn add_use(&mut self, sym: Symbol, node: u32) {
        if let Symbol::Rule(r) = sym {
            self.write_rule(r, |s| {
                let s = s.as_mut().expect("live rule");
                s.uses += 1;
                s.occ_xor ^= node;
            });
        }
    }

    fn drop_use(&mut self, sym: Symbol, node: u32) {
        if let Symbol::Rule(r) = sym {
            let mut now_underused = false;
            self.write_rule(r, |s| {
                let s = s.as_mut().expect("live rule");
                s.uses -= 1;
                s.occ_xor ^= node;
                now_underused = s.kind == RuleKind::Internal && s.uses == 1;
            });
            if now_underused {
                self.underused.push(r);
            }
        }
    }

    /// Inserts a new symbol node right after `at`.
    pub(crate) fn insert_after(&mut self, at: u32, sym: Symbol) -> u32 {
        let after = self.nodes[at as usize].next;
        let n = self.alloc_node(sym, false);
        self.link(at, n);
        self.link(n, after);
        self.add_use(sym, n);
        self.add_total(1);
        n
    }

    /// Unlinks and frees a symbol node, releasing its rule reference.
    /// Digram bookkeeping is the caller's job.
    pub(crate) fn remove_node(&mut self, n: u32) {
        let Node {
            sym, prev, next, ..
        } = self.nodes[n as usize];
        self.link(prev, next);
        self.drop_use(sym, n);
        self.release_node(n);
        self.add_total(-1);
    }

    /// Moves the body of `rule` into the gap between `left` and `right`.
    /// The nodes keep their indices; `rule` is left with an empty body.
    pub(crate) fn splice_body(&mut self, rule: RuleId, left: u32, right: u32) {
        let guard = self.guard_of(rule);
        let first = self.nodes[guard as usize].next;
        let last = self.nodes[guard as usize].prev;
        self.link(left, first);
        self.link(last, right);
        self.link(guard, guard);
    }

    pub(crate) fn digram_at(&self, n: u32) -> Option<Digram> {
        let node = &self.nodes[n as usize];
        if node.guard || !node.live {
            return None;
        }
        let next = &self.nodes[node.next as usize];
        if next.guard {
            return None;
        }
        Some((node.sym, next.sym))
    }

    pub(crate) fn digram_set(&mut self, key: Digram, n: u32) {
        let old = self.digrams.insert(key, n);
        self.log(Undo::Digram(key, old));
    }

    pub(crate) fn digram_remove(&mut self, key: &Digram) {
        if let Some(old) = self.digrams.remove(key) {
            self.log(Undo::Digram(*key, Some(old)));
        }
    }

    // ---- journal ----------------------------------------------------------

    pub(crate) fn begin_journal(&mut self) {
        debug_assert!(self.journal.is_none());
        self.journal = Some(Vec::new());
        self.prefix.begin_journal();
    }

    /// Undoes every mutation since `begin_journal`.
    pub(crate) fn rollback(&mut self) {
        let journal = self.journal.take().expect("journal active");
        for undo in journal.into_iter().rev() {
            match undo {
                Undo::Node(n, node) => self.nodes[n as usize] = node,
                Undo::NodePush => {
                    self.nodes.pop();
                }
                Undo::FreePush => {
                    self.free.pop();
                }
                Undo::FreePop(n) => self.free.push(n),
                Undo::Digram(key, Some(n)) => {
                    self.digrams.insert(key, n);
                }
                Undo::Digram(key, None) => {
                    self.digrams.remove(&key);
                }
                Undo::Rule(id, slot) => self.rules[id as usize] = slot,
                Undo::RulePush => {
                    self.rules.pop();
                }
                Undo::Total(t) => self.total = t,
                Undo::Active(a) => self.active = a,
            }
        }
        self.prefix.rollback();
        self.pending_checks.clear();
        self.underused.clear();
    }

    // ---- construction from a rule list ------------------------------------

    /// Builds a grammar from explicit rules and validates every structural
    /// invariant. Rule ids are kept as given.
    pub fn from_rules(start: RuleId, rules: Vec<(RuleId, RuleKind, Vec<Symbol>)>) -> Result<Self> {
        let mut bodies: FxHashMap<RuleId, (RuleKind, Vec<Symbol>)> = FxHashMap::default();
        let mut max_id = start.0;
        for (id, kind, rhs) in rules {
            max_id = max_id.max(id.0);
            if bodies.insert(id, (kind, rhs)).is_some() {
                return Err(
                    InvariantViolation::IndexDrift(format!("rule {id} defined twice")).into(),
                );
            }
        }
        match bodies.get(&start) {
            Some((RuleKind::Start, _)) => {}
            Some(_) => {
                return Err(
                    InvariantViolation::Start(format!("{start} is not a start rule")).into(),
                )
            }
            None => return Err(Error::UnknownRule(start)),
        }
        let mut ids: Vec<RuleId> = bodies.keys().copied().collect();
        ids.sort();
        for &id in &ids {
            let (kind, rhs) = &bodies[&id];
            if *kind == RuleKind::Start && id != start {
                return Err(InvariantViolation::Start(format!("second start rule {id}")).into());
            }
            for &sym in rhs {
                if let Symbol::Rule(target) = sym {
                    if !bodies.contains_key(&target) {
                        return Err(Error::DanglingReference {
                            rule: id,
                            target: sym,
                        });
                    }
                    if id == start {
                        if bodies[&target].0 != RuleKind::Sequence {
                            return Err(InvariantViolation::Start(format!(
                                "references non-sequence rule {target}"
                            ))
                            .into());
                        }
                    } else if target == start {
                        return Err(InvariantViolation::Start(format!(
                            "referenced from rule {id}"
                        ))
                        .into());
                    }
                } else if id == start {
                    return Err(InvariantViolation::Start("holds a terminal".into()).into());
                }
            }
        }
        let graph: FxHashMap<RuleId, Vec<Symbol>> = bodies
            .iter()
            .map(|(&id, (_, rhs))| (id, rhs.clone()))
            .collect();
        if let Some(rule) = find_cycle(&graph) {
            return Err(InvariantViolation::Cycle { rule }.into());
        }

        let mut g = Grammar::new();
        g.start = start;
        g.rules = vec![None; max_id as usize + 1];
        for &id in &ids {
            let (kind, _) = bodies[&id];
            if kind == RuleKind::Start {
                g.rules[id.index()] = Some(RuleSlot {
                    kind,
                    guard: NIL,
                    uses: 0,
                    occ_xor: 0,
                });
                continue;
            }
            let guard = g.alloc_node(Symbol::Rule(id), true);
            g.link(guard, guard);
            g.rules[id.index()] = Some(RuleSlot {
                kind,
                guard,
                uses: 0,
                occ_xor: 0,
            });
        }
        for &id in &ids {
            let (kind, rhs) = &bodies[&id];
            if *kind == RuleKind::Start {
                g.start_rhs = rhs.iter().filter_map(|s| s.rule()).collect();
                continue;
            }
            let guard = g.guard_of(id);
            for &sym in rhs {
                let last = g.nodes[guard as usize].prev;
                g.insert_after(last, sym);
            }
        }
        g.underused.clear();
        // Index digrams in id order, left to right. A repeat that does not
        // overlap the indexed occurrence is a violation.
        for &id in &ids {
            if bodies[&id].0 == RuleKind::Start {
                continue;
            }
            let nodes: Vec<u32> = g.body(g.guard_of(id)).collect();
            for n in nodes {
                let Some(key) = g.digram_at(n) else { continue };
                match g.digrams.get(&key) {
                    None => {
                        g.digrams.insert(key, n);
                    }
                    Some(&m) if g.nodes[m as usize].next == n => {}
                    Some(_) => {
                        return Err(InvariantViolation::RepeatedDigram {
                            first: key.0,
                            second: key.1,
                            count: 2,
                        }
                        .into())
                    }
                }
            }
        }
        let mut expansion = Vec::new();
        for &id in &ids {
            if bodies[&id].0 == RuleKind::Start {
                continue;
            }
            expansion.clear();
            g.expand_into(Symbol::Rule(id), &mut expansion)?;
            if let Some(other) = g.prefix.insert(&expansion, id) {
                return Err(InvariantViolation::DuplicateExpansion {
                    first: other,
                    second: id,
                }
                .into());
            }
        }
        g.check_invariants()?;
        Ok(g)
    }

    /// Plain rule list, suitable for serialization or `from_rules`.
    pub fn to_rules(&self) -> Vec<(RuleId, RuleKind, Vec<Symbol>)> {
        self.rules().map(|r| (r.id, r.kind, r.rhs)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: u32) -> Symbol {
        Symbol::Terminal(TerminalId(i))
    }

    fn r(i: u32) -> Symbol {
        Symbol::Rule(RuleId(i))
    }

    /// Final grammar of the four-sequence worked example, tokens 1..=7 mapped
    /// to terminal ids of the same value: p0 -> p1 p2 p4, p5 -> 1 2 3,
    /// p1 -> p5 4, p2 -> p5 5, p4 -> p5 7.
    fn worked_example() -> Grammar {
        Grammar::from_rules(
            RuleId(0),
            vec![
                (RuleId(0), RuleKind::Start, vec![r(1), r(2), r(4)]),
                (RuleId(1), RuleKind::Sequence, vec![r(5), t(4)]),
                (RuleId(2), RuleKind::Sequence, vec![r(5), t(5)]),
                (RuleId(4), RuleKind::Sequence, vec![r(5), t(7)]),
                (RuleId(5), RuleKind::Internal, vec![t(1), t(2), t(3)]),
            ],
        )
        .unwrap()
    }

    fn ids(v: &[u32]) -> Vec<TerminalId> {
        v.iter().map(|&i| TerminalId(i)).collect()
    }

    #[test]
    fn terminal_expands_to_itself() {
        let g = Grammar::new();
        assert_eq!(g.expand(t(9)).unwrap(), ids(&[9]));
    }

    #[test]
    fn expansion_follows_nested_rules() {
        let g = worked_example();
        assert_eq!(g.expand(r(5)).unwrap(), ids(&[1, 2, 3]));
        assert_eq!(g.expand(r(1)).unwrap(), ids(&[1, 2, 3, 4]));
        assert_eq!(
            g.expand(r(0)).unwrap(),
            ids(&[1, 2, 3, 4, 1, 2, 3, 5, 1, 2, 3, 7])
        );
    }

    #[test]
    fn size_of_worked_example_is_twelve() {
        let g = worked_example();
        assert_eq!(g.size(&[RuleId(0)]).unwrap(), 12);
        assert_eq!(g.total_symbols(), 12);
    }

    #[test]
    fn size_counts_shared_rules_once() {
        let g = worked_example();
        assert_eq!(g.size(&[RuleId(1), RuleId(2)]).unwrap(), 7);
        assert_eq!(g.size(&[RuleId(1), RuleId(1)]).unwrap(), 5);
    }

    #[test]
    fn size_of_no_roots_is_zero() {
        assert_eq!(worked_example().size(&[]).unwrap(), 0);
    }

    #[test]
    fn size_rejects_unknown_root() {
        let g = worked_example();
        assert!(matches!(
            g.size(&[RuleId(3)]),
            Err(Error::UnknownRule(RuleId(3)))
        ));
    }

    #[test]
    fn usage_counts_include_start_reference_for_sequences() {
        let g = worked_example();
        assert_eq!(g.usage(RuleId(5)), Some(3));
        assert_eq!(g.usage(RuleId(1)), Some(1));
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let err = Grammar::from_rules(
            RuleId(0),
            vec![
                (RuleId(0), RuleKind::Start, vec![r(1)]),
                (RuleId(1), RuleKind::Sequence, vec![t(1), r(7)]),
            ],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DanglingReference {
                rule: RuleId(1),
                ..
            }
        ));
    }

    #[test]
    fn cycle_is_rejected() {
        let err = Grammar::from_rules(
            RuleId(0),
            vec![
                (RuleId(0), RuleKind::Start, vec![r(1)]),
                (RuleId(1), RuleKind::Sequence, vec![r(2), r(3)]),
                (RuleId(2), RuleKind::Internal, vec![t(1), r(3)]),
                (RuleId(3), RuleKind::Internal, vec![t(2), r(2)]),
            ],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Invariant(InvariantViolation::Cycle { .. })
        ));
    }

    #[test]
    fn journal_rollback_restores_structure() {
        let mut g = worked_example();
        let before = g.to_rules();
        let total = g.total_symbols();
        g.begin_journal();
        let p = g.new_rule(RuleKind::Sequence);
        let guard = g.guard_of(p);
        g.insert_after(guard, r(5));
        g.insert_after(guard, t(9));
        assert_ne!(g.to_rules(), before);
        g.rollback();
        assert_eq!(g.to_rules(), before);
        assert_eq!(g.total_symbols(), total);
        assert_eq!(g.usage(RuleId(5)), Some(3));
        g.check_invariants().unwrap();
    }
}
