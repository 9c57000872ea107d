use rustc_hash::{FxHashMap, FxHashSet};

use super::{Digram, Grammar};
use crate::error::InvariantViolation;
use crate::symbol::{RuleId, RuleKind, Symbol, TerminalId};

/// Returns some rule on a cycle of the rule graph, if there is one.
pub(crate) fn find_cycle(graph: &FxHashMap<RuleId, Vec<Symbol>>) -> Option<RuleId> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: FxHashMap<RuleId, Mark> = FxHashMap::default();
    let mut roots: Vec<RuleId> = graph.keys().copied().collect();
    roots.sort();
    for root in roots {
        if marks.contains_key(&root) {
            continue;
        }
        // (rule, index of next child to visit)
        let mut stack = vec![(root, 0usize)];
        marks.insert(root, Mark::Open);
        while let Some((rule, child)) = stack.last_mut() {
            let rhs = &graph[rule];
            let next = rhs[*child..]
                .iter()
                .position(|s| matches!(s, Symbol::Rule(_)));
            match next {
                None => {
                    marks.insert(*rule, Mark::Done);
                    stack.pop();
                }
                Some(offset) => {
                    let Symbol::Rule(target) = rhs[*child + offset] else {
                        unreachable!()
                    };
                    *child += offset + 1;
                    match marks.get(&target) {
                        Some(Mark::Open) => return Some(target),
                        Some(Mark::Done) => {}
                        None => {
                            if graph.contains_key(&target) {
                                marks.insert(target, Mark::Open);
                                stack.push((target, 0));
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

impl Grammar {
    /// Verifies every structural guarantee of the grammar and that the
    /// maintenance indexes agree with the rule bodies.
    ///
    /// While a sequence is being transformed the active rule is treated as a
    /// root, and a single-symbol active rule is exempt from the
    /// distinct-expansion check.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let start = self.start();
        let mut bodies: FxHashMap<RuleId, Vec<Symbol>> = FxHashMap::default();
        let mut nodes_of: FxHashMap<RuleId, Vec<u32>> = FxHashMap::default();
        for id in self.rule_ids() {
            let slot = *self.slot(id).expect("live");
            if slot.kind == RuleKind::Start {
                if id != start {
                    return Err(InvariantViolation::Start(format!("second start rule {id}")));
                }
                bodies.insert(
                    id,
                    self.start_rhs().iter().map(|&r| Symbol::Rule(r)).collect(),
                );
                continue;
            }
            let nodes: Vec<u32> = self.body(slot.guard).collect();
            for &n in &nodes {
                let node = self.node(n);
                if !node.live || node.guard {
                    return Err(InvariantViolation::IndexDrift(format!(
                        "rule {id} links a dead node"
                    )));
                }
            }
            bodies.insert(id, nodes.iter().map(|&n| self.node(n).sym).collect());
            nodes_of.insert(id, nodes);
        }

        for (&id, rhs) in &bodies {
            for &sym in rhs {
                if let Symbol::Rule(target) = sym {
                    let Some(kind) = self.kind(target) else {
                        return Err(InvariantViolation::Dangling {
                            rule: id,
                            target: sym,
                        });
                    };
                    if kind == RuleKind::Start {
                        return Err(InvariantViolation::Start(format!("referenced from {id}")));
                    }
                    if id == start && kind != RuleKind::Sequence {
                        return Err(InvariantViolation::Start(format!(
                            "references {kind} rule {target}"
                        )));
                    }
                }
            }
        }
        if let Some(rule) = find_cycle(&bodies) {
            return Err(InvariantViolation::Cycle { rule });
        }

        // usage counts and rule utility
        let mut uses: FxHashMap<RuleId, (u32, u32)> = FxHashMap::default();
        for nodes in nodes_of.values() {
            for &n in nodes {
                if let Symbol::Rule(r) = self.node(n).sym {
                    let e = uses.entry(r).or_insert((0, 0));
                    e.0 += 1;
                    e.1 ^= n;
                }
            }
        }
        let mut total = 0u64;
        for (&id, nodes) in &nodes_of {
            let slot = self.slot(id).expect("live");
            let (count, xor) = uses.get(&id).copied().unwrap_or((0, 0));
            if slot.uses != count || slot.occ_xor != xor {
                return Err(InvariantViolation::IndexDrift(format!(
                    "rule {id} records {} uses, body scan finds {count}",
                    slot.uses
                )));
            }
            total += nodes.len() as u64;
            match slot.kind {
                RuleKind::Internal => {
                    if nodes.len() < 2 {
                        return Err(InvariantViolation::ShortRule {
                            rule: id,
                            len: nodes.len(),
                        });
                    }
                    if count < 2 {
                        return Err(InvariantViolation::Underused {
                            rule: id,
                            uses: count,
                        });
                    }
                }
                RuleKind::Sequence => {
                    if nodes.is_empty() {
                        return Err(InvariantViolation::ShortRule { rule: id, len: 0 });
                    }
                }
                RuleKind::Start => unreachable!(),
            }
        }
        if total + self.start_rhs().len() as u64 != self.total_symbols() {
            return Err(InvariantViolation::IndexDrift("symbol total".into()));
        }

        // reachability
        let mut reached: FxHashSet<RuleId> = FxHashSet::default();
        let mut queue: Vec<RuleId> = vec![start];
        queue.extend(self.active);
        while let Some(r) = queue.pop() {
            if !reached.insert(r) {
                continue;
            }
            for sym in &bodies[&r] {
                if let Symbol::Rule(c) = sym {
                    queue.push(*c);
                }
            }
        }
        let mut ids: Vec<RuleId> = bodies.keys().copied().collect();
        ids.sort();
        if let Some(&rule) = ids.iter().find(|r| !reached.contains(r)) {
            return Err(InvariantViolation::Unreachable { rule });
        }

        self.check_digrams(&ids, &nodes_of)?;
        self.check_expansions(&ids, &nodes_of)
    }

    fn check_digrams(
        &self,
        ids: &[RuleId],
        nodes_of: &FxHashMap<RuleId, Vec<u32>>,
    ) -> Result<(), InvariantViolation> {
        // Non-overlapping occurrence count per digram.
        let mut seen: FxHashMap<Digram, (usize, Option<(RuleId, usize)>)> = FxHashMap::default();
        for &id in ids {
            let Some(nodes) = nodes_of.get(&id) else {
                continue;
            };
            for i in 0..nodes.len().saturating_sub(1) {
                let key = (self.node(nodes[i]).sym, self.node(nodes[i + 1]).sym);
                let entry = seen.entry(key).or_insert((0, None));
                let overlaps = key.0 == key.1 && entry.1 == Some((id, i.wrapping_sub(1)));
                if overlaps {
                    // Let a third copy in a run (aaaa) count again.
                    entry.1 = None;
                    continue;
                }
                entry.0 += 1;
                entry.1 = Some((id, i));
                if entry.0 > 1 {
                    return Err(InvariantViolation::RepeatedDigram {
                        first: key.0,
                        second: key.1,
                        count: entry.0,
                    });
                }
            }
        }
        for (key, &n) in &self.digrams {
            if self.digram_at(n) != Some(*key) {
                return Err(InvariantViolation::IndexDrift(format!(
                    "digram ({}, {}) indexed at a stale node",
                    key.0, key.1
                )));
            }
        }
        for key in seen.keys() {
            if !self.digrams.contains_key(key) {
                return Err(InvariantViolation::IndexDrift(format!(
                    "digram ({}, {}) missing from index",
                    key.0, key.1
                )));
            }
        }
        Ok(())
    }

    fn check_expansions(
        &self,
        ids: &[RuleId],
        nodes_of: &FxHashMap<RuleId, Vec<u32>>,
    ) -> Result<(), InvariantViolation> {
        let mut by_expansion: FxHashMap<Vec<TerminalId>, RuleId> = FxHashMap::default();
        let mut indexed = 0usize;
        for &id in ids {
            let Some(nodes) = nodes_of.get(&id) else {
                continue;
            };
            let active = self.active == Some(id);
            let expansion = self
                .expand(Symbol::Rule(id))
                .map_err(|e| InvariantViolation::IndexDrift(e.to_string()))?;
            if !active {
                indexed += 1;
                if self.prefix.get(&expansion) != Some(id) {
                    return Err(InvariantViolation::IndexDrift(format!(
                        "prefix index entry for {id}"
                    )));
                }
            }
            if active && nodes.len() == 1 {
                continue;
            }
            if let Some(&other) = by_expansion.get(&expansion) {
                return Err(InvariantViolation::DuplicateExpansion {
                    first: other,
                    second: id,
                });
            }
            by_expansion.insert(expansion, id);
        }
        if self.prefix.len() != indexed {
            return Err(InvariantViolation::IndexDrift(format!(
                "prefix index holds {} entries for {indexed} rules",
                self.prefix.len()
            )));
        }
        Ok(())
    }
}
