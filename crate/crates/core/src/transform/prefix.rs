use rustc_hash::FxHashMap;

use crate::symbol::{RuleId, TerminalId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TrieNode {
    rule: Option<RuleId>,
    /// Entries stored at or below this node. Lookups stop at dead branches
    /// left behind by removals.
    live: u32,
}

#[derive(Debug, Clone)]
enum Undo {
    NodePush,
    Edge(u32, TerminalId),
    Node(u32, TrieNode),
    Len(usize),
}

/// Trie over the full expansion of every rule visible to greedy matching.
///
/// Expansions never change while a rule lives, so entries are only ever
/// inserted when a rule appears and removed when it is inlined away.
#[derive(Debug, Clone)]
pub struct PrefixIndex {
    nodes: Vec<TrieNode>,
    edges: FxHashMap<(u32, TerminalId), u32>,
    len: usize,
    journal: Option<Vec<Undo>>,
}

impl Default for PrefixIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl PrefixIndex {
    pub fn new() -> Self {
        Self {
            nodes: vec![TrieNode {
                rule: None,
                live: 0,
            }],
            edges: FxHashMap::default(),
            len: 0,
            journal: None,
        }
    }

    /// Number of rules indexed.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Rule whose expansion is exactly `expansion`.
    pub fn get(&self, expansion: &[TerminalId]) -> Option<RuleId> {
        let mut node = 0u32;
        for &t in expansion {
            node = *self.edges.get(&(node, t))?;
        }
        self.nodes[node as usize].rule
    }

    /// Longest indexed expansion that is a prefix of `input`, with its length.
    pub fn longest_match(&self, input: &[TerminalId]) -> Option<(RuleId, usize)> {
        let mut node = 0u32;
        let mut best = None;
        for (depth, &t) in input.iter().enumerate() {
            match self.edges.get(&(node, t)) {
                Some(&child) if self.nodes[child as usize].live > 0 => node = child,
                _ => break,
            }
            if let Some(rule) = self.nodes[node as usize].rule {
                best = Some((rule, depth + 1));
            }
        }
        best
    }

    /// Adds `rule` under `expansion`. If another rule already holds that
    /// expansion, nothing changes and the holder is returned.
    pub fn insert(&mut self, expansion: &[TerminalId], rule: RuleId) -> Option<RuleId> {
        if let Some(existing) = self.get(expansion) {
            return Some(existing);
        }
        let mut node = 0u32;
        self.bump(node, 1);
        for &t in expansion {
            node = match self.edges.get(&(node, t)) {
                Some(&child) => child,
                None => {
                    let child = self.nodes.len() as u32;
                    self.nodes.push(TrieNode {
                        rule: None,
                        live: 0,
                    });
                    self.edges.insert((node, t), child);
                    self.log(Undo::NodePush);
                    self.log(Undo::Edge(node, t));
                    child
                }
            };
            self.bump(node, 1);
        }
        self.write(node, |n| n.rule = Some(rule));
        self.log(Undo::Len(self.len));
        self.len += 1;
        None
    }

    /// Removes `rule`, which must be stored under `expansion`.
    pub fn remove(&mut self, expansion: &[TerminalId], rule: RuleId) {
        debug_assert_eq!(self.get(expansion), Some(rule));
        let mut node = 0u32;
        self.bump(node, -1);
        for &t in expansion {
            node = self.edges[&(node, t)];
            self.bump(node, -1);
        }
        self.write(node, |n| n.rule = None);
        self.log(Undo::Len(self.len));
        self.len -= 1;
    }

    fn bump(&mut self, node: u32, delta: i32) {
        self.write(node, |n| n.live = n.live.wrapping_add_signed(delta));
    }

    fn write(&mut self, node: u32, f: impl FnOnce(&mut TrieNode)) {
        if let Some(journal) = self.journal.as_mut() {
            journal.push(Undo::Node(node, self.nodes[node as usize]));
        }
        f(&mut self.nodes[node as usize]);
    }

    fn log(&mut self, undo: Undo) {
        if let Some(journal) = self.journal.as_mut() {
            journal.push(undo);
        }
    }

    pub(crate) fn begin_journal(&mut self) {
        self.journal = Some(Vec::new());
    }

    pub(crate) fn rollback(&mut self) {
        let journal = self.journal.take().expect("journal active");
        for undo in journal.into_iter().rev() {
            match undo {
                Undo::NodePush => {
                    self.nodes.pop();
                }
                Undo::Edge(node, t) => {
                    self.edges.remove(&(node, t));
                }
                Undo::Node(n, node) => self.nodes[n as usize] = node,
                Undo::Len(len) => self.len = len,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<TerminalId> {
        v.iter().map(|&i| TerminalId(i)).collect()
    }

    #[test]
    fn longest_entry_wins() {
        let mut idx = PrefixIndex::new();
        idx.insert(&ids(&[1, 2, 3]), RuleId(5));
        idx.insert(&ids(&[1, 2, 3, 4]), RuleId(1));
        assert_eq!(idx.longest_match(&ids(&[1, 2, 3, 4])), Some((RuleId(1), 4)));
        assert_eq!(idx.longest_match(&ids(&[1, 2, 3, 7])), Some((RuleId(5), 3)));
        assert_eq!(idx.longest_match(&ids(&[1, 2])), None);
        assert_eq!(idx.longest_match(&ids(&[9])), None);
    }

    #[test]
    fn removed_entries_stop_matching() {
        let mut idx = PrefixIndex::new();
        idx.insert(&ids(&[1, 2]), RuleId(3));
        idx.insert(&ids(&[1, 2, 3, 4]), RuleId(4));
        idx.remove(&ids(&[1, 2, 3, 4]), RuleId(4));
        assert_eq!(idx.longest_match(&ids(&[1, 2, 3, 4])), Some((RuleId(3), 2)));
        assert_eq!(idx.len(), 1);
    }

    #[test]
    fn duplicate_expansion_reports_holder() {
        let mut idx = PrefixIndex::new();
        assert_eq!(idx.insert(&ids(&[1, 2]), RuleId(3)), None);
        assert_eq!(idx.insert(&ids(&[1, 2]), RuleId(8)), Some(RuleId(3)));
        assert_eq!(idx.get(&ids(&[1, 2])), Some(RuleId(3)));
    }

    #[test]
    fn rollback_restores_entries() {
        let mut idx = PrefixIndex::new();
        idx.insert(&ids(&[1, 2, 3]), RuleId(1));
        idx.begin_journal();
        idx.insert(&ids(&[1, 2, 3, 4]), RuleId(2));
        idx.remove(&ids(&[1, 2, 3]), RuleId(1));
        idx.rollback();
        assert_eq!(idx.get(&ids(&[1, 2, 3])), Some(RuleId(1)));
        assert_eq!(idx.get(&ids(&[1, 2, 3, 4])), None);
        assert_eq!(idx.longest_match(&ids(&[1, 2, 3, 4])), Some((RuleId(1), 3)));
        assert_eq!(idx.len(), 1);
    }
}
