use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::symbol::TerminalId;

/// Bijection between raw log-entry strings and dense terminal ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    tokens: Vec<String>,
    ids: FxHashMap<String, TerminalId>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> Result<TerminalId> {
        if token.is_empty() {
            return Err(Error::EmptyToken);
        }
        if let Some(&id) = self.ids.get(token) {
            return Ok(id);
        }
        let id = TerminalId(self.tokens.len() as u32);
        self.tokens.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        Ok(id)
    }

    pub fn get(&self, token: &str) -> Option<TerminalId> {
        self.ids.get(token).copied()
    }

    pub fn resolve(&self, id: TerminalId) -> Option<&str> {
        self.tokens.get(id.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in id order.
    pub fn tokens(&self) -> impl ExactSizeIterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let mut interner = Interner::new();
        let a = interner.intern("1").unwrap();
        assert_eq!(interner.intern("1").unwrap(), a);
        assert_eq!(interner.len(), 1);
    }

    #[test]
    fn distinct_tokens_get_distinct_ids() {
        let mut interner = Interner::new();
        let a = interner.intern("1").unwrap();
        let b = interner.intern("2").unwrap();
        assert_ne!(a, b);
        assert_eq!(interner.resolve(b), Some("2"));
    }

    #[test]
    fn trace_entries_intern_to_distinct_ids() {
        let sample = [
            "main:/../../server.c:516",
            "main:/../../server.c:536",
            "main:/../../server.c:538",
            "server_init:/../../server.c:170",
            "server_init:/../../server.c:172",
        ];
        let mut interner = Interner::new();
        let mut ids: Vec<_> = sample.iter().map(|t| interner.intern(t).unwrap()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 5);
    }

    #[test]
    fn empty_token_is_rejected() {
        let mut interner = Interner::new();
        assert!(matches!(interner.intern(""), Err(Error::EmptyToken)));
        assert!(interner.is_empty());
    }
}
