//! Shared inputs for the engine benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqgram_core::Automaton;

/// Walks a random 30-state automaton over 100 tokens until `entries`
/// tokens have been produced. The last walk is cut short to hit the total.
pub fn corpus(entries: usize, seed: u64) -> Vec<Vec<String>> {
    let automaton = Automaton::random(30, 100, seed).expect("valid random automaton");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut total = 0;
    while total < entries {
        let mut walk = automaton.walk(&mut rng);
        walk.truncate(entries - total);
        total += walk.len();
        out.push(walk);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_hits_entry_count() {
        let c = corpus(5_000, 1);
        assert_eq!(c.iter().map(Vec::len).sum::<usize>(), 5_000);
        assert_eq!(c, corpus(5_000, 1));
    }
}
