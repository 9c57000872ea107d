//! Synthetic corpora: normal sequences walked through a small weighted
//! automaton, plus anomalies drawn from an alphabet the automaton never
//! emits. Each anomaly is as long as the longest normal walk of its corpus.
//!
//! Automaton description, one directive per line, `#` starts a comment:
//!
//! ```text
//! start 0
//! edge <from> <to> <token> [weight]
//! final <state> [stop-weight]
//! minlen <n>
//! maxlen <n>
//! ```

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edge {
    to: usize,
    token: String,
    weight: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct State {
    edges: Vec<Edge>,
    stop: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    start: usize,
    states: Vec<State>,
    min_len: usize,
    max_len: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Automaton(msg.into())
}

impl Automaton {
    pub fn parse(text: &str) -> Result<Self> {
        let mut start = 0usize;
        let mut states: Vec<State> = Vec::new();
        let mut min_len = 1;
        let mut max_len = 10_000;
        let state_mut = |states: &mut Vec<State>, s: usize| -> usize {
            if states.len() <= s {
                states.resize_with(s + 1, State::default);
            }
            s
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |m: &str| invalid(format!("line {}: {m}", i + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |k: usize| -> Result<usize> {
                fields
                    .get(k)
                    .ok_or_else(|| at("missing field"))?
                    .parse()
                    .map_err(|_| at("expected a number"))
            };
            let weight = |k: usize, default: u32| -> Result<u32> {
                match fields.get(k) {
                    None => Ok(default),
                    Some(w) => match w.parse::<u32>() {
                        Ok(w) if w > 0 => Ok(w),
                        _ => Err(at("weight must be a positive integer")),
                    },
                }
            };
            match fields[0] {
                "start" if fields.len() == 2 => start = num(1)?,
                "edge" if (4..=5).contains(&fields.len()) => {
                    let from = state_mut(&mut states, num(1)?);
                    let to = state_mut(&mut states, num(2)?);
                    let edge = Edge {
                        to,
                        token: fields[3].to_owned(),
                        weight: weight(4, 1)?,
                    };
                    states[from].edges.push(edge);
                }
                "final" if (2..=3).contains(&fields.len()) => {
                    let s = state_mut(&mut states, num(1)?);
                    states[s].stop = weight(2, 1)?;
                }
                "minlen" if fields.len() == 2 => min_len = num(1)?,
                "maxlen" if fields.len() == 2 => max_len = num(1)?,
                _ => return Err(at("unrecognized directive")),
            }
        }
        let automaton = Self {
            start,
            states,
            min_len,
            max_len,
        };
        automaton.validate()?;
        Ok(automaton)
    }

    /// A random automaton over tokens `e0..e{alphabet-1}`. A chain through
    /// all states guarantees every state can reach the accepting last state.
    pub fn random(states: usize, alphabet: usize, seed: u64) -> Result<Self> {
        if states < 2 || alphabet == 0 {
            return Err(invalid("need at least two states and one token"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let token = |rng: &mut ChaCha8Rng| format!("e{}", rng.random_range(0..alphabet));
        let mut table = vec![State::default(); states];
        for (i, state) in table.iter_mut().enumerate() {
            if i + 1 < states {
                state.edges.push(Edge {
                    to: i + 1,
                    token: token(&mut rng),
                    weight: 3,
                });
            }
            for _ in 0..2 {
                state.edges.push(Edge {
                    to: rng.random_range(0..states),
                    token: token(&mut rng),
                    weight: 1,
                });
            }
            if i == states - 1 {
                state.stop = 4;
            } else if i > 0 && rng.random_bool(0.25) {
                state.stop = 1;
            }
        }
        let automaton = Self {
            start: 0,
            states: table,
            min_len: 2,
            max_len: 200,
        };
        automaton.validate()?;
        Ok(automaton)
    }

    fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(invalid("no states"));
        }
        if self.start >= self.states.len() {
            return Err(invalid(format!("start state {} has no edges", self.start)));
        }
        if self.min_len > self.max_len || self.max_len == 0 {
            return Err(invalid("length bounds are inconsistent"));
        }
        // states that can reach an accepting state
        let mut live: Vec<bool> = self.states.iter().map(|s| s.stop > 0).collect();
        loop {
            let mut changed = false;
            for (i, s) in self.states.iter().enumerate() {
                if !live[i] && s.edges.iter().any(|e| live[e.to]) {
                    live[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![self.start];
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            if !live[s] {
                return Err(invalid(format!(
                    "state {s} cannot reach an accepting state"
                )));
            }
            stack.extend(self.states[s].edges.iter().map(|e| e.to));
        }
        Ok(())
    }

    /// Every token some edge can emit, sorted.
    pub fn alphabet(&self) -> Vec<String> {
        let mut tokens: Vec<String> = self
            .states
            .iter()
            .flat_map(|s| s.edges.iter().map(|e| e.token.clone()))
            .collect();
        tokens.sort();
        tokens.dedup();
        tokens
    }

    /// One random walk from the start state.
    pub fn walk<R: Rng>(&self, rng: &mut R) -> Vec<String> {
        let mut state = self.start;
        let mut out = Vec::new();
        while out.len() < self.max_len {
            let s = &self.states[state];
            let stop = if out.len() >= self.min_len { s.stop } else { 0 };
            let total: u32 = stop + s.edges.iter().map(|e| e.weight).sum::<u32>();
            if total == 0 {
                break;
            }
            let mut pick = rng.random_range(0..total);
            if pick < stop {
                break;
            }
            pick -= stop;
            let edge = s
                .edges
                .iter()
                .find(|e| {
                    if pick < e.weight {
                        true
                    } else {
                        pick -= e.weight;
                        false
                    }
                })
                .expect("weighted pick in range");
            out.push(edge.token.clone());
            state = edge.to;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub count: usize,
    pub anomalies: usize,
    pub seed: u64,
}

/// A training set, a questionable set, and which questionable sequences are
/// anomalies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub normal: Vec<Vec<String>>,
    pub questionable: Vec<Vec<String>>,
    pub anomalous: Vec<bool>,
}

pub fn synthesize(automaton: &Automaton, config: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal: Vec<_> = (0..config.count)
        .map(|_| automaton.walk(&mut rng))
        .collect();
    let mut questionable: Vec<_> = (0..config.count)
        .map(|_| automaton.walk(&mut rng))
        .collect();
    let mut anomalous = vec![false; questionable.len()];

    let alphabet = automaton.alphabet();
    let known: FxHashSet<&str> = alphabet.iter().map(String::as_str).collect();
    let mut marker = String::from("~");
    while known.iter().any(|t| t.starts_with(&marker)) {
        marker.push('~');
    }
    let foreign = alphabet.len().max(1);
    // as long as the longest normal trace, so length alone never hides one
    let len = normal
        .iter()
        .chain(&questionable)
        .map(Vec::len)
        .max()
        .unwrap_or(automaton.min_len)
        .max(1);
    for _ in 0..config.anomalies {
        let seq: Vec<String> = (0..len)
            .map(|_| format!("{marker}x{}", rng.random_range(0..foreign)))
            .collect();
        let at = rng.random_range(0..=questionable.len());
        questionable.insert(at, seq);
        anomalous.insert(at, true);
    }
    Corpus {
        normal,
        questionable,
        anomalous,
    }
}

/// Renders sequences in the blank-line-separated format.
pub fn to_blankline(sequences: &[Vec<String>]) -> String {
    let mut out = String::new();
    for seq in sequences {
        for token in seq {
            out.push_str(token);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

impl Corpus {
    /// Ground truth lines: `seq:<i>\tanomaly|normal`.
    pub fn truth(&self) -> String {
        self.anomalous
            .iter()
            .enumerate()
            .map(|(i, &a)| format!("seq:{i}\t{}\n", if a { "anomaly" } else { "normal" }))
            .collect()
    }

    /// Writes `normal.txt`, `questionable.txt` and `truth.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("normal.txt"), to_blankline(&self.normal))?;
        fs::write(
            dir.join("questionable.txt"),
            to_blankline(&self.questionable),
        )?;
        fs::write(dir.join("truth.txt"), self.truth())?;
        Ok(())
    }
}
