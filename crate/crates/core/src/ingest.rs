//! Readers that split raw trace text into labeled token sequences.
//!
//! Tokens stay opaque strings here; interning happens in the engine.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub label: String,
    pub tokens: Vec<String>,
    /// Set when the input ended before the sequence was closed.
    pub truncated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SequenceSet {
    pub sequences: Vec<LabeledSequence>,
}

impl SequenceSet {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn entries(&self) -> usize {
        self.sequences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn token_lists(&self) -> Vec<&[String]> {
        self.sequences.iter().map(|s| s.tokens.as_slice()).collect()
    }

    fn push(&mut self, label: String, tokens: Vec<String>, truncated: bool) {
        self.sequences.push(LabeledSequence {
            label,
            tokens,
            truncated,
        });
    }

    /// Prefixes every label with `scope:` so that sets read from several
    /// files can be concatenated without label clashes.
    pub fn scoped(mut self, scope: &str) -> Self {
        for s in &mut self.sequences {
            s.label = format!("{scope}:{}", s.label);
        }
        self
    }

    pub fn extend(&mut self, other: SequenceSet) {
        self.sequences.extend(other.sequences);
    }
}

/// Drops every input line that contains one of the exclusion substrings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineFilter {
    pub exclude: Vec<String>,
}

impl LineFilter {
    pub fn new(exclude: Vec<String>) -> Self {
        Self { exclude }
    }

    pub fn keeps(&self, line: &str) -> bool {
        !self.exclude.iter().any(|pat| line.contains(pat.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// One token per line, sequences separated by blank lines.
    BlankLine,
    /// `<pid> <syscall>` per line, one sequence per pid.
    Pid,
    /// Spans from a start-marker line through the next end-marker line.
    Marker,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "blankline" => Ok(InputFormat::BlankLine),
            "pid" => Ok(InputFormat::Pid),
            "marker" => Ok(InputFormat::Marker),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::BlankLine => "blankline",
            InputFormat::Pid => "pid",
            InputFormat::Marker => "marker",
        })
    }
}

fn filtered_lines<'a, R: BufRead + 'a>(
    stream: R,
    filter: &'a LineFilter,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    stream
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(move |item| match item {
            Ok((_, line)) => filter.keeps(line),
            Err(_) => true,
        })
}

/// Reads sequences of one token per line separated by blank lines. Labels are
/// `seq:<ordinal>`, counting from zero.
pub fn parse_blankline<R: BufRead>(stream: R, filter: &LineFilter) -> Result<SequenceSet> {
    let mut set = SequenceSet::default();
    let mut current = Vec::new();
    for item in filtered_lines(stream, filter) {
        let (_, line) = item?;
        let token = line.trim();
        if token.is_empty() {
            if !current.is_empty() {
                let label = format!("seq:{}", set.len());
                set.push(label, std::mem::take(&mut current), false);
            }
        } else {
            current.push(token.to_owned());
        }
    }
    if !current.is_empty() {
        let label = format!("seq:{}", set.len());
        set.push(label, current, false);
    }
    Ok(set)
}

/// Splits `<pid> <syscall>` lines into one sequence per pid, in order of each
/// pid's first appearance. Labels are `pid:<pid>`.
pub fn parse_pid_traces<R: BufRead>(stream: R, filter: &LineFilter) -> Result<SequenceSet> {
    let mut order: Vec<String> = Vec::new();
    let mut by_pid: FxHashMap<String, Vec<String>> = FxHashMap::default();
    for item in filtered_lines(stream, filter) {
        let (line_no, line) = item?;
        let mut fields = line.split_whitespace();
        let (pid, call) = match (fields.next(), fields.next(), fields.next()) {
            (None, _, _) => continue,
            (Some(pid), Some(call), None) => (pid, call),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected `<pid> <syscall>`".into(),
                })
            }
        };
        for (what, field) in [("pid", pid), ("syscall", call)] {
            if field.parse::<i64>().is_err() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("{what} {field:?} is not an integer"),
                });
            }
        }
        by_pid
            .entry(pid.to_owned())
            .or_insert_with(|| {
                order.push(pid.to_owned());
                Vec::new()
            })
            .push(call.to_owned());
    }
    let mut set = SequenceSet::default();
    for pid in order {
        let tokens = by_pid.remove(&pid).expect("pid recorded");
        set.push(format!("pid:{pid}"), tokens, false);
    }
    Ok(set)
}

/// Collects spans that open at a line containing `start` and close at the
/// next later line containing `end`, both lines included. Lines outside spans
/// are discarded. A span still open at end of input is kept and flagged as
/// truncated. Labels are `span:<ordinal>`.
pub fn parse_marker_delimited<R: BufRead>(
    stream: R,
    start: &str,
    end: &str,
    filter: &LineFilter,
) -> Result<SequenceSet> {
    let mut set = SequenceSet::default();
    let mut open: Option<Vec<String>> = None;
    for item in filtered_lines(stream, filter) {
        let (_, line) = item?;
        let entry = line.trim();
        if entry.is_empty() {
            continue;
        }
        match open.as_mut() {
            None => {
                if entry.contains(start) {
                    open = Some(vec![entry.to_owned()]);
                }
            }
            Some(span) => {
                span.push(entry.to_owned());
                if entry.contains(end) {
                    let label = format!("span:{}", set.len());
                    set.push(label, open.take().expect("open span"), false);
                }
            }
        }
    }
    if let Some(span) = open {
        let label = format!("span:{}", set.len());
        set.push(label, span, true);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> LineFilter {
        LineFilter::default()
    }

    fn tokens(set: &SequenceSet) -> Vec<Vec<&str>> {
        set.sequences
            .iter()
            .map(|s| s.tokens.iter().map(String::as_str).collect())
            .collect()
    }

    #[test]
    fn blankline_splits_on_empty_lines() {
        let set = parse_blankline("1\n2\n\n3\n".as_bytes(), &none()).unwrap();
        assert_eq!(tokens(&set), [vec!["1", "2"], vec!["3"]]);
        assert_eq!(set.sequences[1].label, "seq:1");
    }

    #[test]
    fn blankline_empty_input_gives_empty_set() {
        assert!(parse_blankline("".as_bytes(), &none()).unwrap().is_empty());
        assert!(parse_blankline("\n\n  \n".as_bytes(), &none())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn blankline_worked_example_fixture() {
        let text = "1\n2\n3\n4\n\n1\n2\n3\n5\n\n1\n2\n3\n4\n\n1\n2\n3\n7\n\n\n";
        let set = parse_blankline(text.as_bytes(), &none()).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.sequences.iter().all(|s| s.tokens.len() == 4));
    }

    #[test]
    fn blankline_filter_drops_lines() {
        let filter = LineFilter::new(vec!["signal".into()]);
        let set = parse_blankline("a\nsignal_handler\nb\n".as_bytes(), &filter).unwrap();
        assert_eq!(tokens(&set), [vec!["a", "b"]]);
    }

    #[test]
    fn pid_traces_group_by_process() {
        let text = "229 2\n229 1\n370 66\n370 5\n370 63\n";
        let set = parse_pid_traces(text.as_bytes(), &none()).unwrap();
        assert_eq!(tokens(&set), [vec!["2", "1"], vec!["66", "5", "63"]]);
        assert_eq!(set.sequences[0].label, "pid:229");
        assert_eq!(set.sequences[1].label, "pid:370");
    }

    #[test]
    fn pid_traces_single_process() {
        let set = parse_pid_traces("7 1\n7 2\n7 3\n".as_bytes(), &none()).unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn pid_traces_keep_per_pid_order_when_interleaved() {
        let set = parse_pid_traces("1 10\n2 20\n1 11\n2 21\n1 12\n".as_bytes(), &none()).unwrap();
        assert_eq!(tokens(&set), [vec!["10", "11", "12"], vec!["20", "21"]]);
    }

    #[test]
    fn pid_traces_report_bad_line() {
        let err = parse_pid_traces("1 10\n1 x\n".as_bytes(), &none()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_pid_traces("1 10 5\n".as_bytes(), &none()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn marker_spans_include_both_ends() {
        let text = "X\nS\na\nb\nE\nY\nS\nc\nE\n";
        let set = parse_marker_delimited(text.as_bytes(), "S", "E", &none()).unwrap();
        assert_eq!(
            tokens(&set),
            [vec!["S", "a", "b", "E"], vec!["S", "c", "E"]]
        );
        assert_eq!(set.sequences[1].label, "span:1");
        assert!(set.sequences.iter().all(|s| !s.truncated));
    }

    #[test]
    fn marker_without_start_gives_empty_set() {
        let set = parse_marker_delimited("a\nb\nE\n".as_bytes(), "S", "E", &none()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn marker_unclosed_span_is_flagged() {
        let set = parse_marker_delimited("S\na\n".as_bytes(), "S", "E", &none()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.sequences[0].truncated);
    }

    #[test]
    fn marker_on_trace_lines() {
        let text = "main:/../../server.c:516\n\
                    main:/../../server.c:536\n\
                    main:/../../server.c:538\n\
                    server_init:/../../server.c:170\n\
                    server_init:/../../server.c:172\n\
                    main:/../../server.c:540\n";
        let set =
            parse_marker_delimited(text.as_bytes(), "server_init:", "main:", &none()).unwrap();
        assert_eq!(
            set.sequences[0].tokens[0],
            "server_init:/../../server.c:170"
        );
        assert_eq!(set.sequences[0].tokens.len(), 3);
    }
}
