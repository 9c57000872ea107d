//! Line-oriented model file.
//!
//! ```text
//! SEQGRAM-MODEL 1
//! terminals <N>
//! <id> <token>                     (N lines, token percent-escaped)
//! rules <M>
//! <rule-id> <S|Q|I> <len> <sym>... (M lines, sym is t<id> or n<rule-id>)
//! start <rule-id>
//! meta <training> <retained> <total-entries> <info-old>
//! ```

use std::io::{BufRead, Write};

use super::{Model, ModelMeta, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::interner::Interner;
use crate::symbol::{RuleId, RuleKind, Symbol, TerminalId};

const MAGIC: &str = "SEQGRAM-MODEL";

impl Model {
    pub fn save<W: Write>(&self, mut sink: W) -> Result<()> {
        sink.write_all(self.to_text().as_bytes())?;
        sink.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{MAGIC} {FORMAT_VERSION}\n"));
        out.push_str(&format!("terminals {}\n", self.interner.len()));
        for (id, token) in self.interner.tokens().enumerate() {
            out.push_str(&format!("{id} {}\n", escape(token)));
        }
        let rules: Vec<_> = self.grammar.rules().collect();
        out.push_str(&format!("rules {}\n", rules.len()));
        for rule in rules {
            out.push_str(&format!(
                "{} {} {}",
                rule.id.0,
                rule.kind.code(),
                rule.rhs.len()
            ));
            for sym in rule.rhs {
                match sym {
                    Symbol::Terminal(t) => out.push_str(&format!(" t{}", t.0)),
                    Symbol::Rule(r) => out.push_str(&format!(" n{}", r.0)),
                }
            }
            out.push('\n');
        }
        out.push_str(&format!("start {}\n", self.grammar.start().0));
        let m = &self.meta;
        out.push_str(&format!(
            "meta {} {} {} {}\n",
            m.training_sequences, m.retained_sequences, m.total_entries, m.info_old
        ));
        out
    }

    /// Reads and fully validates a model file.
    pub fn load<R: BufRead>(source: R) -> Result<Model> {
        let mut lines = Vec::new();
        for line in source.lines() {
            lines.push(line?);
        }
        Parser { lines, at: 0 }.model()
    }

    pub fn from_text(text: &str) -> Result<Model> {
        Model::load(text.as_bytes())
    }
}

struct Parser {
    lines: Vec<String>,
    at: usize,
}

impl Parser {
    fn line_no(&self) -> usize {
        self.at + 1
    }

    fn peek(&self) -> Option<&str> {
        self.lines.get(self.at).map(String::as_str)
    }

    fn next(&mut self, expected: &'static str) -> Result<(usize, String)> {
        let line = self
            .lines
            .get(self.at)
            .cloned()
            .ok_or(Error::Truncated { expected })?;
        self.at += 1;
        Ok((self.at, line))
    }

    fn format_err(line: usize, message: impl Into<String>) -> Error {
        Error::Format {
            line,
            message: message.into(),
        }
    }

    fn keyword(&mut self, word: &'static str) -> Result<Vec<u64>> {
        let (line, text) = self.next(word)?;
        let mut parts = text.split(' ');
        if parts.next() != Some(word) {
            return Err(Self::format_err(line, format!("expected `{word}`")));
        }
        parts
            .map(|p| {
                parse_u64(p).ok_or_else(|| Self::format_err(line, format!("bad number {p:?}")))
            })
            .collect()
    }

    fn model(mut self) -> Result<Model> {
        let (line, header) = self.next("header")?;
        match header.split_once(' ') {
            Some((MAGIC, version)) if version == FORMAT_VERSION.to_string() => {}
            Some((MAGIC, version)) => {
                return Err(Error::VersionMismatch {
                    found: version.to_owned(),
                })
            }
            _ => return Err(Self::format_err(line, "not a model file")),
        }

        let declared = single(self.keyword("terminals")?, self.at)? as usize;
        let mut interner = Interner::new();
        while self.peek().is_some_and(starts_with_digit) {
            let (line, text) = self.next("terminal")?;
            let (id, token) = text
                .split_once(' ')
                .ok_or_else(|| Self::format_err(line, "expected `<id> <token>`"))?;
            let token = unescape(token).ok_or_else(|| Self::format_err(line, "bad escape"))?;
            let expected = interner.len() as u64;
            if parse_u64(id) != Some(expected) {
                return Err(Self::format_err(
                    line,
                    format!("expected terminal id {expected}"),
                ));
            }
            let got = interner
                .intern(&token)
                .map_err(|e| Self::format_err(line, e.to_string()))?;
            if got.0 as u64 != expected {
                return Err(Self::format_err(line, format!("duplicate token {token:?}")));
            }
        }
        if interner.len() < declared && self.peek().is_none() {
            return Err(Error::Truncated {
                expected: "terminal",
            });
        }
        if interner.len() != declared {
            return Err(Error::CountMismatch {
                what: "terminals",
                declared,
                actual: interner.len(),
            });
        }

        let declared = single(self.keyword("rules")?, self.at)? as usize;
        let mut rules = Vec::new();
        while self.peek().is_some_and(starts_with_digit) {
            let (line, text) = self.next("rule")?;
            rules.push(parse_rule(line, &text)?);
        }
        if rules.len() < declared && self.peek().is_none() {
            return Err(Error::Truncated { expected: "rule" });
        }
        if rules.len() != declared {
            return Err(Error::CountMismatch {
                what: "rules",
                declared,
                actual: rules.len(),
            });
        }

        let start = RuleId(to_u32(single(self.keyword("start")?, self.at)?, self.at)?);
        let at = self.at + 1;
        let meta = self.keyword("meta")?;
        let [training, retained, total, info_old] = meta[..] else {
            return Err(Self::format_err(at, "meta needs four numbers"));
        };
        if self.peek().is_some() {
            return Err(Self::format_err(self.line_no(), "trailing content"));
        }
        if !rules.iter().any(|(id, _, _)| *id == start) {
            return Err(Error::UnknownRule(start));
        }
        let meta = ModelMeta {
            format_version: FORMAT_VERSION,
            training_sequences: training,
            retained_sequences: retained,
            total_entries: total,
            info_old,
        };
        Model::from_parts(interner, start, rules, meta)
    }
}

fn starts_with_digit(s: &str) -> bool {
    s.as_bytes().first().is_some_and(u8::is_ascii_digit)
}

fn single(values: Vec<u64>, line: usize) -> Result<u64> {
    match values[..] {
        [v] => Ok(v),
        _ => Err(Parser::format_err(line, "expected exactly one number")),
    }
}

fn to_u32(v: u64, line: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Parser::format_err(line, "id out of range"))
}

fn parse_u64(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_rule(line: usize, text: &str) -> Result<(RuleId, RuleKind, Vec<Symbol>)> {
    let bad = |m: &str| Parser::format_err(line, m);
    let mut parts = text.split(' ');
    let id = parts
        .next()
        .and_then(parse_u64)
        .ok_or_else(|| bad("bad rule id"))?;
    let id = RuleId(to_u32(id, line)?);
    let kind = parts
        .next()
        .and_then(RuleKind::from_code)
        .ok_or_else(|| bad("bad rule kind"))?;
    let len = parts
        .next()
        .and_then(parse_u64)
        .ok_or_else(|| bad("bad rule length"))? as usize;
    let rhs = parts
        .map(|p| {
            let (tag, num) = p.split_at(p.len().min(1));
            let num = parse_u64(num).ok_or_else(|| bad("bad symbol"))?;
            let num = to_u32(num, line)?;
            match tag {
                "t" => Ok(Symbol::Terminal(TerminalId(num))),
                "n" => Ok(Symbol::Rule(RuleId(num))),
                _ => Err(bad("bad symbol")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if rhs.len() != len {
        return Err(Error::CountMismatch {
            what: "right-side symbols",
            declared: len,
            actual: rhs.len(),
        });
    }
    Ok((id, kind, rhs))
}

/// Percent-escapes `%`, whitespace and control characters.
fn escape(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        if c == '%' || c.is_whitespace() || c.is_control() {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn unescape(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = text.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::train;
    use proptest::prelude::*;

    fn worked_example() -> Model {
        let seqs: Vec<Vec<String>> = ["1234", "1235", "1234", "1237"]
            .iter()
            .map(|s| s.chars().map(String::from).collect())
            .collect();
        train(&seqs).unwrap()
    }

    #[test]
    fn worked_example_file_shape() {
        let text = worked_example().to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "SEQGRAM-MODEL 1");
        assert_eq!(lines[1], "terminals 6");
        assert_eq!(lines[8], "rules 5");
        assert!(lines.last().unwrap().starts_with("meta 4 3 16 12"));
    }

    #[test]
    fn save_is_deterministic_and_round_trips() {
        let model = worked_example();
        let a = model.to_text();
        assert_eq!(a, model.to_text());
        let loaded = Model::from_text(&a).unwrap();
        assert_eq!(loaded.to_text(), a);
        assert_eq!(loaded.canonical_form(), model.canonical_form());
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = worked_example()
            .to_text()
            .replacen("SEQGRAM-MODEL 1", "SEQGRAM-MODEL 2", 1);
        assert!(matches!(
            Model::from_text(&text),
            Err(Error::VersionMismatch { .. })
        ));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let text = worked_example().to_text();
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            Model::from_text(&cut),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn tokens_with_whitespace_survive() {
        let model = train(&[vec!["a b", "100%", "tab\there", "line\nbreak", "ü"]]).unwrap();
        let text = model.to_text();
        assert!(text.contains("0 a%20b\n"));
        assert!(text.contains("1 100%25\n"));
        let loaded = Model::from_text(&text).unwrap();
        let tokens: Vec<&str> = loaded.interner().tokens().collect();
        assert_eq!(tokens, ["a b", "100%", "tab\there", "line\nbreak", "ü"]);
    }

    proptest! {
        #[test]
        fn escaping_round_trips(s in "\\PC*|[ %\t\n\r\u{85}a]*") {
            let e = escape(&s);
            prop_assert!(!e.contains(char::is_whitespace));
            prop_assert_eq!(unescape(&e), Some(s));
        }
    }
}
