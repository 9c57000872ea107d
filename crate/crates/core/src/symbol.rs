use std::fmt;

/// Index into the terminal interner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TerminalId(pub u32);

/// Identifier of a production rule. Allocated monotonically, never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u32);

impl TerminalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TerminalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// A right-side symbol: an interned log entry or a reference to a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Terminal(TerminalId),
    Rule(RuleId),
}

impl Symbol {
    pub fn rule(self) -> Option<RuleId> {
        match self {
            Symbol::Rule(r) => Some(r),
            Symbol::Terminal(_) => None,
        }
    }

    pub fn terminal(self) -> Option<TerminalId> {
        match self {
            Symbol::Terminal(t) => Some(t),
            Symbol::Rule(_) => None,
        }
    }
}

impl From<TerminalId> for Symbol {
    fn from(t: TerminalId) -> Self {
        Symbol::Terminal(t)
    }
}

impl From<RuleId> for Symbol {
    fn from(r: RuleId) -> Self {
        Symbol::Rule(r)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Terminal(t) => t.fmt(f),
            Symbol::Rule(r) => r.fmt(f),
        }
    }
}

/// Role of a rule within the grammar.
///
/// The start rule lists one sequence rule per retained training sequence and
/// sits outside the reduction scope. Sequence rules each stand for a whole
/// input sequence and are never inlined. Internal rules are the shared
/// sub-patterns produced by reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Start,
    Sequence,
    Internal,
}

impl RuleKind {
    pub fn code(self) -> char {
        match self {
            RuleKind::Start => 'S',
            RuleKind::Sequence => 'Q',
            RuleKind::Internal => 'I',
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "S" => Some(RuleKind::Start),
            "Q" => Some(RuleKind::Sequence),
            "I" => Some(RuleKind::Internal),
            _ => None,
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Start => "start",
            RuleKind::Sequence => "sequence",
            RuleKind::Internal => "internal",
        })
    }
}
