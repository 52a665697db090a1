//! Boolean filter expressions over records, with a small textual grammar:
//!
//! ```text
//! expr     := or
//! or       := and ("or" and)*
//! and      := unary ("and" unary)*
//! unary    := "not" unary | "(" expr ")" | "true" | "false" | "@" preset | field test
//! test     := cmp literal
//!           | ["not"] "in" set
//!           | ["not"] "prefix_in" ["(" len ")"] set
//!           | "is" ("absent" | "present")
//! cmp      := "<" | "<=" | ">" | ">=" | "=" | "==" | "!="
//! set      := "{" [literal ("," literal)* [","]] "}"
//! ```
//!
//! Field paths: `eai_taxonomy.<field>.primary|secondary[.code]` (the
//! `eai_taxonomy.` prefix is optional), `quality_signals.<name>`,
//! `scores.<name>` or a bare `<name>` for a score, `url` and `id`.
//! An absent field fails every comparison and membership test.

mod parse;
mod presets;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::record::DocumentRecord;
use crate::taxonomy::TaxonomyField;

pub use parse::parse_filter;
pub use presets::{preset, preset_names, preset_source, DCLM_BASELINE_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Primary,
    Secondary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Field {
    Label(TaxonomyField, Slot),
    Signal(String),
    Score(String),
    Url,
    Id,
}

impl Field {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Field::Signal(_) | Field::Score(_) | Field::Id)
    }

    fn string<'a>(&self, r: &'a DocumentRecord) -> Option<&'a str> {
        match self {
            Field::Label(f, slot) => {
                let ann = r.annotation(*f)?;
                match slot {
                    Slot::Primary => Some(ann.primary.as_str()),
                    Slot::Secondary => ann.secondary.as_deref(),
                }
            }
            Field::Url => r.url.as_deref(),
            _ => None,
        }
    }

    fn number(&self, r: &DocumentRecord) -> Option<f64> {
        match self {
            Field::Signal(name) => r.signal(name),
            Field::Score(name) => r
                .scores
                .get(name)
                .copied()
                .or_else(|| r.extra.get(name).and_then(Value::as_f64)),
            Field::Id => Some(r.id as f64),
            _ => None,
        }
    }

    fn present(&self, r: &DocumentRecord) -> bool {
        if self.is_numeric() {
            self.number(r).is_some()
        } else {
            self.string(r).is_some()
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Label(field, Slot::Primary) => write!(f, "{field}.primary"),
            Field::Label(field, Slot::Secondary) => write!(f, "{field}.secondary"),
            Field::Signal(name) => write!(f, "quality_signals.{name}"),
            Field::Score(name) => write!(f, "scores.{name}"),
            Field::Url => f.write_str("url"),
            Field::Id => f.write_str("id"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    fn test<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    /// Unsigned integer literal, compared exactly against `id`.
    Int(u64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write_quoted(f, s),
            Literal::Num(x) => write!(f, "{x:?}"),
            Literal::Int(n) => write!(f, "{n}"),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    Const(bool),
    Compare { field: Field, op: CmpOp, value: Literal },
    In { field: Field, set: Vec<String> },
    /// With `len`, the code's first `len` characters must equal a key;
    /// without, some key must be a prefix of the code.
    PrefixIn { field: Field, len: Option<usize>, keys: Vec<String> },
    Absent(Field),
    Not(Box<FilterExpr>),
    And(Vec<FilterExpr>),
    Or(Vec<FilterExpr>),
    Preset { name: String, expr: Box<FilterExpr> },
}

/// True iff some key is a character prefix of `code`; with `len`, iff the
/// first `len` characters of `code` equal some key.
pub fn prefix_match(code: Option<&str>, keys: &[impl AsRef<str>], len: Option<usize>) -> bool {
    let Some(code) = code else { return false };
    match len {
        None => keys.iter().any(|k| code.starts_with(k.as_ref())),
        Some(n) => {
            let end = code.char_indices().nth(n).map_or(code.len(), |(i, _)| i);
            let head = &code[..end];
            keys.iter().any(|k| k.as_ref() == head)
        }
    }
}

impl FilterExpr {
    pub fn parse(text: &str) -> crate::Result<Self> {
        parse_filter(text)
    }

    pub fn eval(&self, r: &DocumentRecord) -> bool {
        match self {
            FilterExpr::Const(b) => *b,
            FilterExpr::Compare { field, op, value } => match value {
                Literal::Int(n) if *field == Field::Id => op.test(r.id, *n),
                Literal::Int(n) => field.number(r).is_some_and(|v| op.test(v, *n as f64)),
                Literal::Num(x) => field.number(r).is_some_and(|v| op.test(v, *x)),
                Literal::Str(s) => field.string(r).is_some_and(|v| op.test(v, s.as_str())),
            },
            FilterExpr::In { field, set } => field.string(r).is_some_and(|v| set.iter().any(|s| s == v)),
            FilterExpr::PrefixIn { field, len, keys } => prefix_match(field.string(r), keys, *len),
            FilterExpr::Absent(field) => !field.present(r),
            FilterExpr::Not(e) => !e.eval(r),
            FilterExpr::And(es) => es.iter().all(|e| e.eval(r)),
            FilterExpr::Or(es) => es.iter().any(|e| e.eval(r)),
            FilterExpr::Preset { expr, .. } => expr.eval(r),
        }
    }

    /// For a rejected record, the textual form of the first leaf (in
    /// evaluation order) responsible for the rejection.
    pub fn first_failing_leaf(&self, r: &DocumentRecord) -> Option<String> {
        if self.eval(r) {
            return None;
        }
        Some(self.blame(r))
    }

    fn blame(&self, r: &DocumentRecord) -> String {
        match self {
            FilterExpr::And(es) => es
                .iter()
                .find(|e| !e.eval(r))
                .map_or_else(|| self.to_string(), |e| e.blame(r)),
            FilterExpr::Or(es) => es.first().map_or_else(|| self.to_string(), |e| e.blame(r)),
            FilterExpr::Preset { expr, .. } => expr.blame(r),
            _ => self.to_string(),
        }
    }

    fn is_compound(&self) -> bool {
        matches!(self, FilterExpr::And(_) | FilterExpr::Or(_))
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, items: &[String]) -> fmt::Result {
    f.write_str("{")?;
    for (i, s) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_quoted(f, s)?;
    }
    f.write_str("}")
}

impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, es: &[FilterExpr], op: &str, empty: bool| {
            if es.is_empty() {
                return write!(f, "{empty}");
            }
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                if e.is_compound() {
                    write!(f, "({e})")?;
                } else {
                    write!(f, "{e}")?;
                }
            }
            Ok(())
        };
        match self {
            FilterExpr::Const(b) => write!(f, "{b}"),
            FilterExpr::Compare { field, op, value } => write!(f, "{field} {} {value}", op.symbol()),
            FilterExpr::In { field, set } => {
                write!(f, "{field} in ")?;
                write_set(f, set)
            }
            FilterExpr::PrefixIn { field, len, keys } => {
                write!(f, "{field} prefix_in")?;
                if let Some(n) = len {
                    write!(f, "({n})")?;
                }
                f.write_str(" ")?;
                write_set(f, keys)
            }
            FilterExpr::Absent(field) => write!(f, "{field} is absent"),
            FilterExpr::Not(e) => write!(f, "not ({e})"),
            FilterExpr::And(es) => join(f, es, "and", true),
            FilterExpr::Or(es) => join(f, es, "or", false),
            FilterExpr::Preset { name, .. } => write!(f, "@{name}"),
        }
    }
}

/// Kept/total counts and first-failing-leaf attribution. Shard stats merge
/// by addition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterStats {
    pub total: u64,
    pub kept: u64,
    pub rejected_by: BTreeMap<String, u64>,
}

impl FilterStats {
    pub fn kept_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.kept as f64 / self.total as f64
        }
    }

    pub fn merge(&mut self, other: &FilterStats) {
        self.total += other.total;
        self.kept += other.kept;
        for (leaf, n) in &other.rejected_by {
            *self.rejected_by.entry(leaf.clone()).or_default() += n;
        }
    }
}

/// Evaluates records in parallel; survivors keep input order.
pub fn run_filter(records: Vec<DocumentRecord>, expr: &FilterExpr) -> (Vec<DocumentRecord>, FilterStats) {
    let verdicts: Vec<Option<String>> = records.par_iter().map(|r| expr.first_failing_leaf(r)).collect();
    let mut stats = FilterStats {
        total: records.len() as u64,
        ..Default::default()
    };
    let mut kept = Vec::new();
    for (r, verdict) in records.into_iter().zip(verdicts) {
        match verdict {
            None => {
                stats.kept += 1;
                kept.push(r);
            }
            Some(leaf) => *stats.rejected_by.entry(leaf).or_default() += 1,
        }
    }
    (kept, stats)
}
