//! Statistical text quality signals and the three-stage keep/reject rules.
//!
//! Words are maximal non-whitespace runs. A word n-gram covers the characters
//! of its words (whitespace excluded), and every `frac_chars_*` ratio counts
//! n-gram occurrences with multiplicity in both numerator and denominator.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use unicode_general_category::{get_general_category, GeneralCategory};
use xxhash_rust::xxh3::xxh3_64;

use crate::error::{Error, Result};
use crate::record::{json_number, DocumentRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitySignals {
    #[serde(rename = "rps_doc_word_count")]
    pub word_count: u64,
    #[serde(rename = "rps_doc_frac_chars_top_2gram")]
    pub frac_chars_top_2gram: f64,
    #[serde(rename = "rps_doc_frac_chars_top_3gram")]
    pub frac_chars_top_3gram: f64,
    #[serde(rename = "rps_doc_frac_chars_dupe_5grams")]
    pub frac_chars_dupe_5grams: f64,
    #[serde(rename = "rps_doc_frac_chars_dupe_6grams")]
    pub frac_chars_dupe_6grams: f64,
    #[serde(rename = "rps_doc_frac_chars_dupe_7grams")]
    pub frac_chars_dupe_7grams: f64,
    #[serde(rename = "rps_doc_frac_chars_dupe_8grams")]
    pub frac_chars_dupe_8grams: f64,
    #[serde(rename = "rps_doc_frac_chars_dupe_9grams")]
    pub frac_chars_dupe_9grams: f64,
    #[serde(rename = "rps_doc_frac_chars_dupe_10grams")]
    pub frac_chars_dupe_10grams: f64,
    #[serde(rename = "rps_doc_frac_unique_words")]
    pub frac_unique_words: f64,
    #[serde(rename = "rps_doc_frac_no_alph_words")]
    pub frac_no_alph_words: f64,
    #[serde(rename = "rps_doc_ldnoobw_words")]
    pub ldnoobw_words: u64,
    #[serde(rename = "rps_doc_ml_english_score", default, skip_serializing_if = "Option::is_none")]
    pub ml_english_score: Option<f64>,
    #[serde(rename = "rps_doc_ml_math_score", default, skip_serializing_if = "Option::is_none")]
    pub ml_math_score: Option<f64>,
    #[serde(rename = "rps_doc_ml_web_code_score", default, skip_serializing_if = "Option::is_none")]
    pub ml_web_code_score: Option<f64>,
}

impl QualitySignals {
    /// All-zero signals with no classifier scores.
    pub fn zeroed() -> Self {
        Self {
            word_count: 0,
            frac_chars_top_2gram: 0.0,
            frac_chars_top_3gram: 0.0,
            frac_chars_dupe_5grams: 0.0,
            frac_chars_dupe_6grams: 0.0,
            frac_chars_dupe_7grams: 0.0,
            frac_chars_dupe_8grams: 0.0,
            frac_chars_dupe_9grams: 0.0,
            frac_chars_dupe_10grams: 0.0,
            frac_unique_words: 0.0,
            frac_no_alph_words: 0.0,
            ldnoobw_words: 0,
            ml_english_score: None,
            ml_math_score: None,
            ml_web_code_score: None,
        }
    }

    /// Value of a signal by its short name (without `rps_doc_`).
    pub fn get(&self, signal: Signal) -> Option<f64> {
        Some(match signal {
            Signal::WordCount => self.word_count as f64,
            Signal::FracCharsTop2gram => self.frac_chars_top_2gram,
            Signal::FracCharsTop3gram => self.frac_chars_top_3gram,
            Signal::FracCharsDupe(5) => self.frac_chars_dupe_5grams,
            Signal::FracCharsDupe(6) => self.frac_chars_dupe_6grams,
            Signal::FracCharsDupe(7) => self.frac_chars_dupe_7grams,
            Signal::FracCharsDupe(8) => self.frac_chars_dupe_8grams,
            Signal::FracCharsDupe(9) => self.frac_chars_dupe_9grams,
            Signal::FracCharsDupe(10) => self.frac_chars_dupe_10grams,
            Signal::FracCharsDupe(_) => return None,
            Signal::FracUniqueWords => self.frac_unique_words,
            Signal::FracNoAlphWords => self.frac_no_alph_words,
            Signal::LdnoobwWords => self.ldnoobw_words as f64,
            Signal::MlEnglishScore => return self.ml_english_score,
            Signal::MlMathScore => return self.ml_math_score,
            Signal::MlWebCodeScore => return self.ml_web_code_score,
        })
    }

    fn set_dupe(&mut self, n: usize, v: f64) {
        match n {
            5 => self.frac_chars_dupe_5grams = v,
            6 => self.frac_chars_dupe_6grams = v,
            7 => self.frac_chars_dupe_7grams = v,
            8 => self.frac_chars_dupe_8grams = v,
            9 => self.frac_chars_dupe_9grams = v,
            10 => self.frac_chars_dupe_10grams = v,
            _ => unreachable!("dupe n-gram width {n}"),
        }
    }

    /// Reads the typed view from a record's `quality_signals` object.
    pub fn from_map(map: &Map<String, Value>) -> Result<Self> {
        serde_json::from_value(Value::Object(map.clone()))
            .map_err(|e| Error::Param(format!("quality_signals: {e}")))
    }

    /// Writes every signal into the record's `quality_signals` namespace,
    /// keeping unrelated entries.
    pub fn write_to(&self, record: &mut DocumentRecord) {
        let Value::Object(fields) = serde_json::to_value(self).expect("plain struct") else {
            unreachable!()
        };
        let target = record.quality_signals.get_or_insert_with(Map::new);
        for (k, v) in fields {
            let v = v.as_f64().map_or(v.clone(), |x| if v.is_u64() { v } else { json_number(x) });
            target.insert(k, v);
        }
    }
}

/// Named signals referenced by the rule table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    WordCount,
    FracCharsTop2gram,
    FracCharsTop3gram,
    FracCharsDupe(u8),
    FracUniqueWords,
    FracNoAlphWords,
    LdnoobwWords,
    MlEnglishScore,
    MlMathScore,
    MlWebCodeScore,
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::WordCount => f.write_str("word_count"),
            Signal::FracCharsTop2gram => f.write_str("frac_chars_top_2gram"),
            Signal::FracCharsTop3gram => f.write_str("frac_chars_top_3gram"),
            Signal::FracCharsDupe(n) => write!(f, "frac_chars_dupe_{n}grams"),
            Signal::FracUniqueWords => f.write_str("frac_unique_words"),
            Signal::FracNoAlphWords => f.write_str("frac_no_alph_words"),
            Signal::LdnoobwWords => f.write_str("ldnoobw_words"),
            Signal::MlEnglishScore => f.write_str("ml_english_score"),
            Signal::MlMathScore => f.write_str("ml_math_score"),
            Signal::MlWebCodeScore => f.write_str("ml_web_code_score"),
        }
    }
}

/// Bad-words lexicon; entries may be multi-word phrases.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    phrases: HashSet<String>,
    max_words: usize,
}

impl Lexicon {
    /// One entry per line; blank lines are skipped.
    pub fn parse(text: &str) -> Self {
        let mut lex = Lexicon::default();
        for line in text.lines() {
            let words: Vec<String> = line.split_whitespace().map(normalize_word).collect();
            if words.is_empty() || words.iter().any(String::is_empty) {
                continue;
            }
            lex.max_words = lex.max_words.max(words.len());
            lex.phrases.insert(words.join(" "));
        }
        lex
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Occurrences of lexicon phrases in a sequence of raw words.
    pub fn count(&self, words: &[&str]) -> u64 {
        if self.phrases.is_empty() {
            return 0;
        }
        let norm: Vec<String> = words.iter().map(|w| normalize_word(w)).collect();
        let mut hits = 0;
        let mut buf = String::new();
        for start in 0..norm.len() {
            buf.clear();
            for (i, w) in norm[start..].iter().take(self.max_words).enumerate() {
                if i > 0 {
                    buf.push(' ');
                }
                buf.push_str(w);
                if self.phrases.contains(&buf) {
                    hits += 1;
                }
            }
        }
        hits
    }
}

/// Lowercase with leading and trailing non-alphanumerics removed.
fn normalize_word(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

pub fn is_letter(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::UppercaseLetter
            | GeneralCategory::LowercaseLetter
            | GeneralCategory::TitlecaseLetter
            | GeneralCategory::ModifierLetter
            | GeneralCategory::OtherLetter
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignalOptions {
    /// Lowercase words before n-gram statistics.
    pub case_fold: bool,
}

/// Identity hasher for keys that are already 64-bit hashes.
#[derive(Default)]
struct PreHashed(u64);

impl Hasher for PreHashed {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, _: &[u8]) {
        unreachable!("PreHashed only hashes u64 keys")
    }
    fn write_u64(&mut self, n: u64) {
        self.0 = n;
    }
}

type NgramCounts = HashMap<u64, u32, BuildHasherDefault<PreHashed>>;

fn ngram_key(hashes: &[u64]) -> u64 {
    hashes.iter().fold(0x243F_6A88_85A3_08D3u64, |acc, h| {
        (acc ^ h).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(31)
    })
}

pub fn compute_signals(text: &str, badwords: &Lexicon) -> QualitySignals {
    compute_signals_with(text, badwords, SignalOptions::default())
}

pub fn compute_signals_with(text: &str, badwords: &Lexicon, opts: SignalOptions) -> QualitySignals {
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut s = QualitySignals::zeroed();
    if words.is_empty() {
        return s;
    }
    let total_words = words.len() as f64;
    s.word_count = words.len() as u64;

    let unique: HashSet<&str> = words.iter().copied().collect();
    s.frac_unique_words = unique.len() as f64 / total_words;
    s.frac_no_alph_words = words.iter().filter(|w| !w.chars().any(is_letter)).count() as f64 / total_words;
    s.ldnoobw_words = badwords.count(&words);

    let hashes: Vec<u64> = words
        .iter()
        .map(|w| {
            if opts.case_fold {
                xxh3_64(w.to_lowercase().as_bytes())
            } else {
                xxh3_64(w.as_bytes())
            }
        })
        .collect();
    // prefix[i] = characters in words[..i]
    let mut prefix = Vec::with_capacity(words.len() + 1);
    prefix.push(0u64);
    for w in &words {
        prefix.push(prefix.last().unwrap() + w.chars().count() as u64);
    }
    let span = |i: usize, n: usize| prefix[i + n] - prefix[i];

    let mut counts = NgramCounts::default();
    for n in 2..=10usize {
        if words.len() < n {
            break;
        }
        counts.clear();
        let windows = words.len() - n + 1;
        let keys: Vec<u64> = (0..windows).map(|i| ngram_key(&hashes[i..i + n])).collect();
        for &k in &keys {
            *counts.entry(k).or_default() += 1;
        }
        let total: u64 = (0..windows).map(|i| span(i, n)).sum();
        if total == 0 {
            continue;
        }
        match n {
            2 | 3 => {
                // Most frequent n-gram; ties go to the one covering more characters.
                let mut best = (0u32, 0u64);
                for (i, k) in keys.iter().enumerate() {
                    let cand = (counts[k], span(i, n));
                    if cand > best {
                        best = cand;
                    }
                }
                let frac = (u64::from(best.0) * best.1) as f64 / total as f64;
                if n == 2 {
                    s.frac_chars_top_2gram = frac;
                } else {
                    s.frac_chars_top_3gram = frac;
                }
            }
            5..=10 => {
                let dup: u64 = (0..windows).filter(|&i| counts[&keys[i]] > 1).map(|i| span(i, n)).sum();
                s.set_dupe(n, dup as f64 / total as f64);
            }
            _ => {}
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Gt,
}

/// One row of the rule table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub signal: Signal,
    pub op: Comparison,
    pub threshold: f64,
}

impl Condition {
    const fn lt(signal: Signal, threshold: f64) -> Self {
        Self {
            signal,
            op: Comparison::Lt,
            threshold,
        }
    }

    const fn gt(signal: Signal, threshold: f64) -> Self {
        Self {
            signal,
            op: Comparison::Gt,
            threshold,
        }
    }

    /// Strict comparison; `None` when the signal is absent.
    pub fn holds(&self, signals: &QualitySignals) -> Option<bool> {
        let v = signals.get(self.signal)?;
        Some(match self.op {
            Comparison::Lt => v < self.threshold,
            Comparison::Gt => v > self.threshold,
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Comparison::Lt => "<",
            Comparison::Gt => ">",
        };
        write!(f, "{} {op} {}", self.signal, self.threshold)
    }
}

/// Versioned threshold table.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    pub version: &'static str,
    /// Any hit rejects.
    pub initial: Vec<Condition>,
    /// Any hit accepts, skipping `additional`.
    pub bypass: Vec<Condition>,
    /// Any hit rejects.
    pub additional: Vec<Condition>,
}

impl Default for RuleTable {
    fn default() -> Self {
        use Signal::*;
        Self {
            version: "v1",
            initial: vec![
                Condition::lt(WordCount, 50.0),
                Condition::gt(FracCharsTop2gram, 0.20),
                Condition::gt(FracCharsTop3gram, 0.18),
                Condition::gt(FracCharsDupe(10), 0.50),
                Condition::gt(FracCharsDupe(9), 0.52),
                Condition::gt(FracCharsDupe(8), 0.54),
                Condition::gt(FracCharsDupe(7), 0.56),
                Condition::gt(FracCharsDupe(6), 0.58),
                Condition::gt(FracCharsDupe(5), 0.60),
            ],
            bypass: vec![Condition::gt(MlMathScore, 0.3), Condition::gt(MlWebCodeScore, 0.3)],
            additional: vec![
                Condition::gt(FracUniqueWords, 0.95),
                Condition::gt(FracNoAlphWords, 0.6),
                Condition::gt(LdnoobwWords, 10.0),
                Condition::lt(MlEnglishScore, 0.6),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Keep,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleStage {
    Initial,
    Bypass,
    Additional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterDecision {
    pub verdict: Verdict,
    /// Stage and condition that decided the outcome; `None` when the
    /// document passed every rule without a bypass.
    pub stage: Option<RuleStage>,
    #[serde(serialize_with = "serialize_condition")]
    pub condition: Option<Condition>,
}

fn serialize_condition<S: serde::Serializer>(c: &Option<Condition>, s: S) -> Result<S::Ok, S::Error> {
    match c {
        Some(c) => s.serialize_str(&c.signal.to_string()),
        None => s.serialize_none(),
    }
}

impl FilterDecision {
    pub fn is_keep(&self) -> bool {
        self.verdict == Verdict::Keep
    }

    /// `stage.signal`, or `pass`.
    pub fn label(&self) -> String {
        match (self.stage, self.condition) {
            (Some(stage), Some(c)) => {
                let stage = match stage {
                    RuleStage::Initial => "rule1",
                    RuleStage::Bypass => "bypass",
                    RuleStage::Additional => "rule3",
                };
                format!("{stage}.{}", c.signal)
            }
            _ => "pass".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RulePolicy {
    /// An absent English score satisfies `ml_english_score < 0.6`.
    pub missing_english_rejects: bool,
}

impl Default for RulePolicy {
    fn default() -> Self {
        Self {
            missing_english_rejects: true,
        }
    }
}

pub fn apply_rules(signals: &QualitySignals) -> FilterDecision {
    apply_rules_with(signals, &RuleTable::default(), RulePolicy::default())
}

/// Initial filters reject first, then a bypass accepts, then the additional
/// filters reject. Absent classifier scores never trigger a bypass.
pub fn apply_rules_with(signals: &QualitySignals, table: &RuleTable, policy: RulePolicy) -> FilterDecision {
    let decide = |verdict, stage, condition| FilterDecision {
        verdict,
        stage: Some(stage),
        condition: Some(condition),
    };
    for c in &table.initial {
        if c.holds(signals).unwrap_or(true) {
            return decide(Verdict::Reject, RuleStage::Initial, *c);
        }
    }
    for c in &table.bypass {
        if c.holds(signals).unwrap_or(false) {
            return decide(Verdict::Keep, RuleStage::Bypass, *c);
        }
    }
    for c in &table.additional {
        let missing = if c.signal == Signal::MlEnglishScore {
            policy.missing_english_rejects
        } else {
            true
        };
        if c.holds(signals).unwrap_or(missing) {
            return decide(Verdict::Reject, RuleStage::Additional, *c);
        }
    }
    FilterDecision {
        verdict: Verdict::Keep,
        stage: None,
        condition: None,
    }
}
