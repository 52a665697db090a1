//! Domain recall of vetted base-URL documents under a filter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::FilterExpr;
use crate::record::DocumentRecord;

const MATH_URLS: &str = include_str!("../data/gold_math.txt");
const WEB_CODE_URLS: &str = include_str!("../data/gold_web_code.txt");

/// Lowercases the host and drops an `http://`/`https://` scheme and a single
/// leading `www.`. The path keeps its case.
pub fn normalize_url(url: &str) -> String {
    let url = url.trim();
    let lower = url.to_ascii_lowercase();
    let rest = ["https://", "http://"]
        .iter()
        .find(|s| lower.starts_with(*s))
        .map_or(url, |s| &url[s.len()..]);
    let (host, path) = rest.split_at(rest.find('/').unwrap_or(rest.len()));
    let host = host.to_ascii_lowercase();
    let host = host.strip_prefix("www.").unwrap_or(&host);
    format!("{host}{path}")
}

/// Named list of human-vetted base URLs, stored normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldUrlSet {
    pub name: String,
    base_urls: Vec<String>,
}

impl GoldUrlSet {
    pub fn new<I, S>(name: impl Into<String>, urls: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut base_urls: Vec<String> = Vec::new();
        for url in urls {
            let norm = normalize_url(url.as_ref());
            if norm.is_empty() {
                return Err(Error::Param("empty gold base URL".into()));
            }
            if !base_urls.contains(&norm) {
                base_urls.push(norm);
            }
        }
        if base_urls.is_empty() {
            return Err(Error::Empty("gold URL set has no entries"));
        }
        Ok(Self {
            name: name.into(),
            base_urls,
        })
    }

    /// One base URL per line; blank lines and `#` comments are ignored.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let urls = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        Self::new(name, urls)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(name, &std::fs::read_to_string(path)?)
    }

    /// The vetted math list.
    pub fn math() -> Self {
        Self::parse("math", MATH_URLS).expect("bundled list")
    }

    /// The vetted web-code list.
    pub fn web_code() -> Self {
        Self::parse("web-code", WEB_CODE_URLS).expect("bundled list")
    }

    pub fn base_urls(&self) -> &[String] {
        &self.base_urls
    }
}

pub fn match_gold(url: &str, gold: &GoldUrlSet) -> bool {
    let url = normalize_url(url);
    gold.base_urls.iter().any(|base| url.starts_with(base.as_str()))
}

/// |D|, |D+|, |D̂| and |D̂ ∩ D+|; shard counters merge by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RecallCounts {
    pub total: u64,
    pub positives: u64,
    pub kept: u64,
    pub kept_positives: u64,
}

impl RecallCounts {
    pub fn add(&mut self, is_positive: bool, is_kept: bool) {
        self.total += 1;
        self.positives += u64::from(is_positive);
        self.kept += u64::from(is_kept);
        self.kept_positives += u64::from(is_positive && is_kept);
    }

    pub fn merge(&mut self, other: &RecallCounts) {
        self.total += other.total;
        self.positives += other.positives;
        self.kept += other.kept;
        self.kept_positives += other.kept_positives;
    }

    pub fn report(&self) -> Result<RecallReport> {
        if self.total == 0 {
            return Err(Error::Empty("corpus has no documents"));
        }
        if self.positives == 0 {
            return Err(Error::Empty("no document matches the gold URL set; recall is undefined"));
        }
        Ok(RecallReport {
            recall: self.kept_positives as f64 / self.positives as f64,
            kept: self.kept as f64 / self.total as f64,
            counts: *self,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallReport {
    pub recall: f64,
    pub kept: f64,
    pub counts: RecallCounts,
}

/// Single pass over `corpus`. Documents without a URL are never positives.
pub fn recall_and_kept<'a, I>(corpus: I, filter: &FilterExpr, gold: &GoldUrlSet) -> Result<RecallReport>
where
    I: IntoIterator<Item = &'a DocumentRecord>,
{
    let mut counts = RecallCounts::default();
    for r in corpus {
        let positive = r.url.as_deref().is_some_and(|u| match_gold(u, gold));
        counts.add(positive, filter.eval(r));
    }
    counts.report()
}
