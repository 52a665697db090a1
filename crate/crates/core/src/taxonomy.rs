//! Taxonomy categories, per-document annotations and label sets.
//!
//! Records store ten annotated fields. The FDC field carries a full subject
//! code ("512", "005.1") and is projected onto three metric categories by
//! digit truncation, giving the twelve categories used by the metric layer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annotated fields as stored on a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxonomyField {
    Fdc,
    BloomCognitiveProcess,
    BloomKnowledgeDomain,
    DocTypeV1,
    DocTypeV2,
    ReasoningDepth,
    EducationLevel,
    TechnicalCorrectness,
    ExtractionArtifacts,
    MissingContent,
}

impl TaxonomyField {
    pub const ALL: [TaxonomyField; 10] = [
        TaxonomyField::Fdc,
        TaxonomyField::BloomCognitiveProcess,
        TaxonomyField::BloomKnowledgeDomain,
        TaxonomyField::DocTypeV1,
        TaxonomyField::DocTypeV2,
        TaxonomyField::ReasoningDepth,
        TaxonomyField::EducationLevel,
        TaxonomyField::TechnicalCorrectness,
        TaxonomyField::ExtractionArtifacts,
        TaxonomyField::MissingContent,
    ];

    /// Canonical key used in serialized records.
    pub fn key(self) -> &'static str {
        match self {
            TaxonomyField::Fdc => "fdc",
            TaxonomyField::BloomCognitiveProcess => "bloom_cognitive_process",
            TaxonomyField::BloomKnowledgeDomain => "bloom_knowledge_domain",
            TaxonomyField::DocTypeV1 => "doc_type_v1",
            TaxonomyField::DocTypeV2 => "doc_type_v2",
            TaxonomyField::ReasoningDepth => "reasoning_depth",
            TaxonomyField::EducationLevel => "education_level",
            TaxonomyField::TechnicalCorrectness => "technical_correctness",
            TaxonomyField::ExtractionArtifacts => "extraction_artifacts",
            TaxonomyField::MissingContent => "missing_content",
        }
    }

    /// Accepts the canonical key and the long names used by the released
    /// dataset. `dds` is read as the FDC field.
    pub fn from_key(key: &str) -> Option<Self> {
        let field = match key {
            "fdc" | "free_decimal_correspondence" | "dds" => TaxonomyField::Fdc,
            "bloom_cognitive_process" => TaxonomyField::BloomCognitiveProcess,
            "bloom_knowledge_domain" => TaxonomyField::BloomKnowledgeDomain,
            "doc_type_v1" | "document_type_v1" => TaxonomyField::DocTypeV1,
            "doc_type_v2" | "document_type_v2" => TaxonomyField::DocTypeV2,
            "reasoning_depth" => TaxonomyField::ReasoningDepth,
            "education_level" => TaxonomyField::EducationLevel,
            "technical_correctness" => TaxonomyField::TechnicalCorrectness,
            "extraction_artifacts" => TaxonomyField::ExtractionArtifacts,
            "missing_content" => TaxonomyField::MissingContent,
            _ => return None,
        };
        Some(field)
    }
}

impl fmt::Display for TaxonomyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// The twelve metric categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    FdcLevel1,
    FdcLevel2,
    FdcLevel3,
    BloomCognitiveProcess,
    BloomKnowledgeDomain,
    DocTypeV1,
    DocTypeV2,
    ReasoningDepth,
    EducationLevel,
    TechnicalCorrectness,
    ExtractionArtifacts,
    MissingContent,
}

impl Category {
    pub const ALL: [Category; 12] = [
        Category::FdcLevel1,
        Category::FdcLevel2,
        Category::FdcLevel3,
        Category::BloomCognitiveProcess,
        Category::BloomKnowledgeDomain,
        Category::DocTypeV1,
        Category::DocTypeV2,
        Category::ReasoningDepth,
        Category::EducationLevel,
        Category::TechnicalCorrectness,
        Category::ExtractionArtifacts,
        Category::MissingContent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::FdcLevel1 => "fdc_level_1",
            Category::FdcLevel2 => "fdc_level_2",
            Category::FdcLevel3 => "fdc_level_3",
            other => other.field().key(),
        }
    }

    pub fn field(self) -> TaxonomyField {
        match self {
            Category::FdcLevel1 | Category::FdcLevel2 | Category::FdcLevel3 => TaxonomyField::Fdc,
            Category::BloomCognitiveProcess => TaxonomyField::BloomCognitiveProcess,
            Category::BloomKnowledgeDomain => TaxonomyField::BloomKnowledgeDomain,
            Category::DocTypeV1 => TaxonomyField::DocTypeV1,
            Category::DocTypeV2 => TaxonomyField::DocTypeV2,
            Category::ReasoningDepth => TaxonomyField::ReasoningDepth,
            Category::EducationLevel => TaxonomyField::EducationLevel,
            Category::TechnicalCorrectness => TaxonomyField::TechnicalCorrectness,
            Category::ExtractionArtifacts => TaxonomyField::ExtractionArtifacts,
            Category::MissingContent => TaxonomyField::MissingContent,
        }
    }

    /// Maps a stored label code onto this category's label space.
    pub fn project<'a>(self, code: &'a str) -> std::borrow::Cow<'a, str> {
        let digits = match self {
            Category::FdcLevel1 => 1,
            Category::FdcLevel2 => 2,
            Category::FdcLevel3 => 3,
            _ => return code.into(),
        };
        code.chars().filter(|c| *c != '.').take(digits).collect::<String>().into()
    }

    /// Label set for this category on `annotation`; absent annotations are
    /// abstentions and project to the empty set.
    pub fn label_set(self, annotation: Option<&CategoryAnnotation>) -> LabelSet {
        let Some(ann) = annotation else {
            return LabelSet::empty();
        };
        let primary = self.project(&ann.primary).into_owned();
        match ann.secondary.as_deref().map(|s| self.project(s).into_owned()) {
            Some(second) if second != primary => LabelSet(vec![primary, second]),
            _ => LabelSet(vec![primary]),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(c) = Category::ALL.iter().find(|c| c.name() == s) {
            return Ok(*c);
        }
        match TaxonomyField::from_key(s) {
            Some(TaxonomyField::Fdc) => Ok(Category::FdcLevel3),
            Some(field) => Ok(*Category::ALL.iter().find(|c| c.field() == field).unwrap()),
            None => Err(Error::Param(format!("unknown category {s:?}"))),
        }
    }
}

/// Primary label plus optional distinct secondary label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategoryAnnotation {
    pub primary: String,
    pub secondary: Option<String>,
}

impl CategoryAnnotation {
    pub fn new(field: TaxonomyField, primary: &str, secondary: Option<&str>) -> Result<Self> {
        let primary = validate_code(field, primary)?;
        let secondary = secondary.map(|s| validate_code(field, s)).transpose()?;
        if secondary.as_deref() == Some(primary.as_str()) {
            return Err(Error::Annotation(format!(
                "{field}: secondary label {primary:?} equals primary"
            )));
        }
        Ok(Self { primary, secondary })
    }
}

fn validate_code(field: TaxonomyField, code: &str) -> Result<String> {
    let code = code.trim();
    if code.is_empty() {
        return Err(Error::Annotation(format!("{field}: empty label code")));
    }
    if field == TaxonomyField::Fdc && !is_fdc_code(code) {
        return Err(Error::Annotation(format!("{field}: malformed FDC code {code:?}")));
    }
    Ok(code.to_owned())
}

/// Digits with an optional single decimal point followed by more digits.
pub fn is_fdc_code(code: &str) -> bool {
    let (int, frac) = match code.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (code, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

/// One annotator's output for one category: zero, one or two distinct labels.
/// The empty set only represents malformed output or abstention.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LabelSet(Vec<String>);

impl LabelSet {
    pub fn empty() -> Self {
        LabelSet(Vec::new())
    }

    pub fn one(label: &str) -> Self {
        LabelSet(vec![label.trim().to_owned()])
    }

    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels.into_iter().map(|s| s.as_ref().trim().to_owned()).collect();
        if labels.len() > 2 {
            return Err(Error::Annotation(format!("label set has {} labels", labels.len())));
        }
        if labels.iter().any(String::is_empty) {
            return Err(Error::Annotation("empty label in label set".into()));
        }
        if labels.len() == 2 && labels[0] == labels[1] {
            return Err(Error::Annotation(format!("duplicate label {:?}", labels[0])));
        }
        Ok(LabelSet(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.iter().any(|l| l == label)
    }

    pub fn intersection_len(&self, other: &LabelSet) -> usize {
        self.0.iter().filter(|l| other.contains(l)).count()
    }
}
