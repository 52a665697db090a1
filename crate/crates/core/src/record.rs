//! Newline-delimited JSON document records.
//!
//! Recognized top-level fields:
//!
//! | field             | type                                                   |
//! |-------------------|--------------------------------------------------------|
//! | `id`              | u64 (number or decimal string); defaults to `doc_id(text)` |
//! | `text`            | string, required                                       |
//! | `url`             | string                                                 |
//! | `eai_taxonomy`    | object: field -> `{primary, secondary}`                 |
//! | `quality_signals` | object of signal values (`rps_doc_*`)                  |
//! | `scores`          | object: name -> number                                 |
//!
//! Labels may be written as a bare string or as `{"code": "...", ...}`; they
//! are always written back in the object form. Every other field, including
//! unknown keys under `eai_taxonomy`, is carried through unchanged.

use std::collections::BTreeMap;

use serde_json::{Map, Value};
use xxhash_rust::xxh3::xxh3_64;

use crate::error::{Error, Result};
use crate::taxonomy::{CategoryAnnotation, TaxonomyField};

/// xxh3-64 digest of the raw text bytes.
pub fn doc_id(text: &[u8]) -> u64 {
    xxh3_64(text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentRecord {
    pub id: u64,
    pub text: String,
    pub url: Option<String>,
    pub annotations: BTreeMap<TaxonomyField, CategoryAnnotation>,
    /// Raw `quality_signals` namespace; see [`crate::quality::QualitySignals`]
    /// for the typed view.
    pub quality_signals: Option<Map<String, Value>>,
    pub scores: BTreeMap<String, f64>,
    /// Unrecognized keys inside `eai_taxonomy`.
    pub taxonomy_extra: Map<String, Value>,
    /// Unrecognized top-level fields.
    pub extra: Map<String, Value>,
}

impl DocumentRecord {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        Self {
            id: doc_id(text.as_bytes()),
            text,
            url: None,
            annotations: BTreeMap::new(),
            quality_signals: None,
            scores: BTreeMap::new(),
            taxonomy_extra: Map::new(),
            extra: Map::new(),
        }
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = id;
        self
    }

    pub fn with_url(mut self, url: impl Into<String>) -> Self {
        self.url = Some(url.into());
        self
    }

    pub fn with_label(mut self, field: TaxonomyField, primary: &str, secondary: Option<&str>) -> Self {
        let ann = CategoryAnnotation::new(field, primary, secondary).expect("valid annotation");
        self.annotations.insert(field, ann);
        self
    }

    pub fn with_score(mut self, name: &str, value: f64) -> Self {
        self.scores.insert(name.to_owned(), value);
        self
    }

    pub fn with_signal(mut self, name: &str, value: f64) -> Self {
        self.quality_signals
            .get_or_insert_with(Map::new)
            .insert(name.to_owned(), json_number(value));
        self
    }

    pub fn annotation(&self, field: TaxonomyField) -> Option<&CategoryAnnotation> {
        self.annotations.get(&field)
    }

    /// Numeric lookup in the `quality_signals` namespace. `name` may omit the
    /// `rps_doc_` prefix.
    pub fn signal(&self, name: &str) -> Option<f64> {
        let signals = self.quality_signals.as_ref()?;
        signals
            .get(name)
            .or_else(|| signals.get(&format!("rps_doc_{name}")))
            .and_then(signal_value)
    }

    pub fn to_value(&self) -> Value {
        let mut obj = self.extra.clone();
        obj.insert("id".into(), Value::from(self.id));
        obj.insert("text".into(), Value::from(self.text.as_str()));
        if let Some(url) = &self.url {
            obj.insert("url".into(), Value::from(url.as_str()));
        }
        if !self.annotations.is_empty() || !self.taxonomy_extra.is_empty() {
            let mut tax = self.taxonomy_extra.clone();
            for (field, ann) in &self.annotations {
                let mut entry = Map::new();
                entry.insert("primary".into(), code_object(&ann.primary));
                if let Some(sec) = &ann.secondary {
                    entry.insert("secondary".into(), code_object(sec));
                }
                tax.insert(field.key().into(), Value::Object(entry));
            }
            obj.insert("eai_taxonomy".into(), Value::Object(tax));
        }
        if let Some(signals) = &self.quality_signals {
            obj.insert("quality_signals".into(), Value::Object(signals.clone()));
        }
        if !self.scores.is_empty() {
            let scores = self.scores.iter().map(|(k, v)| (k.clone(), json_number(*v))).collect();
            obj.insert("scores".into(), Value::Object(scores));
        }
        Value::Object(obj)
    }

    /// One JSON line without the trailing newline.
    pub fn to_json_line(&self) -> String {
        self.to_value().to_string()
    }
}

/// Signal values are numbers; booleans are read as 0/1.
fn signal_value(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::Bool(b) => Some(f64::from(u8::from(*b))),
        _ => None,
    }
}

pub(crate) fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn code_object(code: &str) -> Value {
    let mut m = Map::new();
    m.insert("code".into(), Value::from(code));
    Value::Object(m)
}

/// Parses one serialized record. `line` is the 1-based line number reported
/// in errors.
pub fn parse_record(text: &str, line: usize) -> Result<DocumentRecord> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::record(line, e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(Error::record(line, "record is not a JSON object"));
    };

    let text = match obj.remove("text") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(Error::record(line, "field `text` is not a string")),
        None => return Err(Error::record(line, "missing field `text`")),
    };
    let id = match obj.remove("id") {
        None | Some(Value::Null) => doc_id(text.as_bytes()),
        Some(Value::Number(n)) => n
            .as_u64()
            .ok_or_else(|| Error::record(line, format!("id {n} is not a 64-bit unsigned integer")))?,
        Some(Value::String(s)) => s
            .trim()
            .parse()
            .map_err(|_| Error::record(line, format!("id {s:?} is not a 64-bit unsigned integer")))?,
        Some(other) => return Err(Error::record(line, format!("invalid id {other}"))),
    };
    let url = match obj.remove("url") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(Error::record(line, "field `url` is not a string")),
    };

    let mut annotations = BTreeMap::new();
    let mut taxonomy_extra = Map::new();
    match obj.remove("eai_taxonomy") {
        None | Some(Value::Null) => {}
        Some(Value::Object(tax)) => {
            for (key, value) in tax {
                match TaxonomyField::from_key(&key) {
                    Some(field) => {
                        if let Some(ann) = parse_annotation(field, &value).map_err(|e| Error::record(line, e.to_string()))? {
                            annotations.insert(field, ann);
                        }
                    }
                    None => {
                        taxonomy_extra.insert(key, value);
                    }
                }
            }
        }
        Some(_) => return Err(Error::record(line, "field `eai_taxonomy` is not an object")),
    }

    let quality_signals = match obj.remove("quality_signals") {
        None | Some(Value::Null) => None,
        Some(Value::Object(m)) => Some(m),
        Some(_) => return Err(Error::record(line, "field `quality_signals` is not an object")),
    };

    let mut scores = BTreeMap::new();
    match obj.remove("scores") {
        None | Some(Value::Null) => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let x = v
                    .as_f64()
                    .ok_or_else(|| Error::record(line, format!("score {k:?} is not a number")))?;
                scores.insert(k, x);
            }
        }
        Some(_) => return Err(Error::record(line, "field `scores` is not an object")),
    }

    Ok(DocumentRecord {
        id,
        text,
        url,
        annotations,
        quality_signals,
        scores,
        taxonomy_extra,
        extra: obj,
    })
}

fn parse_annotation(field: TaxonomyField, value: &Value) -> Result<Option<CategoryAnnotation>> {
    let label = |v: Option<&Value>| -> Result<Option<String>> {
        match v {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(Value::Object(m)) => label_code(m.get("code")),
            Some(other) => Err(Error::Annotation(format!("{field}: invalid label {other}"))),
        }
    };
    let Value::Object(m) = value else {
        if value.is_null() {
            return Ok(None);
        }
        return Err(Error::Annotation(format!("{field}: annotation is not an object")));
    };
    let Some(primary) = label(m.get("primary"))? else {
        return Ok(None);
    };
    let secondary = label(m.get("secondary"))?;
    CategoryAnnotation::new(field, &primary, secondary.as_deref()).map(Some)
}

fn label_code(v: Option<&Value>) -> Result<Option<String>> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(other) => Err(Error::Annotation(format!("invalid label code {other}"))),
    }
}
