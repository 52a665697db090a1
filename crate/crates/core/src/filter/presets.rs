//! The eight taxonomy dataset filters, written in the filter grammar.

use super::{parse_filter, FilterExpr};
use crate::error::{Error, Result};

/// DCLM classifier cut-off, read from `rps_doc_ml_eli5_score`.
pub const DCLM_BASELINE_THRESHOLD: f64 = 0.01811;

const TOP_MATH: &str = r#"
fdc.primary prefix_in {"51"}
and doc_type_v1.primary in {"Reference/Encyclopedic/Educational", "Code/Software", "Social/Forum", "Personal/Misc"}
and doc_type_v2.primary in {"Comment Section", "Documentation", "FAQ", "Knowledge Article", "Nonfiction Writing",
    "Personal Blog", "Q&A Forum", "Structured Data", "Tutorial"}
and reasoning_depth.primary in {"Basic Reasoning", "Intermediate Reasoning", "Advanced Reasoning", "Exceptional Reasoning"}
and technical_correctness.primary in {"Highly Correct", "Exceptionally Correct"}
"#;

const MATH_W_FM: &str = r#"
(fdc.primary prefix_in {"51"} or fdc.secondary prefix_in {"51"})
and finemath_score >= 3.25
"#;

const CODE: &str = r#"
fdc.primary prefix_in {"005.1", "005.3"}
and doc_type_v1.primary in {"Reference/Encyclopedic/Educational", "Social/Forum"}
and doc_type_v2.primary in {"Comment Section", "Documentation", "Knowledge Article", "Tutorial", "Personal Blog",
    "Q&A Forum"}
and reasoning_depth.primary in {"Intermediate Reasoning", "Advanced Reasoning", "Exceptional Reasoning"}
and technical_correctness.primary in {"Highly Correct"}
"#;

const CODE_W_DCLM: &str = r#"
fdc.primary prefix_in {"004", "005", "51"}
and doc_type_v2.primary in {"Personal Blog", "Knowledge Article", "Comment Section", "Documentation", "Tutorial",
    "Q&A Forum"}
and reasoning_depth.primary in {"Basic Reasoning", "Intermediate Reasoning", "Advanced Reasoning", "Exceptional Reasoning"}
and quality_signals.rps_doc_ml_eli5_score > 0.01811
"#;

const MEDICAL: &str = r#"
(
    (dds.primary prefix_in {"61"} and dds.secondary prefix_in {"50", "51", "54", "57", "58", "59", "61"})
    or (dds.secondary prefix_in {"61"} and dds.primary prefix_in {"50", "51", "54", "57", "58", "59", "61"})
)
and (
    doc_type_v1.primary in {"Academic/Research", "Reference/Encyclopedic/Educational"}
    or doc_type_v2.primary in {"Academic Writing", "Documentation", "Knowledge Article", "Q&A Forum"}
)
and doc_type_v1.primary not in {"News/Editorial", "Code/Software", "Social/Forum", "Promotional/Advertisement",
    "Adult/Pornographic", "Personal/Misc", "Machine-Generated", "E-Commerce/Marketplace", "Images/Videos/Audio"}
and doc_type_v2.primary not in {"About (Org.)", "About (Personal)", "Audio Transcript", "Comment Section",
    "Content Listing", "Creative Writing", "Legal Notices", "Listicle", "News (Org.)", "News Article",
    "Personal Blog", "Product Page", "Spam / Ads", "Structured Data", "Truncated", "Tutorial", "User Review"}
and reasoning_depth.primary in {"Basic Reasoning", "Intermediate Reasoning", "Advanced Reasoning", "Exceptional Reasoning"}
and technical_correctness.primary in {"Highly Correct", "Exceptionally Correct"}
"#;

const MEDICAL_W_DCLM: &str = "@medical and quality_signals.rps_doc_ml_eli5_score > 0.01811";

// "not in {Abstain, Indeterminate} and is not None" over the closed
// reasoning-depth vocabulary.
const STEM: &str = r#"
fdc.primary prefix_in {"50", "51", "52", "53", "54", "55", "56", "57", "58", "59", "60", "61", "62", "66", "00"}
and fdc.secondary prefix_in {"50", "51", "52", "53", "54", "55", "56", "57", "58", "59", "60", "61", "62", "66", "00"}
and reasoning_depth.primary in {"No Reasoning", "Basic Reasoning", "Intermediate Reasoning", "Advanced Reasoning",
    "Exceptional Reasoning"}
and (
    (
        (fdc.primary prefix_in(5) {"005.1", "005.4"} or fdc.secondary prefix_in(5) {"005.1", "005.4"})
        and doc_type_v1.primary in {"Academic/Research", "Reference/Encyclopedic/Educational", "Code/Software",
            "Social/Forum"}
        and doc_type_v2.primary in {"Academic Writing", "Comment Section", "Documentation", "Knowledge Article",
            "Personal Blog", "Q&A Forum", "Tutorial"}
    )
    or (
        (fdc.primary prefix_in {"61"} or fdc.secondary prefix_in {"61"})
        and doc_type_v1.primary in {"Academic/Research", "Reference/Encyclopedic/Educational", "Code/Software",
            "Legal/Regulatory"}
        and doc_type_v2.primary in {"Academic Writing", "Documentation", "FAQ", "Knowledge Article", "News Article",
            "Tutorial"}
    )
    or (
        (fdc.primary prefix_in {"62"} or fdc.secondary prefix_in {"62"})
        and doc_type_v1.primary in {"Academic/Research", "Reference/Encyclopedic/Educational", "Personal/Misc",
            "Legal/Regulatory"}
        and doc_type_v2.primary in {"Academic Writing", "Audio Transcript", "Documentation", "FAQ",
            "Knowledge Article", "News Article", "Tutorial"}
    )
    or (
        doc_type_v1.primary in {"Academic/Research", "Reference/Encyclopedic/Educational"}
        and doc_type_v2.primary in {"Academic Writing", "Knowledge Article", "News Article"}
    )
)
"#;

const STEM_W_DCLM: &str = "@stem and quality_signals.rps_doc_ml_eli5_score > 0.01811";

const PRESETS: [(&str, &str); 8] = [
    ("top-math", TOP_MATH),
    ("math-w-fm", MATH_W_FM),
    ("code", CODE),
    ("code-w-dclm", CODE_W_DCLM),
    ("medical", MEDICAL),
    ("medical-w-dclm", MEDICAL_W_DCLM),
    ("stem", STEM),
    ("stem-w-dclm", STEM_W_DCLM),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Filter-grammar source of a preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| s.trim())
}

pub fn preset(name: &str) -> Result<FilterExpr> {
    let source = preset_source(name).ok_or_else(|| Error::UnknownPreset {
        name: name.to_owned(),
        valid: preset_names().collect::<Vec<_>>().join(", "),
    })?;
    let expr = parse_filter(source).unwrap_or_else(|e| panic!("preset {name} does not parse: {e}"));
    Ok(FilterExpr::Preset {
        name: name.to_owned(),
        expr: Box::new(expr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::DocumentRecord;
    use crate::taxonomy::TaxonomyField as T;

    #[test]
    fn every_preset_parses() {
        for name in preset_names() {
            let e = preset(name).unwrap();
            assert_eq!(e.to_string(), format!("@{name}"));
        }
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        let msg = preset("math").unwrap_err().to_string();
        for name in preset_names() {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn threshold_constant_matches_sources() {
        let literal = DCLM_BASELINE_THRESHOLD.to_string();
        for name in ["code-w-dclm", "medical-w-dclm", "stem-w-dclm"] {
            assert!(preset_source(name).unwrap().contains(&literal));
        }
    }

    #[test]
    fn top_math_example() {
        let r = DocumentRecord::new("x")
            .with_label(T::Fdc, "512", None)
            .with_label(T::DocTypeV1, "Social/Forum", None)
            .with_label(T::DocTypeV2, "Q&A Forum", None)
            .with_label(T::ReasoningDepth, "Advanced Reasoning", None)
            .with_label(T::TechnicalCorrectness, "Highly Correct", None);
        assert!(preset("top-math").unwrap().eval(&r));
    }

    #[test]
    fn medical_needs_science_pairing() {
        let base = DocumentRecord::new("x")
            .with_label(T::DocTypeV1, "Academic/Research", None)
            .with_label(T::DocTypeV2, "Academic Writing", None)
            .with_label(T::ReasoningDepth, "Basic Reasoning", None)
            .with_label(T::TechnicalCorrectness, "Highly Correct", None);
        let med = preset("medical").unwrap();
        assert!(med.eval(&base.clone().with_label(T::Fdc, "616.2", Some("572"))));
        assert!(!med.eval(&base.clone().with_label(T::Fdc, "61", Some("302"))));
        assert!(!med.eval(&base.with_label(T::Fdc, "61", None)));
    }

    #[test]
    fn stem_w_dclm_requires_eli5() {
        let r = DocumentRecord::new("x")
            .with_label(T::Fdc, "530", Some("510"))
            .with_label(T::ReasoningDepth, "No Reasoning", None)
            .with_label(T::DocTypeV1, "Academic/Research", None)
            .with_label(T::DocTypeV2, "Knowledge Article", None);
        assert!(preset("stem").unwrap().eval(&r));
        let stem_dclm = preset("stem-w-dclm").unwrap();
        assert!(!stem_dclm.eval(&r.clone().with_signal("rps_doc_ml_eli5_score", 0.01)));
        assert!(stem_dclm.eval(&r.with_signal("rps_doc_ml_eli5_score", 0.02)));
    }
}
