mod common;

use common::*;
use proptest::prelude::*;
use taxonomy_forge::filter::{parse_filter, preset, preset_names, prefix_match, run_filter, FilterExpr};
use taxonomy_forge::record::DocumentRecord;
use taxonomy_forge::taxonomy::TaxonomyField as T;

const ATOMS: [&str; 12] = [
    r#"fdc.primary prefix_in {"51"}"#,
    r#"fdc.secondary prefix_in(5) {"005.1", "005.4"}"#,
    r#"doc_type_v1.primary in {"Academic/Research", "Social/Forum"}"#,
    r#"doc_type_v2.primary not in {"Tutorial"}"#,
    "finemath_score >= 3.25",
    "quality_signals.rps_doc_ml_eli5_score > 0.01811",
    r#"reasoning_depth.primary = "Basic Reasoning""#,
    "id != 7",
    "url is absent",
    "fdc.secondary is present",
    "true",
    "@math-w-fm",
];

fn expr_strategy() -> impl Strategy<Value = FilterExpr> {
    let leaf = (0..ATOMS.len()).prop_map(|i| parse_filter(ATOMS[i]).unwrap());
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| FilterExpr::Not(Box::new(e))),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(FilterExpr::And),
            proptest::collection::vec(inner, 2..4).prop_map(FilterExpr::Or),
        ]
    })
}

fn records() -> Vec<DocumentRecord> {
    preset_fixture()
        .into_iter()
        .enumerate()
        .map(|(i, r)| if i % 4 == 0 { r.with_url(format!("https://example.org/{i}")) } else { r })
        .collect()
}

proptest! {
    #[test]
    fn display_parses_back(e in expr_strategy()) {
        let text = e.to_string();
        prop_assert_eq!(parse_filter(&text).unwrap(), e);
    }

    #[test]
    fn de_morgan(a in expr_strategy(), b in expr_strategy()) {
        let lhs = FilterExpr::Not(Box::new(FilterExpr::And(vec![a.clone(), b.clone()])));
        let rhs = FilterExpr::Or(vec![FilterExpr::Not(Box::new(a.clone())), FilterExpr::Not(Box::new(b.clone()))]);
        let lhs2 = FilterExpr::Not(Box::new(FilterExpr::Or(vec![a.clone(), b.clone()])));
        let rhs2 = FilterExpr::And(vec![FilterExpr::Not(Box::new(a)), FilterExpr::Not(Box::new(b))]);
        for r in records() {
            prop_assert_eq!(lhs.eval(&r), rhs.eval(&r));
            prop_assert_eq!(lhs2.eval(&r), rhs2.eval(&r));
        }
    }

    #[test]
    fn filtering_is_idempotent(e in expr_strategy()) {
        let (once, stats) = run_filter(records(), &e);
        let (twice, stats2) = run_filter(once.clone(), &e);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(stats2.kept, stats.kept);
        prop_assert_eq!(stats.kept + stats.rejected_by.values().sum::<u64>(), stats.total);
    }

    #[test]
    fn rejected_records_name_a_failing_leaf(e in expr_strategy()) {
        for r in records() {
            prop_assert_eq!(e.eval(&r), e.first_failing_leaf(&r).is_none());
        }
    }

    #[test]
    fn prefix_semantics(code in "[0-9]{1,3}(\\.[0-9]{1,3})?", key in "[0-9]{1,4}") {
        prop_assert_eq!(prefix_match(Some(&code), &[&key], None), code.starts_with(&key));
        let truncated: String = code.chars().take(key.len()).collect();
        prop_assert_eq!(prefix_match(Some(&code), &[&key], Some(key.len())), truncated == key);
        prop_assert!(!prefix_match(None, &[&key], None));
    }
}

#[test]
fn preset_fixture_keep_sets() {
    for name in preset_names() {
        let (kept, stats) = run_filter(preset_fixture(), &preset(name).unwrap());
        let ids: Vec<u64> = kept.iter().map(|r| r.id).collect();
        assert_eq!(ids, preset_fixture_keeps(name), "{name}");
        assert_eq!(stats.total, 20);
    }
}

#[test]
fn whitelists_and_single_field_mutations() {
    for case in whitelist_cases() {
        let expr = preset(case.preset).unwrap();
        assert!(expr.eval(&build(&case.base)), "{} base", case.preset);
        for req in &case.requirements {
            for v in &req.allowed {
                assert!(expr.eval(&build(&with_value(&case.base, req.slot, v))), "{} {:?}={v:?}", case.preset, req.slot);
            }
            for v in &req.disallowed {
                assert!(!expr.eval(&build(&with_value(&case.base, req.slot, v))), "{} {:?}={v:?}", case.preset, req.slot);
            }
        }
    }
}

#[test]
fn medical_not_in_passes_on_absent_labels() {
    let r = DocumentRecord::new("x")
        .with_label(T::Fdc, "616", Some("572"))
        .with_label(T::DocTypeV2, "Academic Writing", None)
        .with_label(T::ReasoningDepth, "Basic Reasoning", None)
        .with_label(T::TechnicalCorrectness, "Highly Correct", None);
    assert!(preset("medical").unwrap().eval(&r));
}

#[test]
fn attribution_counts_first_failing_conjunct() {
    let expr = parse_filter(r#"fdc.primary prefix_in {"51"} and finemath_score >= 3.25"#).unwrap();
    let (_, stats) = run_filter(preset_fixture(), &expr);
    assert_eq!(stats.kept, 2);
    assert_eq!(stats.rejected_by[r#"fdc.primary prefix_in {"51"}"#], 16);
    assert_eq!(stats.rejected_by["scores.finemath_score >= 3.25"], 2);
}

#[test]
fn integer_ids_compare_exactly() {
    let big = (1u64 << 60) + 1;
    let r = DocumentRecord::new("x").with_id(big);
    assert!(parse_filter(&format!("id = {big}")).unwrap().eval(&r));
    assert!(!parse_filter(&format!("id = {}", big - 1)).unwrap().eval(&r));
}
