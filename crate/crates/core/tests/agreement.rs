mod common;

use common::*;
use proptest::prelude::*;
use taxonomy_forge::agreement::{agreement, expected_agreement, kappa, observed_agreement, AnnotatorModel};

#[test]
fn closed_form_matches_enumeration() {
    for i in 0..300 {
        let (m1, m2) = random_model_pair(i, 17);
        let (a, b) = (m1.to_model(), m2.to_model());
        for weighted in [false, true] {
            let closed = expected_agreement(&a, &b, weighted).unwrap();
            let exact = enumerated_pe(&m1, &m2, weighted);
            assert!((closed - exact).abs() < 1e-12, "pair {i} weighted={weighted}: {closed} vs {exact}");
        }
    }
}

#[test]
fn enumeration_is_a_distribution() {
    for i in 0..50 {
        let (m1, _) = random_model_pair(i, 5);
        let total: f64 = m1.enumerate().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_agrees_on_small_sample() {
    let (m1, m2) = random_model_pair(3, 99);
    let (mu, mw) = monte_carlo_pe(&m1, &m2, 200_000, 1);
    let (a, b) = (m1.to_model(), m2.to_model());
    let pu = expected_agreement(&a, &b, false).unwrap();
    let pw = expected_agreement(&a, &b, true).unwrap();
    let se = |p: f64| (p * (1.0 - p) / 200_000.0).sqrt();
    assert!((mu - pu).abs() < 4.0 * se(pu));
    assert!((mw - pw).abs() < 4.0 * se(pw));
}

#[test]
fn set_agreement_examples() {
    let both_empty = agreement(&labels(&[]), &labels(&[]), false);
    assert_eq!(both_empty, 1.0);
    assert_eq!(agreement(&labels(&["a", "b"]), &labels(&["b", "c"]), false), 1.0);
    assert!((agreement(&labels(&["a", "b"]), &labels(&["b", "c"]), true) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(agreement(&labels(&["a"]), &labels(&[]), true), 0.0);
    let pairs = vec![(labels(&["a"]), labels(&["a"])), (labels(&["a"]), labels(&["b"]))];
    assert_eq!(observed_agreement(&pairs, false).unwrap(), 0.5);
}

proptest! {
    #[test]
    fn chance_agreement_in_unit_interval(i in 0usize..10_000, seed in any::<u64>(), weighted in any::<bool>()) {
        let (m1, m2) = random_model_pair(i, seed);
        let p = expected_agreement(&m1.to_model(), &m2.to_model(), weighted).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn chance_agreement_is_symmetric(i in 0usize..10_000, seed in any::<u64>(), weighted in any::<bool>()) {
        let (m1, m2) = random_model_pair(i, seed);
        let (a, b) = (m1.to_model(), m2.to_model());
        let ab = expected_agreement(&a, &b, weighted).unwrap();
        let ba = expected_agreement(&b, &a, weighted).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn uniform_single_labels_agree_by_chance_one_in_k(k in 2usize..40, weighted in any::<bool>()) {
        let names: Vec<String> = (0..k).map(|i| format!("l{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let m = AnnotatorModel::uniform([0.0, 1.0, 0.0], &refs).unwrap();
        let p = expected_agreement(&m, &m, weighted).unwrap();
        prop_assert!((p - 1.0 / k as f64).abs() < 1e-12);
    }

    #[test]
    fn kappa_bounds(p_e in 0.0f64..0.999, p_o in 0.0f64..=1.0) {
        let k = kappa(p_o, p_e).unwrap();
        prop_assert!(k <= 1.0 + 1e-12);
        prop_assert!((kappa(1.0, p_e).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(kappa(p_e, p_e).unwrap().abs() < 1e-12);
    }
}

#[test]
fn kappa_rejects_degenerate_chance() {
    assert!(kappa(1.0, 1.0).is_err());
    assert!(kappa(1.2, 0.5).is_err());
}
