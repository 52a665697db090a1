//! Overlap agreement between label sets and the chance-corrected annotator
//! kappa.
//!
//! Two label sets agree when they share a label or are both empty; the
//! weighted variant scores |a ∩ b| / |a ∪ b|. Expected agreement assumes each
//! annotator independently draws a set size from its fertility distribution
//! and then draws labels from its label distribution, the second label
//! without replacement. The closed form sums over set-size pairs:
//!
//! ```text
//! P_e = f1[0] f2[0] + Σ_{j,k ∈ {1,2}} f1[j] f2[k] p(j,k)
//! p(1,1) = s11 Σx w1x w2x
//! p(1,2) = s12 Σx w1x w2x (1 + r2x)
//! p(2,1) = s12 Σx w1x w2x (1 + r1x)
//! p(2,2) = s22 Σx w1x w2x (1 + r1x)(1 + r2x)
//!          + a Σ_{x≠y} [w1x w1y / (1 - w1x)] [w2x w2y / (1 - w2x)]
//!          + a Σ_{x≠y} [w1x w1y / (1 - w1x)] [w2y w2x / (1 - w2y)]
//! r_n,y  = Σ_{x≠y} w_n,x / (1 - w_n,x)
//! ```
//!
//! Unweighted: every `s` is 1 and `a = -1` (identical two-label sets are hit
//! by two scenarios). Weighted: `s11 = 1`, `s12 = 1/2`, `s22 = 1/3` and
//! `a = 1/3` (identical sets score 1, not 2/3).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::record::DocumentRecord;
use crate::taxonomy::{Category, LabelSet};

const DIST_TOLERANCE: f64 = 1e-12;

pub fn agree_unweighted(a: &LabelSet, b: &LabelSet) -> u8 {
    u8::from((a.is_empty() && b.is_empty()) || a.intersection_len(b) > 0)
}

pub fn agree_weighted(a: &LabelSet, b: &LabelSet) -> f64 {
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn agreement(a: &LabelSet, b: &LabelSet, weighted: bool) -> f64 {
    if weighted {
        agree_weighted(a, b)
    } else {
        f64::from(agree_unweighted(a, b))
    }
}

/// Fertility and label-choice distribution of one annotator on one category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatorModel {
    fertility: [f64; 3],
    label_dist: BTreeMap<String, f64>,
}

impl AnnotatorModel {
    pub fn new(fertility: [f64; 3], label_dist: BTreeMap<String, f64>) -> Result<Self> {
        let model = Self {
            fertility,
            label_dist,
        };
        model.validate()?;
        Ok(model)
    }

    /// Same fertility, uniform over `labels`.
    pub fn uniform(fertility: [f64; 3], labels: &[&str]) -> Result<Self> {
        let w = 1.0 / labels.len() as f64;
        Self::new(fertility, labels.iter().map(|l| (l.to_string(), w)).collect())
    }

    pub fn fertility(&self) -> [f64; 3] {
        self.fertility
    }

    pub fn label_dist(&self) -> &BTreeMap<String, f64> {
        &self.label_dist
    }

    fn validate(&self) -> Result<()> {
        let f = self.fertility;
        if f.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Model(format!("fertility has negative or non-finite entries: {f:?}")));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > DIST_TOLERANCE {
            return Err(Error::Model(format!("fertility does not sum to 1: {f:?}")));
        }
        if self.label_dist.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Model("label distribution has negative or non-finite entries".into()));
        }
        let emits = f[1] + f[2] > 0.0;
        let total: f64 = self.label_dist.values().sum();
        if emits && (total - 1.0).abs() > DIST_TOLERANCE {
            return Err(Error::Model(format!("label distribution sums to {total}, not 1")));
        }
        if f[2] > 0.0 {
            if let Some((label, _)) = self.label_dist.iter().find(|(_, w)| **w >= 1.0) {
                return Err(Error::Model(format!(
                    "label {label:?} has probability 1 but two-label fertility is {}; a distinct second label cannot be drawn",
                    f[2]
                )));
            }
        }
        Ok(())
    }
}

/// How fitting treats empty annotations (parse failures).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyHandling {
    /// Empty sets count toward `f[0]`.
    #[default]
    Keep,
    /// Empty sets are ignored when fitting.
    Drop,
}

/// Which label positions feed the label-choice distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPooling {
    /// Primary and secondary labels pooled.
    #[default]
    Pooled,
    PrimaryOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    pub empty: EmptyHandling,
    pub pooling: LabelPooling,
}

/// Count accumulator behind [`fit_annotator_model`]. Counts merge by
/// addition, so shards can be fitted independently.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelCounts {
    sizes: [u64; 3],
    labels: BTreeMap<String, u64>,
}

impl ModelCounts {
    pub fn add(&mut self, set: &LabelSet, opts: FitOptions) {
        if set.is_empty() && opts.empty == EmptyHandling::Drop {
            return;
        }
        self.sizes[set.len()] += 1;
        let take = match opts.pooling {
            LabelPooling::Pooled => 2,
            LabelPooling::PrimaryOnly => 1,
        };
        for label in set.labels().iter().take(take) {
            *self.labels.entry(label.clone()).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: &ModelCounts) {
        for (a, b) in self.sizes.iter_mut().zip(other.sizes) {
            *a += b;
        }
        for (label, n) in &other.labels {
            *self.labels.entry(label.clone()).or_default() += n;
        }
    }

    pub fn documents(&self) -> u64 {
        self.sizes.iter().sum()
    }

    pub fn to_model(&self) -> Result<AnnotatorModel> {
        let docs = self.documents();
        if docs == 0 {
            return Err(Error::Empty("no annotations to fit"));
        }
        let fertility = self.sizes.map(|n| n as f64 / docs as f64);
        let emitted: u64 = self.labels.values().sum();
        let label_dist = self
            .labels
            .iter()
            .map(|(l, n)| (l.clone(), *n as f64 / emitted as f64))
            .collect();
        AnnotatorModel::new(fertility, label_dist)
    }
}

pub fn fit_annotator_model(annotations: &[LabelSet]) -> Result<AnnotatorModel> {
    fit_annotator_model_with(annotations, FitOptions::default())
}

pub fn fit_annotator_model_with(annotations: &[LabelSet], opts: FitOptions) -> Result<AnnotatorModel> {
    let mut counts = ModelCounts::default();
    for set in annotations {
        counts.add(set, opts);
    }
    counts.to_model()
}

struct Weights {
    s11: f64,
    s12: f64,
    s22: f64,
    overcount: f64,
}

const UNWEIGHTED: Weights = Weights {
    s11: 1.0,
    s12: 1.0,
    s22: 1.0,
    overcount: -1.0,
};

const WEIGHTED: Weights = Weights {
    s11: 1.0,
    s12: 0.5,
    s22: 1.0 / 3.0,
    overcount: 1.0 / 3.0,
};

/// Closed-form chance agreement between two independent annotators.
pub fn expected_agreement(m1: &AnnotatorModel, m2: &AnnotatorModel, weighted: bool) -> Result<f64> {
    m1.validate()?;
    m2.validate()?;
    let k = if weighted { WEIGHTED } else { UNWEIGHTED };
    let [f10, f11, f12] = m1.fertility;
    let [f20, f21, f22] = m2.fertility;

    let labels: BTreeSet<&str> = m1
        .label_dist
        .keys()
        .chain(m2.label_dist.keys())
        .map(String::as_str)
        .collect();
    let weight = |m: &AnnotatorModel, l: &str| m.label_dist.get(l).copied().unwrap_or(0.0);
    let w1: Vec<f64> = labels.iter().map(|l| weight(m1, l)).collect();
    let w2: Vec<f64> = labels.iter().map(|l| weight(m2, l)).collect();
    // Σx w1x w2x, the single-label match probability.
    let shared: f64 = w1.iter().zip(&w2).map(|(a, b)| a * b).sum();

    let mut p_e = f10 * f20;
    if f11 * f21 > 0.0 {
        p_e += f11 * f21 * k.s11 * shared;
    }
    let r1 = (f12 > 0.0).then(|| second_pick_odds(&w1));
    let r2 = (f22 > 0.0).then(|| second_pick_odds(&w2));
    if let (true, Some(r2)) = (f11 > 0.0, &r2) {
        let p12: f64 = (0..w1.len()).map(|x| w1[x] * w2[x] * (1.0 + r2[x])).sum();
        p_e += f11 * f22 * k.s12 * p12;
    }
    if let (true, Some(r1)) = (f21 > 0.0, &r1) {
        let p21: f64 = (0..w1.len()).map(|x| w1[x] * w2[x] * (1.0 + r1[x])).sum();
        p_e += f12 * f21 * k.s12 * p21;
    }
    if let (Some(r1), Some(r2)) = (&r1, &r2) {
        let single: f64 = (0..w1.len())
            .map(|x| w1[x] * w2[x] * (1.0 + r1[x] + r2[x] + r1[x] * r2[x]))
            .sum();
        // Both cross terms range over ordered pairs x ≠ y; each is expanded
        // as a full product minus its diagonal.
        let joint = |x: usize| w1[x] * w2[x];
        let same_order: f64 = (0..w1.len())
            .map(|x| joint(x) / ((1.0 - w1[x]) * (1.0 - w2[x])) * (shared - joint(x)))
            .sum();
        let a: Vec<f64> = (0..w1.len()).map(|x| joint(x) / (1.0 - w1[x])).collect();
        let b: Vec<f64> = (0..w1.len()).map(|x| joint(x) / (1.0 - w2[x])).collect();
        let swapped = a.iter().sum::<f64>() * b.iter().sum::<f64>()
            - a.iter().zip(&b).map(|(a, b)| a * b).sum::<f64>();
        p_e += f12 * f22 * (k.s22 * single + k.overcount * (same_order + swapped));
    }
    Ok(p_e)
}

/// r_y = Σ_{x≠y} w_x / (1 - w_x) for every label y.
fn second_pick_odds(w: &[f64]) -> Vec<f64> {
    let odds: Vec<f64> = w.iter().map(|w| w / (1.0 - w)).collect();
    let total: f64 = odds.iter().sum();
    odds.iter().map(|o| total - o).collect()
}

/// Mean agreement over annotation pairs.
pub fn observed_agreement(pairs: &[(LabelSet, LabelSet)], weighted: bool) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("no annotation pairs"));
    }
    let total: f64 = pairs.iter().map(|(a, b)| agreement(a, b, weighted)).sum();
    Ok(total / pairs.len() as f64)
}

/// (p_o - p_e) / (1 - p_e), unclamped.
pub fn kappa(p_o: f64, p_e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_o) {
        return Err(Error::Param(format!("p_o = {p_o} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::Param(format!("p_e = {p_e} outside [0, 1)")));
    }
    if p_e >= 1.0 {
        return Err(Error::DegenerateChance(p_e));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementReport {
    pub p_o: f64,
    pub p_e: f64,
    pub kappa: f64,
    pub n_pairs: usize,
    pub weighted: bool,
}

impl AgreementReport {
    pub fn new(p_o: f64, p_e: f64, n_pairs: usize, weighted: bool) -> Result<Self> {
        Ok(Self {
            p_o,
            p_e,
            kappa: kappa(p_o, p_e)?,
            n_pairs,
            weighted,
        })
    }
}

/// Agreement of two annotators over the same documents, with chance
/// agreement from models fitted on each annotator's own labels.
pub fn pair_report(
    first: &[LabelSet],
    second: &[LabelSet],
    weighted: bool,
    opts: FitOptions,
) -> Result<AgreementReport> {
    assert_eq!(first.len(), second.len(), "annotation sequences must be aligned");
    let pairs: Vec<(LabelSet, LabelSet)> = first.iter().cloned().zip(second.iter().cloned()).collect();
    let p_o = observed_agreement(&pairs, weighted)?;
    let m1 = fit_annotator_model_with(first, opts)?;
    let m2 = fit_annotator_model_with(second, opts)?;
    let p_e = expected_agreement(&m1, &m2, weighted)?;
    AgreementReport::new(p_o, p_e, pairs.len(), weighted)
}

/// Per-category annotations of one annotator, keyed by document id.
pub type AnnotationTable = BTreeMap<Category, BTreeMap<u64, LabelSet>>;

/// Builds an annotation table from records. Categories without an annotation
/// on a record get the empty label set.
pub fn annotation_table(records: &[DocumentRecord], categories: &[Category]) -> AnnotationTable {
    categories
        .iter()
        .map(|&cat| {
            let docs = records
                .iter()
                .map(|r| (r.id, cat.label_set(r.annotation(cat.field()))))
                .collect();
            (cat, docs)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnotatorKappa {
    pub vs_gold1: AgreementReport,
    pub vs_gold2: AgreementReport,
    pub mean_kappa: f64,
}

/// Candidate-vs-gold kappa per category, averaged over the two golds.
pub fn annotator_kappa(
    candidate: &AnnotationTable,
    gold1: &AnnotationTable,
    gold2: &AnnotationTable,
    weighted: bool,
    opts: FitOptions,
) -> Result<BTreeMap<Category, AnnotatorKappa>> {
    let mut out = BTreeMap::new();
    for (&cat, cand_docs) in candidate {
        let empty = BTreeMap::new();
        let g1 = gold1.get(&cat).unwrap_or(&empty);
        let g2 = gold2.get(&cat).unwrap_or(&empty);
        let missing: BTreeSet<u64> = cand_docs
            .keys()
            .chain(g1.keys())
            .chain(g2.keys())
            .filter(|id| !(cand_docs.contains_key(id) && g1.contains_key(id) && g2.contains_key(id)))
            .copied()
            .collect();
        if !missing.is_empty() {
            return Err(Error::IdMismatch {
                category: cat.to_string(),
                missing: missing.into_iter().collect(),
            });
        }
        let cand: Vec<LabelSet> = cand_docs.values().cloned().collect();
        let vs_gold1 = pair_report(&cand, &g1.values().cloned().collect::<Vec<_>>(), weighted, opts)?;
        let vs_gold2 = pair_report(&cand, &g2.values().cloned().collect::<Vec<_>>(), weighted, opts)?;
        out.insert(
            cat,
            AnnotatorKappa {
                vs_gold1,
                vs_gold2,
                mean_kappa: (vs_gold1.kappa + vs_gold2.kappa) / 2.0,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(labels: &[&str]) -> LabelSet {
        LabelSet::new(labels.iter().copied()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn unweighted_agreement_cases() {
        assert_eq!(agree_unweighted(&set(&["x"]), &set(&["x", "y"])), 1);
        assert_eq!(agree_unweighted(&set(&[]), &set(&[])), 1);
        assert_eq!(agree_unweighted(&set(&["x"]), &set(&["y"])), 0);
        assert_eq!(agree_unweighted(&set(&[]), &set(&["y"])), 0);
    }

    #[test]
    fn weighted_agreement_cases() {
        assert_eq!(agree_weighted(&set(&["x", "y"]), &set(&["y", "x"])), 1.0);
        assert_eq!(agree_weighted(&set(&["x"]), &set(&["x", "y"])), 0.5);
        assert!(close(agree_weighted(&set(&["x", "y"]), &set(&["y", "z"])), 1.0 / 3.0));
        assert_eq!(agree_weighted(&set(&[]), &set(&[])), 1.0);
        assert_eq!(agree_weighted(&set(&[]), &set(&["a"])), 0.0);
    }

    #[test]
    fn fit_counts() {
        let m = fit_annotator_model(&[set(&["a"]), set(&["a"]), set(&["b"])]).unwrap();
        assert_eq!(m.fertility(), [0.0, 1.0, 0.0]);
        assert!(close(m.label_dist()["a"], 2.0 / 3.0));
        assert!(close(m.label_dist()["b"], 1.0 / 3.0));

        let m = fit_annotator_model(&[set(&[]), set(&["a"])]).unwrap();
        assert_eq!(m.fertility(), [0.5, 0.5, 0.0]);
        assert_eq!(m.label_dist()["a"], 1.0);

        let m = fit_annotator_model(&[set(&["a", "b"]), set(&["a"])]).unwrap();
        assert_eq!(m.fertility(), [0.0, 0.5, 0.5]);
        assert!(close(m.label_dist()["a"], 2.0 / 3.0));
        assert!(close(m.label_dist()["b"], 1.0 / 3.0));

        assert!(fit_annotator_model(&[]).is_err());
    }

    #[test]
    fn fit_options() {
        let data = [set(&[]), set(&["a", "b"]), set(&["a"])];
        let dropped = fit_annotator_model_with(
            &data,
            FitOptions {
                empty: EmptyHandling::Drop,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(dropped.fertility(), [0.0, 0.5, 0.5]);
        let primary = fit_annotator_model_with(
            &data,
            FitOptions {
                pooling: LabelPooling::PrimaryOnly,
                ..Default::default()
            },
        );
        // Only "a" is ever primary, yet two-label sets exist.
        assert!(primary.is_err());
    }

    #[test]
    fn counts_merge_like_concatenation() {
        let opts = FitOptions::default();
        let left = [set(&["a"]), set(&[]), set(&["a", "c"])];
        let right = [set(&["b", "a"]), set(&["c"])];
        let mut a = ModelCounts::default();
        left.iter().for_each(|s| a.add(s, opts));
        let mut b = ModelCounts::default();
        right.iter().for_each(|s| b.add(s, opts));
        a.merge(&b);
        let mut all = ModelCounts::default();
        left.iter().chain(&right).for_each(|s| all.add(s, opts));
        assert_eq!(a, all);
    }

    #[test]
    fn single_label_uniform() {
        let m = AnnotatorModel::uniform([0.0, 1.0, 0.0], &["a", "b"]).unwrap();
        assert!(close(expected_agreement(&m, &m, false).unwrap(), 0.5));
        for k in 1..=12 {
            let labels: Vec<String> = (0..k).map(|i| format!("l{i}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let m = AnnotatorModel::uniform([0.0, 1.0, 0.0], &refs).unwrap();
            assert!(close(expected_agreement(&m, &m, false).unwrap(), 1.0 / k as f64));
        }
    }

    #[test]
    fn single_label_is_sum_of_squares() {
        let w: BTreeMap<String, f64> = [("a", 0.5), ("b", 0.3), ("c", 0.2)]
            .iter()
            .map(|(l, p)| (l.to_string(), *p))
            .collect();
        let m = AnnotatorModel::new([0.0, 1.0, 0.0], w).unwrap();
        assert!(close(expected_agreement(&m, &m, false).unwrap(), 0.25 + 0.09 + 0.04));
    }

    #[test]
    fn all_empty_annotators_always_agree() {
        let m = AnnotatorModel::new([1.0, 0.0, 0.0], BTreeMap::new()).unwrap();
        assert_eq!(expected_agreement(&m, &m, true).unwrap(), 1.0);
        assert!(matches!(kappa(1.0, 1.0), Err(Error::DegenerateChance(_))));
    }

    #[test]
    fn invalid_models_rejected() {
        let certain: BTreeMap<String, f64> = [("a".to_string(), 1.0)].into();
        assert!(AnnotatorModel::new([0.0, 0.5, 0.5], certain.clone()).is_err());
        assert!(AnnotatorModel::new([0.0, 1.0, 0.0], certain).is_ok());
        assert!(AnnotatorModel::new([0.2, 0.2, 0.2], BTreeMap::new()).is_err());
        let neg: BTreeMap<String, f64> = [("a".to_string(), 1.5), ("b".to_string(), -0.5)].into();
        assert!(AnnotatorModel::new([0.0, 1.0, 0.0], neg).is_err());
        let short: BTreeMap<String, f64> = [("a".to_string(), 0.5)].into();
        assert!(AnnotatorModel::new([0.0, 1.0, 0.0], short).is_err());
    }

    #[test]
    fn observed_cases() {
        let pairs = [(set(&["x"]), set(&["x"])), (set(&["x"]), set(&["y"]))];
        assert_eq!(observed_agreement(&pairs, false).unwrap(), 0.5);
        let same = [(set(&["x"]), set(&["x"])), (set(&["a", "b"]), set(&["b", "a"]))];
        assert_eq!(observed_agreement(&same, false).unwrap(), 1.0);
        assert_eq!(observed_agreement(&same, true).unwrap(), 1.0);
        assert_eq!(observed_agreement(&[(set(&["x"]), set(&["x", "y"]))], true).unwrap(), 0.5);
        assert!(observed_agreement(&[], false).is_err());
    }

    #[test]
    fn kappa_values() {
        assert!(close(kappa(0.93, 0.75).unwrap(), 0.72));
        assert_eq!(kappa(0.4, 0.4).unwrap(), 0.0);
        assert!((kappa(0.94, 0.78).unwrap() - 0.727).abs() < 1e-3);
        // Below-chance agreement is reported raw.
        assert!(close(kappa(0.0, 0.9).unwrap(), -9.0));
        assert!(kappa(1.2, 0.5).is_err());
        assert!(kappa(0.5, -0.1).is_err());
    }
}
