//! Oracles and fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxonomy_forge::agreement::AnnotatorModel;
use taxonomy_forge::quality::{Lexicon, QualitySignals, RuleStage, Verdict};
use taxonomy_forge::record::{parse_record, DocumentRecord};
use taxonomy_forge::taxonomy::{LabelSet, TaxonomyField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- agreement

/// Annotator model over label indices `0..w.len()`.
#[derive(Debug, Clone)]
pub struct IndexModel {
    pub f: [f64; 3],
    pub w: Vec<f64>,
}

impl IndexModel {
    pub fn label(i: usize) -> String {
        format!("l{i}")
    }

    pub fn to_model(&self) -> AnnotatorModel {
        let dist: BTreeMap<String, f64> = self
            .w
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (Self::label(i), *w))
            .collect();
        AnnotatorModel::new(self.f, dist).expect("valid generated model")
    }

    fn pick(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, w) in self.w.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.w.iter().rposition(|w| *w > 0.0).unwrap()
    }

    /// Draws a label set: size by fertility, labels without replacement.
    pub fn sample(&self, rng: &mut impl Rng) -> ([usize; 2], usize) {
        let u: f64 = rng.gen();
        if u < self.f[0] {
            return ([0, 0], 0);
        }
        let first = self.pick(rng);
        if u < self.f[0] + self.f[1] {
            return ([first, 0], 1);
        }
        loop {
            let second = self.pick(rng);
            if second != first {
                return ([first, second], 2);
            }
        }
    }

    /// Exact distribution over label sets.
    pub fn enumerate(&self) -> Vec<(Vec<usize>, f64)> {
        let mut out = vec![(vec![], self.f[0])];
        let k = self.w.len();
        for x in 0..k {
            out.push((vec![x], self.f[1] * self.w[x]));
        }
        if self.f[2] > 0.0 {
            for x in 0..k {
                for y in x + 1..k {
                    let (wx, wy) = (self.w[x], self.w[y]);
                    let p = wx * wy / (1.0 - wx) + wy * wx / (1.0 - wy);
                    out.push((vec![x, y], self.f[2] * p));
                }
            }
        }
        out
    }
}

pub fn set_agreement(a: &[usize], b: &[usize], weighted: bool) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 1.0;
    }
    if weighted {
        inter as f64 / union as f64
    } else if inter > 0 {
        1.0
    } else {
        0.0
    }
}

/// P_e by summing over every pair of label sets.
pub fn enumerated_pe(m1: &IndexModel, m2: &IndexModel, weighted: bool) -> f64 {
    let (s1, s2) = (m1.enumerate(), m2.enumerate());
    let mut total = 0.0;
    for (a, pa) in &s1 {
        for (b, pb) in &s2 {
            total += pa * pb * set_agreement(a, b, weighted);
        }
    }
    total
}

/// Monte-Carlo P_e for both variants from the same draws.
pub fn monte_carlo_pe(m1: &IndexModel, m2: &IndexModel, n: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut unweighted, mut weighted) = (0.0, 0.0);
    for _ in 0..n {
        let (a, la) = m1.sample(&mut r);
        let (b, lb) = m2.sample(&mut r);
        unweighted += set_agreement(&a[..la], &b[..lb], false);
        weighted += set_agreement(&a[..la], &b[..lb], true);
    }
    (unweighted / n as f64, weighted / n as f64)
}

fn random_simplex(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - r.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Pair `i` of the randomized model family: vocabulary size `2 + i % 9`,
/// fertility with occasional zero entries, and occasionally a label only
/// the first annotator uses.
pub fn random_model_pair(i: usize, seed: u64) -> (IndexModel, IndexModel) {
    let mut r = rng(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let k = 2 + i % 9;
    let fertility = |r: &mut ChaCha8Rng, j: usize| {
        let mut f = random_simplex(r, 3);
        if (i + j) % 5 == 0 {
            f[2] = 0.0;
        }
        if (i + j) % 7 == 3 {
            f[0] = 0.0;
        }
        let total: f64 = f.iter().sum();
        [f[0] / total, f[1] / total, f[2] / total]
    };
    let f1 = fertility(&mut r, 0);
    let f2 = fertility(&mut r, 1);
    let w1 = random_simplex(&mut r, k);
    let mut w2 = random_simplex(&mut r, k);
    if k >= 3 && i % 4 == 1 {
        w2[0] = 0.0;
        let total: f64 = w2.iter().sum();
        w2.iter_mut().for_each(|w| *w /= total);
    }
    (IndexModel { f: f1, w: w1 }, IndexModel { f: f2, w: w2 })
}

pub fn labels(items: &[&str]) -> LabelSet {
    LabelSet::new(items.iter().copied()).unwrap()
}

// ---------------------------------------------------------------------- NMI

/// 2·I(X;Y) / (H(X) + H(Y)) straight from the definition; 0 when both
/// marginals are constant.
pub fn brute_force_nmi(counts: &[Vec<u64>]) -> f64 {
    let n: f64 = counts.iter().flatten().sum::<u64>() as f64;
    let rows: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64 / n).collect();
    let cols: Vec<f64> = (0..counts[0].len())
        .map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64 / n)
        .collect();
    let entropy = |p: &[f64]| -> f64 { p.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum() };
    let mut mi = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if *c > 0 {
                let p = *c as f64 / n;
                mi += p * (p / (rows[i] * cols[j])).ln();
            }
        }
    }
    let h = entropy(&rows) + entropy(&cols);
    if h == 0.0 {
        0.0
    } else {
        2.0 * mi / h
    }
}

// ------------------------------------------------------------------ quality

/// Five-letter lowercase word for index `i`.
pub fn word(mut i: usize) -> String {
    let mut s = vec![b'a'; 5];
    for c in s.iter_mut().rev() {
        *c = b'a' + (i % 26) as u8;
        i /= 26;
    }
    String::from_utf8(s).unwrap()
}

/// glibc-style LCG stream, mirrored by the fixture derivation script.
pub fn lcg_words(n: usize, vocab: usize, seed: u64) -> Vec<String> {
    let mut x = seed;
    (0..n)
        .map(|_| {
            x = (x.wrapping_mul(1_103_515_245) + 12_345) % (1 << 31);
            word(((x >> 16) as usize) % vocab)
        })
        .collect()
}

pub fn quality_lexicon() -> Lexicon {
    Lexicon::parse("darn\nheck off\n")
}

pub struct QualityCase {
    pub name: &'static str,
    pub text: String,
    pub english: Option<f64>,
    pub math: Option<f64>,
    pub web_code: Option<f64>,
    pub verdict: Verdict,
    pub stage: Option<RuleStage>,
    pub label: &'static str,
}

impl QualityCase {
    pub fn signals(&self) -> QualitySignals {
        let mut s = taxonomy_forge::quality::compute_signals(&self.text, &quality_lexicon());
        s.ml_english_score = self.english;
        s.ml_math_score = self.math;
        s.ml_web_code_score = self.web_code;
        s
    }
}

/// Twelve crafted documents, one per branch of the keep/reject rules.
pub fn quality_fixture() -> Vec<QualityCase> {
    use RuleStage::*;
    use Verdict::*;
    let join = |w: Vec<String>| w.join(" ");

    let mut top3 = Vec::new();
    let mut j = 0;
    for _ in 0..6 {
        top3.extend(["a".repeat(30), "b".into(), "c".repeat(30)]);
        top3.extend((0..4).map(|g| word(1000 + j + g)));
        j += 4;
    }
    while top3.len() < 60 {
        top3.push(word(1000 + j));
        j += 1;
    }

    let mut noalph = Vec::new();
    let mut x: u64 = 7;
    for i in 0..100 {
        x = (x.wrapping_mul(1_103_515_245) + 12_345) % (1 << 31);
        let v = (x >> 16) as usize;
        noalph.push(if i % 10 < 7 { (v % 25).to_string() } else { word(3000 + v % 8) });
    }

    let mut badwords = lcg_words(100, 60, 11);
    for i in (0..100).step_by(9) {
        badwords[i] = "darn".into();
    }

    let case = |name, text, english, math, web_code, verdict, stage, label| QualityCase {
        name,
        text,
        english,
        math,
        web_code,
        verdict,
        stage,
        label,
    };
    vec![
        case("short", join((0..49).map(word).collect()), Some(0.9), None, None, Reject, Some(Initial), "rule1.word_count"),
        case("top-2gram", ["lorem ipsum"; 30].join(" "), Some(0.9), Some(0.9), None, Reject, Some(Initial), "rule1.frac_chars_top_2gram"),
        case("top-3gram", join(top3), Some(0.9), None, None, Reject, Some(Initial), "rule1.frac_chars_top_3gram"),
        case(
            "dupe-10gram",
            join([(0..30).map(word).collect::<Vec<_>>(), (0..30).map(word).collect()].concat()),
            Some(0.9),
            None,
            Some(0.9),
            Reject,
            Some(Initial),
            "rule1.frac_chars_dupe_10grams",
        ),
        case("math-bypass", join((2000..2060).map(word).collect()), Some(0.2), Some(0.35), None, Keep, Some(Bypass), "bypass.ml_math_score"),
        case(
            "code-bypass",
            (0..60).map(|i| (1000 + 37 * i).to_string()).collect::<Vec<_>>().join(" "),
            None,
            Some(0.3),
            Some(0.31),
            Keep,
            Some(Bypass),
            "bypass.ml_web_code_score",
        ),
        case("unique-words", join((2000..2060).map(word).collect()), Some(0.9), Some(0.3), Some(0.1), Reject, Some(Additional), "rule3.frac_unique_words"),
        case("no-alpha", join(noalph), Some(0.9), None, None, Reject, Some(Additional), "rule3.frac_no_alph_words"),
        case("bad-words", join(badwords), Some(0.9), None, None, Reject, Some(Additional), "rule3.ldnoobw_words"),
        case("low-english", join(lcg_words(100, 60, 5)), Some(0.5), Some(0.2), None, Reject, Some(Additional), "rule3.ml_english_score"),
        case("no-english-score", join(lcg_words(100, 60, 5)), None, None, None, Reject, Some(Additional), "rule3.ml_english_score"),
        case("clean", join(lcg_words(100, 60, 5)), Some(0.8), None, None, Keep, None, "pass"),
    ]
}

// ------------------------------------------------------------------ presets

pub const PRESET_FIXTURE: &str = include_str!("../fixtures/presets20.jsonl");

pub fn preset_fixture() -> Vec<DocumentRecord> {
    PRESET_FIXTURE
        .lines()
        .enumerate()
        .map(|(i, l)| parse_record(l, i + 1).unwrap())
        .collect()
}

/// Keep-sets derived by hand from the filter listings, record by record.
pub fn preset_fixture_keeps(name: &str) -> Vec<u64> {
    match name {
        "top-math" => vec![1, 9, 13, 19],
        "math-w-fm" => vec![1, 10, 19],
        "code" => vec![2, 15],
        "code-w-dclm" => vec![1, 2, 3, 11],
        "medical" => vec![4, 5, 20],
        "medical-w-dclm" => vec![5, 20],
        "stem" => vec![2, 4, 5, 7, 8, 11, 12, 14, 17, 20],
        "stem-w-dclm" => vec![2, 5, 7, 11, 14, 17, 20],
        other => panic!("no fixture keep-set for {other}"),
    }
}

/// A record field the whitelist tests set or mutate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    FdcPrimary,
    FdcSecondary,
    Label(TaxonomyField),
    FineMath,
    Eli5,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Str(&'static str),
    Num(f64),
}

pub fn build(fields: &[(Slot, Val)]) -> DocumentRecord {
    let mut r = DocumentRecord::new("whitelist fixture");
    let mut fdc = (None, None);
    for (slot, val) in fields {
        match (slot, val) {
            (Slot::FdcPrimary, Val::Str(s)) => fdc.0 = Some(*s),
            (Slot::FdcSecondary, Val::Str(s)) => fdc.1 = Some(*s),
            (Slot::Label(f), Val::Str(s)) => r = r.with_label(*f, s, None),
            (Slot::FineMath, Val::Num(x)) => r = r.with_score("finemath_score", *x),
            (Slot::Eli5, Val::Num(x)) => r = r.with_signal("rps_doc_ml_eli5_score", *x),
            other => panic!("bad fixture field {other:?}"),
        }
    }
    match fdc {
        (Some(p), s) => r.with_label(TaxonomyField::Fdc, p, s),
        (None, Some(s)) => panic!("secondary {s} without primary"),
        (None, None) => r,
    }
}

/// One required field of a preset: its allowed values and values the
/// listing rules out.
pub struct Requirement {
    pub slot: Slot,
    pub allowed: Vec<Val>,
    pub disallowed: Vec<Val>,
}

/// A base record and its required fields. Every record built from the base
/// by substituting one allowed value must be kept; substituting one
/// disallowed value must be rejected.
pub struct WhitelistCase {
    pub preset: &'static str,
    pub base: Vec<(Slot, Val)>,
    pub requirements: Vec<Requirement>,
}

fn strs(items: &[&'static str]) -> Vec<Val> {
    items.iter().map(|s| Val::Str(s)).collect()
}

fn req(slot: Slot, allowed: Vec<Val>, disallowed: Vec<Val>) -> Requirement {
    Requirement {
        slot,
        allowed,
        disallowed,
    }
}

const REASONING_BASIC_UP: [&str; 4] = [
    "Basic Reasoning",
    "Intermediate Reasoning",
    "Advanced Reasoning",
    "Exceptional Reasoning",
];

pub fn whitelist_cases() -> Vec<WhitelistCase> {
    use TaxonomyField::*;
    use Val::*;
    let l = Slot::Label;
    let eli5_ok = || req(Slot::Eli5, vec![Num(0.018_11 + 1e-9), Num(0.5)], vec![Num(0.018_11), Num(0.01)]);

    let top_math = WhitelistCase {
        preset: "top-math",
        base: vec![
            (Slot::FdcPrimary, Str("51")),
            (l(DocTypeV1), Str("Social/Forum")),
            (l(DocTypeV2), Str("Q&A Forum")),
            (l(ReasoningDepth), Str("Advanced Reasoning")),
            (l(TechnicalCorrectness), Str("Highly Correct")),
        ],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["51", "512", "515.35"]), strs(&["5", "61", "005.1", "150"])),
            req(
                l(DocTypeV1),
                strs(&["Reference/Encyclopedic/Educational", "Code/Software", "Social/Forum", "Personal/Misc"]),
                strs(&["Academic/Research", "News/Editorial"]),
            ),
            req(
                l(DocTypeV2),
                strs(&[
                    "Comment Section",
                    "Documentation",
                    "FAQ",
                    "Knowledge Article",
                    "Nonfiction Writing",
                    "Personal Blog",
                    "Q&A Forum",
                    "Structured Data",
                    "Tutorial",
                ]),
                strs(&["Academic Writing", "News Article"]),
            ),
            req(l(ReasoningDepth), strs(&REASONING_BASIC_UP), strs(&["No Reasoning", "Indeterminate"])),
            req(
                l(TechnicalCorrectness),
                strs(&["Highly Correct", "Exceptionally Correct"]),
                strs(&["Mostly Correct", "Technically Flawed"]),
            ),
        ],
    };

    let math_fm_primary = WhitelistCase {
        preset: "math-w-fm",
        base: vec![(Slot::FdcPrimary, Str("51")), (Slot::FineMath, Num(3.25))],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["51", "519.2"]), strs(&["52", "005"])),
            req(Slot::FineMath, vec![Num(3.25), Num(4.0)], vec![Num(3.249_999), Num(1.0)]),
        ],
    };
    let math_fm_secondary = WhitelistCase {
        preset: "math-w-fm",
        base: vec![
            (Slot::FdcPrimary, Str("300")),
            (Slot::FdcSecondary, Str("512")),
            (Slot::FineMath, Num(3.5)),
        ],
        requirements: vec![req(Slot::FdcSecondary, strs(&["51", "512.7"]), strs(&["61", "5"]))],
    };

    let code = WhitelistCase {
        preset: "code",
        base: vec![
            (Slot::FdcPrimary, Str("005.1")),
            (l(DocTypeV1), Str("Social/Forum")),
            (l(DocTypeV2), Str("Tutorial")),
            (l(ReasoningDepth), Str("Advanced Reasoning")),
            (l(TechnicalCorrectness), Str("Highly Correct")),
        ],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["005.1", "005.3", "005.133"]), strs(&["005", "005.4", "004"])),
            req(
                l(DocTypeV1),
                strs(&["Reference/Encyclopedic/Educational", "Social/Forum"]),
                strs(&["Code/Software", "Personal/Misc"]),
            ),
            req(
                l(DocTypeV2),
                strs(&["Comment Section", "Documentation", "Knowledge Article", "Tutorial", "Personal Blog", "Q&A Forum"]),
                strs(&["FAQ", "Structured Data"]),
            ),
            req(
                l(ReasoningDepth),
                strs(&["Intermediate Reasoning", "Advanced Reasoning", "Exceptional Reasoning"]),
                strs(&["Basic Reasoning", "No Reasoning"]),
            ),
            req(l(TechnicalCorrectness), strs(&["Highly Correct"]), strs(&["Exceptionally Correct", "Mostly Correct"])),
        ],
    };

    let code_dclm = WhitelistCase {
        preset: "code-w-dclm",
        base: vec![
            (Slot::FdcPrimary, Str("005")),
            (l(DocTypeV2), Str("Documentation")),
            (l(ReasoningDepth), Str("Basic Reasoning")),
            (Slot::Eli5, Num(0.05)),
        ],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["004", "005", "51", "004.6", "512"]), strs(&["00", "006", "61"])),
            req(
                l(DocTypeV2),
                strs(&["Personal Blog", "Knowledge Article", "Comment Section", "Documentation", "Tutorial", "Q&A Forum"]),
                strs(&["FAQ", "Academic Writing"]),
            ),
            req(l(ReasoningDepth), strs(&REASONING_BASIC_UP), strs(&["No Reasoning", "Abstain"])),
            eli5_ok(),
        ],
    };

    let medical_requirements = |pair_slot: Slot, pair_ok: &[&'static str], pair_bad: &[&'static str]| {
        vec![
            req(pair_slot, strs(pair_ok), strs(pair_bad)),
            req(
                l(DocTypeV1),
                strs(&["Academic/Research", "Reference/Encyclopedic/Educational"]),
                strs(&["News/Editorial", "Code/Software", "Social/Forum", "Machine-Generated"]),
            ),
            req(
                l(DocTypeV2),
                strs(&["Academic Writing", "Documentation", "Knowledge Article", "Q&A Forum"]),
                strs(&["Tutorial", "News Article", "Personal Blog", "Spam / Ads"]),
            ),
            req(l(ReasoningDepth), strs(&REASONING_BASIC_UP), strs(&["No Reasoning", "Indeterminate"])),
            req(
                l(TechnicalCorrectness),
                strs(&["Highly Correct", "Exceptionally Correct"]),
                strs(&["Mostly Correct", "Partially Correct"]),
            ),
        ]
    };
    let medical_base = |p: &'static str, s: &'static str| {
        vec![
            (Slot::FdcPrimary, Str(p)),
            (Slot::FdcSecondary, Str(s)),
            (l(DocTypeV1), Str("Academic/Research")),
            (l(DocTypeV2), Str("Academic Writing")),
            (l(ReasoningDepth), Str("Intermediate Reasoning")),
            (l(TechnicalCorrectness), Str("Highly Correct")),
        ]
    };
    let medical_primary = WhitelistCase {
        preset: "medical",
        base: medical_base("616", "572"),
        requirements: medical_requirements(
            Slot::FdcSecondary,
            &["50", "51", "54", "57", "58", "59", "61", "540.1"],
            &["52", "62", "300", "005.1"],
        ),
    };
    let medical_secondary = WhitelistCase {
        preset: "medical",
        base: medical_base("540", "616.2"),
        requirements: vec![req(Slot::FdcPrimary, strs(&["50", "51", "54", "57", "58", "59", "61"]), strs(&["53", "62", "300"]))],
    };
    let mut medical_dclm_requirements = medical_requirements(Slot::FdcSecondary, &["59"], &["330"]);
    medical_dclm_requirements.push(eli5_ok());
    let mut medical_dclm_base = medical_base("616", "572");
    medical_dclm_base.push((Slot::Eli5, Num(0.2)));
    let medical_dclm = WhitelistCase {
        preset: "medical-w-dclm",
        base: medical_dclm_base,
        requirements: medical_dclm_requirements,
    };

    let valid_fdc = [
        "50", "51", "52", "53", "54", "55", "56", "57", "58", "59", "60", "61", "62", "66", "00",
    ];
    let stem_reasoning = || {
        req(
            l(ReasoningDepth),
            strs(&[
                "No Reasoning",
                "Basic Reasoning",
                "Intermediate Reasoning",
                "Advanced Reasoning",
                "Exceptional Reasoning",
            ]),
            strs(&["Abstain", "Indeterminate"]),
        )
    };
    let stem_default = WhitelistCase {
        preset: "stem",
        base: vec![
            (Slot::FdcPrimary, Str("530")),
            (Slot::FdcSecondary, Str("510")),
            (l(ReasoningDepth), Str("Basic Reasoning")),
            (l(DocTypeV1), Str("Academic/Research")),
            (l(DocTypeV2), Str("Knowledge Article")),
        ],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&valid_fdc), strs(&["63", "300", "01"])),
            req(Slot::FdcSecondary, strs(&valid_fdc), strs(&["64", "100"])),
            stem_reasoning(),
            req(
                l(DocTypeV1),
                strs(&["Academic/Research", "Reference/Encyclopedic/Educational"]),
                strs(&["Personal/Misc", "Code/Software", "News/Editorial"]),
            ),
            req(
                l(DocTypeV2),
                strs(&["Academic Writing", "Knowledge Article", "News Article"]),
                strs(&["Tutorial", "Documentation", "FAQ"]),
            ),
        ],
    };
    let stem_code = WhitelistCase {
        preset: "stem",
        base: vec![
            (Slot::FdcPrimary, Str("005.1")),
            (Slot::FdcSecondary, Str("004")),
            (l(ReasoningDepth), Str("Intermediate Reasoning")),
            (l(DocTypeV1), Str("Code/Software")),
            (l(DocTypeV2), Str("Tutorial")),
        ],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["005.1", "005.4", "005.12"]), strs(&["005.3", "004.1", "005"])),
            req(
                l(DocTypeV1),
                strs(&["Academic/Research", "Reference/Encyclopedic/Educational", "Code/Software", "Social/Forum"]),
                strs(&["Personal/Misc", "Legal/Regulatory"]),
            ),
            req(
                l(DocTypeV2),
                strs(&[
                    "Academic Writing",
                    "Comment Section",
                    "Documentation",
                    "Knowledge Article",
                    "Personal Blog",
                    "Q&A Forum",
                    "Tutorial",
                ]),
                strs(&["FAQ", "News Article"]),
            ),
            stem_reasoning(),
        ],
    };
    let stem_medical = WhitelistCase {
        preset: "stem",
        base: vec![
            (Slot::FdcPrimary, Str("540")),
            (Slot::FdcSecondary, Str("616")),
            (l(ReasoningDepth), Str("No Reasoning")),
            (l(DocTypeV1), Str("Legal/Regulatory")),
            (l(DocTypeV2), Str("FAQ")),
        ],
        requirements: vec![
            req(Slot::FdcSecondary, strs(&["61", "616.1"]), strs(&["54", "530"])),
            req(
                l(DocTypeV1),
                strs(&["Academic/Research", "Reference/Encyclopedic/Educational", "Code/Software", "Legal/Regulatory"]),
                strs(&["Personal/Misc", "Social/Forum"]),
            ),
            req(
                l(DocTypeV2),
                strs(&["Academic Writing", "Documentation", "FAQ", "Knowledge Article", "News Article", "Tutorial"]),
                strs(&["Audio Transcript", "Q&A Forum"]),
            ),
        ],
    };
    let stem_engineering = WhitelistCase {
        preset: "stem",
        base: vec![
            (Slot::FdcPrimary, Str("621.3")),
            (Slot::FdcSecondary, Str("530")),
            (l(ReasoningDepth), Str("Advanced Reasoning")),
            (l(DocTypeV1), Str("Personal/Misc")),
            (l(DocTypeV2), Str("Audio Transcript")),
        ],
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["62", "621.3"]), strs(&["61", "66"])),
            req(
                l(DocTypeV1),
                strs(&["Academic/Research", "Reference/Encyclopedic/Educational", "Personal/Misc", "Legal/Regulatory"]),
                strs(&["Code/Software", "Social/Forum"]),
            ),
            req(
                l(DocTypeV2),
                strs(&[
                    "Academic Writing",
                    "Audio Transcript",
                    "Documentation",
                    "FAQ",
                    "Knowledge Article",
                    "News Article",
                    "Tutorial",
                ]),
                strs(&["Personal Blog", "Comment Section"]),
            ),
        ],
    };
    let mut stem_dclm_base = stem_default.base.clone();
    stem_dclm_base.push((Slot::Eli5, Num(0.1)));
    let stem_dclm = WhitelistCase {
        preset: "stem-w-dclm",
        base: stem_dclm_base,
        requirements: vec![
            req(Slot::FdcPrimary, strs(&["56", "00"]), strs(&["63"])),
            stem_reasoning(),
            eli5_ok(),
        ],
    };

    vec![
        top_math,
        math_fm_primary,
        math_fm_secondary,
        code,
        code_dclm,
        medical_primary,
        medical_secondary,
        medical_dclm,
        stem_default,
        stem_code,
        stem_medical,
        stem_engineering,
        stem_dclm,
    ]
}

pub fn with_value(base: &[(Slot, Val)], slot: Slot, val: &Val) -> Vec<(Slot, Val)> {
    let mut fields: Vec<(Slot, Val)> = base.iter().filter(|(s, _)| *s != slot).cloned().collect();
    fields.push((slot, val.clone()));
    fields
}

// ------------------------------------------------------------------ corpora

/// `n` documents of roughly `target_bytes` each, built from a 5000-word
/// vocabulary, with a share of exact and near duplicates.
pub fn synthetic_corpus(n: usize, target_bytes: usize, seed: u64) -> Vec<DocumentRecord> {
    let mut r = rng(seed);
    let mut docs: Vec<String> = Vec::with_capacity(n);
    for i in 0..n {
        let text = if i > 10 && r.gen_bool(0.05) {
            docs[r.gen_range(0..i)].clone()
        } else if i > 10 && r.gen_bool(0.05) {
            let src = &docs[r.gen_range(0..i)];
            let mut words: Vec<String> = src.split(' ').map(str::to_owned).collect();
            let at = r.gen_range(0..words.len());
            words[at] = word(r.gen_range(0..5000));
            words.join(" ")
        } else {
            let mut s = String::new();
            while s.len() < target_bytes {
                if !s.is_empty() {
                    s.push(' ');
                }
                s.push_str(&word(r.gen_range(0..5000)));
            }
            s
        };
        docs.push(text);
    }
    docs.into_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rec = DocumentRecord::new(t);
            if i % 3 == 0 {
                rec = rec.with_label(TaxonomyField::Fdc, "512", None);
            }
            rec
        })
        .collect()
}
