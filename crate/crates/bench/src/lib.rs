//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxonomy_forge::{DocumentRecord, TaxonomyField};

/// `n` documents of roughly `words` words over a 5000-word vocabulary.
pub fn documents(n: usize, words: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut text = String::with_capacity(words * 7);
            for i in 0..words {
                if i > 0 {
                    text.push(if rng.gen_ratio(1, 12) { '\n' } else { ' ' });
                }
                let w: u32 = rng.gen_range(0..5000);
                text.push_str(&format!("w{w:x}"));
            }
            text
        })
        .collect()
}

/// Records with FDC, document-type and reasoning labels drawn at random.
pub fn labelled_records(n: usize, seed: u64) -> Vec<DocumentRecord> {
    const FDC: [&str; 6] = ["512", "510", "005.1", "616", "530", "300"];
    const DT1: [&str; 3] = ["Reference/Encyclopedic/Educational", "Social/Forum", "News/Editorial"];
    const DT2: [&str; 4] = ["Tutorial", "Q&A Forum", "News Article", "Knowledge Article"];
    const RD: [&str; 3] = ["Basic Reasoning", "Advanced Reasoning", "No Reasoning"];
    const TC: [&str; 2] = ["Highly Correct", "Somewhat Correct"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    documents(n, 20, seed)
        .into_iter()
        .map(|text| {
            let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| xs[rng.gen_range(0..xs.len())];
            let i = rng.gen_range(0..FDC.len());
            let j = (i + rng.gen_range(1..FDC.len())) % FDC.len();
            DocumentRecord::new(text)
                .with_label(TaxonomyField::Fdc, FDC[i], Some(FDC[j]))
                .with_label(TaxonomyField::DocTypeV1, pick(&mut rng, &DT1), None)
                .with_label(TaxonomyField::DocTypeV2, pick(&mut rng, &DT2), None)
                .with_label(TaxonomyField::ReasoningDepth, pick(&mut rng, &RD), None)
                .with_label(TaxonomyField::TechnicalCorrectness, pick(&mut rng, &TC), None)
                .with_signal("rps_doc_ml_eli5_score", rng.gen())
        })
        .collect()
}
