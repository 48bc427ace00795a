#![allow(dead_code)]

use std::collections::BTreeMap;

use crowdseq::data::{CrowdSentence, CrowdToken, GoldSentence};
use crowdseq::{CrowdDataset, GoldDataset, LabelSpace, Sentence};
use rand::Rng;

pub const VOCAB: &[&str] = &[
    "the", "David", "and", "Jack", "meet", "tomorrow", "at", "10:00", "room", "1003", "(", ")", "in", "Beijing",
];

pub fn space(types: usize) -> LabelSpace {
    LabelSpace::new((0..types).map(|t| format!("T{t}"))).unwrap()
}

pub fn random_sentence<R: Rng>(rng: &mut R, id: usize, max_len: usize) -> Sentence {
    let n = rng.random_range(1..=max_len);
    let tokens = (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect();
    Sentence::new(id.to_string(), tokens).unwrap()
}

/// Tags drawn independently per token (not necessarily valid BIO).
pub fn random_gold<R: Rng>(rng: &mut R, space: &LabelSpace, sentences: usize, max_len: usize) -> GoldDataset {
    let items = (0..sentences)
        .map(|i| {
            let sentence = random_sentence(rng, i, max_len);
            let labels = (0..sentence.len())
                .map(|_| {
                    if rng.random_bool(0.5) {
                        0
                    } else {
                        rng.random_range(0..space.len())
                    }
                })
                .collect();
            GoldSentence { sentence, labels }
        })
        .collect();
    GoldDataset::new(space.clone(), items).unwrap()
}

/// Random candidate sets with counts; never the full label space.
pub fn random_counts<R: Rng>(rng: &mut R, num_labels: usize) -> BTreeMap<usize, u32> {
    loop {
        let k = rng.random_range(1..num_labels.max(2));
        let mut counts = BTreeMap::new();
        while counts.len() < k {
            counts.insert(rng.random_range(0..num_labels), rng.random_range(1..=4));
        }
        if counts.len() < num_labels {
            return counts;
        }
    }
}

/// Aggregated-form crowd dataset (counts only).
pub fn random_crowd<R: Rng>(rng: &mut R, space: &LabelSpace, sentences: usize, max_len: usize) -> CrowdDataset {
    let items = (0..sentences)
        .map(|i| {
            let sentence = random_sentence(rng, i, max_len);
            let tokens = (0..sentence.len())
                .map(|_| CrowdToken::from_counts(random_counts(rng, space.len()), space).unwrap())
                .collect();
            CrowdSentence { sentence, tokens }
        })
        .collect();
    CrowdDataset::new(space.clone(), items, None).unwrap()
}

/// Crowd dataset with per-annotator tags; `-` gaps appear with the given
/// probability but every token keeps at least one tag.
pub fn random_annotated<R: Rng>(
    rng: &mut R,
    space: &LabelSpace,
    sentences: usize,
    max_len: usize,
    annotators: usize,
    gap: f64,
) -> CrowdDataset {
    let items = (0..sentences)
        .map(|i| {
            let sentence = random_sentence(rng, i, max_len);
            let tokens = (0..sentence.len())
                .map(|_| loop {
                    let tags: Vec<Option<usize>> = (0..annotators)
                        .map(|_| (!rng.random_bool(gap)).then(|| rng.random_range(0..space.len())))
                        .collect();
                    if let Ok(tok) = CrowdToken::from_annotations(tags, space) {
                        break tok;
                    }
                })
                .collect();
            CrowdSentence { sentence, tokens }
        })
        .collect();
    CrowdDataset::new(space.clone(), items, Some(annotators)).unwrap()
}
