//! Majority-voting baselines and the count-based prior confidence.

use std::collections::{BTreeMap, HashMap};

use crate::data::{CrowdDataset, GoldDataset, GoldSentence, OUTSIDE};
use crate::error::{Error, Result};
use crate::eval::{decode_bio, encode_bio, SpanEntity};

/// Total annotation count of every label across the dataset.
pub fn label_frequencies(dataset: &CrowdDataset) -> Vec<u64> {
    let mut freq = vec![0u64; dataset.label_space().len()];
    for tok in dataset.items().iter().flat_map(|s| &s.tokens) {
        for (&label, &count) in tok.counts() {
            freq[label] += u64::from(count);
        }
    }
    freq
}

/// Picks the most-voted label; ties go to the label with the higher
/// dataset-wide frequency, then to the lower label index.
pub fn vote_token(counts: &BTreeMap<usize, u32>, frequencies: &[u64]) -> usize {
    let mut best: Option<(usize, u32)> = None;
    for (&label, &count) in counts {
        best = match best {
            Some((b, bc))
                if bc > count || (bc == count && frequencies[b] >= frequencies[label]) =>
            {
                Some((b, bc))
            }
            _ => Some((label, count)),
        };
    }
    best.map_or(OUTSIDE, |(label, _)| label)
}

/// Token-level majority voting.
pub fn token_vote(dataset: &CrowdDataset) -> GoldDataset {
    let freq = label_frequencies(dataset);
    let items = dataset
        .items()
        .iter()
        .map(|s| GoldSentence {
            sentence: s.sentence.clone(),
            labels: s.tokens.iter().map(|t| vote_token(t.counts(), &freq)).collect(),
        })
        .collect();
    GoldDataset::new(dataset.label_space().clone(), items).expect("labels come from the dataset")
}

/// Entity-level majority voting: a span survives when a strict majority of
/// annotators produced exactly the same `(start, end, type)`.
pub fn entity_vote(dataset: &CrowdDataset) -> Result<GoldDataset> {
    let space = dataset.label_space();
    let k = match dataset.annotator_count() {
        Some(k) => k,
        None if dataset.is_empty() => 1,
        None => {
            return Err(Error::invalid(
                "dataset",
                "entity-level voting needs per-annotator tags",
            ))
        }
    };
    let mut items = Vec::with_capacity(dataset.len());
    for (s, item) in dataset.items().iter().enumerate() {
        let mut votes: HashMap<SpanEntity, usize> = HashMap::new();
        for a in 0..k {
            let tags: Vec<usize> = dataset
                .annotator_tags(s, a)?
                .into_iter()
                .map(|t| t.unwrap_or(OUTSIDE))
                .collect();
            for span in decode_bio(&tags, space) {
                *votes.entry(span).or_default() += 1;
            }
        }
        let mut kept: Vec<SpanEntity> = votes
            .into_iter()
            .filter(|&(_, v)| 2 * v > k)
            .map(|(span, _)| span)
            .collect();
        kept.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.start, s.kind));
        let mut chosen: Vec<SpanEntity> = Vec::with_capacity(kept.len());
        for span in kept {
            if chosen.iter().all(|c| !c.overlaps(&span)) {
                chosen.push(span);
            }
        }
        chosen.sort();
        items.push(GoldSentence {
            sentence: item.sentence.clone(),
            labels: encode_bio(&chosen, item.sentence.len(), space),
        });
    }
    GoldDataset::new(space.clone(), items)
}

/// Softmax of raw annotation counts over the candidates, zero elsewhere.
/// Returns a dense row of length `num_labels`.
pub fn prior_confidence(counts: &BTreeMap<usize, u32>, num_labels: usize) -> Vec<f64> {
    let mut row = vec![0.0; num_labels];
    let Some(&max) = counts.values().max() else {
        return row;
    };
    let mut total = 0.0;
    for (&label, &count) in counts {
        let w = (f64::from(count) - f64::from(max)).exp();
        row[label] = w;
        total += w;
    }
    for &label in counts.keys() {
        row[label] /= total;
    }
    row
}
