//! Corpus data model: sentences, multi-annotator tokens and gold sequences.
//!
//! A crowd-annotated token carries its candidate label set together with the
//! number of annotators that chose each candidate. Candidates are the keys of
//! [`CrowdToken::counts`], so the two can never drift apart.

mod io;
mod labels;

use std::collections::BTreeMap;

pub use io::{
    file_tags, parse_crowd_file, parse_gold_file, parse_token_file, write_crowd_aggregated,
    write_crowd_file, write_gold_file,
};
pub use labels::{LabelSpace, Tag, OUTSIDE};

use crate::error::{Error, Result};

/// A tokenized sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Result<Self> {
        let id = id.into();
        if tokens.is_empty() {
            return Err(Error::invalid("sentence", format!("sentence {id} is empty")));
        }
        if let Some(t) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::invalid(
                "token",
                format!("{t:?} is empty or contains whitespace"),
            ));
        }
        if id.is_empty() || id.chars().any(|c| matches!(c, '\n' | '\r' | '\t')) {
            return Err(Error::invalid("sentence id", "empty or contains a tab or line break"));
        }
        Ok(Sentence { id, tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// One token's crowd supervision: candidate labels with annotation counts,
/// plus the raw per-annotator tags when they are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdToken {
    counts: BTreeMap<usize, u32>,
    annotations: Option<Vec<Option<usize>>>,
}

impl CrowdToken {
    /// Builds a token from each annotator's tag; `None` means the annotator
    /// did not label this token.
    pub fn from_annotations(tags: Vec<Option<usize>>, space: &LabelSpace) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &label in tags.iter().flatten() {
            *counts.entry(label).or_insert(0u32) += 1;
        }
        Self::validate(&counts, space)?;
        Ok(CrowdToken {
            counts,
            annotations: Some(tags),
        })
    }

    /// Builds a token from aggregated counts without annotator provenance.
    pub fn from_counts(counts: BTreeMap<usize, u32>, space: &LabelSpace) -> Result<Self> {
        Self::validate(&counts, space)?;
        Ok(CrowdToken {
            counts,
            annotations: None,
        })
    }

    /// A unanimous token with a single candidate.
    pub fn singleton(label: usize, count: u32, space: &LabelSpace) -> Result<Self> {
        Self::from_counts(BTreeMap::from([(label, count)]), space)
    }

    fn validate(counts: &BTreeMap<usize, u32>, space: &LabelSpace) -> Result<()> {
        if counts.is_empty() {
            return Err(Error::invalid("candidate set", "no annotator labeled this token"));
        }
        if let Some((&label, _)) = counts.iter().find(|(&l, _)| l >= space.len()) {
            return Err(Error::invalid(
                "candidate set",
                format!("label index {label} outside a space of {}", space.len()),
            ));
        }
        if counts.values().any(|&c| c == 0) {
            return Err(Error::invalid("candidate set", "zero annotation count"));
        }
        if counts.len() == space.len() {
            return Err(Error::invalid(
                "candidate set",
                "every label of the label space is a candidate",
            ));
        }
        Ok(())
    }

    /// Candidate labels in ascending index order.
    pub fn candidates(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.counts.keys().copied()
    }

    pub fn num_candidates(&self) -> usize {
        self.counts.len()
    }

    pub fn is_candidate(&self, label: usize) -> bool {
        self.counts.contains_key(&label)
    }

    pub fn counts(&self) -> &BTreeMap<usize, u32> {
        &self.counts
    }

    pub fn count(&self, label: usize) -> u32 {
        self.counts.get(&label).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn annotations(&self) -> Option<&[Option<usize>]> {
        self.annotations.as_deref()
    }

    /// Dense 0/1 membership row of length `num_labels`.
    pub fn candidate_mask(&self, num_labels: usize) -> Vec<bool> {
        let mut mask = vec![false; num_labels];
        for l in self.candidates() {
            mask[l] = true;
        }
        mask
    }
}

/// A sentence with one [`CrowdToken`] per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdSentence {
    pub sentence: Sentence,
    pub tokens: Vec<CrowdToken>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdDataset {
    label_space: LabelSpace,
    items: Vec<CrowdSentence>,
    annotator_count: Option<usize>,
}

impl CrowdDataset {
    /// Validates alignment and, when `annotator_count` is given, that every
    /// token carries exactly that many annotator slots.
    pub fn new(
        label_space: LabelSpace,
        items: Vec<CrowdSentence>,
        annotator_count: Option<usize>,
    ) -> Result<Self> {
        if annotator_count == Some(0) {
            return Err(Error::invalid("annotator count", "must be positive"));
        }
        for item in &items {
            if item.tokens.len() != item.sentence.len() {
                return Err(Error::Misaligned {
                    sentence_id: item.sentence.id.clone(),
                    message: format!(
                        "{} tokens but {} crowd labels",
                        item.sentence.len(),
                        item.tokens.len()
                    ),
                });
            }
            for tok in &item.tokens {
                CrowdToken::validate(&tok.counts, &label_space)?;
                match (annotator_count, tok.annotations()) {
                    (Some(k), Some(a)) if a.len() != k => {
                        return Err(Error::invalid(
                            "annotations",
                            format!("expected {k} annotator slots, found {}", a.len()),
                        ))
                    }
                    (Some(_), None) => {
                        return Err(Error::invalid(
                            "annotations",
                            "annotator count given but token has no per-annotator tags",
                        ))
                    }
                    _ => {}
                }
            }
        }
        let annotator_count = if items.is_empty() {
            None
        } else {
            annotator_count
        };
        Ok(CrowdDataset {
            label_space,
            items,
            annotator_count,
        })
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn items(&self) -> &[CrowdSentence] {
        &self.items
    }

    pub fn annotator_count(&self) -> Option<usize> {
        self.annotator_count
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.items.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.items.iter().map(|s| &s.sentence)
    }

    /// Per-annotator tag sequence of one sentence, `None` where the annotator
    /// skipped a token. Fails when the dataset has no annotator provenance.
    pub fn annotator_tags(&self, sentence: usize, annotator: usize) -> Result<Vec<Option<usize>>> {
        let k = self.annotator_count.ok_or_else(|| {
            Error::invalid("dataset", "per-annotator tags are not available")
        })?;
        if annotator >= k {
            return Err(Error::invalid(
                "annotator",
                format!("annotator {annotator} out of {k}"),
            ));
        }
        Ok(self.items[sentence]
            .tokens
            .iter()
            .map(|t| t.annotations().expect("validated")[annotator])
            .collect())
    }
}

/// A sentence with exactly one label per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSentence {
    pub sentence: Sentence,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldDataset {
    label_space: LabelSpace,
    items: Vec<GoldSentence>,
}

impl GoldDataset {
    pub fn new(label_space: LabelSpace, items: Vec<GoldSentence>) -> Result<Self> {
        for item in &items {
            if item.labels.len() != item.sentence.len() {
                return Err(Error::Misaligned {
                    sentence_id: item.sentence.id.clone(),
                    message: format!(
                        "{} tokens but {} labels",
                        item.sentence.len(),
                        item.labels.len()
                    ),
                });
            }
            if let Some(&l) = item.labels.iter().find(|&&l| l >= label_space.len()) {
                return Err(Error::invalid(
                    "label",
                    format!("index {l} outside a space of {}", label_space.len()),
                ));
            }
        }
        Ok(GoldDataset { label_space, items })
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn items(&self) -> &[GoldSentence] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.items.iter().map(|s| s.labels.len()).sum()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.items.iter().map(|s| &s.sentence)
    }

    /// Re-labels the same sentences under a (compatible) label space.
    pub fn with_label_space(self, label_space: LabelSpace) -> Result<Self> {
        if !self.label_space.is_compatible(&label_space) {
            let names = |s: &LabelSpace| s.entity_types().join(",");
            return Err(Error::invalid(
                "label space",
                format!(
                    "types [{}] do not match [{}]",
                    names(&self.label_space),
                    names(&label_space)
                ),
            ));
        }
        Ok(GoldDataset {
            label_space,
            items: self.items,
        })
    }

    /// Treats each gold label as a unanimous annotation by `annotators`
    /// annotators.
    pub fn to_unanimous_crowd(&self, annotators: usize) -> Result<CrowdDataset> {
        let items = self
            .items
            .iter()
            .map(|g| {
                let tokens = g
                    .labels
                    .iter()
                    .map(|&l| CrowdToken::from_annotations(vec![Some(l); annotators], &self.label_space))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CrowdSentence {
                    sentence: g.sentence.clone(),
                    tokens,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CrowdDataset::new(self.label_space.clone(), items, Some(annotators))
    }
}
