//! Per-(token, label) confidences.
//!
//! * prior `c^A`: softmax of annotation counts over the candidates, 0 on the
//!   other labels;
//! * posterior `c^M`: softmax of the model's probabilities, normalised
//!   separately over the candidates and over the non-candidates;
//! * blend `g = alpha * c^A + (1 - alpha) * c^M`.
//!
//! The posterior exponentiates probabilities, not logits, so within each half
//! the largest weight ratio is `e`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregate::prior_confidence;
use crate::data::CrowdDataset;
use crate::error::{Error, Result};
use crate::scorer::Matrix;

/// Which confidence terms take part in training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    #[default]
    Full,
    /// `g = c^M`.
    NoPrior,
    /// `g = c^A` on candidates; non-candidates keep their initial uniform
    /// posterior weight so the complementary term still trains.
    NoPosterior,
    /// `1/|candidates|` on candidates and 0 elsewhere.
    Neither,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Full,
        Ablation::NoPrior,
        Ablation::NoPosterior,
        Ablation::Neither,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoPrior => "no-prior",
            Ablation::NoPosterior => "no-posterior",
            Ablation::Neither => "neither",
        }
    }

    /// Whether the blended weights depend on the posterior.
    pub fn uses_posterior(self) -> bool {
        matches!(self, Ablation::Full | Ablation::NoPrior)
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| {
                Error::invalid(
                    "ablation",
                    format!("{s:?} (expected full, no-prior, no-posterior or neither)"),
                )
            })
    }
}

/// Initial posterior: uniform over the candidates and, separately, uniform
/// over the non-candidates.
pub fn init_posterior(candidates: &[bool]) -> Vec<f64> {
    let n = candidates.len();
    let k = candidates.iter().filter(|&&c| c).count();
    debug_assert!(k > 0 && k < n);
    candidates
        .iter()
        .map(|&c| if c { 1.0 / k as f64 } else { 1.0 / (n - k) as f64 })
        .collect()
}

/// Split softmax of probabilities: candidates and non-candidates are
/// normalised independently.
pub fn posterior_from_probs(probs: &[f64], candidates: &[bool]) -> Vec<f64> {
    assert_eq!(probs.len(), candidates.len());
    let mut out = vec![0.0; probs.len()];
    for side in [true, false] {
        let max = probs
            .iter()
            .zip(candidates)
            .filter(|(_, &c)| c == side)
            .map(|(&p, _)| p)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            continue;
        }
        let mut total = 0.0;
        for ((o, &p), &c) in out.iter_mut().zip(probs).zip(candidates) {
            if c == side {
                *o = (p - max).exp();
                total += *o;
            }
        }
        for (o, &c) in out.iter_mut().zip(candidates) {
            if c == side {
                *o /= total;
            }
        }
    }
    out
}

/// Blends prior and posterior rows under an ablation mode.
pub fn blend(prior: &[f64], posterior: &[f64], candidates: &[bool], alpha: f64, ablation: Ablation) -> Vec<f64> {
    match ablation {
        Ablation::Full => prior
            .iter()
            .zip(posterior)
            .map(|(&a, &m)| alpha * a + (1.0 - alpha) * m)
            .collect(),
        Ablation::NoPrior => posterior.to_vec(),
        Ablation::NoPosterior => {
            let init = init_posterior(candidates);
            prior
                .iter()
                .zip(candidates)
                .zip(init)
                .map(|((&a, &c), u)| if c { a } else { u })
                .collect()
        }
        Ablation::Neither => {
            let k = candidates.iter().filter(|&&c| c).count() as f64;
            candidates.iter().map(|&c| if c { 1.0 / k } else { 0.0 }).collect()
        }
    }
}

/// Confidences for every token of a crowd dataset, stored as dense rows.
#[derive(Debug, Clone)]
pub struct ConfidenceTable {
    num_labels: usize,
    alpha: f64,
    ablation: Ablation,
    offsets: Vec<usize>,
    mask: Vec<bool>,
    prior: Vec<f64>,
    posterior: Vec<f64>,
    blended: Vec<f64>,
    fixed: bool,
}

impl ConfidenceTable {
    /// Prior from counts, posterior at its initial value, blend applied.
    pub fn new(dataset: &CrowdDataset, alpha: f64, ablation: Ablation) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid("alpha", format!("{alpha} not in [0, 1]")));
        }
        let l = dataset.label_space().len();
        let tokens = dataset.num_tokens();
        let mut table = ConfidenceTable {
            num_labels: l,
            alpha,
            ablation,
            offsets: Vec::with_capacity(dataset.len() + 1),
            mask: Vec::with_capacity(tokens * l),
            prior: Vec::with_capacity(tokens * l),
            posterior: Vec::with_capacity(tokens * l),
            blended: vec![0.0; tokens * l],
            fixed: false,
        };
        table.offsets.push(0);
        for item in dataset.items() {
            for tok in &item.tokens {
                let mask = tok.candidate_mask(l);
                table.prior.extend(prior_confidence(tok.counts(), l));
                table.posterior.extend(init_posterior(&mask));
                table.mask.extend(mask);
            }
            table.offsets.push(table.offsets.last().unwrap() + item.tokens.len());
        }
        table.reblend();
        Ok(table)
    }

    /// Every label of every token gets weight `weight`, and E-steps leave
    /// the weights alone. Used for ordinary supervised training.
    pub fn fixed(dataset: &CrowdDataset, weight: f64) -> Result<Self> {
        let mut table = ConfidenceTable::new(dataset, 1.0, Ablation::Full)?;
        table.blended.fill(weight);
        table.fixed = true;
        Ok(table)
    }

    /// True for tables built by [`ConfidenceTable::fixed`].
    pub fn is_fixed(&self) -> bool {
        self.fixed
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ablation(&self) -> Ablation {
        self.ablation
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn num_sentences(&self) -> usize {
        self.offsets.len() - 1
    }

    fn rows(&self, sentence: usize) -> std::ops::Range<usize> {
        self.offsets[sentence] * self.num_labels..self.offsets[sentence + 1] * self.num_labels
    }

    pub fn candidates(&self, sentence: usize) -> &[bool] {
        &self.mask[self.rows(sentence)]
    }

    pub fn prior(&self, sentence: usize) -> &[f64] {
        &self.prior[self.rows(sentence)]
    }

    pub fn posterior(&self, sentence: usize) -> &[f64] {
        &self.posterior[self.rows(sentence)]
    }

    /// Flattened `[tokens x labels]` blended weights of one sentence.
    pub fn blended(&self, sentence: usize) -> &[f64] {
        &self.blended[self.rows(sentence)]
    }

    /// Replaces the posterior of one sentence from model probabilities.
    pub fn update_posterior(&mut self, sentence: usize, probs: &Matrix) -> Result<()> {
        let l = self.num_labels;
        let range = self.rows(sentence);
        let tokens = range.len() / l;
        if probs.shape() != (tokens, l) {
            return Err(Error::Shape {
                expected: (tokens, l),
                actual: probs.shape(),
            });
        }
        for (t, row) in probs.iter_rows().enumerate() {
            let at = range.start + t * l;
            let post = posterior_from_probs(row, &self.mask[at..at + l]);
            self.posterior[at..at + l].copy_from_slice(&post);
        }
        Ok(())
    }

    /// Recomputes `g` from the stored prior and posterior.
    pub fn reblend(&mut self) {
        if self.fixed {
            return;
        }
        let l = self.num_labels;
        for at in (0..self.blended.len()).step_by(l.max(1)) {
            let row = blend(
                &self.prior[at..at + l],
                &self.posterior[at..at + l],
                &self.mask[at..at + l],
                self.alpha,
                self.ablation,
            );
            self.blended[at..at + l].copy_from_slice(&row);
        }
    }

    /// Checks the row invariants of all three tables to within `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let l = self.num_labels;
        for at in (0..self.blended.len()).step_by(l.max(1)) {
            let mask = &self.mask[at..at + l];
            let prior = &self.prior[at..at + l];
            let post = &self.posterior[at..at + l];
            let sum = |row: &[f64], side: bool| -> f64 {
                row.iter().zip(mask).filter(|(_, &c)| c == side).map(|(v, _)| v).sum()
            };
            let token = at / l;
            let fail = |what: &str| Err(Error::invalid("confidence table", format!("token {token}: {what}")));
            if (sum(prior, true) - 1.0).abs() > tol || sum(prior, false) != 0.0 {
                return fail("prior row");
            }
            if (sum(post, true) - 1.0).abs() > tol
                || (sum(post, false) - 1.0).abs() > tol
                || post.iter().any(|&v| v < 0.0)
            {
                return fail("posterior row");
            }
            if self.ablation == Ablation::Full && !self.fixed {
                let expected = blend(prior, post, mask, self.alpha, Ablation::Full);
                let row = &self.blended[at..at + l];
                if row.iter().zip(&expected).any(|(a, b)| (a - b).abs() > tol) {
                    return fail("blend");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(bits: &[u8]) -> Vec<bool> {
        bits.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn init_examples() {
        assert_eq!(init_posterior(&mask(&[1, 1, 0, 0])), vec![0.5; 4]);
        let row = init_posterior(&mask(&[0, 0, 1, 0, 0, 0, 0]));
        assert_eq!(row[2], 1.0);
        for (i, &v) in row.iter().enumerate() {
            if i != 2 {
                assert!((v - 1.0 / 6.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn uniform_probs_reproduce_init() {
        let m = mask(&[1, 0, 1, 0, 0]);
        let post = posterior_from_probs(&[0.3; 5], &m);
        for (a, b) in post.iter().zip(init_posterior(&m)) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn blend_endpoints() {
        let m = mask(&[1, 1, 0]);
        let prior = [0.7, 0.3, 0.0];
        let post = [0.4, 0.6, 1.0];
        assert_eq!(blend(&prior, &post, &m, 1.0, Ablation::Full), prior.to_vec());
        assert_eq!(blend(&prior, &post, &m, 0.0, Ablation::Full), post.to_vec());
        assert_eq!(blend(&prior, &post, &m, 0.3, Ablation::NoPrior), post.to_vec());
        assert_eq!(blend(&prior, &post, &m, 0.3, Ablation::NoPosterior), vec![0.7, 0.3, 1.0]);
        assert_eq!(blend(&prior, &post, &m, 0.3, Ablation::Neither), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn singleton_candidate_weight_is_one() {
        let m = mask(&[0, 1, 0, 0]);
        let prior = [0.0, 1.0, 0.0, 0.0];
        let post = posterior_from_probs(&[0.2, 0.9, 0.1, 0.4], &m);
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(blend(&prior, &post, &m, alpha, Ablation::Full)[1], 1.0);
        }
    }

    #[test]
    fn ablation_names_round_trip() {
        for a in Ablation::ALL {
            assert_eq!(a.name().parse::<Ablation>().unwrap(), a);
        }
        assert_eq!("no_prior".parse::<Ablation>().unwrap(), Ablation::NoPrior);
        assert!("both".parse::<Ablation>().is_err());
    }
}
