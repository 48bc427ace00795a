//! Synthetic crowd annotations from a gold corpus.
//!
//! Each simulated annotator walks the gold entity spans of every sentence and,
//! for each span, tries the enabled rules in the fixed order bound, missing,
//! category, segmentation. Every rule fires independently with probability
//! `rate` and later rules see the effect of earlier ones; once a span is
//! deleted the remaining rules are skipped for it.
//!
//! # Random streams
//!
//! Annotator `k` draws from `ChaCha8Rng::seed_from_u64(seed + k)` (wrapping),
//! consumed sentence by sentence, span by span. For every span and rule one
//! Bernoulli draw is made; a firing rule then draws its own parameters:
//! bound error draws the side, the direction and a delta in {1, 2}; category
//! error draws the replacement type; segmentation error draws the split point.

use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::token_vote;
use crate::data::{CrowdDataset, CrowdSentence, CrowdToken, GoldDataset, GoldSentence, Tag};
use crate::error::{Error, Result};
use crate::eval::{decode_bio, encode_bio, SpanEntity};

/// The four perturbation rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Moves one boundary of the entity.
    Bound,
    /// Drops the entity.
    Missing,
    /// Swaps the entity type.
    Category,
    /// Splits the entity in two.
    Segmentation,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Bound, Rule::Missing, Rule::Category, Rule::Segmentation];

    pub fn code(self) -> &'static str {
        match self {
            Rule::Bound => "be",
            Rule::Missing => "me",
            Rule::Category => "ce",
            Rule::Segmentation => "se",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "be" => Ok(Rule::Bound),
            "me" => Ok(Rule::Missing),
            "ce" => Ok(Rule::Category),
            "se" => Ok(Rule::Segmentation),
            other => Err(Error::invalid(
                "rule",
                format!("{other:?} (expected be, me, ce or se)"),
            )),
        }
    }
}

/// Parses a comma-separated rule list such as `be,me,ce,se`.
pub fn parse_rules(list: &str) -> Result<Vec<Rule>> {
    let mut rules = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Rule>>>()?;
    rules.sort();
    rules.dedup();
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    pub rate: f64,
    pub rules: Vec<Rule>,
    pub annotators: usize,
    pub seed: u64,
}

impl PerturbConfig {
    pub fn new(rate: f64, annotators: usize, seed: u64) -> Self {
        PerturbConfig {
            rate,
            rules: Rule::ALL.to_vec(),
            annotators,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::invalid("rate", format!("{} not in [0, 1]", self.rate)));
        }
        if self.rules.is_empty() {
            return Err(Error::invalid("rules", "at least one rule is required"));
        }
        if self.annotators == 0 {
            return Err(Error::invalid("annotators", "must be at least 1"));
        }
        Ok(())
    }

    fn enabled(&self, rule: Rule) -> bool {
        self.rules.contains(&rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMove {
    Extend,
    Shrink,
}

/// Moves one boundary of `spans[idx]` by `delta` tokens. The span keeps at
/// least one token, stays inside `[0, len)` and stops short of its
/// neighbours.
pub fn shift_bound(
    spans: &[SpanEntity],
    idx: usize,
    len: usize,
    side: Side,
    mv: BoundMove,
    delta: usize,
) -> Vec<SpanEntity> {
    let mut out = spans.to_vec();
    let span = &mut out[idx];
    match (side, mv) {
        (Side::Left, BoundMove::Extend) => {
            let floor = if idx > 0 { spans[idx - 1].end + 1 } else { 0 };
            span.start = span.start.saturating_sub(delta).max(floor).min(span.start);
        }
        (Side::Right, BoundMove::Extend) => {
            let ceil = spans.get(idx + 1).map_or(len - 1, |next| next.start - 1);
            span.end = (span.end + delta).min(ceil).max(span.end);
        }
        (Side::Left, BoundMove::Shrink) => {
            span.start = (span.start + delta).min(span.end);
        }
        (Side::Right, BoundMove::Shrink) => {
            span.end = span.end.saturating_sub(delta).max(span.start);
        }
    }
    out
}

/// Bound error: a random side moves outwards or inwards by 1 or 2 tokens.
pub fn perturb_be<R: Rng + ?Sized>(
    spans: &[SpanEntity],
    idx: usize,
    len: usize,
    rng: &mut R,
) -> Vec<SpanEntity> {
    let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
    let mv = if rng.random_bool(0.5) {
        BoundMove::Extend
    } else {
        BoundMove::Shrink
    };
    let delta = rng.random_range(1..=2);
    shift_bound(spans, idx, len, side, mv, delta)
}

/// Missing error: the span disappears and its tokens become `O`.
pub fn perturb_me(spans: &[SpanEntity], idx: usize) -> Vec<SpanEntity> {
    let mut out = spans.to_vec();
    if idx < out.len() {
        out.remove(idx);
    }
    out
}

/// Category error: the span takes a different type drawn uniformly.
pub fn perturb_ce<R: Rng + ?Sized>(
    spans: &[SpanEntity],
    idx: usize,
    num_types: usize,
    rng: &mut R,
) -> Vec<SpanEntity> {
    let mut out = spans.to_vec();
    if num_types < 2 {
        warn!("category error needs at least two entity types; skipped");
        return out;
    }
    let current = out[idx].kind;
    let mut kind = rng.random_range(0..num_types - 1);
    if kind >= current {
        kind += 1;
    }
    out[idx].kind = kind;
    out
}

/// Segmentation error: the span splits at a uniformly drawn inner boundary
/// into two spans of the same type.
pub fn perturb_se<R: Rng + ?Sized>(
    spans: &[SpanEntity],
    idx: usize,
    rng: &mut R,
) -> Vec<SpanEntity> {
    let mut out = spans.to_vec();
    let span = out[idx];
    if span.len() < 2 {
        return out;
    }
    let cut = rng.random_range(span.start + 1..=span.end);
    out[idx].end = cut - 1;
    out.insert(idx + 1, SpanEntity::new(cut, span.end, span.kind));
    out
}

fn perturb_sentence<R: Rng + ?Sized>(
    gold: &[SpanEntity],
    len: usize,
    num_types: usize,
    config: &PerturbConfig,
    rng: &mut R,
) -> Vec<SpanEntity> {
    let mut spans = gold.to_vec();
    let mut i = 0;
    while i < spans.len() {
        let mut step = 1;
        for rule in Rule::ALL {
            if !config.enabled(rule) || !rng.random_bool(config.rate) {
                continue;
            }
            match rule {
                Rule::Bound => spans = perturb_be(&spans, i, len, rng),
                Rule::Missing => {
                    spans = perturb_me(&spans, i);
                    step = 0;
                    break;
                }
                Rule::Category => spans = perturb_ce(&spans, i, num_types, rng),
                Rule::Segmentation => {
                    let before = spans.len();
                    spans = perturb_se(&spans, i, rng);
                    step = 1 + spans.len() - before;
                }
            }
        }
        i += step;
    }
    spans
}

fn annotator_rng(seed: u64, annotator: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(annotator as u64))
}

fn simulate_with(gold: &GoldDataset, config: &PerturbConfig, rng: &mut ChaCha8Rng) -> Result<GoldDataset> {
    let space = gold.label_space();
    let items = gold
        .items()
        .iter()
        .map(|g| {
            let spans = decode_bio(&g.labels, space);
            let noisy = perturb_sentence(&spans, g.sentence.len(), space.num_types(), config, rng);
            let labels = if noisy == spans {
                g.labels.clone()
            } else {
                encode_bio(&noisy, g.sentence.len(), space)
            };
            GoldSentence {
                sentence: g.sentence.clone(),
                labels,
            }
        })
        .collect();
    GoldDataset::new(space.clone(), items)
}

/// One simulated annotator, using the stream of annotator 0.
///
/// Sentences whose spans come through untouched keep their original tags,
/// so a zero rate reproduces the input exactly even when it is not valid BIO.
pub fn simulate_annotator(gold: &GoldDataset, config: &PerturbConfig) -> Result<GoldDataset> {
    config.validate()?;
    simulate_with(gold, config, &mut annotator_rng(config.seed, 0))
}

/// Runs `config.annotators` simulated annotators and merges their tags into a
/// crowd dataset with per-annotator provenance.
pub fn make_crowd(gold: &GoldDataset, config: &PerturbConfig) -> Result<CrowdDataset> {
    config.validate()?;
    let space = gold.label_space();
    let annotations = (0..config.annotators)
        .map(|k| simulate_with(gold, config, &mut annotator_rng(config.seed, k)))
        .collect::<Result<Vec<_>>>()?;
    let items = gold
        .items()
        .iter()
        .enumerate()
        .map(|(s, g)| {
            let tokens = (0..g.sentence.len())
                .map(|t| {
                    let tags = annotations.iter().map(|a| Some(a.items()[s].labels[t])).collect();
                    CrowdToken::from_annotations(tags, space)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CrowdSentence {
                sentence: g.sentence.clone(),
                tokens,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CrowdDataset::new(space.clone(), items, Some(config.annotators))
}

/// Token error accounting against the gold corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    /// Gold tokens labeled as part of an entity.
    pub original_entity_tokens: usize,
    /// Entity tokens with the right type but the wrong B/I position.
    pub bi_errors: usize,
    /// Entity tokens with the right B/I position but the wrong type.
    pub cat_errors: usize,
    /// `(bi_errors + cat_errors) / original_entity_tokens`, as a fraction.
    pub percent: f64,
}

/// Compares gold labels with (majority-voted) noisy labels, token by token.
pub fn perturb_report(gold: &GoldDataset, noisy: &GoldDataset) -> Result<PerturbReport> {
    let space = gold.label_space();
    if gold.len() != noisy.len() {
        return Err(Error::invalid(
            "datasets",
            format!("{} gold sentences vs {} noisy", gold.len(), noisy.len()),
        ));
    }
    let (mut original, mut bi, mut cat) = (0, 0, 0);
    for (g, n) in gold.items().iter().zip(noisy.items()) {
        if g.labels.len() != n.labels.len() {
            return Err(Error::Misaligned {
                sentence_id: g.sentence.id.clone(),
                message: "different token counts".into(),
            });
        }
        for (&gl, &nl) in g.labels.iter().zip(&n.labels) {
            let gold_tag = space.tag(gl);
            if gold_tag == Tag::Outside {
                continue;
            }
            original += 1;
            let noisy_tag = space.tag(nl);
            let same_type = gold_tag.entity_type() == noisy_tag.entity_type();
            let same_position = std::mem::discriminant(&gold_tag) == std::mem::discriminant(&noisy_tag);
            match (same_position, same_type) {
                (false, true) => bi += 1,
                (true, false) => cat += 1,
                _ => {}
            }
        }
    }
    let percent = if original == 0 {
        0.0
    } else {
        (bi + cat) as f64 / original as f64
    };
    Ok(PerturbReport {
        original_entity_tokens: original,
        bi_errors: bi,
        cat_errors: cat,
        percent,
    })
}

/// Report for a crowd dataset, voting its tokens first.
pub fn crowd_report(gold: &GoldDataset, crowd: &CrowdDataset) -> Result<PerturbReport> {
    perturb_report(gold, &token_vote(crowd))
}
