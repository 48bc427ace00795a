//! The EM training loop.
//!
//! Every epoch runs the M-step over shuffled mini-batches with the current
//! blended confidences frozen, then refreshes the posterior confidences from
//! the model (E-step) and re-blends. The dev set, when given, picks the best
//! epoch by span Macro-F1.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confidence::{Ablation, ConfidenceTable};
use super::loss::{risk_logit_grad, sentence_risk, RiskTerm};
use crate::data::{CrowdDataset, GoldDataset, GoldSentence, LabelSpace, Sentence};
use crate::error::{Error, Result};
use crate::eval::{decode_bio, encode_bio, span_macro_f1, EmptyTypes};
use crate::scorer::{Adam, AdamConfig, Matrix, ReferenceScorer, ScorerConfig, TokenScorer};

const SHUFFLE_STREAM: u64 = 1;
const DROPOUT_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds scorer initialisation, batch shuffling and dropout.
    pub seed: u64,
    pub ablation: Ablation,
    /// Stop after this many epochs without a dev improvement.
    pub patience: Option<usize>,
    pub scorer: ScorerConfig,
    pub optimizer: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.5,
            epochs: 50,
            batch_size: 8,
            seed: 0,
            ablation: Ablation::Full,
            patience: Some(10),
            scorer: ScorerConfig::default(),
            optimizer: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("{} not in [0, 1]", self.alpha)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size", "must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1"));
        }
        self.scorer.validate()
    }

    fn scorer_config(&self) -> ScorerConfig {
        ScorerConfig {
            seed: self.seed,
            ..self.scorer.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean mini-batch risk observed during the epoch's M-step.
    pub risk: f64,
    pub dev_f1: Option<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_dev_f1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<S> {
    pub scorer: S,
    pub history: History,
}

/// Argmax over each row; ties go to the lower label index.
pub fn argmax_labels(probs: &Matrix) -> Vec<usize> {
    probs
        .iter_rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                .0
        })
        .collect()
}

fn predict_encoded<S: TokenScorer>(
    scorer: &S,
    space: &LabelSpace,
    sentences: &[Sentence],
    inputs: &[S::Input],
) -> GoldDataset {
    let items = sentences
        .iter()
        .zip(inputs)
        .map(|(sentence, input)| {
            let raw = argmax_labels(&scorer.forward(input));
            let spans = decode_bio(&raw, space);
            GoldSentence {
                sentence: sentence.clone(),
                labels: encode_bio(&spans, sentence.len(), space),
            }
        })
        .collect();
    GoldDataset::new(space.clone(), items).expect("argmax stays in the label space")
}

/// Tags sentences by per-token argmax, then rewrites the tags into valid BIO
/// with the same decoded spans.
pub fn predict<S: TokenScorer>(scorer: &S, space: &LabelSpace, sentences: &[Sentence]) -> Result<GoldDataset> {
    if scorer.num_labels() != space.len() {
        return Err(Error::invalid(
            "label space",
            format!("model has {} labels, space has {}", scorer.num_labels(), space.len()),
        ));
    }
    let inputs: Vec<S::Input> = sentences.iter().map(|s| scorer.encode(s)).collect();
    Ok(predict_encoded(scorer, space, sentences, &inputs))
}

/// One optimizer step minimising the mean confidence-weighted risk of
/// `batch`. Returns the batch risk before the update.
pub fn m_step<S: TokenScorer>(
    scorer: &mut S,
    optimizer: &mut Adam,
    batch: &[RiskTerm<'_, S::Input>],
    mut dropout: Option<&mut dyn RngCore>,
) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut grads = vec![0.0; scorer.num_params()];
    let scale = 1.0 / batch.len() as f64;
    let mut risk = 0.0;
    for term in batch {
        let rng = dropout.as_mut().map(|r| &mut **r as &mut dyn RngCore);
        let (probs, cache) = scorer.forward_with(term.input, rng);
        risk += sentence_risk(&probs, term.weights, term.candidates);
        let grad = risk_logit_grad(&probs, term.weights, term.candidates, scale);
        scorer.backward_logits(term.input, &cache, &grad, &mut grads)?;
    }
    optimizer.step(scorer.params_mut(), &grads)?;
    Ok(risk * scale)
}

/// Refreshes the posterior confidences from the current model and re-blends.
pub fn e_step_posterior<S: TokenScorer>(scorer: &S, inputs: &[S::Input], table: &mut ConfidenceTable) -> Result<()> {
    for (s, input) in inputs.iter().enumerate() {
        table.update_posterior(s, &scorer.forward(input))?;
    }
    table.reblend();
    Ok(())
}

/// Holds the model, optimizer and confidences for one training run.
pub struct Trainer<S: TokenScorer> {
    scorer: S,
    optimizer: Adam,
    table: ConfidenceTable,
    inputs: Vec<S::Input>,
    sentence_ids: Vec<String>,
    config: TrainConfig,
    shuffle_rng: ChaCha8Rng,
    dropout_rng: ChaCha8Rng,
    refresh_posterior: bool,
}

impl Trainer<ReferenceScorer> {
    /// A reference scorer seeded from `config.seed`.
    pub fn new(crowd: &CrowdDataset, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let scorer = ReferenceScorer::new(config.scorer_config(), crowd.label_space().len())?;
        Trainer::with_scorer(scorer, crowd, config)
    }
}

impl<S: TokenScorer> Trainer<S> {
    pub fn with_scorer(scorer: S, crowd: &CrowdDataset, config: &TrainConfig) -> Result<Self> {
        let table = ConfidenceTable::new(crowd, config.alpha, config.ablation)?;
        Trainer::with_table(scorer, crowd, table, config)
    }

    fn with_table(scorer: S, crowd: &CrowdDataset, table: ConfidenceTable, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        if crowd.is_empty() {
            return Err(Error::invalid("training set", "no sentences"));
        }
        if scorer.num_labels() != crowd.label_space().len() {
            return Err(Error::invalid("scorer", "label count differs from the dataset"));
        }
        let optimizer = Adam::new(config.optimizer.clone(), scorer.param_groups(), scorer.num_params())?;
        let inputs = crowd.sentences().map(|s| scorer.encode(s)).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
        shuffle_rng.set_stream(SHUFFLE_STREAM);
        let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed);
        dropout_rng.set_stream(DROPOUT_STREAM);
        let refresh_posterior = table.ablation().uses_posterior() && !table.is_fixed();
        Ok(Trainer {
            scorer,
            optimizer,
            table,
            inputs,
            sentence_ids: crowd.sentences().map(|s| s.id.clone()).collect(),
            config: config.clone(),
            shuffle_rng,
            dropout_rng,
            refresh_posterior,
        })
    }

    pub fn scorer(&self) -> &S {
        &self.scorer
    }

    pub fn confidences(&self) -> &ConfidenceTable {
        &self.table
    }

    pub fn inputs(&self) -> &[S::Input] {
        &self.inputs
    }

    /// Risk of the whole training set under the current model and
    /// confidences, without dropout.
    pub fn empirical_risk(&self) -> f64 {
        let terms: Vec<_> = (0..self.inputs.len()).map(|s| self.term(s)).collect();
        super::loss::empirical_risk(&self.scorer, &terms)
    }

    fn term(&self, s: usize) -> RiskTerm<'_, S::Input> {
        RiskTerm {
            input: &self.inputs[s],
            weights: self.table.blended(s),
            candidates: self.table.candidates(s),
        }
    }

    /// One pass of mini-batch updates. Returns the mean batch risk.
    pub fn run_m_step(&mut self, epoch: usize) -> Result<f64> {
        let mut order: Vec<usize> = (0..self.inputs.len()).collect();
        order.shuffle(&mut self.shuffle_rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (b, chunk) in order.chunks(self.config.batch_size).enumerate() {
            let terms: Vec<RiskTerm<'_, S::Input>> = chunk
                .iter()
                .map(|&s| RiskTerm {
                    input: &self.inputs[s],
                    weights: self.table.blended(s),
                    candidates: self.table.candidates(s),
                })
                .collect();
            let dropout = Some(&mut self.dropout_rng as &mut dyn RngCore);
            let risk = m_step(&mut self.scorer, &mut self.optimizer, &terms, dropout)?;
            if !risk.is_finite() {
                let ids: Vec<&str> = chunk.iter().map(|&s| self.sentence_ids[s].as_str()).collect();
                return Err(Error::NonFinite {
                    epoch,
                    batch: b,
                    detail: format!("sentences {ids:?}"),
                });
            }
            total += risk;
            batches += 1;
        }
        Ok(total / batches as f64)
    }

    pub fn run_e_step(&mut self) -> Result<()> {
        if self.refresh_posterior {
            e_step_posterior(&self.scorer, &self.inputs, &mut self.table)?;
        }
        Ok(())
    }

    /// Full EM schedule with dev-based model selection.
    pub fn train(mut self, dev: Option<&GoldDataset>) -> Result<TrainOutcome<S>>
    where
        S: Clone,
    {
        let space = dev.map(|d| d.label_space().clone());
        let dev_sentences: Vec<Sentence> = dev.map(|d| d.sentences().cloned().collect()).unwrap_or_default();
        let dev_inputs: Vec<S::Input> = dev_sentences.iter().map(|s| self.scorer.encode(s)).collect();
        let mut epochs = Vec::with_capacity(self.config.epochs);
        let mut best: Option<(usize, f64, S)> = None;
        for epoch in 1..=self.config.epochs {
            let risk = self.run_m_step(epoch)?;
            self.run_e_step()?;
            let dev_f1 = match (dev, &space) {
                (Some(dev), Some(space)) => {
                    let pred = predict_encoded(&self.scorer, space, &dev_sentences, &dev_inputs);
                    Some(span_macro_f1(dev, &pred, EmptyTypes::Exclude)?.macro_f1)
                }
                _ => None,
            };
            log::debug!("epoch {epoch}: risk {risk:.5} dev {dev_f1:?}");
            epochs.push(EpochRecord {
                epoch,
                risk,
                dev_f1,
                alpha: self.config.alpha,
            });
            let improved = match (&best, dev_f1) {
                (None, _) => true,
                (Some((_, b, _)), Some(f)) => f > *b,
                (Some(_), None) => true,
            };
            if improved {
                best = Some((epoch, dev_f1.unwrap_or(f64::NAN), self.scorer.clone()));
            }
            let best_epoch = best.as_ref().map_or(epoch, |b| b.0);
            if let (Some(p), Some(_)) = (self.config.patience, dev) {
                if epoch - best_epoch >= p {
                    break;
                }
            }
        }
        let (best_epoch, best_f1, scorer) = best.expect("at least one epoch");
        Ok(TrainOutcome {
            scorer,
            history: History {
                epochs,
                best_epoch,
                best_dev_f1: dev.map(|_| best_f1),
            },
        })
    }
}

/// Trains a reference scorer with CPLL.
pub fn train_cpll(
    crowd: &CrowdDataset,
    dev: Option<&GoldDataset>,
    config: &TrainConfig,
) -> Result<TrainOutcome<ReferenceScorer>> {
    if let Some(dev) = dev {
        if !dev.label_space().is_compatible(crowd.label_space()) {
            return Err(Error::invalid("dev set", "label space differs from the training set"));
        }
    }
    Trainer::new(crowd, config)?.train(dev)
}

/// Ordinary supervised training on hard labels (e.g. voted ones): every label
/// of every token gets weight 1, i.e. one binary cross-entropy per label.
/// Uses the same scorer, optimizer and model selection as [`train_cpll`].
pub fn train_supervised(
    gold: &GoldDataset,
    dev: Option<&GoldDataset>,
    config: &TrainConfig,
) -> Result<TrainOutcome<ReferenceScorer>> {
    config.validate()?;
    let crowd = gold.to_unanimous_crowd(1)?;
    let table = ConfidenceTable::fixed(&crowd, 1.0)?;
    let scorer = ReferenceScorer::new(config.scorer_config(), crowd.label_space().len())?;
    Trainer::with_table(scorer, &crowd, table, config)?.train(dev)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub dev_f1: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub best_alpha: f64,
    pub best: TrainOutcome<ReferenceScorer>,
}

/// `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid("grid", format!("{text:?} (expected start:end:step or a,b,c)"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, end, step] = parts[..] else {
            return Err(bad());
        };
        if step <= 0.0 || end < start {
            return Err(bad());
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::invalid("grid", "alphas must lie in [0, 1]"));
    }
    let mut seen = values.clone();
    seen.sort_by(f64::total_cmp);
    seen.dedup();
    if seen.len() != values.len() {
        return Err(Error::invalid("grid", "duplicate alpha"));
    }
    Ok(values)
}

/// Trains once per alpha with the same seed and keeps the alpha with the best
/// dev Macro-F1 (the first one on ties). Grid points run in parallel on the
/// current rayon pool; results do not depend on the pool size.
pub fn sweep_alpha(
    crowd: &CrowdDataset,
    dev: &GoldDataset,
    config: &TrainConfig,
    grid: &[f64],
) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "empty"));
    }
    let runs: Vec<TrainOutcome<ReferenceScorer>> = grid
        .par_iter()
        .map(|&alpha| {
            let cfg = TrainConfig {
                alpha,
                ..config.clone()
            };
            train_cpll(crowd, Some(dev), &cfg)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(&runs)
        .map(|(&alpha, run)| SweepRow {
            alpha,
            dev_f1: run.history.best_dev_f1.unwrap_or(0.0),
            best_epoch: run.history.best_epoch,
        })
        .collect();
    let mut best_idx = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.dev_f1 > rows[best_idx].dev_f1 {
            best_idx = i;
        }
    }
    let best_alpha = rows[best_idx].alpha;
    let best = runs.into_iter().nth(best_idx).expect("index in range");
    Ok(SweepOutcome {
        rows,
        best_alpha,
        best,
    })
}
