use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::spans::{decode_bio, SpanEntity};
use crate::data::GoldDataset;
use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeScore {
    pub entity_type: String,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Whether this type contributes to the macro mean.
    pub in_macro: bool,
}

/// Span-level evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub macro_f1: f64,
    pub per_type: Vec<TypeScore>,
}

/// How types with neither gold nor predicted spans enter the macro mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyTypes {
    /// Leave them out of the mean.
    #[default]
    Exclude,
    /// Count them with F1 = 0.
    ScoreZero,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Exact-match span precision/recall/F1 per entity type, averaged without
/// weighting over types.
pub fn span_macro_f1(gold: &GoldDataset, pred: &GoldDataset, empty: EmptyTypes) -> Result<EvalReport> {
    let space = gold.label_space();
    if !space.is_compatible(pred.label_space()) {
        return Err(Error::invalid(
            "label space",
            "gold and prediction use different entity types",
        ));
    }
    if gold.len() != pred.len() {
        let at = gold.len().min(pred.len());
        let id = gold
            .items()
            .get(at)
            .or_else(|| pred.items().get(at))
            .map(|s| s.sentence.id.clone())
            .unwrap_or_default();
        return Err(Error::Misaligned {
            sentence_id: id,
            message: format!("{} gold sentences vs {} predicted", gold.len(), pred.len()),
        });
    }
    let n = space.num_types();
    let (mut tp, mut fp, mut fn_) = (vec![0usize; n], vec![0usize; n], vec![0usize; n]);
    for (g, p) in gold.items().iter().zip(pred.items()) {
        if g.sentence.tokens != p.sentence.tokens {
            return Err(Error::Misaligned {
                sentence_id: g.sentence.id.clone(),
                message: "token sequences differ".into(),
            });
        }
        let gold_spans: HashSet<SpanEntity> = decode_bio(&g.labels, space).into_iter().collect();
        let pred_spans: HashSet<SpanEntity> = decode_bio(&p.labels, space).into_iter().collect();
        for s in &pred_spans {
            if gold_spans.contains(s) {
                tp[s.kind] += 1;
            } else {
                fp[s.kind] += 1;
            }
        }
        for s in gold_spans.difference(&pred_spans) {
            fn_[s.kind] += 1;
        }
    }
    let per_type: Vec<TypeScore> = (0..n)
        .map(|t| {
            let precision = ratio(tp[t], tp[t] + fp[t]);
            let recall = ratio(tp[t], tp[t] + fn_[t]);
            let seen = tp[t] + fp[t] + fn_[t] > 0;
            TypeScore {
                entity_type: space.entity_types()[t].clone(),
                tp: tp[t],
                fp: fp[t],
                fn_: fn_[t],
                precision,
                recall,
                f1: f1(precision, recall),
                in_macro: seen || empty == EmptyTypes::ScoreZero,
            }
        })
        .collect();
    let counted: Vec<f64> = per_type.iter().filter(|s| s.in_macro).map(|s| s.f1).collect();
    let macro_f1 = if counted.is_empty() {
        // Nothing to find and nothing found.
        1.0
    } else {
        counted.iter().sum::<f64>() / counted.len() as f64
    };
    Ok(EvalReport {
        version: REPORT_VERSION,
        macro_f1,
        per_type,
    })
}
