//! Negative-learning loss and the confidence-weighted risk.

use crate::error::{Error, Result};
use crate::scorer::{Matrix, TokenScorer};

/// Lower bound applied inside every logarithm.
pub const LOG_EPS: f64 = 1e-12;

/// Per-label loss for one token: `-ln f` on candidates, `-ln(1 - f)` on the
/// complementary labels.
pub fn nl_loss(probs: &[f64], candidates: &[bool]) -> Vec<f64> {
    probs
        .iter()
        .zip(candidates)
        .map(|(&f, &c)| if c { -f.max(LOG_EPS).ln() } else { -(1.0 - f).max(LOG_EPS).ln() })
        .collect()
}

/// `sum_t sum_y g * loss` for one sentence. `weights` and `candidates` are
/// flattened `[tokens x labels]`.
pub fn sentence_risk(probs: &Matrix, weights: &[f64], candidates: &[bool]) -> f64 {
    let l = probs.cols();
    probs
        .iter_rows()
        .enumerate()
        .map(|(t, row)| {
            let range = t * l..(t + 1) * l;
            nl_loss(row, &candidates[range.clone()])
                .iter()
                .zip(&weights[range])
                .map(|(loss, g)| g * loss)
                .sum::<f64>()
        })
        .sum()
}

/// Gradient of `scale * sentence_risk` with respect to the logits.
pub fn risk_logit_grad(probs: &Matrix, weights: &[f64], candidates: &[bool], scale: f64) -> Matrix {
    let mut grad = Matrix::zeros(probs.rows(), probs.cols());
    for ((g, &f), (&w, &c)) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(probs.as_slice())
        .zip(weights.iter().zip(candidates))
    {
        *g = scale * w * if c { f - 1.0 } else { f };
    }
    grad
}

/// One batch member: the scorer's input plus its confidence rows.
pub struct RiskTerm<'a, I> {
    pub input: &'a I,
    pub weights: &'a [f64],
    pub candidates: &'a [bool],
}

/// Mean sentence risk over `batch` in evaluation mode.
pub fn empirical_risk<S: TokenScorer>(scorer: &S, batch: &[RiskTerm<'_, S::Input>]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    batch
        .iter()
        .map(|term| sentence_risk(&scorer.forward(term.input), term.weights, term.candidates))
        .sum::<f64>()
        / batch.len() as f64
}

/// Mean batch risk and its exact gradient in evaluation mode (no dropout).
/// Sentences are reduced in order.
pub fn risk_and_gradient<S: TokenScorer>(scorer: &S, batch: &[RiskTerm<'_, S::Input>]) -> Result<(f64, Vec<f64>)> {
    let mut grads = vec![0.0; scorer.num_params()];
    if batch.is_empty() {
        return Ok((0.0, grads));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut risk = 0.0;
    for term in batch {
        let (probs, cache) = scorer.forward_with(term.input, None);
        if term.weights.len() != probs.as_slice().len() {
            return Err(Error::Shape {
                expected: probs.shape(),
                actual: (term.weights.len() / probs.cols().max(1), probs.cols()),
            });
        }
        risk += sentence_risk(&probs, term.weights, term.candidates);
        let grad = risk_logit_grad(&probs, term.weights, term.candidates, scale);
        scorer.backward_logits(term.input, &cache, &grad, &mut grads)?;
    }
    Ok((risk * scale, grads))
}
