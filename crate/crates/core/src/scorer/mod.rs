//! Token scorers: per-token, per-label independent probabilities with exact
//! gradients, plus the optimizer and checkpoint format used to train them.

mod adam;
mod checkpoint;
pub mod features;
mod matrix;
mod reference;

use std::ops::Range;

use rand::RngCore;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use matrix::Matrix;
pub use reference::{
    embedding_rows, EncodedSentence, ForwardCache, ReferenceScorer, ScorerConfig, PROB_FLOOR,
};

use crate::data::Sentence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamGroupKind {
    /// Representation layers.
    Encoder,
    /// The output layer.
    Head,
}

/// A contiguous slice of the flat parameter vector sharing a learning rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamGroup {
    pub kind: ParamGroupKind,
    pub range: Range<usize>,
}

/// A model producing `f(y; t, x)`: one sigmoid probability per token and
/// label, computed independently per label.
pub trait TokenScorer {
    /// Pre-processed sentence (feature ids, sub-word pieces, ...).
    type Input;
    /// Whatever the backward pass needs from the forward pass.
    type Cache;

    fn num_labels(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    fn param_groups(&self) -> Vec<ParamGroup>;

    fn encode(&self, sentence: &Sentence) -> Self::Input;

    /// Probabilities `[tokens x labels]`, all in the open interval (0, 1).
    /// Dropout is applied only when an RNG is given.
    fn forward_with(&self, input: &Self::Input, dropout: Option<&mut dyn RngCore>) -> (Matrix, Self::Cache);

    fn cached_probs<'a>(&self, cache: &'a Self::Cache) -> &'a Matrix;

    /// Accumulates parameter gradients into `grads` given the loss gradient
    /// with respect to the pre-sigmoid logits.
    fn backward_logits(
        &self,
        input: &Self::Input,
        cache: &Self::Cache,
        grad_logits: &Matrix,
        grads: &mut [f64],
    ) -> Result<()>;

    /// Evaluation-mode forward pass.
    fn forward(&self, input: &Self::Input) -> Matrix {
        self.forward_with(input, None).0
    }

    /// Accumulates parameter gradients given the loss gradient with respect
    /// to the output probabilities.
    fn backward(
        &self,
        input: &Self::Input,
        cache: &Self::Cache,
        grad_probs: &Matrix,
        grads: &mut [f64],
    ) -> Result<()> {
        let probs = self.cached_probs(cache);
        if probs.shape() != grad_probs.shape() {
            return Err(Error::Shape {
                expected: probs.shape(),
                actual: grad_probs.shape(),
            });
        }
        let mut grad_logits = grad_probs.clone();
        for (g, &p) in grad_logits.as_mut_slice().iter_mut().zip(probs.as_slice()) {
            *g *= p * (1.0 - p);
        }
        self.backward_logits(input, cache, &grad_logits, grads)
    }

    fn num_params(&self) -> usize {
        self.params().len()
    }
}
