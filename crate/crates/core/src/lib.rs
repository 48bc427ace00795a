//! Training sequence labelers from crowd annotations with confidence-based
//! partial label learning.
//!
//! Each token of a crowd-annotated corpus carries a candidate label set and
//! the number of annotators behind each candidate. Training alternates between
//! fitting a token scorer under fixed per-label confidences (M-step) and
//! re-estimating the confidences from the scorer (E-step).
//!
//! ```no_run
//! use crowdseq::{noise, toy, cpll, eval};
//!
//! let corpus = toy::bundled()?;
//! let crowd = noise::make_crowd(&corpus.train, &noise::PerturbConfig::new(0.1, 3, 7))?;
//! let run = cpll::train_cpll(&crowd, Some(&corpus.dev), &cpll::TrainConfig::default())?;
//! let sentences: Vec<_> = corpus.test.sentences().cloned().collect();
//! let pred = cpll::predict(&run.scorer, corpus.test.label_space(), &sentences)?;
//! let report = eval::span_macro_f1(&corpus.test, &pred, eval::EmptyTypes::Exclude)?;
//! println!("{:.4}", report.macro_f1);
//! # Ok::<(), crowdseq::Error>(())
//! ```

pub mod aggregate;
pub mod cpll;
pub mod data;
mod error;
pub mod eval;
pub mod noise;
pub mod scorer;
pub mod toy;

pub use error::{Error, Result};

pub use cpll::{Ablation, ConfidenceTable, TrainConfig};
pub use data::{CrowdDataset, CrowdToken, GoldDataset, LabelSpace, Sentence};
pub use eval::{EvalReport, SpanEntity};
pub use scorer::{ReferenceScorer, ScorerConfig, TokenScorer};
