//! Span decoding, span-level Macro-F1 and inter-annotator agreement.

mod f1;
mod kappa;
mod spans;

pub use f1::{span_macro_f1, EmptyTypes, EvalReport, TypeScore, REPORT_VERSION};
pub use kappa::{cohen_kappa, fleiss_kappa, pairwise_kappa};
pub use spans::{decode_bio, encode_bio, SpanEntity};
