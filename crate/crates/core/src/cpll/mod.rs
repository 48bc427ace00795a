//! Confidence-based partial label learning.

mod confidence;
mod loss;
mod train;

pub use confidence::{blend, init_posterior, posterior_from_probs, Ablation, ConfidenceTable};
pub use loss::{empirical_risk, nl_loss, risk_and_gradient, risk_logit_grad, sentence_risk, RiskTerm, LOG_EPS};
pub use train::{
    argmax_labels, e_step_posterior, m_step, parse_grid, predict, sweep_alpha, train_cpll, train_supervised,
    EpochRecord, History, SweepOutcome, SweepRow, TrainConfig, TrainOutcome, Trainer,
};
