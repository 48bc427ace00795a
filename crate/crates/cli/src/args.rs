use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crowdseq::cpll::{Ablation, TrainConfig};
use crowdseq::scorer::{AdamConfig, ScorerConfig};

#[derive(Debug, Parser)]
#[command(
    name = "crowdseq",
    version,
    about = "Train sequence labelers from crowd annotations with confidence-based partial label learning",
    after_help = "Exit status: 0 on success, 1 on usage errors, 2 on data errors."
)]
pub struct Cli {
    /// Worker threads for parallel work such as alpha sweeps. Never changes results.
    #[arg(long, global = true, default_value_t = 1, value_parser = positive_usize, value_name = "N")]
    pub threads: usize,

    /// Flat TOML file of flag defaults (`key = value`, keys named like the long flags). Command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Log progress to standard error; repeat for per-epoch detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate noisy annotators by corrupting the entities of a gold file.
    Perturb(PerturbArgs),
    /// Aggregate a crowd file into hard labels by majority voting.
    Vote(VoteArgs),
    /// Train a model on a crowd file.
    Train(TrainArgs),
    /// Train once per alpha on a grid and keep the model with the best dev Macro-F1.
    SweepAlpha(SweepArgs),
    /// Score predicted tags against gold tags with span-level Macro-F1.
    Eval(EvalArgs),
    /// Measure inter-annotator agreement of a crowd file.
    Kappa(KappaArgs),
    /// Tag sentences with a trained model.
    Predict(PredictArgs),
    /// Write the bundled toy corpus (train, dev and test gold files).
    Toy(ToyArgs),
    /// Perturb the toy corpus, train CPLL and the voting baselines, and compare them on the test split.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TypesArg {
    /// Comma-separated entity types fixing the label space (default: inferred from the input files, sorted).
    #[arg(long, value_name = "T1,T2,..")]
    pub types: Option<String>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Gold file to corrupt.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Where to write the crowd file (one tag column per annotator).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Probability that each rule fires on each entity.
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    pub rate: f64,
    /// Rules to apply: be (bound), me (missing), ce (category), se (segmentation).
    #[arg(long, default_value = "be,me,ce,se", value_name = "LIST")]
    pub rules: String,
    /// Number of simulated annotators.
    #[arg(long, default_value_t = 3, value_parser = positive_usize, value_name = "K")]
    pub annotators: usize,
    /// Random seed; annotator k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the perturbation report (token errors after token-level voting) as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub types: TypesArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VoteLevel {
    Token,
    Entity,
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    /// Vote per token or per exact entity span.
    #[arg(long, value_enum, default_value_t = VoteLevel::Token)]
    pub level: VoteLevel,
    /// Crowd file to aggregate.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Where to write the voted gold file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub types: TypesArg,
}

/// Optimisation and model settings shared by the training commands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Maximum number of EM epochs.
    #[arg(long, default_value_t = 50, value_parser = positive_usize)]
    pub epochs: usize,
    /// Sentences per mini-batch.
    #[arg(long, default_value_t = 8, value_parser = positive_usize)]
    pub batch: usize,
    /// Seed for initialisation, shuffling and dropout.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Which confidence terms to use.
    #[arg(long, value_enum, default_value_t = AblationArg::Full)]
    pub ablation: AblationArg,
    /// Stop after this many epochs without a dev improvement (0 disables early stopping).
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    /// Adam learning rate of the embedding and hidden layers.
    #[arg(long, default_value_t = 0.002, value_parser = non_negative)]
    pub encoder_lr: f64,
    /// Adam learning rate of the output layer.
    #[arg(long, default_value_t = 0.002, value_parser = non_negative)]
    pub head_lr: f64,
    /// Number of hashed feature buckets.
    #[arg(long, default_value_t = 4096, value_parser = positive_usize)]
    pub buckets: usize,
    /// Embedding size per feature bucket.
    #[arg(long, default_value_t = 32, value_parser = positive_usize)]
    pub embed_dim: usize,
    /// Context tokens on each side of the scored token.
    #[arg(long, default_value_t = 2)]
    pub window: usize,
    /// Hidden layer size.
    #[arg(long, default_value_t = 64, value_parser = positive_usize)]
    pub hidden: usize,
    /// Dropout rate on the hidden layer during training.
    #[arg(long, default_value_t = 0.1, value_parser = dropout_rate)]
    pub dropout: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationArg {
    Full,
    NoPrior,
    NoPosterior,
    Neither,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Full => Ablation::Full,
            AblationArg::NoPrior => Ablation::NoPrior,
            AblationArg::NoPosterior => Ablation::NoPosterior,
            AblationArg::Neither => Ablation::Neither,
        }
    }
}

impl ModelArgs {
    pub fn train_config(&self, alpha: f64) -> TrainConfig {
        TrainConfig {
            alpha,
            epochs: self.epochs,
            batch_size: self.batch,
            seed: self.seed,
            ablation: self.ablation.into(),
            patience: (self.patience > 0).then_some(self.patience),
            scorer: ScorerConfig {
                buckets: self.buckets,
                embed_dim: self.embed_dim,
                window: self.window,
                hidden: self.hidden,
                dropout: self.dropout,
                seed: self.seed,
                ..ScorerConfig::default()
            },
            optimizer: AdamConfig {
                encoder_lr: self.encoder_lr,
                head_lr: self.head_lr,
                ..AdamConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    /// Token-level majority vote.
    TokenVote,
    /// Entity-level majority vote.
    EntityVote,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Crowd file to train on.
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Gold dev file for model selection (default: keep the last epoch).
    #[arg(long, value_name = "FILE")]
    pub dev: Option<PathBuf>,
    /// Weight of the count-based prior against the model posterior.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub alpha: f64,
    /// Train an ordinary supervised model on voted labels instead of CPLL.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Where to write the model checkpoint (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Write the per-epoch training history as JSON.
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub types: TypesArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Crowd file to train on.
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Gold dev file used to score every alpha.
    #[arg(long, value_name = "FILE")]
    pub dev: PathBuf,
    /// Alphas as start:end:step (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0.1:0.9:0.1", value_name = "GRID")]
    pub grid: String,
    /// Where to write the checkpoint of the best alpha.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Write the (alpha, dev Macro-F1) table as JSON.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    /// Write the training history of the best alpha as JSON.
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub types: TypesArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmptyTypesArg {
    /// Leave types with no gold and no predicted spans out of the mean.
    Exclude,
    /// Count such types with F1 = 0.
    Zero,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold file.
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Predicted file with the same sentences in the same order.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Write the full report as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// How entity types absent from both files enter the macro mean.
    #[arg(long, value_enum, default_value_t = EmptyTypesArg::Exclude)]
    pub empty_types: EmptyTypesArg,
    #[command(flatten)]
    pub types: TypesArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaMethod {
    /// Cohen's kappa averaged over annotator pairs.
    Cohen,
    /// Fleiss' kappa over tokens labeled by every annotator.
    Fleiss,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    /// Crowd file with one tag column per annotator.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Agreement statistic.
    #[arg(long, value_enum, default_value_t = KappaMethod::Cohen)]
    pub method: KappaMethod,
    /// Write the result as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub types: TypesArg,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model checkpoint written by train or sweep-alpha.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Sentences to tag: any CoNLL-style file, only the token column is read.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Where to write the predicted gold-format file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// Directory receiving train.conll, dev.conll and test.conll.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Perturbation rate of the simulated annotators.
    #[arg(long, default_value_t = 0.25, value_parser = unit_interval)]
    pub rate: f64,
    /// Number of simulated annotators.
    #[arg(long, default_value_t = 3, value_parser = positive_usize, value_name = "K")]
    pub annotators: usize,
    /// Alpha grid searched on the dev split.
    #[arg(long, default_value = "0.1:0.9:0.1", value_name = "GRID")]
    pub grid: String,
    /// Write the comparison as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn dropout_rate(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be a finite non-negative number"))
    }
}
