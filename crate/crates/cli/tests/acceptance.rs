//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a hard criterion fails. The alpha-trend check is soft: a miss
//! writes `alpha_trend_warning.txt` next to the summary instead of failing.
//!
//! Run with `cargo test -p crowdseq-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use crowdseq::aggregate::{entity_vote, label_frequencies, prior_confidence, token_vote};
use crowdseq::cpll::{
    blend, empirical_risk, posterior_from_probs, predict, risk_and_gradient, sweep_alpha, train_cpll,
    train_supervised, Ablation, ConfidenceTable, RiskTerm, TrainConfig, LOG_EPS,
};
use crowdseq::data::{
    parse_crowd_file, parse_gold_file, write_crowd_aggregated, write_crowd_file, write_gold_file, CrowdSentence,
    CrowdToken,
};
use crowdseq::eval::{span_macro_f1, EmptyTypes};
use crowdseq::noise::{crowd_report, make_crowd, PerturbConfig};
use crowdseq::scorer::{Checkpoint, ReferenceScorer, ScorerConfig, TokenScorer};
use crowdseq::{toy, CrowdDataset, GoldDataset, LabelSpace, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const HIGH_NOISE: f64 = 0.25;
const LOW_NOISE: f64 = 0.05;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    soft: bool,
    detail: String,
    elapsed: Duration,
}

struct Suite {
    outcomes: Vec<Outcome>,
    out_dir: PathBuf,
}

impl Suite {
    fn record(&mut self, id: u32, name: &'static str, budget: Duration, started: Instant, pass: bool, detail: String) {
        self.push(id, name, false, budget, started, pass, detail);
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, id: u32, name: &'static str, soft: bool, budget: Duration, started: Instant, pass: bool, detail: String) {
        let elapsed = started.elapsed();
        let in_time = elapsed <= budget;
        let detail = if in_time {
            detail
        } else {
            format!("{detail}; over the {:.0}s budget", budget.as_secs_f64())
        };
        let outcome = Outcome {
            id,
            name,
            pass: pass && in_time,
            soft,
            detail,
            elapsed,
        };
        println!(
            "{} [{}] {}: {} ({:.1}s)",
            match (outcome.pass, soft) {
                (true, _) => "PASS",
                (false, false) => "FAIL",
                (false, true) => "WARN",
            },
            id,
            name,
            outcome.detail,
            elapsed.as_secs_f64()
        );
        self.outcomes.push(outcome);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn space(types: usize) -> LabelSpace {
    LabelSpace::new((0..types).map(|t| format!("T{t}"))).unwrap()
}

fn random_counts(rng: &mut impl Rng, num_labels: usize) -> BTreeMap<usize, u32> {
    let k = rng.random_range(1..num_labels);
    let mut counts = BTreeMap::new();
    while counts.len() < k {
        counts.insert(rng.random_range(0..num_labels), rng.random_range(1..=5));
    }
    counts
}

fn random_crowd(rng: &mut impl Rng, space: &LabelSpace, sentences: usize, max_len: usize) -> CrowdDataset {
    const VOCAB: &[&str] = &["Ada", "met", "Bo", "in", "Rome", "on", "Monday", "at", "noon", "."];
    let items = (0..sentences)
        .map(|i| {
            let n = rng.random_range(1..=max_len);
            let tokens = (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect();
            let sentence = Sentence::new(i.to_string(), tokens).unwrap();
            let tokens = (0..n)
                .map(|_| CrowdToken::from_counts(random_counts(rng, space.len()), space).unwrap())
                .collect();
            CrowdSentence { sentence, tokens }
        })
        .collect();
    CrowdDataset::new(space.clone(), items, None).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn side_sum(row: &[f64], mask: &[bool], side: bool) -> f64 {
    row.iter().zip(mask).filter(|(_, &m)| m == side).map(|(v, _)| v).sum()
}

fn confidence_algebra(suite: &mut Suite) {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut r = rng(101);
    for _ in 0..1000 {
        let num_labels = 2 * r.random_range(1..=4) + 1;
        let counts = random_counts(&mut r, num_labels);
        let mask: Vec<bool> = (0..num_labels).map(|y| counts.contains_key(&y)).collect();
        let probs: Vec<f64> = (0..num_labels).map(|_| r.random_range(1e-6..1.0)).collect();

        let prior = prior_confidence(&counts, num_labels);
        worst = worst.max((side_sum(&prior, &mask, true) - 1.0).abs());
        worst = worst.max(side_sum(&prior, &mask, false).abs());

        let post = posterior_from_probs(&probs, &mask);
        worst = worst.max((side_sum(&post, &mask, true) - 1.0).abs());
        worst = worst.max((side_sum(&post, &mask, false) - 1.0).abs());

        worst = worst.max(max_abs_diff(&blend(&prior, &post, &mask, 0.0, Ablation::Full), &post));
        worst = worst.max(max_abs_diff(&blend(&prior, &post, &mask, 1.0, Ablation::Full), &prior));
    }
    suite.record(
        1,
        "confidence algebra",
        Duration::from_secs(1),
        started,
        worst <= 1e-9,
        format!("1000 tokens, max deviation {worst:.2e} (tol 1e-9)"),
    );
}

fn gradient_oracle(suite: &mut Suite) {
    const STEP: f64 = 1e-5;
    // Central differences of near-zero gradients are pure rounding noise, so
    // the relative error uses at least this denominator.
    const FLOOR: f64 = 1e-6;
    let started = Instant::now();
    let mut worst = 0.0f64;
    let cases = 50u64;
    for case in 0..cases {
        let mut r = rng(200 + case);
        let space = space(r.random_range(1..=3));
        let n = r.random_range(1..=3);
        let crowd = random_crowd(&mut r, &space, n, 4);
        let config = ScorerConfig {
            buckets: r.random_range(4..=16),
            embed_dim: r.random_range(1..=3),
            window: r.random_range(0..=2),
            hidden: r.random_range(2..=6),
            dropout: 0.1,
            init_scale: r.random_range(0.2..0.8),
            seed: r.random(),
        };
        let mut scorer = ReferenceScorer::new(config, space.len()).unwrap();
        let head = scorer.param_groups()[1].range.clone();
        for p in &mut scorer.params_mut()[head] {
            *p = r.random_range(-0.7..0.7);
        }
        let ablation = Ablation::ALL[r.random_range(0..Ablation::ALL.len())];
        let mut table = ConfidenceTable::new(&crowd, r.random_range(0.0..=1.0), ablation).unwrap();
        let inputs: Vec<_> = crowd.sentences().map(|s| scorer.encode(s)).collect();
        for (s, input) in inputs.iter().enumerate() {
            table.update_posterior(s, &scorer.forward(input)).unwrap();
        }
        table.reblend();
        let terms: Vec<_> = inputs
            .iter()
            .enumerate()
            .map(|(s, input)| RiskTerm {
                input,
                weights: table.blended(s),
                candidates: table.candidates(s),
            })
            .collect();
        let (_, grad) = risk_and_gradient(&scorer, &terms).unwrap();
        let mut probe = scorer.clone();
        for (i, &analytic) in grad.iter().enumerate() {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + STEP;
            let plus = empirical_risk(&probe, &terms);
            probe.params_mut()[i] = orig - STEP;
            let minus = empirical_risk(&probe, &terms);
            probe.params_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * STEP);
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(err);
        }
    }
    suite.record(
        2,
        "gradient oracle",
        Duration::from_secs(30),
        started,
        worst <= 1e-4,
        format!("{cases} instances, max relative error {worst:.2e} (tol 1e-4)"),
    );
}

/// Every label ranked by hand: most votes, then the dataset-wide frequency,
/// then the lower index.
fn vote_oracle(tok: &CrowdToken, freq: &[u64]) -> usize {
    let mut best = None;
    for y in 0..freq.len() {
        let c = tok.count(y);
        if c == 0 {
            continue;
        }
        best = match best {
            None => Some(y),
            Some(b) => {
                let cb = tok.count(b);
                if c > cb || (c == cb && freq[y] > freq[b]) {
                    Some(y)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.unwrap()
}

fn naive_risk(scorer: &ReferenceScorer, crowd: &CrowdDataset, table: &ConfidenceTable) -> f64 {
    let l = crowd.label_space().len();
    let mut total = 0.0;
    for (s, sentence) in crowd.sentences().enumerate() {
        let probs = scorer.forward(&scorer.encode(sentence));
        let weights = table.blended(s);
        let cands = table.candidates(s);
        for t in 0..sentence.len() {
            for y in 0..l {
                let f = probs.as_slice()[t * l + y];
                let loss = if cands[t * l + y] { -f.max(LOG_EPS).ln() } else { -(1.0 - f).max(LOG_EPS).ln() };
                total += weights[t * l + y] * loss;
            }
        }
    }
    total / crowd.len() as f64
}

fn brute_force(suite: &mut Suite) {
    let started = Instant::now();
    let mut vote_mismatch = 0usize;
    let mut risk_err = 0.0f64;
    for case in 0..200u64 {
        let mut r = rng(300 + case);
        let space = space(r.random_range(1..=3));
        let n = r.random_range(1..=4);
        let crowd = random_crowd(&mut r, &space, n, 5);

        let voted = token_vote(&crowd);
        let freq = label_frequencies(&crowd);
        for (item, gold) in crowd.items().iter().zip(voted.items()) {
            for (tok, &label) in item.tokens.iter().zip(&gold.labels) {
                vote_mismatch += usize::from(vote_oracle(tok, &freq) != label);
            }
        }

        let config = ScorerConfig {
            buckets: 16,
            embed_dim: 2,
            window: 1,
            hidden: 3,
            init_scale: 0.5,
            seed: r.random(),
            ..ScorerConfig::default()
        };
        let scorer = ReferenceScorer::new(config, space.len()).unwrap();
        let table = ConfidenceTable::new(&crowd, r.random_range(0.0..=1.0), Ablation::Full).unwrap();
        let inputs: Vec<_> = crowd.sentences().map(|s| scorer.encode(s)).collect();
        let terms: Vec<_> = inputs
            .iter()
            .enumerate()
            .map(|(s, input)| RiskTerm {
                input,
                weights: table.blended(s),
                candidates: table.candidates(s),
            })
            .collect();
        let fast = empirical_risk(&scorer, &terms);
        risk_err = risk_err.max((fast - naive_risk(&scorer, &crowd, &table)).abs());
    }
    suite.record(
        3,
        "brute-force equivalences",
        Duration::from_secs(10),
        started,
        vote_mismatch == 0 && risk_err <= 1e-9,
        format!("200 instances, {vote_mismatch} vote mismatches, max risk difference {risk_err:.2e} (tol 1e-9)"),
    );
}

fn test_f1(scorer: &ReferenceScorer, test: &GoldDataset) -> f64 {
    let sentences: Vec<Sentence> = test.sentences().cloned().collect();
    let pred = predict(scorer, test.label_space(), &sentences).unwrap();
    span_macro_f1(test, &pred, EmptyTypes::Exclude).unwrap().macro_f1
}

fn gold_f1(gold: &GoldDataset, pred: &GoldDataset) -> f64 {
    span_macro_f1(gold, pred, EmptyTypes::Exclude).unwrap().macro_f1
}

fn unanimity(suite: &mut Suite, corpus: &toy::ToyCorpus) {
    let started = Instant::now();
    let crowd = make_crowd(&corpus.train, &PerturbConfig::new(0.0, 3, 0)).unwrap();
    let entity = gold_f1(&corpus.train, &entity_vote(&crowd).unwrap());
    let token = gold_f1(&corpus.train, &token_vote(&crowd));
    let config = TrainConfig {
        epochs: 300,
        ..TrainConfig::default()
    };
    let run = train_cpll(&crowd, Some(&corpus.dev), &config).unwrap();
    let cpll = test_f1(&run.scorer, &corpus.test);
    suite.record(
        4,
        "unanimity recovery",
        Duration::from_secs(300),
        started,
        entity == 1.0 && token == 1.0 && cpll >= 0.95,
        format!(
            "entity vote {entity:.4}, token vote {token:.4} (need 1.0); CPLL test {cpll:.4} after {} epochs (need >= 0.95)",
            run.history.epochs.len()
        ),
    );
}

#[derive(Default, Clone)]
struct NoiseRun {
    cpll: f64,
    token: f64,
    entity: f64,
    neither: Option<f64>,
    best_alpha: f64,
    dev_by_alpha: Vec<f64>,
}

fn noisy_run(corpus: &toy::ToyCorpus, rate: f64, seed: u64, with_ablation: bool) -> NoiseRun {
    let crowd = make_crowd(&corpus.train, &PerturbConfig::new(rate, 3, seed)).unwrap();
    let config = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let sweep = sweep_alpha(&crowd, &corpus.dev, &config, &GRID).unwrap();
    let baseline = |voted: &GoldDataset| test_f1(&train_supervised(voted, Some(&corpus.dev), &config).unwrap().scorer, &corpus.test);
    let neither = with_ablation.then(|| {
        let cfg = TrainConfig {
            alpha: sweep.best_alpha,
            ablation: Ablation::Neither,
            ..config.clone()
        };
        test_f1(&train_cpll(&crowd, Some(&corpus.dev), &cfg).unwrap().scorer, &corpus.test)
    });
    NoiseRun {
        cpll: test_f1(&sweep.best.scorer, &corpus.test),
        token: baseline(&token_vote(&crowd)),
        entity: baseline(&entity_vote(&crowd).unwrap()),
        neither,
        best_alpha: sweep.best_alpha,
        dev_by_alpha: sweep.rows.iter().map(|r| r.dev_f1).collect(),
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn noise_experiments(suite: &mut Suite, corpus: &toy::ToyCorpus) -> serde_json::Value {
    let started = Instant::now();
    let high: Vec<NoiseRun> = SEEDS.iter().map(|&s| noisy_run(corpus, HIGH_NOISE, s, true)).collect();
    let low: Vec<NoiseRun> = SEEDS.iter().map(|&s| noisy_run(corpus, LOW_NOISE, s, false)).collect();
    let summary = |runs: &[NoiseRun]| {
        (
            mean(runs.iter().map(|r| r.cpll)),
            mean(runs.iter().map(|r| r.token)),
            mean(runs.iter().map(|r| r.entity)),
        )
    };
    let (hc, ht, he) = summary(&high);
    let (lc, lt, le) = summary(&low);
    let margins_high = (hc - ht, hc - he);
    let margins_low = (lc - lt, lc - le);
    let pass = margins_high.0 > 0.0
        && margins_high.1 > 0.0
        && margins_high.0 > margins_low.0
        && margins_high.1 > margins_low.1;
    suite.record(
        5,
        "direction of effect",
        Duration::from_secs(1800),
        started,
        pass,
        format!(
            "r={HIGH_NOISE}: CPLL {hc:.4}, token vote {ht:.4}, entity vote {he:.4}, margins {:+.4}/{:+.4}; \
             r={LOW_NOISE}: CPLL {lc:.4}, token vote {lt:.4}, entity vote {le:.4}, margins {:+.4}/{:+.4}",
            margins_high.0, margins_high.1, margins_low.0, margins_low.1
        ),
    );

    let started = Instant::now();
    let neither = mean(high.iter().map(|r| r.neither.unwrap()));
    suite.record(
        6,
        "ablation direction",
        Duration::from_secs(1800),
        started,
        hc >= neither,
        format!("r={HIGH_NOISE}: full {hc:.4} vs neither {neither:.4} (mean test Macro-F1 over 5 seeds, trained with criterion 5)"),
    );

    let started = Instant::now();
    let mean_dev: Vec<f64> = (0..GRID.len()).map(|i| mean(high.iter().map(|r| r.dev_by_alpha[i]))).collect();
    let mut best = 0;
    for (i, &v) in mean_dev.iter().enumerate() {
        if v > mean_dev[best] {
            best = i;
        }
    }
    let best_alpha = GRID[best];
    let per_seed: Vec<f64> = high.iter().map(|r| r.best_alpha).collect();
    let in_range = (0.1..=0.5).contains(&best_alpha);
    let detail = format!(
        "r={HIGH_NOISE}: best alpha by mean dev Macro-F1 {best_alpha} (per seed {per_seed:?}); need [0.1, 0.5]"
    );
    if !in_range {
        let table: Vec<String> = GRID.iter().zip(&mean_dev).map(|(a, f)| format!("{a}\t{f:.4}")).collect();
        std::fs::write(
            suite.out_dir.join("alpha_trend_warning.txt"),
            format!("{detail}\nalpha\tmean dev F1\n{}\n", table.join("\n")),
        )
        .unwrap();
    }
    suite.push(7, "alpha trend", true, Duration::from_secs(1800), started, in_range, detail);

    let row = |r: &NoiseRun| {
        json!({
            "cpll": r.cpll, "token_vote": r.token, "entity_vote": r.entity,
            "neither": r.neither, "best_alpha": r.best_alpha, "dev_by_alpha": r.dev_by_alpha,
        })
    };
    json!({
        "grid": GRID,
        "seeds": SEEDS,
        "high": { "rate": HIGH_NOISE, "runs": high.iter().map(row).collect::<Vec<_>>() },
        "low": { "rate": LOW_NOISE, "runs": low.iter().map(row).collect::<Vec<_>>() },
        "mean_dev_by_alpha": mean_dev,
    })
}

fn perturbation_accounting(suite: &mut Suite, corpus: &toy::ToyCorpus) {
    let started = Instant::now();
    let rates = [0.05, 0.1, 0.2, 0.25];
    let means: Vec<f64> = rates
        .iter()
        .map(|&rate| {
            mean((0..20u64).map(|seed| {
                let crowd = make_crowd(&corpus.train, &PerturbConfig::new(rate, 3, seed)).unwrap();
                crowd_report(&corpus.train, &crowd).unwrap().percent
            }))
        })
        .collect();
    let monotone = means.windows(2).all(|w| w[0] <= w[1]);
    let shown: Vec<String> = rates.iter().zip(&means).map(|(r, p)| format!("{r}: {:.2}%", 100.0 * p)).collect();
    suite.record(
        8,
        "perturbation accounting",
        Duration::from_secs(60),
        started,
        monotone,
        format!("mean percent over 20 seeds {}", shown.join(", ")),
    );
}

/// Runs the binary in `dir` and returns stdout plus the listed output files.
fn cli_run(dir: &Path, args: &[&str], outputs: &[&str]) -> Result<Vec<Vec<u8>>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_crowdseq"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let mut bytes = vec![out.stdout];
    for name in outputs {
        bytes.push(std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?);
    }
    Ok(bytes)
}

fn determinism(suite: &mut Suite) {
    let started = Instant::now();
    let commands: &[(&[&str], &[&str])] = &[
        (&["toy", "--out-dir", "toy"], &["toy/train.conll", "toy/dev.conll", "toy/test.conll"]),
        (
            &["perturb", "--in", "toy/train.conll", "--out", "crowd.txt", "--rate", "0.25", "--seed", "7", "--report", "noise.json"],
            &["crowd.txt", "noise.json"],
        ),
        (&["vote", "--in", "crowd.txt", "--out", "tv.conll"], &["tv.conll"]),
        (&["vote", "--in", "crowd.txt", "--out", "ev.conll", "--level", "entity"], &["ev.conll"]),
        (&["kappa", "--in", "crowd.txt", "--report", "k.json"], &["k.json"]),
        (&["kappa", "--in", "crowd.txt", "--method", "fleiss", "--report", "f.json"], &["f.json"]),
        (
            &["train", "--train", "crowd.txt", "--dev", "toy/dev.conll", "--epochs", "3", "--seed", "5", "--out", "m.json", "--history", "h.json"],
            &["m.json", "h.json"],
        ),
        (
            &["train", "--train", "crowd.txt", "--baseline", "token-vote", "--epochs", "2", "--out", "b.json"],
            &["b.json"],
        ),
        (
            &["--threads", "2", "sweep-alpha", "--train", "crowd.txt", "--dev", "toy/dev.conll", "--grid", "0.2,0.6", "--epochs", "2", "--out", "s.json", "--table", "t.json", "--history", "sh.json"],
            &["s.json", "t.json", "sh.json"],
        ),
        (&["predict", "--model", "m.json", "--in", "toy/test.conll", "--out", "pred.conll"], &["pred.conll"]),
        (
            &["eval", "--gold", "toy/test.conll", "--pred", "pred.conll", "--report", "e.json"],
            &["e.json"],
        ),
        (&["demo", "--grid", "0.3,0.6", "--epochs", "2", "--report", "d.json"], &["d.json"]),
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut problems = Vec::new();
    for (args, outputs) in commands {
        let a = cli_run(dirs[0].path(), args, outputs);
        let b = cli_run(dirs[1].path(), args, outputs);
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => problems.push(format!("{} differs between runs", args.join(" "))),
            (Err(e), _) | (_, Err(e)) => problems.push(e),
        }
    }

    let dir = dirs[0].path();
    let mut round_trips = 0;
    for name in ["toy/train.conll", "toy/dev.conll", "toy/test.conll", "tv.conll", "ev.conll", "pred.conll"] {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        let parsed = parse_gold_file(&text, &toy::label_space()).unwrap();
        if write_gold_file(&parsed) != text {
            problems.push(format!("{name} does not round-trip"));
        }
        round_trips += 1;
    }
    let text = std::fs::read_to_string(dir.join("crowd.txt")).unwrap();
    let crowd = parse_crowd_file(&text, &toy::label_space()).unwrap();
    if write_crowd_file(&crowd).unwrap() != text {
        problems.push("crowd.txt does not round-trip".into());
    }
    let aggregated = write_crowd_aggregated(&crowd);
    let back = parse_crowd_file(&aggregated, &toy::label_space()).unwrap();
    if write_crowd_aggregated(&back) != aggregated {
        problems.push("aggregated crowd file does not round-trip".into());
    }
    let ckpt_text = std::fs::read_to_string(dir.join("m.json")).unwrap();
    let ckpt = Checkpoint::from_json(&ckpt_text).unwrap();
    if ckpt.to_json().unwrap() != ckpt_text || Checkpoint::from_json(&ckpt.to_json().unwrap()).unwrap() != ckpt {
        problems.push("checkpoint does not round-trip".into());
    }
    round_trips += 3;

    let detail = if problems.is_empty() {
        format!("{} CLI invocations byte-identical across reruns, {round_trips} fixture round-trips", commands.len())
    } else {
        problems.join("; ")
    };
    suite.record(9, "determinism and round-trips", Duration::from_secs(10), started, problems.is_empty(), detail);
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&out_dir).unwrap();
    let _ = std::fs::remove_file(out_dir.join("alpha_trend_warning.txt"));
    let mut suite = Suite {
        outcomes: Vec::new(),
        out_dir: out_dir.clone(),
    };
    let corpus = toy::bundled().unwrap();

    confidence_algebra(&mut suite);
    gradient_oracle(&mut suite);
    brute_force(&mut suite);
    unanimity(&mut suite, &corpus);
    let experiments = noise_experiments(&mut suite, &corpus);
    perturbation_accounting(&mut suite, &corpus);
    determinism(&mut suite);

    let mut outcomes = suite.outcomes;
    outcomes.sort_by_key(|o| o.id);
    let summary = json!({
        "criteria": outcomes.iter().map(|o| json!({
            "id": o.id, "name": o.name, "pass": o.pass, "soft": o.soft,
            "detail": o.detail, "seconds": o.elapsed.as_secs_f64(),
        })).collect::<Vec<_>>(),
        "experiments": experiments,
    });
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary).unwrap() + "\n").unwrap();

    let hard_failures = outcomes.iter().filter(|o| !o.pass && !o.soft).count();
    println!(
        "acceptance: {} of {} criteria passed; summary in {}",
        outcomes.iter().filter(|o| o.pass).count(),
        outcomes.len(),
        out_dir.join("summary.json").display()
    );
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
