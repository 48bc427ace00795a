use std::path::Path;

use crowdseq::aggregate::{entity_vote, token_vote};
use crowdseq::cpll::{parse_grid, predict, sweep_alpha, train_cpll, train_supervised, History, TrainOutcome};
use crowdseq::data::{
    file_tags, parse_crowd_file, parse_gold_file, parse_token_file, write_crowd_file, write_gold_file,
};
use crowdseq::eval::{fleiss_kappa, pairwise_kappa, span_macro_f1, EmptyTypes};
use crowdseq::noise::{crowd_report, make_crowd, parse_rules, PerturbConfig};
use crowdseq::scorer::Checkpoint;
use crowdseq::{toy, CrowdDataset, GoldDataset, LabelSpace, ReferenceScorer};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::CliError;

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Perturb(a) => perturb(a),
        Command::Vote(a) => vote(a),
        Command::Train(a) => train(a),
        Command::SweepAlpha(a) => sweep(a),
        Command::Eval(a) => eval(a),
        Command::Kappa(a) => kappa(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Toy(a) => toy_cmd(a),
        Command::Demo(a) => demo(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    write(path, &text)
}

/// Prefixes parse errors with the file they came from.
fn in_file<T>(path: &Path, r: crowdseq::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn label_space(types: &TypesArg, texts: &[&str]) -> Result<LabelSpace, CliError> {
    match &types.types {
        Some(list) => LabelSpace::new(list.split(',').map(str::trim)).map_err(|e| CliError::Usage(format!("--types: {e}"))),
        None => Ok(LabelSpace::infer(texts.iter().flat_map(|t| file_tags(t)))?),
    }
}

fn perturb(a: PerturbArgs) -> Result<(), CliError> {
    let rules = parse_rules(&a.rules).map_err(|e| CliError::Usage(format!("--rules: {e}")))?;
    let text = read(&a.input)?;
    let space = label_space(&a.types, &[&text])?;
    let gold = in_file(&a.input, parse_gold_file(&text, &space))?;
    let config = PerturbConfig {
        rules,
        ..PerturbConfig::new(a.rate, a.annotators, a.seed)
    };
    let crowd = make_crowd(&gold, &config)?;
    write(&a.out, &write_crowd_file(&crowd)?)?;
    let report = crowd_report(&gold, &crowd)?;
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    println!(
        "{} sentences, {} annotators: {} entity tokens, {} BI and {} category errors after voting ({:.2}%)",
        crowd.len(),
        a.annotators,
        report.original_entity_tokens,
        report.bi_errors,
        report.cat_errors,
        100.0 * report.percent
    );
    Ok(())
}

fn load_crowd(path: &Path, types: &TypesArg, extra: &[&str]) -> Result<(CrowdDataset, String), CliError> {
    let text = read(path)?;
    let mut texts = vec![text.as_str()];
    texts.extend_from_slice(extra);
    let space = label_space(types, &texts)?;
    let crowd = in_file(path, parse_crowd_file(&text, &space))?;
    Ok((crowd, text))
}

fn vote(a: VoteArgs) -> Result<(), CliError> {
    let (crowd, _) = load_crowd(&a.input, &a.types, &[])?;
    let voted = match a.level {
        VoteLevel::Token => token_vote(&crowd),
        VoteLevel::Entity => in_file(&a.input, entity_vote(&crowd))?,
    };
    write(&a.out, &write_gold_file(&voted))?;
    println!("voted {} sentences at {} level", voted.len(), level_name(a.level));
    Ok(())
}

fn level_name(level: VoteLevel) -> &'static str {
    match level {
        VoteLevel::Token => "token",
        VoteLevel::Entity => "entity",
    }
}

/// Training data plus an optional dev set sharing one label space.
fn load_training(
    train: &Path,
    dev: Option<&Path>,
    types: &TypesArg,
) -> Result<(CrowdDataset, Option<GoldDataset>), CliError> {
    let dev_text = dev.map(read).transpose()?;
    let extra: Vec<&str> = dev_text.iter().map(String::as_str).collect();
    let (crowd, _) = load_crowd(train, types, &extra)?;
    let dev = match (dev, &dev_text) {
        (Some(path), Some(text)) => Some(in_file(path, parse_gold_file(text, crowd.label_space()))?),
        _ => None,
    };
    Ok((crowd, dev))
}

fn checkpoint(space: &LabelSpace, run: &TrainOutcome<ReferenceScorer>, meta: serde_json::Value) -> Checkpoint {
    let mut ckpt = Checkpoint::new(space.clone(), &run.scorer);
    if let serde_json::Value::Object(map) = meta {
        ckpt.metadata.extend(map);
    }
    ckpt.metadata.insert("best_epoch".into(), json!(run.history.best_epoch));
    ckpt.metadata.insert("epochs_run".into(), json!(run.history.epochs.len()));
    ckpt.metadata.insert("best_dev_f1".into(), json!(run.history.best_dev_f1));
    ckpt
}

fn summarize(history: &History) {
    match history.best_dev_f1 {
        Some(f) => println!(
            "ran {} epochs; best dev Macro-F1 {:.4} at epoch {}",
            history.epochs.len(),
            f,
            history.best_epoch
        ),
        None => println!("ran {} epochs; kept the last one", history.epochs.len()),
    }
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let (crowd, dev) = load_training(&a.train, a.dev.as_deref(), &a.types)?;
    let config = a.model.train_config(a.alpha);
    let (run, method) = match a.baseline {
        None => (train_cpll(&crowd, dev.as_ref(), &config)?, "cpll"),
        Some(Baseline::TokenVote) => (train_supervised(&token_vote(&crowd), dev.as_ref(), &config)?, "token-vote"),
        Some(Baseline::EntityVote) => {
            let voted = in_file(&a.train, entity_vote(&crowd))?;
            (train_supervised(&voted, dev.as_ref(), &config)?, "entity-vote")
        }
    };
    let meta = json!({
        "method": method,
        "alpha": a.alpha,
        "ablation": config.ablation,
        "seed": config.seed,
    });
    let ckpt = checkpoint(crowd.label_space(), &run, meta);
    write(&a.out, &ckpt.to_json()?)?;
    if let Some(path) = &a.history {
        write_json(path, &run.history)?;
    }
    summarize(&run.history);
    Ok(())
}

fn grid(text: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(text).map_err(|e| CliError::Usage(format!("--grid: {e}")))
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let grid = grid(&a.grid)?;
    let (crowd, dev) = load_training(&a.train, Some(&a.dev), &a.types)?;
    let dev = dev.expect("dev path given");
    let config = a.model.train_config(grid[0]);
    let outcome = sweep_alpha(&crowd, &dev, &config, &grid)?;
    let meta = json!({
        "method": "cpll",
        "alpha": outcome.best_alpha,
        "ablation": config.ablation,
        "seed": config.seed,
    });
    write(&a.out, &checkpoint(crowd.label_space(), &outcome.best, meta).to_json()?)?;
    if let Some(path) = &a.table {
        write_json(path, &json!({ "rows": outcome.rows, "best_alpha": outcome.best_alpha }))?;
    }
    if let Some(path) = &a.history {
        write_json(path, &outcome.best.history)?;
    }
    println!("alpha   dev F1");
    for row in &outcome.rows {
        println!("{:<7} {:.4}", row.alpha, row.dev_f1);
    }
    println!("best alpha {}", outcome.best_alpha);
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let gold_text = read(&a.gold)?;
    let pred_text = read(&a.pred)?;
    let space = label_space(&a.types, &[&gold_text, &pred_text])?;
    let gold = in_file(&a.gold, parse_gold_file(&gold_text, &space))?;
    let pred = in_file(&a.pred, parse_gold_file(&pred_text, &space))?;
    let empty = match a.empty_types {
        EmptyTypesArg::Exclude => EmptyTypes::Exclude,
        EmptyTypesArg::Zero => EmptyTypes::ScoreZero,
    };
    let report = span_macro_f1(&gold, &pred, empty)?;
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    println!("type       P       R       F1");
    for t in &report.per_type {
        println!("{:<10} {:.4}  {:.4}  {:.4}", t.entity_type, t.precision, t.recall, t.f1);
    }
    println!("macro_f1 {:.4}", report.macro_f1);
    Ok(())
}

fn kappa(a: KappaArgs) -> Result<(), CliError> {
    let (crowd, _) = load_crowd(&a.input, &a.types, &[])?;
    let (name, value) = match a.method {
        KappaMethod::Cohen => ("cohen", pairwise_kappa(&crowd)?),
        KappaMethod::Fleiss => ("fleiss", fleiss_kappa(&crowd)?),
    };
    if let Some(path) = &a.report {
        write_json(
            path,
            &json!({
                "method": name,
                "kappa": value,
                "annotators": crowd.annotator_count(),
                "sentences": crowd.len(),
                "tokens": crowd.num_tokens(),
            }),
        )?;
    }
    println!("{name} kappa {value:.4}");
    Ok(())
}

fn predict_cmd(a: PredictArgs) -> Result<(), CliError> {
    let ckpt = in_file(&a.model, Checkpoint::from_json(&read(&a.model)?))?;
    let scorer = in_file(&a.model, ckpt.scorer())?;
    let sentences = in_file(&a.input, parse_token_file(&read(&a.input)?))?;
    let pred = predict(&scorer, &ckpt.label_space, &sentences)?;
    write(&a.out, &write_gold_file(&pred))?;
    println!("tagged {} sentences", pred.len());
    Ok(())
}

fn toy_cmd(a: ToyArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", a.out_dir.display())))?;
    for (name, text) in ["train", "dev", "test"].iter().zip(toy::bundled_text()) {
        write(&a.out_dir.join(format!("{name}.conll")), text)?;
    }
    println!("wrote train, dev and test splits to {}", a.out_dir.display());
    Ok(())
}

#[derive(Serialize)]
struct DemoRow {
    method: String,
    alpha: Option<f64>,
    dev_f1: f64,
    test_f1: f64,
}

fn test_f1(scorer: &ReferenceScorer, test: &GoldDataset) -> Result<f64, CliError> {
    let sentences: Vec<_> = test.sentences().cloned().collect();
    let pred = predict(scorer, test.label_space(), &sentences)?;
    Ok(span_macro_f1(test, &pred, EmptyTypes::Exclude)?.macro_f1)
}

fn demo(a: DemoArgs) -> Result<(), CliError> {
    let grid = grid(&a.grid)?;
    let corpus = toy::bundled()?;
    let crowd = make_crowd(&corpus.train, &PerturbConfig::new(a.rate, a.annotators, a.model.seed))?;
    let noise = crowd_report(&corpus.train, &crowd)?;
    println!(
        "toy corpus: {} train / {} dev / {} test sentences; {} annotators at rate {} ({:.2}% token errors after voting)",
        corpus.train.len(),
        corpus.dev.len(),
        corpus.test.len(),
        a.annotators,
        a.rate,
        100.0 * noise.percent
    );
    let config = a.model.train_config(grid[0]);
    let sweep = sweep_alpha(&crowd, &corpus.dev, &config, &grid)?;
    let mut rows = vec![DemoRow {
        method: "cpll".into(),
        alpha: Some(sweep.best_alpha),
        dev_f1: sweep.best.history.best_dev_f1.unwrap_or(0.0),
        test_f1: test_f1(&sweep.best.scorer, &corpus.test)?,
    }];
    for (name, voted) in [("token-vote", token_vote(&crowd)), ("entity-vote", entity_vote(&crowd)?)] {
        let run = train_supervised(&voted, Some(&corpus.dev), &config)?;
        rows.push(DemoRow {
            method: name.into(),
            alpha: None,
            dev_f1: run.history.best_dev_f1.unwrap_or(0.0),
            test_f1: test_f1(&run.scorer, &corpus.test)?,
        });
    }
    println!("method       alpha  dev F1  test F1");
    for r in &rows {
        let alpha = r.alpha.map_or("-".to_string(), |x| x.to_string());
        println!("{:<12} {:<6} {:.4}  {:.4}", r.method, alpha, r.dev_f1, r.test_f1);
    }
    if let Some(path) = &a.report {
        write_json(
            path,
            &json!({
                "rate": a.rate,
                "annotators": a.annotators,
                "seed": a.model.seed,
                "noise": noise,
                "rows": rows,
            }),
        )?;
    }
    Ok(())
}
