use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use crowdseq::aggregate::{entity_vote, token_vote};
use crowdseq::data::{parse_crowd_file, parse_gold_file, write_crowd_file};
use crowdseq::eval::{span_macro_f1, EmptyTypes};
use crowdseq::noise::{make_crowd, PerturbConfig};
use crowdseq::toy;

fn parse(c: &mut Criterion) {
    let space = toy::label_space();
    let [train, _, _] = toy::bundled_text();
    let gold = parse_gold_file(train, &space).unwrap();
    let crowd_text = write_crowd_file(&make_crowd(&gold, &PerturbConfig::new(0.25, 3, 0)).unwrap()).unwrap();

    c.bench_function("parse/gold", |b| b.iter(|| parse_gold_file(black_box(train), &space).unwrap()));
    c.bench_function("parse/crowd", |b| b.iter(|| parse_crowd_file(black_box(&crowd_text), &space).unwrap()));
}

fn vote(c: &mut Criterion) {
    let corpus = toy::bundled().unwrap();
    let crowd = make_crowd(&corpus.train, &PerturbConfig::new(0.25, 3, 0)).unwrap();

    c.bench_function("perturb/k3", |b| {
        b.iter(|| make_crowd(black_box(&corpus.train), &PerturbConfig::new(0.25, 3, 0)).unwrap())
    });
    c.bench_function("vote/token", |b| b.iter(|| token_vote(black_box(&crowd))));
    c.bench_function("vote/entity", |b| b.iter(|| entity_vote(black_box(&crowd)).unwrap()));
    let voted = token_vote(&crowd);
    c.bench_function("eval/macro_f1", |b| {
        b.iter(|| span_macro_f1(black_box(&corpus.train), &voted, EmptyTypes::Exclude).unwrap())
    });
}

criterion_group!(benches, parse, vote);
criterion_main!(benches);
