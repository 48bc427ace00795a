//! A small templated NER corpus with person, location and time entities.
//!
//! Sentences are drawn from fixed templates whose slots are filled from
//! short gazetteers, so the corpus is fully determined by `(size, seed)`.
//! Some names are ambiguous between types ("Jordan", "Paris") and are only
//! resolved by context. The bundled train/dev/test splits under `data/toy`
//! are the output of [`generate`] with [`TRAIN_SEED`], [`DEV_SEED`] and
//! [`TEST_SEED`].

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{parse_gold_file, GoldDataset, GoldSentence, LabelSpace, Sentence, Tag};
use crate::error::Result;

pub const TYPES: [&str; 3] = ["LOC", "PER", "TIME"];
pub const TRAIN_SEED: u64 = 11;
pub const DEV_SEED: u64 = 12;
pub const TEST_SEED: u64 = 13;
pub const TRAIN_SIZE: usize = 200;
pub const DEV_SIZE: usize = 100;
pub const TEST_SIZE: usize = 100;

const TRAIN_TEXT: &str = include_str!("../data/toy/train.conll");
const DEV_TEXT: &str = include_str!("../data/toy/dev.conll");
const TEST_TEXT: &str = include_str!("../data/toy/test.conll");

const PERSONS: &[&str] = &[
    "David", "Jack", "Maria Garcia", "Chen Wei", "Anna", "Omar Haddad", "Lucy Brown", "Ravi Kumar",
    "Sofia", "Jordan", "Paris Hilton", "Li Na", "Tom Jones", "Emma", "Wang Fang", "Ken",
];

const PLACES: &[&str] = &[
    "Beijing", "New York", "room 1003", "Central Library", "Jordan", "Lake Geneva", "Hall B",
    "Shanghai", "Main Street", "Berlin", "building 7", "Paris", "Hong Kong", "gate 12",
];

const TIMES: &[&str] = &[
    "tomorrow", "tomorrow at 10:00 am", "next Monday", "at 3:30 pm", "Friday evening",
    "this weekend", "May 4", "tonight", "at noon", "next week", "on Sunday morning", "in March",
];

const TEMPLATES: &[&str] = &[
    "{PER} will meet {PER} in {LOC} {TIME} .",
    "Please book {LOC} for {PER} {TIME} .",
    "{PER} arrived in {LOC} .",
    "Call {PER} {TIME} about the report .",
    "The meeting with {PER} moved to {LOC} .",
    "{TIME} , {PER} flew from {LOC} to {LOC} .",
    "We visited {LOC} {TIME} with {PER} .",
    "Remind me {TIME} to email {PER} .",
    "{PER} said the office in {LOC} is closed {TIME} .",
    "Is {LOC} open {TIME} ?",
    "Lunch with {PER} and {PER} {TIME} .",
    "The train to {LOC} leaves {TIME} .",
    "{PER} lives near {LOC} .",
    "No plans {TIME} .",
    "Thanks for the update .",
    "Send the slides to {PER} .",
    "Our team moved from {LOC} to {LOC} {TIME} .",
    "Ask {PER} whether {LOC} is free {TIME} .",
];

/// Label space of the toy corpus.
pub fn label_space() -> LabelSpace {
    LabelSpace::new(TYPES).expect("static types are valid")
}

/// Generates `size` sentences; ids are positions.
pub fn generate(size: usize, seed: u64) -> GoldDataset {
    let space = label_space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..size)
        .map(|i| {
            let template = TEMPLATES.choose(&mut rng).expect("templates are non-empty");
            let mut tokens = Vec::new();
            let mut labels = Vec::new();
            for word in template.split(' ') {
                let (kind, pool) = match word {
                    "{PER}" => ("PER", PERSONS),
                    "{LOC}" => ("LOC", PLACES),
                    "{TIME}" => ("TIME", TIMES),
                    _ => {
                        tokens.push(word.to_string());
                        labels.push(0);
                        continue;
                    }
                };
                let t = space.type_index(kind).expect("known type");
                let filler = pool.choose(&mut rng).expect("pools are non-empty");
                for (j, piece) in filler.split(' ').enumerate() {
                    tokens.push(piece.to_string());
                    labels.push(space.index(if j == 0 { Tag::Begin(t) } else { Tag::Inside(t) }));
                }
            }
            GoldSentence {
                sentence: Sentence::new(i.to_string(), tokens).expect("templates produce valid tokens"),
                labels,
            }
        })
        .collect();
    GoldDataset::new(space, items).expect("generated labels are in the space")
}

/// The bundled splits.
#[derive(Debug, Clone)]
pub struct ToyCorpus {
    pub train: GoldDataset,
    pub dev: GoldDataset,
    pub test: GoldDataset,
}

pub fn bundled() -> Result<ToyCorpus> {
    let space = label_space();
    Ok(ToyCorpus {
        train: parse_gold_file(TRAIN_TEXT, &space)?,
        dev: parse_gold_file(DEV_TEXT, &space)?,
        test: parse_gold_file(TEST_TEXT, &space)?,
    })
}

/// Raw text of the bundled splits, in train, dev, test order.
pub fn bundled_text() -> [&'static str; 3] {
    [TRAIN_TEXT, DEV_TEXT, TEST_TEXT]
}
