//! CoNLL-style readers and writers.
//!
//! All formats share the same layout: one token per line, TAB-separated
//! columns, and a blank line after every sentence. A block may start with a
//! `# id = <id>` line; it is written only when the id differs from the
//! sentence's zero-based position, which is also the default on read.
//!
//! Crowd files come in two flavours, detected from the first data line:
//!
//! * annotator columns: `token TAB tag_1 TAB ... TAB tag_K`, where `-` marks
//!   a token the annotator did not label;
//! * aggregated: `token TAB label:count,label:count`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{
    CrowdDataset, CrowdSentence, CrowdToken, GoldDataset, GoldSentence, LabelSpace, Sentence,
};
use crate::error::{Error, Result};

const ID_PREFIX: &str = "# id = ";
const PLACEHOLDER: &str = "-";

struct Block<'a> {
    id: String,
    header_line: usize,
    lines: Vec<(usize, &'a str)>,
}

fn blocks(text: &str) -> Result<Vec<Block<'_>>> {
    let mut out = Vec::new();
    let mut current: Option<Block<'_>> = None;
    for (i, line) in text.split('\n').enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            if let Some(block) = current.take() {
                if block.lines.is_empty() {
                    return Err(Error::parse(block.header_line, "empty sentence"));
                }
                out.push(block);
            }
            continue;
        }
        let block = current.get_or_insert_with(|| Block {
            id: out.len().to_string(),
            header_line: lineno,
            lines: Vec::new(),
        });
        if let Some(id) = line.strip_prefix(ID_PREFIX).filter(|_| !line.contains('\t')) {
            if !block.lines.is_empty() {
                return Err(Error::parse(lineno, "sentence id line inside a sentence"));
            }
            if id.is_empty() {
                return Err(Error::parse(lineno, "empty sentence id"));
            }
            block.id = id.to_string();
            continue;
        }
        block.lines.push((lineno, line));
    }
    if let Some(block) = current {
        if block.lines.is_empty() {
            return Err(Error::parse(block.header_line, "empty sentence"));
        }
        out.push(block);
    }
    Ok(out)
}

fn check_token(lineno: usize, token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::parse(
            lineno,
            format!("token {token:?} is empty or contains whitespace"),
        ));
    }
    Ok(())
}

fn lookup(space: &LabelSpace, lineno: usize, tag: &str) -> Result<usize> {
    space
        .index_of(tag)
        .ok_or_else(|| Error::parse(lineno, format!("unknown tag {tag:?}")))
}

fn write_id(out: &mut String, position: usize, id: &str) {
    if id != position.to_string() {
        let _ = writeln!(out, "{ID_PREFIX}{id}");
    }
}

fn sentence(block: &Block<'_>, tokens: Vec<String>) -> Result<Sentence> {
    Sentence::new(block.id.clone(), tokens).map_err(|e| Error::parse(block.header_line, e.to_string()))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CrowdLayout {
    Annotators(usize),
    Aggregated,
}

fn detect_layout(columns: &[&str]) -> CrowdLayout {
    if columns.len() == 2 && columns[1].contains(':') {
        CrowdLayout::Aggregated
    } else {
        CrowdLayout::Annotators(columns.len() - 1)
    }
}

fn parse_aggregated(space: &LabelSpace, lineno: usize, field: &str) -> Result<CrowdToken> {
    let mut counts = BTreeMap::new();
    for entry in field.split(',') {
        let (tag, count) = entry
            .rsplit_once(':')
            .ok_or_else(|| Error::parse(lineno, format!("expected label:count, got {entry:?}")))?;
        let label = lookup(space, lineno, tag)?;
        let count: u32 = count
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| Error::parse(lineno, format!("invalid count {count:?}")))?;
        if counts.insert(label, count).is_some() {
            return Err(Error::parse(lineno, format!("label {tag} listed twice")));
        }
    }
    CrowdToken::from_counts(counts, space).map_err(|e| Error::parse(lineno, e.to_string()))
}

/// Every tag string mentioned in a gold or crowd file, in file order, with
/// aggregated `label:count` entries reduced to their label. Meant for
/// [`LabelSpace::infer`].
pub fn file_tags(text: &str) -> Vec<&str> {
    let mut tags = Vec::new();
    for line in text.lines() {
        if line.is_empty() || (line.starts_with(ID_PREFIX) && !line.contains('\t')) {
            continue;
        }
        for column in line.split('\t').skip(1) {
            if column.contains(':') {
                tags.extend(column.split(',').map(|e| e.rsplit_once(':').map_or(e, |(tag, _)| tag)));
            } else {
                tags.push(column);
            }
        }
    }
    tags
}

/// Parses a multi-annotator crowd file.
pub fn parse_crowd_file(text: &str, space: &LabelSpace) -> Result<CrowdDataset> {
    let mut layout = None;
    let mut items = Vec::new();
    for block in blocks(text)? {
        let mut tokens = Vec::with_capacity(block.lines.len());
        let mut crowd = Vec::with_capacity(block.lines.len());
        for &(lineno, line) in &block.lines {
            let columns: Vec<&str> = line.split('\t').collect();
            if columns.len() < 2 {
                return Err(Error::parse(lineno, "expected a token and at least one tag column"));
            }
            let this = detect_layout(&columns);
            let expected = *layout.get_or_insert(this);
            if this != expected {
                let msg = match expected {
                    CrowdLayout::Annotators(k) => {
                        format!("expected {} columns, found {}", k + 1, columns.len())
                    }
                    CrowdLayout::Aggregated => "expected aggregated label:count column".to_string(),
                };
                return Err(Error::parse(lineno, msg));
            }
            check_token(lineno, columns[0])?;
            tokens.push(columns[0].to_string());
            let token = match expected {
                CrowdLayout::Aggregated => parse_aggregated(space, lineno, columns[1])?,
                CrowdLayout::Annotators(_) => {
                    let tags = columns[1..]
                        .iter()
                        .map(|&tag| {
                            if tag == PLACEHOLDER {
                                Ok(None)
                            } else {
                                lookup(space, lineno, tag).map(Some)
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    CrowdToken::from_annotations(tags, space)
                        .map_err(|e| Error::parse(lineno, e.to_string()))?
                }
            };
            crowd.push(token);
        }
        items.push(CrowdSentence {
            sentence: sentence(&block, tokens)?,
            tokens: crowd,
        });
    }
    let annotators = match layout {
        Some(CrowdLayout::Annotators(k)) => Some(k),
        _ => None,
    };
    CrowdDataset::new(space.clone(), items, annotators)
}

/// Writes the annotator-column form. Datasets built from aggregated counts
/// have no per-annotator tags; use [`write_crowd_aggregated`] for those.
pub fn write_crowd_file(dataset: &CrowdDataset) -> Result<String> {
    if !dataset.is_empty() && dataset.annotator_count().is_none() {
        return Err(Error::invalid(
            "dataset",
            "no per-annotator tags to write; use the aggregated label:count form instead",
        ));
    }
    let space = dataset.label_space();
    let mut out = String::new();
    for (pos, item) in dataset.items().iter().enumerate() {
        write_id(&mut out, pos, &item.sentence.id);
        for (token, crowd) in item.sentence.tokens.iter().zip(&item.tokens) {
            out.push_str(token);
            for tag in crowd.annotations().expect("validated") {
                out.push('\t');
                out.push_str(tag.map_or(PLACEHOLDER, |l| space.label(l)));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes the aggregated `label:count` form; works for any dataset.
pub fn write_crowd_aggregated(dataset: &CrowdDataset) -> String {
    let space = dataset.label_space();
    let mut out = String::new();
    for (pos, item) in dataset.items().iter().enumerate() {
        write_id(&mut out, pos, &item.sentence.id);
        for (token, crowd) in item.sentence.tokens.iter().zip(&item.tokens) {
            out.push_str(token);
            out.push('\t');
            for (i, (&label, &count)) in crowd.counts().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:{}", space.label(label), count);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Parses a two-column `token TAB tag` file.
pub fn parse_gold_file(text: &str, space: &LabelSpace) -> Result<GoldDataset> {
    let mut items = Vec::new();
    for block in blocks(text)? {
        let mut tokens = Vec::with_capacity(block.lines.len());
        let mut labels = Vec::with_capacity(block.lines.len());
        for &(lineno, line) in &block.lines {
            let columns: Vec<&str> = line.split('\t').collect();
            if columns.len() != 2 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 2 columns, found {}", columns.len()),
                ));
            }
            check_token(lineno, columns[0])?;
            tokens.push(columns[0].to_string());
            labels.push(lookup(space, lineno, columns[1])?);
        }
        items.push(GoldSentence {
            sentence: sentence(&block, tokens)?,
            labels,
        });
    }
    GoldDataset::new(space.clone(), items)
}

pub fn write_gold_file(dataset: &GoldDataset) -> String {
    let space = dataset.label_space();
    let mut out = String::new();
    for (pos, item) in dataset.items().iter().enumerate() {
        write_id(&mut out, pos, &item.sentence.id);
        for (token, &label) in item.sentence.tokens.iter().zip(&item.labels) {
            out.push_str(token);
            out.push('\t');
            out.push_str(space.label(label));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Reads sentences from any of the CoNLL-style files, keeping only the first
/// column.
pub fn parse_token_file(text: &str) -> Result<Vec<Sentence>> {
    blocks(text)?
        .iter()
        .map(|block| {
            let tokens = block
                .lines
                .iter()
                .map(|&(lineno, line)| {
                    let token = line.split('\t').next().unwrap_or_default();
                    check_token(lineno, token).map(|_| token.to_string())
                })
                .collect::<Result<Vec<_>>>()?;
            sentence(block, tokens)
        })
        .collect()
}
