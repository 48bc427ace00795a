use serde::{Deserialize, Serialize};

use crate::data::{LabelSpace, Tag};

/// An entity span over token positions, both ends inclusive. `kind` indexes
/// [`LabelSpace::entity_types`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpanEntity {
    pub start: usize,
    pub end: usize,
    pub kind: usize,
}

impl SpanEntity {
    pub fn new(start: usize, end: usize, kind: usize) -> Self {
        debug_assert!(start <= end);
        SpanEntity { start, end, kind }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &SpanEntity) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// Decodes a BIO label sequence into maximal spans.
///
/// An `I-t` that does not continue an open span of type `t` starts a new span,
/// closing whatever was open.
pub fn decode_bio(labels: &[usize], space: &LabelSpace) -> Vec<SpanEntity> {
    let mut spans = Vec::new();
    let mut open: Option<SpanEntity> = None;
    for (i, &label) in labels.iter().enumerate() {
        match space.tag(label) {
            Tag::Outside => {
                spans.extend(open.take());
            }
            Tag::Begin(t) => {
                spans.extend(open.take());
                open = Some(SpanEntity::new(i, i, t));
            }
            Tag::Inside(t) => match open.as_mut() {
                Some(span) if span.kind == t => span.end = i,
                _ => {
                    spans.extend(open.take());
                    open = Some(SpanEntity::new(i, i, t));
                }
            },
        }
    }
    spans.extend(open);
    spans
}

/// Encodes disjoint spans as a BIO sequence of length `len`.
pub fn encode_bio(spans: &[SpanEntity], len: usize, space: &LabelSpace) -> Vec<usize> {
    let mut labels = vec![space.index(Tag::Outside); len];
    for span in spans {
        debug_assert!(span.end < len);
        labels[span.start] = space.index(Tag::Begin(span.kind));
        for l in &mut labels[span.start + 1..=span.end] {
            *l = space.index(Tag::Inside(span.kind));
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> LabelSpace {
        LabelSpace::new(["LOC", "PER"]).unwrap()
    }

    fn labels(space: &LabelSpace, tags: &[&str]) -> Vec<usize> {
        tags.iter().map(|t| space.index_of(t).unwrap()).collect()
    }

    #[test]
    fn textbook() {
        let s = space();
        let per = s.type_index("PER").unwrap();
        assert_eq!(
            decode_bio(&labels(&s, &["B-PER", "I-PER", "O"]), &s),
            vec![SpanEntity::new(0, 1, per)]
        );
    }

    #[test]
    fn orphan_inside_opens_span() {
        let s = space();
        let per = s.type_index("PER").unwrap();
        assert_eq!(
            decode_bio(&labels(&s, &["I-PER", "O"]), &s),
            vec![SpanEntity::new(0, 0, per)]
        );
    }

    #[test]
    fn type_switch_splits() {
        let s = space();
        let per = s.type_index("PER").unwrap();
        let loc = s.type_index("LOC").unwrap();
        assert_eq!(
            decode_bio(&labels(&s, &["B-PER", "I-LOC"]), &s),
            vec![SpanEntity::new(0, 0, per), SpanEntity::new(1, 1, loc)]
        );
    }

    #[test]
    fn adjacent_same_type_spans_survive_encoding() {
        let s = space();
        let spans = vec![SpanEntity::new(0, 1, 1), SpanEntity::new(2, 2, 1)];
        let enc = encode_bio(&spans, 4, &s);
        assert_eq!(
            enc,
            labels(&s, &["B-PER", "I-PER", "B-PER", "O"])
        );
        assert_eq!(decode_bio(&enc, &s), spans);
    }
}
