use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the outside label in every [`LabelSpace`].
pub const OUTSIDE: usize = 0;

/// Decoded view of a BIO label. Entity types are indices into
/// [`LabelSpace::entity_types`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(usize),
    Inside(usize),
}

impl Tag {
    pub fn entity_type(self) -> Option<usize> {
        match self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) => Some(t),
        }
    }
}

/// The BIO label space over an ordered list of entity types.
///
/// Labels are laid out as `O, B-t0, I-t0, B-t1, I-t1, ...`, so the outside
/// label is always index 0 and there are `2 * types + 1` labels.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LabelSpaceRepr", into = "LabelSpaceRepr")]
pub struct LabelSpace {
    entity_types: Vec<String>,
    labels: Vec<String>,
    lookup: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct LabelSpaceRepr {
    entity_types: Vec<String>,
}

impl TryFrom<LabelSpaceRepr> for LabelSpace {
    type Error = Error;

    fn try_from(repr: LabelSpaceRepr) -> Result<Self> {
        LabelSpace::new(repr.entity_types)
    }
}

impl From<LabelSpace> for LabelSpaceRepr {
    fn from(space: LabelSpace) -> Self {
        LabelSpaceRepr {
            entity_types: space.entity_types,
        }
    }
}

impl fmt::Debug for LabelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("LabelSpace").field(&self.labels).finish()
    }
}

fn check_type_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::invalid("entity type", "empty type name"));
    }
    if name
        .chars()
        .any(|c| c.is_whitespace() || c == ':' || c == ',')
    {
        return Err(Error::invalid(
            "entity type",
            format!("{name:?} contains whitespace, ':' or ','"),
        ));
    }
    Ok(())
}

impl LabelSpace {
    pub fn new<S: Into<String>>(entity_types: impl IntoIterator<Item = S>) -> Result<Self> {
        let entity_types: Vec<String> = entity_types.into_iter().map(Into::into).collect();
        if entity_types.is_empty() {
            return Err(Error::invalid(
                "label space",
                "at least one entity type is required",
            ));
        }
        let mut labels = Vec::with_capacity(2 * entity_types.len() + 1);
        labels.push("O".to_string());
        for t in &entity_types {
            check_type_name(t)?;
            labels.push(format!("B-{t}"));
            labels.push(format!("I-{t}"));
        }
        let mut lookup = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if lookup.insert(l.clone(), i).is_some() {
                return Err(Error::invalid(
                    "label space",
                    format!("duplicate label {l}"),
                ));
            }
        }
        Ok(LabelSpace {
            entity_types,
            labels,
            lookup,
        })
    }

    /// Builds a label space from the entity types mentioned by a set of tag
    /// strings. Types are sorted so the result does not depend on file order.
    /// The placeholder `-` is ignored.
    pub fn infer<'a>(tags: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut types = BTreeSet::new();
        for tag in tags {
            match tag {
                "O" | "-" => {}
                _ => match tag.strip_prefix("B-").or_else(|| tag.strip_prefix("I-")) {
                    Some(t) if !t.is_empty() => {
                        types.insert(t.to_string());
                    }
                    _ => {
                        return Err(Error::invalid("tag", format!("{tag:?} is not a BIO tag")));
                    }
                },
            }
        }
        LabelSpace::new(types)
    }

    pub fn entity_types(&self) -> &[String] {
        &self.entity_types
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_types(&self) -> usize {
        self.entity_types.len()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.lookup.get(label).copied()
    }

    pub fn tag(&self, index: usize) -> Tag {
        debug_assert!(index < self.labels.len());
        match index {
            0 => Tag::Outside,
            i if i % 2 == 1 => Tag::Begin((i - 1) / 2),
            i => Tag::Inside((i - 2) / 2),
        }
    }

    pub fn index(&self, tag: Tag) -> usize {
        match tag {
            Tag::Outside => OUTSIDE,
            Tag::Begin(t) => 1 + 2 * t,
            Tag::Inside(t) => 2 + 2 * t,
        }
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.entity_types.iter().position(|t| t == name)
    }

    /// True when every label of `other` exists in `self` at the same index.
    pub fn is_compatible(&self, other: &LabelSpace) -> bool {
        self.entity_types == other.entity_types
    }
}
