use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::label::{LabelError, UnerLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prefix {
    B,
    I,
    O,
}

/// A token tag. `Outside` carries no label, `Begin`/`Inside` exactly one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IobTag {
    Outside,
    Begin(UnerLabel),
    Inside(UnerLabel),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TagError {
    #[error("tag {0:?} is not O, B-<label> or I-<label>")]
    Malformed(String),
    #[error("bad label in tag: {0}")]
    Label(#[from] LabelError),
}

impl IobTag {
    pub fn parse(s: &str) -> Result<Self, TagError> {
        if s == "O" {
            return Ok(IobTag::Outside);
        }
        match s.split_once('-') {
            Some(("B", label)) => Ok(IobTag::Begin(UnerLabel::parse(label)?)),
            Some(("I", label)) => Ok(IobTag::Inside(UnerLabel::parse(label)?)),
            _ => Err(TagError::Malformed(s.into())),
        }
    }

    pub fn prefix(&self) -> Prefix {
        match self {
            IobTag::Outside => Prefix::O,
            IobTag::Begin(_) => Prefix::B,
            IobTag::Inside(_) => Prefix::I,
        }
    }

    pub fn label(&self) -> Option<&UnerLabel> {
        match self {
            IobTag::Outside => None,
            IobTag::Begin(l) | IobTag::Inside(l) => Some(l),
        }
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, IobTag::Outside)
    }

    pub fn is_begin(&self) -> bool {
        matches!(self, IobTag::Begin(_))
    }

    /// Rewrites the label to its first `depth` segments; `O` is unchanged.
    pub fn collapse(&self, depth: usize) -> IobTag {
        match self {
            IobTag::Outside => IobTag::Outside,
            IobTag::Begin(l) => IobTag::Begin(l.collapse(depth)),
            IobTag::Inside(l) => IobTag::Inside(l.collapse(depth)),
        }
    }
}

impl fmt::Display for IobTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IobTag::Outside => f.write_str("O"),
            IobTag::Begin(l) => write!(f, "B-{l}"),
            IobTag::Inside(l) => write!(f, "I-{l}"),
        }
    }
}

impl FromStr for IobTag {
    type Err = TagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IobTag::parse(s)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for IobTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for IobTag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(deserializer)?;
        IobTag::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A violation of IOB well-formedness inside one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IobViolation {
    /// `I-X` at `index` not preceded by `B-X` or `I-X`.
    OrphanInside { index: usize },
    /// The sentence holds no `B` tag at all.
    NoEntity,
}

/// Checks a tag sequence: every `I-X` continues a `B-X`/`I-X` of the same
/// label. With `require_entity`, at least one `B` tag must be present.
pub fn validate<'a, I>(tags: I, require_entity: bool) -> Result<(), IobViolation>
where
    I: IntoIterator<Item = &'a IobTag>,
{
    let mut previous: Option<&IobTag> = None;
    let mut seen_begin = false;
    for (index, tag) in tags.into_iter().enumerate() {
        match tag {
            IobTag::Begin(_) => seen_begin = true,
            IobTag::Inside(label) => {
                let continues = matches!(previous, Some(IobTag::Begin(p) | IobTag::Inside(p)) if p == label);
                if !continues {
                    return Err(IobViolation::OrphanInside { index });
                }
            }
            IobTag::Outside => {}
        }
        previous = Some(tag);
    }
    if require_entity && !seen_begin {
        return Err(IobViolation::NoEntity);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn tag(s: &str) -> IobTag {
        IobTag::parse(s).unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(tag("O"), IobTag::Outside);
        let b = tag("B-Name-Person-Name");
        assert_eq!(b.prefix(), Prefix::B);
        assert_eq!(b.label().unwrap().as_str(), "Name-Person-Name");
        assert_eq!(b.to_string(), "B-Name-Person-Name");
        assert!(matches!(IobTag::parse("X-Name"), Err(TagError::Malformed(_))));
        assert!(matches!(IobTag::parse("B"), Err(TagError::Malformed(_))));
        assert!(matches!(IobTag::parse("B-Foo"), Err(TagError::Label(_))));
        assert!(matches!(IobTag::parse("O-Name"), Err(TagError::Malformed(_))));
    }

    #[test]
    fn well_formedness() {
        let ok = vec![tag("O"), tag("B-Name-God"), tag("I-Name-God"), tag("O")];
        assert_eq!(validate(&ok, true), Ok(()));
        let orphan = vec![tag("O"), tag("I-Name-God")];
        assert_eq!(
            validate(&orphan, false),
            Err(IobViolation::OrphanInside { index: 1 })
        );
        let switch = vec![tag("B-Name-God"), tag("I-Name-Disease-Disease_Other")];
        assert_eq!(
            validate(&switch, false),
            Err(IobViolation::OrphanInside { index: 1 })
        );
        assert_eq!(validate(&[tag("O")], true), Err(IobViolation::NoEntity));
        assert_eq!(validate(&[tag("O")], false), Ok(()));
    }

    #[test]
    fn collapse_keeps_prefix() {
        let t = tag("I-Name-Location-GPE-City").collapse(2);
        assert_eq!(t.to_string(), "I-Name-Location");
        assert_eq!(tag("O").collapse(1), IobTag::Outside);
    }
}
