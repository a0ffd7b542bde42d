//! Multi-level UNER labels.
//!
//! A label is the hyphen-joined path from a level-1 class down to at most a
//! level-4 subtype, e.g. `Name-Event-Natural_Phenomenon-Earthquake`. The
//! implicit root (level 0) is never written.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

/// Maximum number of segments below the implicit root.
pub const MAX_LEVELS: usize = 4;

/// Separator between label segments.
pub const SEPARATOR: char = '-';

/// Level-1 classes every label must start with.
pub const LEVEL_ONE: [&str; 3] = ["Name", "Time_Expression", "Numerical_Expression"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("empty label")]
    Empty,
    #[error("label has {count} segments, at most {MAX_LEVELS} allowed (excess starts at offset {offset})")]
    TooManySegments { count: usize, offset: usize },
    #[error("empty segment {segment} at offset {offset}")]
    EmptySegment { segment: usize, offset: usize },
    #[error("whitespace in segment {segment} at offset {offset}")]
    Whitespace { segment: usize, offset: usize },
    #[error("unknown level-1 class {found:?}")]
    UnknownRoot { found: String },
}

impl LabelError {
    /// Character offset of the offending part of the input, when there is one.
    pub fn position(&self) -> Option<usize> {
        match self {
            LabelError::EmptySegment { offset, .. }
            | LabelError::Whitespace { offset, .. }
            | LabelError::TooManySegments { offset, .. } => Some(*offset),
            LabelError::UnknownRoot { .. } => Some(0),
            _ => None,
        }
    }
}

/// Same as [`UnerLabel::parse`].
pub fn parse_uner_label(s: &str) -> Result<UnerLabel, LabelError> {
    UnerLabel::parse(s)
}

/// A validated UNER label. Ordering is the ordering of the joined string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct UnerLabel(String);

impl UnerLabel {
    pub fn parse(s: &str) -> Result<Self, LabelError> {
        if s.is_empty() {
            return Err(LabelError::Empty);
        }
        let count = s.split(SEPARATOR).count();
        if count > MAX_LEVELS {
            let offset = s
                .split(SEPARATOR)
                .take(MAX_LEVELS)
                .map(|part| part.chars().count() + 1)
                .sum();
            return Err(LabelError::TooManySegments { count, offset });
        }
        let mut offset = 0;
        for (segment, part) in s.split(SEPARATOR).enumerate() {
            if part.is_empty() {
                return Err(LabelError::EmptySegment { segment, offset });
            }
            if let Some(i) = part.chars().position(char::is_whitespace) {
                return Err(LabelError::Whitespace {
                    segment,
                    offset: offset + i,
                });
            }
            offset += part.chars().count() + 1;
        }
        let root = s.split(SEPARATOR).next().unwrap_or_default();
        if !LEVEL_ONE.contains(&root) {
            return Err(LabelError::UnknownRoot { found: root.into() });
        }
        Ok(UnerLabel(s.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.split(SEPARATOR)
    }

    pub fn depth(&self) -> usize {
        self.segments().count()
    }

    pub fn level_one(&self) -> &str {
        self.segments().next().unwrap_or_default()
    }

    /// Truncates the label to its first `depth` segments. A depth of zero or
    /// one at least as deep as the label returns the label unchanged.
    pub fn collapse(&self, depth: usize) -> UnerLabel {
        if depth == 0 || depth >= self.depth() {
            return self.clone();
        }
        let end = self
            .0
            .match_indices(SEPARATOR)
            .nth(depth - 1)
            .map(|(i, _)| i)
            .unwrap_or(self.0.len());
        UnerLabel(self.0[..end].into())
    }

    /// True when `prefix` equals this label or one of its ancestors.
    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.0 == prefix
            || (self.0.starts_with(prefix) && self.0[prefix.len()..].starts_with(SEPARATOR))
    }
}

impl fmt::Display for UnerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for UnerLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UnerLabel::parse(s)
    }
}

impl TryFrom<String> for UnerLabel {
    type Error = LabelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        UnerLabel::parse(&s)
    }
}

impl From<UnerLabel> for String {
    fn from(label: UnerLabel) -> String {
        label.0
    }
}

impl AsRef<str> for UnerLabel {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn four_level_example() {
        let label = UnerLabel::parse("Name-Event-Natural_Phenomenon-Earthquake").unwrap();
        let segments: Vec<_> = label.segments().collect();
        assert_eq!(segments, ["Name", "Event", "Natural_Phenomenon", "Earthquake"]);
        assert_eq!(label.depth(), 4);
    }

    #[test]
    fn single_level() {
        let label = UnerLabel::parse("Name").unwrap();
        assert_eq!(label.depth(), 1);
        assert_eq!(label.level_one(), "Name");
    }

    #[test]
    fn rejects_empty_segment_with_position() {
        let err = UnerLabel::parse("Name--Event").unwrap_err();
        assert_eq!(err, LabelError::EmptySegment { segment: 1, offset: 5 });
        assert_eq!(err.position(), Some(5));
        assert!(matches!(
            UnerLabel::parse("Name-Event-"),
            Err(LabelError::EmptySegment { segment: 2, .. })
        ));
    }

    #[test]
    fn rejects_too_deep() {
        assert_eq!(
            UnerLabel::parse("Name-A-B-C-D"),
            Err(LabelError::TooManySegments { count: 5, offset: 11 })
        );
    }

    #[test]
    fn rejects_unknown_root() {
        assert!(matches!(
            UnerLabel::parse("Thing-Event"),
            Err(LabelError::UnknownRoot { .. })
        ));
        assert_eq!(UnerLabel::parse(""), Err(LabelError::Empty));
        assert!(matches!(
            UnerLabel::parse("Name-Ev ent"),
            Err(LabelError::Whitespace { offset: 7, .. })
        ));
    }

    #[test]
    fn collapse_and_prefix() {
        let label = UnerLabel::parse("Name-Location-GPE-City").unwrap();
        assert_eq!(label.collapse(2).as_str(), "Name-Location");
        assert_eq!(label.collapse(1).as_str(), "Name");
        assert_eq!(label.collapse(9), label);
        assert!(label.has_prefix("Name-Location"));
        assert!(!label.has_prefix("Name-Loc"));
        assert!(label.has_prefix("Name-Location-GPE-City"));
    }
}
