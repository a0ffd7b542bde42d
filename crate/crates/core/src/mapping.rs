//! Knowledge-base class → UNER label translation.
//!
//! Two tables drive it: an equivalence map (class → label, or NULL for
//! classes that are never annotated) and a priority map where a larger
//! number marks a more specific class. An entity's classes are reduced to a
//! single class by maximal priority, ties going to the earliest class in the
//! retrieved list; that class is then translated through the equivalence map.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::catalog::ClassCatalog;
use crate::label::{UnerLabel, MAX_LEVELS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MappingError {
    #[error("class {0:?} is listed more than once")]
    Duplicate(String),
    #[error("class {class:?} has priority {priority}, priorities start at 1")]
    BadPriority { class: String, priority: u32 },
    #[error("class {0:?} has an equivalence but no priority")]
    MissingPriority(String),
    #[error("class {0:?} has a priority but no equivalence")]
    MissingEquivalence(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquivalenceMap {
    entries: BTreeMap<String, Option<UnerLabel>>,
}

impl EquivalenceMap {
    pub fn from_entries<I>(entries: I) -> Result<Self, MappingError>
    where
        I: IntoIterator<Item = (String, Option<UnerLabel>)>,
    {
        let mut map = BTreeMap::new();
        for (class, label) in entries {
            if map.contains_key(&class) {
                return Err(MappingError::Duplicate(class));
            }
            map.insert(class, label);
        }
        Ok(EquivalenceMap { entries: map })
    }

    /// `None` if the class is unknown, `Some(None)` if it maps to NULL.
    pub fn get(&self, class: &str) -> Option<Option<&UnerLabel>> {
        self.entries.get(class).map(Option::as_ref)
    }

    pub fn contains(&self, class: &str) -> bool {
        self.entries.contains_key(class)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&UnerLabel>)> {
        self.entries.iter().map(|(c, l)| (c.as_str(), l.as_ref()))
    }

    /// Distinct non-NULL labels.
    pub fn labels(&self) -> BTreeSet<&UnerLabel> {
        self.entries.values().flatten().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PriorityMap {
    entries: BTreeMap<String, u32>,
}

impl PriorityMap {
    pub fn from_entries<I>(entries: I) -> Result<Self, MappingError>
    where
        I: IntoIterator<Item = (String, u32)>,
    {
        let mut map = BTreeMap::new();
        for (class, priority) in entries {
            if priority == 0 {
                return Err(MappingError::BadPriority { class, priority });
            }
            if map.contains_key(&class) {
                return Err(MappingError::Duplicate(class));
            }
            map.insert(class, priority);
        }
        Ok(PriorityMap { entries: map })
    }

    pub fn get(&self, class: &str) -> Option<u32> {
        self.entries.get(class).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.entries.iter().map(|(c, p)| (c.as_str(), *p))
    }
}

/// Both tables must cover the same classes.
pub fn cross_validate(eq: &EquivalenceMap, pr: &PriorityMap) -> Result<(), MappingError> {
    if let Some((class, _)) = eq.iter().find(|(c, _)| pr.get(c).is_none()) {
        return Err(MappingError::MissingPriority(class.into()));
    }
    if let Some((class, _)) = pr.iter().find(|(c, _)| !eq.contains(c)) {
        return Err(MappingError::MissingEquivalence(class.into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection<'a> {
    pub class: Option<&'a str>,
    /// Classes skipped because the priority map does not know them.
    pub skipped: usize,
}

/// Picks the class with the highest priority; among equals, the earliest.
pub fn select_class<'a, S: AsRef<str>>(classes: &'a [S], priorities: &PriorityMap) -> Selection<'a> {
    let mut best: Option<(&str, u32)> = None;
    let mut skipped = 0;
    for class in classes {
        let class = class.as_ref();
        match priorities.get(class) {
            None => skipped += 1,
            Some(p) => {
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((class, p));
                }
            }
        }
    }
    Selection {
        class: best.map(|(c, _)| c),
        skipped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapped<'a> {
    Label(&'a UnerLabel),
    Null,
    Unknown,
}

impl<'a> Mapped<'a> {
    pub fn label(self) -> Option<&'a UnerLabel> {
        match self {
            Mapped::Label(l) => Some(l),
            _ => None,
        }
    }
}

pub fn map_to_uner<'a>(class: &str, equivalences: &'a EquivalenceMap) -> Mapped<'a> {
    match equivalences.get(class) {
        Some(Some(label)) => Mapped::Label(label),
        Some(None) => Mapped::Null,
        None => Mapped::Unknown,
    }
}

/// Running counts of what the mapper could not use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MappingCounters {
    pub skipped_classes: usize,
    pub unknown_classes: usize,
    pub null_mapped: usize,
    pub no_class: usize,
    pub labelled: usize,
}

/// Both tables, validated against each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapper {
    pub equivalences: EquivalenceMap,
    pub priorities: PriorityMap,
}

impl Mapper {
    pub fn new(equivalences: EquivalenceMap, priorities: PriorityMap) -> Result<Self, MappingError> {
        cross_validate(&equivalences, &priorities)?;
        Ok(Mapper {
            equivalences,
            priorities,
        })
    }

    /// Selection followed by translation for one entity's class list.
    pub fn label_for<S: AsRef<str>>(
        &self,
        classes: &[S],
        counters: &mut MappingCounters,
    ) -> Option<UnerLabel> {
        let selection = select_class(classes, &self.priorities);
        counters.skipped_classes += selection.skipped;
        let Some(class) = selection.class else {
            counters.no_class += 1;
            return None;
        };
        match map_to_uner(class, &self.equivalences) {
            Mapped::Label(l) => {
                counters.labelled += 1;
                Some(l.clone())
            }
            Mapped::Null => {
                counters.null_mapped += 1;
                None
            }
            Mapped::Unknown => {
                counters.unknown_classes += 1;
                None
            }
        }
    }

    /// Target → label for every catalog entry that resolves to a label.
    pub fn label_catalog(
        &self,
        catalog: &ClassCatalog,
        counters: &mut MappingCounters,
    ) -> BTreeMap<String, UnerLabel> {
        catalog
            .iter()
            .filter_map(|(target, classes)| {
                self.label_for(classes, counters).map(|l| (target.into(), l))
            })
            .collect()
    }
}

/// Number of distinct hierarchy nodes per level (1..=4) spanned by `labels`.
pub fn nodes_per_level<'a, I>(labels: I) -> [usize; MAX_LEVELS]
where
    I: IntoIterator<Item = &'a UnerLabel>,
{
    let mut levels: [BTreeSet<UnerLabel>; MAX_LEVELS] = Default::default();
    for label in labels {
        for depth in 1..=label.depth() {
            levels[depth - 1].insert(label.collapse(depth));
        }
    }
    let mut out = [0; MAX_LEVELS];
    for (o, set) in out.iter_mut().zip(&levels) {
        *o = set.len();
    }
    out
}

/// Labels that are nobody's ancestor within `labels`.
pub fn leaf_labels<'a>(labels: &BTreeSet<&'a UnerLabel>) -> Vec<&'a UnerLabel> {
    labels
        .iter()
        .filter(|l| !labels.iter().any(|o| o.depth() > l.depth() && o.has_prefix(l.as_str())))
        .copied()
        .collect()
}
