use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Link target → knowledge-base classes in retrieval order.
///
/// Class lists never hold duplicates; the first occurrence wins and order is
/// otherwise kept exactly as retrieved, since class selection breaks ties by
/// list position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassCatalog {
    entries: BTreeMap<String, Vec<String>>,
}

impl ClassCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the class list for `target`, dropping repeats.
    pub fn insert<I, S>(&mut self, target: impl Into<String>, classes: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list: Vec<String> = Vec::new();
        for class in classes {
            let class = class.into();
            if !list.contains(&class) {
                list.push(class);
            }
        }
        self.entries.insert(target.into(), list);
    }

    pub fn get(&self, target: &str) -> Option<&[String]> {
        self.entries.get(target).map(Vec::as_slice)
    }

    pub fn contains(&self, target: &str) -> bool {
        self.entries.contains_key(target)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries ordered by target.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(t, c)| (t.as_str(), c.as_slice()))
    }

    /// The sub-catalog covering only `targets`.
    pub fn restrict<'a, I>(&self, targets: I) -> ClassCatalog
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = ClassCatalog::new();
        for t in targets {
            if let Some(classes) = self.entries.get(t) {
                out.entries.insert(t.into(), classes.clone());
            }
        }
        out
    }

    pub fn extend(&mut self, other: ClassCatalog) {
        self.entries.extend(other.entries);
    }
}
