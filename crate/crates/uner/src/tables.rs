//! Tab-separated files: mapping tables, the class cache, dictionaries, the
//! knowledge-graph class map and the target list.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use uner_core::catalog::ClassCatalog;
use uner_core::enrich::{Dictionary, KgClassMap, Provenance};
use uner_core::label::UnerLabel;
use uner_core::mapping::{EquivalenceMap, Mapper, MappingError, PriorityMap};

use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic, write_string};

pub const NULL_LABEL: &str = "NULL";

/// Non-blank lines with their 1-based numbers. With `comments`, lines
/// starting with `#` are skipped too.
fn records(text: &str, comments: bool) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(move |(_, l)| !l.trim().is_empty() && !(comments && l.starts_with('#')))
}

fn two_columns<'a>(path: &Path, line: usize, text: &'a str) -> Result<(&'a str, &'a str)> {
    let mut cols = text.split('\t');
    match (cols.next(), cols.next(), cols.next()) {
        (Some(a), Some(b), None) if !a.is_empty() => Ok((a, b)),
        _ => Err(Error::data(path, line, format!("expected two tab-separated columns, found {text:?}"))),
    }
}

/// `class<TAB>label|NULL`.
pub fn parse_equivalence_map(path: &Path, text: &str) -> Result<EquivalenceMap> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (n, line) in records(text, true) {
        let (class, label) = two_columns(path, n, line)?;
        if let Some(first) = seen.insert(class, n) {
            return Err(Error::data(path, n, format!("duplicate class {class} (first on line {first})")));
        }
        let label = if label == NULL_LABEL {
            None
        } else {
            Some(UnerLabel::parse(label).map_err(|e| Error::data(path, n, format!("label {label:?}: {e}")))?)
        };
        entries.push((class.to_owned(), label));
    }
    EquivalenceMap::from_entries(entries).map_err(|e| Error::data(path, 0, e.to_string()))
}

/// `class<TAB>priority`, priorities ≥ 1.
pub fn parse_priority_map(path: &Path, text: &str) -> Result<PriorityMap> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (n, line) in records(text, true) {
        let (class, value) = two_columns(path, n, line)?;
        if let Some(first) = seen.insert(class, n) {
            return Err(Error::data(path, n, format!("duplicate class {class} (first on line {first})")));
        }
        let priority: u32 = value
            .trim()
            .parse()
            .ok()
            .filter(|p| *p >= 1)
            .ok_or_else(|| Error::data(path, n, format!("priority {value:?} is not an integer >= 1")))?;
        entries.push((class.to_owned(), priority));
    }
    PriorityMap::from_entries(entries).map_err(|e| Error::data(path, 0, e.to_string()))
}

pub fn load_equivalence_map(path: &Path) -> Result<EquivalenceMap> {
    parse_equivalence_map(path, &read_to_string(path)?)
}

pub fn load_priority_map(path: &Path) -> Result<PriorityMap> {
    parse_priority_map(path, &read_to_string(path)?)
}

/// Loads both tables and checks each class appears in both.
pub fn load_mapper(equivalences: &Path, priorities: &Path) -> Result<Mapper> {
    let eq = load_equivalence_map(equivalences)?;
    let pr = load_priority_map(priorities)?;
    Mapper::new(eq, pr).map_err(|e| match &e {
        MappingError::MissingPriority(_) => Error::Invalid(format!("{}: {e}", equivalences.display())),
        _ => Error::Invalid(format!("{}: {e}", priorities.display())),
    })
}

/// `target<TAB>class1,class2,...`; a missing file is an empty cache.
pub fn load_cache(path: &Path) -> Result<ClassCatalog> {
    if !path.exists() {
        return Ok(ClassCatalog::new());
    }
    parse_cache(path, &read_to_string(path)?)
}

pub fn parse_cache(path: &Path, text: &str) -> Result<ClassCatalog> {
    let mut catalog = ClassCatalog::new();
    for (n, line) in records(text, true) {
        let (target, classes) = two_columns(path, n, line)?;
        if catalog.contains(target) {
            return Err(Error::data(path, n, format!("duplicate target {target:?}")));
        }
        let classes = classes.split(',').map(str::trim).filter(|c| !c.is_empty());
        catalog.insert(target, classes);
    }
    Ok(catalog)
}

pub fn format_cache(catalog: &ClassCatalog) -> String {
    let mut out = String::from("# target\tclasses in retrieval order\n");
    for (target, classes) in catalog.iter() {
        let _ = writeln!(out, "{target}\t{}", classes.join(","));
    }
    out
}

pub fn save_cache(path: &Path, catalog: &ClassCatalog) -> Result<u64> {
    write_string(path, &format_cache(catalog))
}

/// `surface<TAB>label` in application order.
pub fn write_dictionary(path: &Path, dict: &Dictionary) -> Result<u64> {
    write_atomic(path, |w| {
        for (surface, label) in dict.application_order() {
            writeln!(w, "{surface}\t{label}")?;
        }
        Ok(())
    })
}

/// Reads a dictionary file; entries the filters reject are dropped.
pub fn load_dictionary(path: &Path, provenance: Provenance) -> Result<Dictionary> {
    let text = read_to_string(path)?;
    let mut entries = Vec::new();
    for (n, line) in records(&text, false) {
        let (surface, label) = two_columns(path, n, line)?;
        let label = UnerLabel::parse(label).map_err(|e| Error::data(path, n, format!("label {label:?}: {e}")))?;
        entries.push((surface.to_owned(), label));
    }
    Ok(Dictionary::from_entries(entries, provenance).0)
}

/// `surface_or_target<TAB>class`; later repeats of a key are ignored.
pub fn load_kg_map(path: &Path) -> Result<KgClassMap> {
    let text = read_to_string(path)?;
    let mut entries = Vec::new();
    for (n, line) in records(&text, true) {
        let (key, class) = two_columns(path, n, line)?;
        entries.push((key.to_owned(), class.trim().to_owned()));
    }
    Ok(KgClassMap::from_entries(entries).0)
}

pub fn write_lines<'a, I>(path: &Path, lines: I) -> Result<u64>
where
    I: IntoIterator<Item = &'a str>,
{
    write_atomic(path, |w| {
        for l in lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })
}

/// One target per line.
pub fn load_targets(path: &Path) -> Result<Vec<String>> {
    let text = read_to_string(path)?;
    let mut targets: Vec<String> = records(&text, false).map(|(_, l)| l.to_owned()).collect();
    targets.sort();
    targets.dedup();
    Ok(targets)
}

pub fn write_entities(path: &Path, entities: &[(String, UnerLabel)]) -> Result<u64> {
    write_atomic(path, |w| {
        for (surface, label) in entities {
            writeln!(w, "{surface}\t{label}")?;
        }
        Ok(())
    })
}
