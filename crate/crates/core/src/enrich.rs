//! Dictionary-based completion of corpus annotations.
//!
//! Dictionaries map an entity surface (token texts joined by single spaces)
//! to a label. Application only ever fills tokens tagged `O`; existing
//! entity tags are never touched. Surfaces are tried longest first (by
//! character count, then token count, then lexicographically) so that a
//! multi-token entry wins over the shorter entries nested inside it.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::annotate::{AnnotatedCorpus, AnnotatedDocument, AnnotatedSentence};
use crate::iob::IobTag;
use crate::label::UnerLabel;
use crate::mapping::{map_to_uner, EquivalenceMap, Mapped};
use crate::text::token_texts;

/// Minimum surface length in characters.
pub const MIN_SURFACE_CHARS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    Global,
    GlobalMulti,
    KgFiltered,
    KgFilteredMulti,
}

impl Provenance {
    pub fn multi_token_only(self) -> bool {
        matches!(self, Provenance::GlobalMulti | Provenance::KgFilteredMulti)
    }

    pub fn name(self) -> &'static str {
        match self {
            Provenance::Global => "global",
            Provenance::GlobalMulti => "global_multi",
            Provenance::KgFiltered => "kg_filtered",
            Provenance::KgFilteredMulti => "kg_filtered_multi",
        }
    }

    fn as_multi(self) -> Provenance {
        match self {
            Provenance::Global | Provenance::GlobalMulti => Provenance::GlobalMulti,
            Provenance::KgFiltered | Provenance::KgFilteredMulti => Provenance::KgFilteredMulti,
        }
    }

    fn as_kg(self) -> Provenance {
        if self.multi_token_only() {
            Provenance::KgFilteredMulti
        } else {
            Provenance::KgFiltered
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// True if `surface` may enter a dictionary: at least three characters, at
/// least one letter, and (for multi-token dictionaries) two or more tokens.
pub fn admits(surface: &str, multi_token_only: bool) -> bool {
    surface.chars().count() >= MIN_SURFACE_CHARS
        && surface.chars().any(char::is_alphabetic)
        && (!multi_token_only || token_texts(surface).len() >= 2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    entries: BTreeMap<String, UnerLabel>,
    provenance: Provenance,
}

impl Dictionary {
    pub fn new(provenance: Provenance) -> Self {
        Dictionary {
            entries: BTreeMap::new(),
            provenance,
        }
    }

    /// Builds a dictionary, silently leaving out surfaces the filters reject.
    /// Returns the dictionary and the number of rejected entries.
    pub fn from_entries<I>(entries: I, provenance: Provenance) -> (Self, usize)
    where
        I: IntoIterator<Item = (String, UnerLabel)>,
    {
        let mut dict = Dictionary::new(provenance);
        let mut rejected = 0;
        for (surface, label) in entries {
            if !dict.insert(surface, label) {
                rejected += 1;
            }
        }
        (dict, rejected)
    }

    /// Inserts unless the surface fails the filters. Returns whether it was kept.
    pub fn insert(&mut self, surface: String, label: UnerLabel) -> bool {
        if !admits(&surface, self.provenance.multi_token_only()) {
            return false;
        }
        self.entries.insert(surface, label);
        true
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, surface: &str) -> Option<&UnerLabel> {
        self.entries.get(surface)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &UnerLabel)> {
        self.entries.iter().map(|(s, l)| (s.as_str(), l))
    }

    /// The entries with at least two tokens.
    pub fn multi_token_only(&self) -> Dictionary {
        let provenance = self.provenance.as_multi();
        Dictionary {
            entries: self
                .entries
                .iter()
                .filter(|(s, _)| admits(s, true))
                .map(|(s, l)| (s.clone(), l.clone()))
                .collect(),
            provenance,
        }
    }

    /// Entries in the order they are applied.
    pub fn application_order(&self) -> Vec<(&str, &UnerLabel)> {
        let mut keyed: Vec<(usize, usize, &str, &UnerLabel)> = self
            .entries
            .iter()
            .map(|(s, l)| (s.chars().count(), token_texts(s).len(), s.as_str(), l))
            .collect();
        keyed.sort_by(|a, b| application_cmp((a.0, a.1, a.2), (b.0, b.1, b.2)));
        keyed.into_iter().map(|(_, _, s, l)| (s, l)).collect()
    }
}

fn application_cmp(a: (usize, usize, &str), b: (usize, usize, &str)) -> Ordering {
    b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then_with(|| a.2.cmp(b.2))
}

/// Surface → label occurrence counts; mergeable across workers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceLabelCounts {
    counts: BTreeMap<String, BTreeMap<UnerLabel, usize>>,
}

impl SurfaceLabelCounts {
    pub fn add_sentence(&mut self, sentence: &AnnotatedSentence) {
        for run in sentence.entities() {
            let surface = sentence.surface(run.start..run.end);
            *self
                .counts
                .entry(surface)
                .or_default()
                .entry(run.label.clone())
                .or_default() += 1;
        }
    }

    pub fn add_corpus(&mut self, corpus: &AnnotatedCorpus) {
        for s in corpus.sentences() {
            self.add_sentence(s);
        }
    }

    pub fn merge(&mut self, other: SurfaceLabelCounts) {
        for (surface, labels) in other.counts {
            let mine = self.counts.entry(surface).or_default();
            for (label, n) in labels {
                *mine.entry(label).or_default() += n;
            }
        }
    }

    /// Most frequent label per surface; ties go to the smallest label string.
    pub fn modal(&self) -> impl Iterator<Item = (&str, &UnerLabel)> {
        self.counts.iter().filter_map(|(surface, labels)| {
            let mut best: Option<(&UnerLabel, usize)> = None;
            for (label, &n) in labels {
                if best.is_none_or(|(_, bn)| n > bn) {
                    best = Some((label, n));
                }
            }
            best.map(|(l, _)| (surface.as_str(), l))
        })
    }

    pub fn into_dictionary(self, multi_token_only: bool) -> Dictionary {
        let provenance = if multi_token_only {
            Provenance::GlobalMulti
        } else {
            Provenance::Global
        };
        let mut dict = Dictionary::new(provenance);
        for (surface, label) in self.modal() {
            dict.insert(surface.into(), label.clone());
        }
        dict
    }
}

pub fn build_global_dictionary(corpus: &AnnotatedCorpus, multi_token_only: bool) -> Dictionary {
    let mut counts = SurfaceLabelCounts::default();
    counts.add_corpus(corpus);
    counts.into_dictionary(multi_token_only)
}

/// A dictionary prepared for matching: entries in application order, indexed
/// by their first token.
struct Matcher<'a> {
    entries: Vec<(Vec<String>, &'a UnerLabel)>,
    by_first: BTreeMap<String, Vec<usize>>,
}

impl<'a> Matcher<'a> {
    fn new(dict: &'a Dictionary) -> Self {
        let mut entries = Vec::with_capacity(dict.len());
        let mut by_first: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (surface, label) in dict.application_order() {
            let tokens = token_texts(surface);
            let Some(first) = tokens.first() else { continue };
            by_first.entry(first.clone()).or_default().push(entries.len());
            entries.push((tokens, label));
        }
        Matcher { entries, by_first }
    }

    fn apply(&self, sentence: &mut AnnotatedSentence) -> usize {
        let candidates: BTreeSet<usize> = sentence
            .tokens
            .iter()
            .filter(|t| t.tag.is_outside())
            .filter_map(|t| self.by_first.get(&t.text))
            .flatten()
            .copied()
            .collect();
        let mut added = 0;
        for idx in candidates {
            let (tokens, label) = &self.entries[idx];
            let mut i = 0;
            while i + tokens.len() <= sentence.tokens.len() {
                if window_matches(sentence, i, tokens) {
                    sentence.tag_run(i..i + tokens.len(), label);
                    added += 1;
                    i += tokens.len();
                } else {
                    i += 1;
                }
            }
        }
        added
    }
}

fn window_matches(sentence: &AnnotatedSentence, at: usize, tokens: &[String]) -> bool {
    sentence.tokens.get(at..at + tokens.len()).is_some_and(|window| {
        window
            .iter()
            .zip(tokens)
            .all(|(t, want)| t.tag.is_outside() && t.text == *want)
    })
}

/// Fills `O` runs matching dictionary surfaces, longest entries first.
pub fn apply_dictionary(corpus: &AnnotatedCorpus, dict: &Dictionary) -> AnnotatedCorpus {
    let mut out = corpus.clone();
    apply_dictionary_in_place(&mut out, dict);
    out
}

/// In-place form of [`apply_dictionary`]; returns the number of entities added.
pub fn apply_dictionary_in_place(corpus: &mut AnnotatedCorpus, dict: &Dictionary) -> usize {
    let matcher = Matcher::new(dict);
    corpus
        .documents
        .iter_mut()
        .flat_map(|d| d.sentences.iter_mut())
        .map(|s| matcher.apply(s))
        .sum()
}

/// Per document, every linked entity's surface is remembered with its label
/// at its first occurrence, and later untagged occurrences in the same
/// document are tagged with it. Nothing propagates backwards or across
/// documents.
pub fn apply_local_dictionaries(corpus: &AnnotatedCorpus) -> AnnotatedCorpus {
    AnnotatedCorpus {
        documents: corpus.documents.iter().map(apply_local_dictionary).collect(),
    }
}

struct LocalEntry {
    tokens: Vec<String>,
    chars: usize,
    label: UnerLabel,
}

pub fn apply_local_dictionary(doc: &AnnotatedDocument) -> AnnotatedDocument {
    let mut doc = doc.clone();
    let mut known: BTreeMap<String, LocalEntry> = BTreeMap::new();
    // first token → surfaces, kept in application order
    let mut by_first: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for sentence in &mut doc.sentences {
        let mut i = 0;
        while i < sentence.tokens.len() {
            match &sentence.tokens[i].tag {
                IobTag::Begin(label) => {
                    let label = label.clone();
                    let mut end = i + 1;
                    while end < sentence.tokens.len()
                        && matches!(&sentence.tokens[end].tag, IobTag::Inside(l) if *l == label)
                    {
                        end += 1;
                    }
                    let surface = sentence.surface(i..end);
                    if !known.contains_key(&surface) {
                        let tokens: Vec<String> =
                            sentence.tokens[i..end].iter().map(|t| t.text.clone()).collect();
                        let entry = LocalEntry {
                            chars: surface.chars().count(),
                            tokens,
                            label,
                        };
                        let list = by_first.entry(entry.tokens[0].clone()).or_default();
                        list.push(surface.clone());
                        known.insert(surface, entry);
                        list.sort_by(|a, b| {
                            let (ea, eb) = (&known[a], &known[b]);
                            application_cmp(
                                (ea.chars, ea.tokens.len(), a),
                                (eb.chars, eb.tokens.len(), b),
                            )
                        });
                    }
                    i = end;
                }
                IobTag::Inside(_) => i += 1,
                IobTag::Outside => {
                    let hit = by_first.get(&sentence.tokens[i].text).and_then(|surfaces| {
                        surfaces
                            .iter()
                            .map(|s| &known[s])
                            .find(|e| window_matches(sentence, i, &e.tokens))
                    });
                    match hit {
                        Some(entry) => {
                            let n = entry.tokens.len();
                            sentence.tag_run(i..i + n, &entry.label);
                            i += n;
                        }
                        None => i += 1,
                    }
                }
            }
        }
    }
    doc
}

/// Knowledge-graph lookup: entity surface or link target → class name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KgClassMap {
    entries: BTreeMap<String, String>,
}

impl KgClassMap {
    /// Keeps the first class seen for a key; returns the map and the number
    /// of repeated keys ignored.
    pub fn from_entries<I>(entries: I) -> (Self, usize)
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut map = BTreeMap::new();
        let mut repeated = 0;
        for (key, class) in entries {
            match map.entry(key) {
                Entry::Occupied(_) => repeated += 1,
                Entry::Vacant(v) => {
                    v.insert(class);
                }
            }
        }
        (KgClassMap { entries: map }, repeated)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KgFilterOutcome {
    pub dictionary: Dictionary,
    pub not_in_kg: usize,
    pub null_class: usize,
    pub unknown_class: usize,
}

/// Intersects `dict` with the knowledge graph and relabels each kept entry
/// from its graph class. When `surface_targets` knows the link target behind
/// a surface and the graph has that target, the target is the lookup key;
/// otherwise the surface is.
pub fn filter_by_kg(
    dict: &Dictionary,
    kg: &KgClassMap,
    eq: &EquivalenceMap,
    surface_targets: Option<&BTreeMap<String, String>>,
) -> KgFilterOutcome {
    let mut out = KgFilterOutcome {
        dictionary: Dictionary::new(dict.provenance().as_kg()),
        not_in_kg: 0,
        null_class: 0,
        unknown_class: 0,
    };
    for (surface, _) in dict.iter() {
        let by_target = surface_targets
            .and_then(|m| m.get(surface))
            .and_then(|t| kg.get(t));
        let Some(class) = by_target.or_else(|| kg.get(surface)) else {
            out.not_in_kg += 1;
            continue;
        };
        match map_to_uner(class, eq) {
            Mapped::Label(label) => {
                out.dictionary.insert(surface.into(), label.clone());
            }
            Mapped::Null => out.null_class += 1,
            Mapped::Unknown => out.unknown_class += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Global = 1,
    GlobalMulti = 2,
    Local = 3,
    KgGlobal = 4,
    KgGlobalMulti = 5,
    LocalThenKg = 6,
    LocalThenKgMulti = 7,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Global,
        Experiment::GlobalMulti,
        Experiment::Local,
        Experiment::KgGlobal,
        Experiment::KgGlobalMulti,
        Experiment::LocalThenKg,
        Experiment::LocalThenKgMulti,
    ];

    pub fn id(self) -> u32 {
        self as u32
    }

    /// The dictionary the experiment applies, if any.
    pub fn dictionary(self) -> Option<Provenance> {
        match self {
            Experiment::Global => Some(Provenance::Global),
            Experiment::GlobalMulti => Some(Provenance::GlobalMulti),
            Experiment::Local => None,
            Experiment::KgGlobal | Experiment::LocalThenKg => Some(Provenance::KgFiltered),
            Experiment::KgGlobalMulti | Experiment::LocalThenKgMulti => {
                Some(Provenance::KgFilteredMulti)
            }
        }
    }

    pub fn uses_local(self) -> bool {
        matches!(
            self,
            Experiment::Local | Experiment::LocalThenKg | Experiment::LocalThenKgMulti
        )
    }
}

impl TryFrom<u32> for Experiment {
    type Error = ExperimentError;

    fn try_from(id: u32) -> Result<Self, Self::Error> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == id)
            .ok_or(ExperimentError::Unknown(id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error("experiment {0} does not exist (valid ids are 1-7)")]
    Unknown(u32),
    #[error("experiment {experiment} needs the {resource} dictionary")]
    MissingResource {
        experiment: u32,
        resource: Provenance,
    },
}

/// Dictionaries the experiments draw on.
#[derive(Debug, Clone, Default)]
pub struct ExperimentResources {
    pub global: Option<Dictionary>,
    pub global_multi: Option<Dictionary>,
    pub kg_filtered: Option<Dictionary>,
    pub kg_filtered_multi: Option<Dictionary>,
}

/// Inputs for the knowledge-graph filtered dictionaries.
pub struct KgInputs<'a> {
    pub kg: &'a KgClassMap,
    pub equivalences: &'a EquivalenceMap,
    pub surface_targets: Option<&'a BTreeMap<String, String>>,
}

impl ExperimentResources {
    /// Derives the multi-token and graph-filtered variants from `global`.
    pub fn prepare(global: Dictionary, kg: Option<KgInputs<'_>>) -> Self {
        let global_multi = global.multi_token_only();
        let (kg_filtered, kg_filtered_multi) = match kg {
            Some(k) => (
                Some(filter_by_kg(&global, k.kg, k.equivalences, k.surface_targets).dictionary),
                Some(
                    filter_by_kg(&global_multi, k.kg, k.equivalences, k.surface_targets)
                        .dictionary,
                ),
            ),
            None => (None, None),
        };
        ExperimentResources {
            global: Some(global),
            global_multi: Some(global_multi),
            kg_filtered,
            kg_filtered_multi,
        }
    }

    pub fn dictionary(&self, provenance: Provenance) -> Option<&Dictionary> {
        match provenance {
            Provenance::Global => self.global.as_ref(),
            Provenance::GlobalMulti => self.global_multi.as_ref(),
            Provenance::KgFiltered => self.kg_filtered.as_ref(),
            Provenance::KgFilteredMulti => self.kg_filtered_multi.as_ref(),
        }
    }
}

pub fn run_experiment(
    id: u32,
    corpus: &AnnotatedCorpus,
    resources: &ExperimentResources,
) -> Result<AnnotatedCorpus, ExperimentError> {
    let experiment = Experiment::try_from(id)?;
    let dict = match experiment.dictionary() {
        Some(p) => Some(resources.dictionary(p).ok_or(ExperimentError::MissingResource {
            experiment: id,
            resource: p,
        })?),
        None => None,
    };
    let mut out = if experiment.uses_local() {
        apply_local_dictionaries(corpus)
    } else {
        corpus.clone()
    };
    if let Some(dict) = dict {
        apply_dictionary_in_place(&mut out, dict);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::AnnotatedToken;
    use alloc::string::ToString;
    use alloc::vec;

    fn label(s: &str) -> UnerLabel {
        UnerLabel::parse(s).unwrap()
    }

    fn sentence(tokens: &[(&str, &str)]) -> AnnotatedSentence {
        AnnotatedSentence {
            tokens: tokens
                .iter()
                .map(|(t, g)| AnnotatedToken::new(*t, IobTag::parse(g).unwrap()))
                .collect(),
        }
    }

    fn plain(words: &str) -> AnnotatedSentence {
        AnnotatedSentence {
            tokens: words
                .split(' ')
                .map(|w| AnnotatedToken::new(w, IobTag::Outside))
                .collect(),
        }
    }

    fn corpus(docs: Vec<Vec<AnnotatedSentence>>) -> AnnotatedCorpus {
        AnnotatedCorpus {
            documents: docs
                .into_iter()
                .enumerate()
                .map(|(i, sentences)| AnnotatedDocument {
                    doc_id: i.to_string(),
                    sentences,
                })
                .collect(),
        }
    }

    fn tags(s: &AnnotatedSentence) -> Vec<String> {
        s.tags().map(|t| t.to_string()).collect()
    }

    const CITY: &str = "Name-Location-GPE-City";
    const PERSON: &str = "Name-Person-Name";

    #[test]
    fn modal_label_wins() {
        let b_city = "B-Name-Location-GPE-City";
        let c = corpus(vec![vec![
            sentence(&[("Paris", b_city)]),
            sentence(&[("Paris", b_city)]),
            sentence(&[("Paris", b_city), ("Paris", "B-Name-Person-Name")]),
        ]]);
        let d = build_global_dictionary(&c, false);
        assert_eq!(d.get("Paris").unwrap().as_str(), CITY);
    }

    #[test]
    fn modal_tie_takes_smallest_label() {
        let c = corpus(vec![vec![sentence(&[
            ("Paris", "B-Name-Person-Name"),
            ("Paris", "B-Name-Location-GPE-City"),
        ])]]);
        let d = build_global_dictionary(&c, false);
        assert_eq!(d.get("Paris").unwrap().as_str(), CITY);
    }

    #[test]
    fn filters() {
        let c = corpus(vec![vec![sentence(&[
            ("EU", "B-Name-Organization-International_Organization"),
            ("1945", "B-Time_Expression-Timex-Date"),
            ("B", "B-Name-Product-Vehicle-Aircraft"),
            ("-", "I-Name-Product-Vehicle-Aircraft"),
            ("52", "I-Name-Product-Vehicle-Aircraft"),
            ("Rome", "B-Name-Location-GPE-City"),
        ])]]);
        let d = build_global_dictionary(&c, false);
        assert!(d.get("EU").is_none());
        assert!(d.get("1945").is_none());
        assert!(d.get("B - 52").is_some());
        assert!(d.get("Rome").is_some());
        let multi = build_global_dictionary(&c, true);
        assert_eq!(multi.len(), 1);
        assert_eq!(multi.provenance(), Provenance::GlobalMulti);
        assert!(!admits("3.5 %", false));
    }

    #[test]
    fn longest_entry_first() {
        let (d, _) = Dictionary::from_entries(
            vec![("New York".into(), label(CITY)), ("York".into(), label(PERSON))],
            Provenance::Global,
        );
        let c = corpus(vec![vec![plain("from New York to York")]]);
        let out = apply_dictionary(&c, &d);
        assert_eq!(
            tags(&out.documents[0].sentences[0]),
            [
                "O",
                "B-Name-Location-GPE-City",
                "I-Name-Location-GPE-City",
                "O",
                "B-Name-Person-Name"
            ]
        );
        assert_eq!(
            d.application_order().iter().map(|e| e.0).collect::<Vec<_>>(),
            ["New York", "York"]
        );
    }

    #[test]
    fn empty_dictionary_is_identity() {
        let c = corpus(vec![vec![plain("a b c")]]);
        assert_eq!(apply_dictionary(&c, &Dictionary::new(Provenance::Global)), c);
    }

    #[test]
    fn never_overwrites() {
        let (d, _) = Dictionary::from_entries(
            vec![("Obama".into(), label(CITY))],
            Provenance::Global,
        );
        let c = corpus(vec![vec![sentence(&[("Obama", "B-Name-Person-Name"), ("Obama", "O")])]]);
        let out = apply_dictionary(&c, &d);
        assert_eq!(
            tags(&out.documents[0].sentences[0]),
            ["B-Name-Person-Name", "B-Name-Location-GPE-City"]
        );
    }

    #[test]
    fn partial_match_at_sentence_end_is_ignored() {
        let (d, _) = Dictionary::from_entries(
            vec![("New York".into(), label(CITY))],
            Provenance::Global,
        );
        let c = corpus(vec![vec![plain("in New")]]);
        assert_eq!(apply_dictionary(&c, &d), c);
    }

    #[test]
    fn local_dictionary_propagates_forward_only() {
        let c = corpus(vec![
            vec![
                plain("Obama spoke"),
                sentence(&[("Obama", "B-Name-Person-Name"), ("won", "O")]),
                plain("then Obama left"),
            ],
            vec![plain("Obama again")],
        ]);
        let out = apply_local_dictionaries(&c);
        let doc = &out.documents[0];
        assert_eq!(tags(&doc.sentences[0]), ["O", "O"]);
        assert_eq!(tags(&doc.sentences[2]), ["O", "B-Name-Person-Name", "O"]);
        assert_eq!(tags(&out.documents[1].sentences[0]), ["O", "O"]);
    }

    #[test]
    fn local_dictionary_first_label_sticks() {
        let c = corpus(vec![vec![
            sentence(&[("Paris", "B-Name-Location-GPE-City")]),
            sentence(&[("Paris", "B-Name-Person-Name"), ("Paris", "O")]),
        ]]);
        let out = apply_local_dictionaries(&c);
        assert_eq!(
            tags(&out.documents[0].sentences[1]),
            ["B-Name-Person-Name", "B-Name-Location-GPE-City"]
        );
    }

    #[test]
    fn kg_filter() {
        let eq = EquivalenceMap::from_entries(vec![
            ("dbo:City".into(), Some(label(CITY))),
            ("owl:Thing".into(), None),
        ])
        .unwrap();
        let (d, _) = Dictionary::from_entries(
            vec![
                ("Alpha".into(), label(PERSON)),
                ("Beta".into(), label(PERSON)),
                ("Gamma".into(), label(PERSON)),
                ("Delta".into(), label(PERSON)),
            ],
            Provenance::Global,
        );
        let (kg, _) = KgClassMap::from_entries(vec![
            ("Alpha".into(), "dbo:City".into()),
            ("Gamma".into(), "owl:Thing".into()),
            ("Delta".into(), "dbo:Nope".into()),
        ]);
        let out = filter_by_kg(&d, &kg, &eq, None);
        assert_eq!(out.dictionary.len(), 1);
        assert_eq!(out.dictionary.get("Alpha").unwrap().as_str(), CITY);
        assert_eq!(out.dictionary.provenance(), Provenance::KgFiltered);
        assert_eq!((out.not_in_kg, out.null_class, out.unknown_class), (1, 1, 1));

        let empty = filter_by_kg(&d, &KgClassMap::default(), &eq, None);
        assert!(empty.dictionary.is_empty());

        // the link target takes precedence when the graph knows it
        let (kg, _) = KgClassMap::from_entries(vec![("Beta (city)".into(), "dbo:City".into())]);
        let targets: BTreeMap<String, String> =
            [("Beta".to_string(), "Beta (city)".to_string())].into_iter().collect();
        let out = filter_by_kg(&d, &kg, &eq, Some(&targets));
        assert_eq!(out.dictionary.get("Beta").unwrap().as_str(), CITY);
    }

    #[test]
    fn experiment_ids() {
        let c = corpus(vec![vec![sentence(&[("Rome", "B-Name-Location-GPE-City")])]]);
        let res = ExperimentResources::prepare(build_global_dictionary(&c, false), None);
        assert_eq!(run_experiment(1, &c, &res).unwrap(), c);
        assert_eq!(run_experiment(8, &c, &res), Err(ExperimentError::Unknown(8)));
        assert_eq!(run_experiment(0, &c, &res), Err(ExperimentError::Unknown(0)));
        assert_eq!(
            run_experiment(4, &c, &res),
            Err(ExperimentError::MissingResource {
                experiment: 4,
                resource: Provenance::KgFiltered
            })
        );
        assert!(run_experiment(3, &c, &ExperimentResources::default()).is_ok());
    }
}
