//! Corpus statistics and the entity inventory.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::annotate::{AnnotatedCorpus, AnnotatedSentence};
use crate::iob::IobTag;
use crate::label::UnerLabel;

/// The three classic NERC buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Coarse {
    Person,
    Location,
    Organization,
}

impl Coarse {
    pub const ALL: [Coarse; 3] = [Coarse::Person, Coarse::Location, Coarse::Organization];

    /// Person is exactly `Name-Person-Name`; Location and Organization
    /// take every label under `Name-Location` / `Name-Organization`.
    pub fn of(label: &UnerLabel) -> Option<Coarse> {
        if label.as_str() == "Name-Person-Name" {
            Some(Coarse::Person)
        } else if label.has_prefix("Name-Location") {
            Some(Coarse::Location)
        } else if label.has_prefix("Name-Organization") {
            Some(Coarse::Organization)
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coarse::Person => "Person",
            Coarse::Location => "Location",
            Coarse::Organization => "Organization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoarseBucket {
    pub count: usize,
    /// Fraction of all entities, in [0, 1].
    pub share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoarseCounts {
    pub person: CoarseBucket,
    pub location: CoarseBucket,
    pub organization: CoarseBucket,
}

impl CoarseCounts {
    pub fn get(&self, coarse: Coarse) -> CoarseBucket {
        match coarse {
            Coarse::Person => self.person,
            Coarse::Location => self.location,
            Coarse::Organization => self.organization,
        }
    }

    fn from_counts(counts: [usize; 3], entity_count: usize) -> Self {
        let bucket = |count: usize| CoarseBucket {
            count,
            share: if entity_count == 0 {
                0.0
            } else {
                count as f64 / entity_count as f64
            },
        };
        CoarseCounts {
            person: bucket(counts[0]),
            location: bucket(counts[1]),
            organization: bucket(counts[2]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusStats {
    pub total_tokens: usize,
    pub non_entity_tokens: usize,
    pub entity_tokens: usize,
    /// Number of `B` tags.
    pub entity_count: usize,
    /// Distinct (surface, label) pairs.
    pub distinct_entity_count: usize,
    /// Full tag (`B-…`/`I-…`) → occurrences.
    pub per_tag_counts: BTreeMap<String, usize>,
    pub coarse_counts: CoarseCounts,
}

impl CorpusStats {
    /// Tag counts by descending count, then tag.
    pub fn per_tag_sorted(&self) -> Vec<(&str, usize)> {
        let mut v: Vec<(&str, usize)> =
            self.per_tag_counts.iter().map(|(t, c)| (t.as_str(), *c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

/// Mergeable partial statistics, one per worker.
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    non_entity_tokens: usize,
    entity_tokens: usize,
    entity_count: usize,
    per_tag: BTreeMap<String, usize>,
    coarse: [usize; 3],
    entities: BTreeSet<(String, UnerLabel)>,
}

impl StatsAccumulator {
    pub fn add_sentence(&mut self, sentence: &AnnotatedSentence) {
        for tag in sentence.tags() {
            match tag {
                IobTag::Outside => self.non_entity_tokens += 1,
                IobTag::Begin(label) => {
                    self.entity_tokens += 1;
                    self.entity_count += 1;
                    if let Some(c) = Coarse::of(label) {
                        self.coarse[c as usize] += 1;
                    }
                }
                IobTag::Inside(_) => self.entity_tokens += 1,
            }
            if !tag.is_outside() {
                *self.per_tag.entry(tag.to_string()).or_default() += 1;
            }
        }
        for run in sentence.entities() {
            self.entities
                .insert((sentence.surface(run.start..run.end), run.label.clone()));
        }
    }

    pub fn add_corpus(&mut self, corpus: &AnnotatedCorpus) {
        for sentence in corpus.sentences() {
            self.add_sentence(sentence);
        }
    }

    pub fn merge(&mut self, other: StatsAccumulator) {
        self.non_entity_tokens += other.non_entity_tokens;
        self.entity_tokens += other.entity_tokens;
        self.entity_count += other.entity_count;
        for (tag, n) in other.per_tag {
            *self.per_tag.entry(tag).or_default() += n;
        }
        for (a, b) in self.coarse.iter_mut().zip(other.coarse) {
            *a += b;
        }
        self.entities.extend(other.entities);
    }

    pub fn finish(self) -> (CorpusStats, Vec<(String, UnerLabel)>) {
        let total_tokens = self.non_entity_tokens + self.entity_tokens;
        let stats = CorpusStats {
            total_tokens,
            non_entity_tokens: self.non_entity_tokens,
            entity_tokens: self.entity_tokens,
            entity_count: self.entity_count,
            distinct_entity_count: self.entities.len(),
            per_tag_counts: self.per_tag,
            coarse_counts: CoarseCounts::from_counts(self.coarse, self.entity_count),
        };
        debug_assert_eq!(stats.total_tokens, stats.entity_tokens + stats.non_entity_tokens);
        debug_assert!(stats.entity_count <= stats.entity_tokens);
        (stats, self.entities.into_iter().collect())
    }
}

pub fn compute_stats(corpus: &AnnotatedCorpus) -> CorpusStats {
    let mut acc = StatsAccumulator::default();
    acc.add_corpus(corpus);
    acc.finish().0
}

/// Each (surface, label) pair once, sorted by surface then label.
pub fn list_entities(corpus: &AnnotatedCorpus) -> Vec<(String, UnerLabel)> {
    let mut set = BTreeSet::new();
    for sentence in corpus.sentences() {
        for run in sentence.entities() {
            set.insert((sentence.surface(run.start..run.end), run.label.clone()));
        }
    }
    set.into_iter().collect()
}

/// Person / Location / Organization entity counts.
pub fn coarse_report(corpus: &AnnotatedCorpus) -> CoarseCounts {
    compute_stats(corpus).coarse_counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{AnnotatedDocument, AnnotatedToken};
    use alloc::vec;

    fn sentence(tags: &[(&str, &str)]) -> AnnotatedSentence {
        AnnotatedSentence {
            tokens: tags
                .iter()
                .map(|(t, g)| AnnotatedToken::new(*t, IobTag::parse(g).unwrap()))
                .collect(),
        }
    }

    fn corpus(sentences: Vec<AnnotatedSentence>) -> AnnotatedCorpus {
        AnnotatedCorpus {
            documents: vec![AnnotatedDocument {
                doc_id: "1".into(),
                sentences,
            }],
        }
    }

    #[test]
    fn counting_definition() {
        let c = corpus(vec![sentence(&[
            ("in", "O"),
            ("New", "B-Name-Location-GPE-City"),
            ("York", "I-Name-Location-GPE-City"),
        ])]);
        let s = compute_stats(&c);
        assert_eq!(s.total_tokens, 3);
        assert_eq!(s.entity_tokens, 2);
        assert_eq!(s.non_entity_tokens, 1);
        assert_eq!(s.entity_count, 1);
        assert_eq!(s.distinct_entity_count, 1);
        assert_eq!(s.per_tag_counts["B-Name-Location-GPE-City"], 1);
        assert_eq!(s.coarse_counts.location.count, 1);
        assert_eq!(s.coarse_counts.location.share, 1.0);
    }

    #[test]
    fn empty_corpus_is_all_zero() {
        let s = compute_stats(&AnnotatedCorpus::default());
        assert_eq!(s, CorpusStats::default());
        assert!(list_entities(&AnnotatedCorpus::default()).is_empty());
    }

    #[test]
    fn entity_list_dedups_pairs() {
        let c = corpus(vec![
            sentence(&[("Paris", "B-Name-Location-GPE-City")]),
            sentence(&[("Paris", "B-Name-Location-GPE-City"), ("x", "O")]),
            sentence(&[("Paris", "B-Name-Person-Name")]),
        ]);
        let list = list_entities(&c);
        assert_eq!(list.len(), 2);
        assert_eq!(list[0].1.as_str(), "Name-Location-GPE-City");
        assert_eq!(list[1].1.as_str(), "Name-Person-Name");
        assert_eq!(compute_stats(&c).distinct_entity_count, 2);
    }

    #[test]
    fn coarse_buckets() {
        let c = corpus(vec![sentence(&[
            ("A", "B-Name-Person-Name"),
            ("B", "B-Name-Location-GPE-City"),
            ("C", "B-Name-Product-Award"),
            ("D", "B-Name-Organization-Corporation-Company"),
        ])]);
        let r = coarse_report(&c);
        assert_eq!(r.person.count, 1);
        assert_eq!(r.location.count, 1);
        assert_eq!(r.organization.count, 1);
        assert_eq!(r.person.share, 0.25);
        assert_eq!(Coarse::of(&UnerLabel::parse("Name-Person-Character").unwrap()), None);
    }

    #[test]
    fn sorted_tag_counts() {
        let c = corpus(vec![sentence(&[
            ("a", "B-Name-God"),
            ("b", "B-Name-Person-Name"),
            ("c", "I-Name-Person-Name"),
            ("d", "B-Name-Person-Name"),
        ])]);
        let s = compute_stats(&c);
        let sorted = s.per_tag_sorted();
        assert_eq!(
            sorted,
            vec![("B-Name-Person-Name", 2), ("B-Name-God", 1), ("I-Name-Person-Name", 1)]
        );
    }
}
