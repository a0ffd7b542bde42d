//! Projection of labelled link spans onto tokens as IOB tags.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::iob::{self, IobTag, IobViolation};
use crate::label::UnerLabel;
use crate::links::Document;
use crate::text::{split_sentences, tokenize, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnotatedToken {
    pub text: String,
    pub tag: IobTag,
}

impl AnnotatedToken {
    pub fn new(text: impl Into<String>, tag: IobTag) -> Self {
        AnnotatedToken {
            text: text.into(),
            tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnotatedSentence {
    pub tokens: Vec<AnnotatedToken>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub sentences: Vec<AnnotatedSentence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnotatedCorpus {
    pub documents: Vec<AnnotatedDocument>,
}

/// A contiguous `B I*` run inside a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRun<'a> {
    pub start: usize,
    pub end: usize,
    pub label: &'a UnerLabel,
}

impl AnnotatedSentence {
    pub fn tags(&self) -> impl Iterator<Item = &IobTag> {
        self.tokens.iter().map(|t| &t.tag)
    }

    pub fn has_entity(&self) -> bool {
        self.tags().any(IobTag::is_begin)
    }

    pub fn validate(&self, require_entity: bool) -> Result<(), IobViolation> {
        iob::validate(self.tags(), require_entity)
    }

    /// Entity runs in token order. A stray `I` (never produced by this crate)
    /// starts a run of its own.
    pub fn entities(&self) -> Vec<EntityRun<'_>> {
        let mut runs: Vec<EntityRun<'_>> = Vec::new();
        for (i, token) in self.tokens.iter().enumerate() {
            match &token.tag {
                IobTag::Begin(label) => runs.push(EntityRun {
                    start: i,
                    end: i + 1,
                    label,
                }),
                IobTag::Inside(label) => match runs.last_mut() {
                    Some(run) if run.end == i && run.label == label => run.end = i + 1,
                    _ => runs.push(EntityRun {
                        start: i,
                        end: i + 1,
                        label,
                    }),
                },
                IobTag::Outside => {}
            }
        }
        runs
    }

    /// Token texts of `range` joined by single spaces.
    pub fn surface(&self, range: Range<usize>) -> String {
        join_tokens(self.tokens[range].iter().map(|t| t.text.as_str()))
    }

    /// Retags `range` as one entity with `label`.
    pub fn tag_run(&mut self, range: Range<usize>, label: &UnerLabel) {
        for (k, i) in range.enumerate() {
            self.tokens[i].tag = if k == 0 {
                IobTag::Begin(label.clone())
            } else {
                IobTag::Inside(label.clone())
            };
        }
    }
}

impl AnnotatedCorpus {
    pub fn sentences(&self) -> impl Iterator<Item = &AnnotatedSentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn token_count(&self) -> usize {
        self.sentences().map(|s| s.tokens.len()).sum()
    }

    pub fn entity_count(&self) -> usize {
        self.sentences().flat_map(|s| s.tags()).filter(|t| t.is_begin()).count()
    }
}

pub fn join_tokens<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> String {
    let mut out = String::new();
    for (k, t) in tokens.into_iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        out.push_str(t);
    }
    out
}

/// Counters from projecting one or more documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProjectionCounts {
    pub sentences_kept: usize,
    pub sentences_dropped: usize,
    pub spans_projected: usize,
    /// Spans whose target has no label.
    pub spans_unlabelled: usize,
    /// Spans cut at a sentence boundary.
    pub spans_truncated: usize,
    /// Spans whose tokens were all claimed by an earlier span.
    pub spans_conflicting: usize,
}

impl ProjectionCounts {
    pub fn merge(&mut self, other: &ProjectionCounts) {
        self.sentences_kept += other.sentences_kept;
        self.sentences_dropped += other.sentences_dropped;
        self.spans_projected += other.spans_projected;
        self.spans_unlabelled += other.spans_unlabelled;
        self.spans_truncated += other.spans_truncated;
        self.spans_conflicting += other.spans_conflicting;
    }
}

/// Tags every token overlapping a labelled span (`B` on the first, `I` on the
/// rest) and keeps only sentences holding at least one entity.
///
/// `tokens` and `sentences` must come from `doc.text`. A span reaching past
/// its sentence is cut at the boundary.
pub fn project_annotations(
    doc: &Document,
    labels: &BTreeMap<String, UnerLabel>,
    tokens: &[Token],
    sentences: &[Range<usize>],
) -> (Vec<AnnotatedSentence>, ProjectionCounts) {
    let mut counts = ProjectionCounts::default();
    let sentence_of: Vec<usize> = {
        let mut s = 0;
        tokens
            .iter()
            .map(|t| {
                while s + 1 < sentences.len() && sentences[s].end <= t.start {
                    s += 1;
                }
                s
            })
            .collect()
    };
    let mut tags: Vec<Option<&UnerLabel>> = vec![None; tokens.len()];
    let mut begins = vec![false; tokens.len()];

    for link in &doc.links {
        let Some(label) = labels.get(&link.target) else {
            counts.spans_unlabelled += 1;
            continue;
        };
        let first = tokens.partition_point(|t| t.end <= link.start);
        let overlapping: Vec<usize> = (first..tokens.len())
            .take_while(|&i| tokens[i].start < link.end)
            .collect();
        let Some(&head) = overlapping.first() else {
            counts.spans_conflicting += 1;
            continue;
        };
        let sentence = sentence_of[head];
        if overlapping.iter().any(|&i| sentence_of[i] != sentence) {
            counts.spans_truncated += 1;
        }
        let free: Vec<usize> = overlapping
            .into_iter()
            .filter(|&i| sentence_of[i] == sentence && tags[i].is_none())
            .collect();
        let Some(&begin) = free.first() else {
            counts.spans_conflicting += 1;
            continue;
        };
        for &i in &free {
            tags[i] = Some(label);
        }
        begins[begin] = true;
        counts.spans_projected += 1;
    }

    let mut out = Vec::new();
    let mut t = 0;
    for s in 0..sentences.len() {
        let mut sentence = AnnotatedSentence::default();
        while t < tokens.len() && sentence_of[t] == s {
            let tag = match tags[t] {
                None => IobTag::Outside,
                Some(l) if begins[t] => IobTag::Begin(l.clone()),
                Some(l) => IobTag::Inside(l.clone()),
            };
            sentence.tokens.push(AnnotatedToken::new(tokens[t].text.clone(), tag));
            t += 1;
        }
        if sentence.has_entity() {
            counts.sentences_kept += 1;
            out.push(sentence);
        } else if !sentence.tokens.is_empty() {
            counts.sentences_dropped += 1;
        }
    }
    (out, counts)
}

/// Tokenizes, splits and projects one document.
pub fn annotate_document(
    doc: &Document,
    labels: &BTreeMap<String, UnerLabel>,
) -> (AnnotatedDocument, ProjectionCounts) {
    let tokens = tokenize(&doc.text);
    let sentences = split_sentences(&doc.text);
    let (sentences, counts) = project_annotations(doc, labels, &tokens, &sentences);
    (
        AnnotatedDocument {
            doc_id: doc.doc_id.clone(),
            sentences,
        },
        counts,
    )
}
