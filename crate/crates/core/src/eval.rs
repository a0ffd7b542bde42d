//! Token-level per-tag precision, recall and F1.
//!
//! `B-X` and `I-X` are scored as distinct classes. Every mismatch counts as a
//! false positive for the system tag and a false negative for the gold tag.
//! Values are percentages in full precision; rounding is left to whoever
//! prints them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::annotate::AnnotatedCorpus;
use crate::iob::IobTag;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagPair {
    pub token_text: String,
    pub gold: IobTag,
    pub system: IobTag,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("nothing to score: no aligned tokens")]
    Empty,
    #[error("document count differs: gold has {gold}, system has {system}")]
    DocumentCount { gold: usize, system: usize },
    #[error("document {index}: gold id {gold:?} but system id {system:?}")]
    DocumentId {
        index: usize,
        gold: String,
        system: String,
    },
    #[error("document {document}: sentence count differs (gold {gold}, system {system})")]
    SentenceCount {
        document: usize,
        gold: usize,
        system: usize,
    },
    #[error("document {document}, sentence {sentence}: length differs (gold {gold}, system {system})")]
    SentenceLength {
        document: usize,
        sentence: usize,
        gold: usize,
        system: usize,
    },
    #[error("document {document}, sentence {sentence}, token {token}: gold {gold:?} vs system {system:?}")]
    TokenText {
        document: usize,
        sentence: usize,
        token: usize,
        gold: String,
        system: String,
    },
}

/// Pairs tokens position by position. Documents, sentence boundaries and
/// token texts must all coincide.
pub fn align(gold: &AnnotatedCorpus, system: &AnnotatedCorpus) -> Result<Vec<TagPair>, EvalError> {
    if gold.documents.len() != system.documents.len() {
        return Err(EvalError::DocumentCount {
            gold: gold.documents.len(),
            system: system.documents.len(),
        });
    }
    let mut pairs = Vec::with_capacity(gold.token_count());
    for (d, (gd, sd)) in gold.documents.iter().zip(&system.documents).enumerate() {
        if gd.doc_id != sd.doc_id {
            return Err(EvalError::DocumentId {
                index: d,
                gold: gd.doc_id.clone(),
                system: sd.doc_id.clone(),
            });
        }
        if gd.sentences.len() != sd.sentences.len() {
            return Err(EvalError::SentenceCount {
                document: d,
                gold: gd.sentences.len(),
                system: sd.sentences.len(),
            });
        }
        for (s, (gs, ss)) in gd.sentences.iter().zip(&sd.sentences).enumerate() {
            if gs.tokens.len() != ss.tokens.len() {
                return Err(EvalError::SentenceLength {
                    document: d,
                    sentence: s,
                    gold: gs.tokens.len(),
                    system: ss.tokens.len(),
                });
            }
            for (t, (gt, st)) in gs.tokens.iter().zip(&ss.tokens).enumerate() {
                if gt.text != st.text {
                    return Err(EvalError::TokenText {
                        document: d,
                        sentence: s,
                        token: t,
                        gold: gt.text.clone(),
                        system: st.text.clone(),
                    });
                }
                pairs.push(TagPair {
                    token_text: gt.text.clone(),
                    gold: gt.tag.clone(),
                    system: st.tag.clone(),
                });
            }
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn metrics(&self) -> TagMetrics {
        let precision = percent(self.tp, self.tp + self.fp);
        let recall = percent(self.tp, self.tp + self.fn_);
        TagMetrics {
            precision,
            recall,
            f1: f1(precision, recall),
            support: self.tp + self.fn_,
        }
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TagMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences of the tag.
    pub support: usize,
}

impl TagMetrics {
    pub fn is_all_zero(&self) -> bool {
        self.precision == 0.0 && self.recall == 0.0 && self.f1 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Macro {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    /// Every entity tag seen in gold or system output.
    pub per_tag: BTreeMap<String, TagMetrics>,
    /// Mean over `counted_tags`; all zero when no tag qualifies.
    pub macro_avg: Macro,
    /// Tags whose precision, recall and F1 are not all zero, sorted.
    pub counted_tags: Vec<String>,
    /// Scores for `O`, never part of the macro.
    pub outside: TagMetrics,
    pub collapse_depth: Option<usize>,
    pub token_count: usize,
}

/// Per-tag confusion counts; mergeable across workers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub per_tag: BTreeMap<String, Confusion>,
    pub tokens: usize,
}

impl ConfusionCounts {
    pub fn add(&mut self, gold: &IobTag, system: &IobTag, collapse_depth: Option<usize>) {
        let (gold, system) = match collapse_depth {
            Some(d) => (gold.collapse(d), system.collapse(d)),
            None => (gold.clone(), system.clone()),
        };
        self.tokens += 1;
        if gold == system {
            self.per_tag.entry(gold.to_string()).or_default().tp += 1;
        } else {
            self.per_tag.entry(system.to_string()).or_default().fp += 1;
            self.per_tag.entry(gold.to_string()).or_default().fn_ += 1;
        }
    }

    pub fn merge(&mut self, other: ConfusionCounts) {
        self.tokens += other.tokens;
        for (tag, c) in other.per_tag {
            let mine = self.per_tag.entry(tag).or_default();
            mine.tp += c.tp;
            mine.fp += c.fp;
            mine.fn_ += c.fn_;
        }
    }

    pub fn report(&self, collapse_depth: Option<usize>) -> Result<EvalReport, EvalError> {
        if self.tokens == 0 {
            return Err(EvalError::Empty);
        }
        let mut report = EvalReport {
            collapse_depth,
            token_count: self.tokens,
            ..EvalReport::default()
        };
        let mut sums = (0.0, 0.0, 0.0);
        for (tag, c) in &self.per_tag {
            let m = c.metrics();
            if tag == "O" {
                report.outside = m;
                continue;
            }
            if !m.is_all_zero() {
                report.counted_tags.push(tag.clone());
                sums.0 += m.precision;
                sums.1 += m.recall;
                sums.2 += m.f1;
            }
            report.per_tag.insert(tag.clone(), m);
        }
        let n = report.counted_tags.len();
        if n > 0 {
            let n = n as f64;
            report.macro_avg = Macro {
                precision: sums.0 / n,
                recall: sums.1 / n,
                f1: sums.2 / n,
            };
        }
        Ok(report)
    }
}

/// Scores `pairs`, first collapsing every label to `collapse_depth`
/// segments when given.
pub fn per_tag_metrics(pairs: &[TagPair], collapse_depth: Option<usize>) -> Result<EvalReport, EvalError> {
    let mut counts = ConfusionCounts::default();
    for p in pairs {
        counts.add(&p.gold, &p.system, collapse_depth);
    }
    counts.report(collapse_depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{AnnotatedDocument, AnnotatedSentence, AnnotatedToken};
    use alloc::vec;

    fn pairs(gold: &[&str], system: &[&str]) -> Vec<TagPair> {
        gold.iter()
            .zip(system)
            .map(|(g, s)| TagPair {
                token_text: "t".into(),
                gold: IobTag::parse(g).unwrap(),
                system: IobTag::parse(s).unwrap(),
            })
            .collect()
    }

    #[test]
    fn hand_computed_example() {
        let r = per_tag_metrics(&pairs(&["B-Name-God", "O", "B-Name-Person-Name"], &["B-Name-God", "O", "O"]), None)
            .unwrap();
        let x = r.per_tag["B-Name-God"];
        assert_eq!((x.precision, x.recall), (100.0, 100.0));
        assert!(r.per_tag["B-Name-Person-Name"].is_all_zero());
        assert_eq!(r.counted_tags, ["B-Name-God"]);
        assert_eq!(r.macro_avg, Macro { precision: 100.0, recall: 100.0, f1: 100.0 });
        // O: tp 1, fn 0, fp 1
        assert_eq!(r.outside.precision, 50.0);
        assert_eq!(r.outside.recall, 100.0);
    }

    #[test]
    fn collapse_merges_siblings() {
        let p = pairs(&["B-Name-Location-GPE-City"], &["B-Name-Location-Region"]);
        let full = per_tag_metrics(&p, None).unwrap();
        assert!(full.counted_tags.is_empty());
        assert_eq!(full.macro_avg, Macro::default());
        let r = per_tag_metrics(&p, Some(2)).unwrap();
        let m = r.per_tag["B-Name-Location"];
        assert_eq!((m.precision, m.recall, m.f1), (100.0, 100.0, 100.0));
        assert_eq!(r.collapse_depth, Some(2));
    }

    #[test]
    fn harmonic_mean() {
        // B-Name-God: tp 1, fp 1, fn 2
        let r = per_tag_metrics(
            &pairs(
                &["B-Name-God", "B-Name-God", "B-Name-God", "O"],
                &["B-Name-God", "O", "O", "B-Name-God"],
            ),
            None,
        )
        .unwrap();
        let m = r.per_tag["B-Name-God"];
        assert_eq!(m.precision, 50.0);
        assert!((m.recall - 100.0 / 3.0).abs() < 1e-12);
        assert!((m.f1 - 40.0).abs() < 1e-12);
        assert_eq!(m.support, 3);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(per_tag_metrics(&[], None), Err(EvalError::Empty));
    }

    #[test]
    fn all_outside_has_zero_macro() {
        let r = per_tag_metrics(&pairs(&["O"], &["O"]), None).unwrap();
        assert!(r.per_tag.is_empty());
        assert_eq!(r.macro_avg, Macro::default());
        assert_eq!(r.outside.f1, 100.0);
    }

    fn doc(id: &str, words: &[&str]) -> AnnotatedDocument {
        AnnotatedDocument {
            doc_id: id.into(),
            sentences: vec![AnnotatedSentence {
                tokens: words.iter().map(|w| AnnotatedToken::new(*w, IobTag::Outside)).collect(),
            }],
        }
    }

    #[test]
    fn alignment_errors() {
        let a = AnnotatedCorpus { documents: vec![doc("1", &["a", "b"])] };
        assert_eq!(align(&a, &a).unwrap().len(), 2);
        let b = AnnotatedCorpus { documents: vec![doc("1", &["a", "c"])] };
        assert!(matches!(align(&a, &b), Err(EvalError::TokenText { token: 1, .. })));
        let c = AnnotatedCorpus { documents: vec![doc("2", &["a", "b"])] };
        assert!(matches!(align(&a, &c), Err(EvalError::DocumentId { .. })));
        let d = AnnotatedCorpus { documents: vec![doc("1", &["a"])] };
        assert!(matches!(align(&a, &d), Err(EvalError::SentenceLength { .. })));
    }
}
