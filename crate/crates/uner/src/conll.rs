//! The two-column CoNLL layout.
//!
//! ```text
//! # doc_id = 12
//! The	O
//! Games	B-Name-Event-Occasion-Game
//!
//! ```
//!
//! Each document opens with a `# doc_id = ` header, tokens are
//! `token<TAB>tag`, and every sentence is followed by an empty line. Files are
//! UTF-8 with LF line endings.

use std::io::{self, BufRead, Write};
use std::path::Path;

use uner_core::annotate::{AnnotatedCorpus, AnnotatedDocument, AnnotatedSentence, AnnotatedToken};
use uner_core::eval::{self, EvalError, TagPair};
use uner_core::iob::IobTag;

use crate::error::{Error, Result};

pub const DOC_HEADER: &str = "# doc_id = ";

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Writes one document and returns the number of bytes written.
pub fn write_document<W: Write + ?Sized>(w: &mut W, doc: &AnnotatedDocument) -> io::Result<u64> {
    use std::fmt::Write as _;
    if doc.doc_id.is_empty() || doc.doc_id.contains(['\n', '\r']) {
        return Err(invalid(format!("document id {:?} cannot be written", doc.doc_id)));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{DOC_HEADER}{}", doc.doc_id);
    for sentence in &doc.sentences {
        for t in &sentence.tokens {
            if t.text.is_empty() || t.text.contains(char::is_whitespace) {
                return Err(invalid(format!(
                    "token {:?} in document {} cannot be written",
                    t.text, doc.doc_id
                )));
            }
            let _ = writeln!(out, "{}\t{}", t.text, t.tag);
        }
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(out.len() as u64)
}

/// Writes the corpus and returns the number of bytes written.
pub fn emit_conll<W: Write + ?Sized>(corpus: &AnnotatedCorpus, w: &mut W) -> io::Result<u64> {
    let mut n = 0;
    for doc in &corpus.documents {
        n += write_document(w, doc)?;
    }
    Ok(n)
}

pub fn to_string(corpus: &AnnotatedCorpus) -> String {
    let mut buf = Vec::new();
    emit_conll(corpus, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("corpus text is UTF-8")
}

/// Where each document and sentence started in the source (1-based lines).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineIndex {
    pub documents: Vec<usize>,
    pub sentences: Vec<Vec<usize>>,
}

impl LineIndex {
    /// Line of a token, or of the nearest enclosing unit when out of range.
    pub fn locate(&self, document: usize, sentence: Option<usize>, token: Option<usize>) -> usize {
        let Some(&doc_line) = self.documents.get(document) else {
            return self.documents.last().copied().unwrap_or(0);
        };
        match sentence.and_then(|s| self.sentences[document].get(s)) {
            Some(&first) => first + token.unwrap_or(0),
            None => doc_line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllError {
    pub line: usize,
    pub message: String,
}

pub fn parse_conll<R: BufRead>(reader: R) -> std::result::Result<(AnnotatedCorpus, LineIndex), ConllError> {
    let mut corpus = AnnotatedCorpus::default();
    let mut index = LineIndex::default();
    let mut sentence = AnnotatedSentence::default();
    let mut sentence_start = 0;

    fn close(
        corpus: &mut AnnotatedCorpus,
        index: &mut LineIndex,
        sentence: &mut AnnotatedSentence,
        start: usize,
    ) {
        if !sentence.tokens.is_empty() {
            let doc = corpus.documents.last_mut().expect("token lines follow a header");
            doc.sentences.push(std::mem::take(sentence));
            index.sentences.last_mut().expect("indexed with the header").push(start);
        }
    }

    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| ConllError {
            line: n,
            message: e.to_string(),
        })?;
        let err = |message: String| ConllError { line: n, message };
        if let Some(id) = line.strip_prefix(DOC_HEADER) {
            close(&mut corpus, &mut index, &mut sentence, sentence_start);
            if id.is_empty() {
                return Err(err("empty document id".into()));
            }
            corpus.documents.push(AnnotatedDocument {
                doc_id: id.to_owned(),
                sentences: Vec::new(),
            });
            index.documents.push(n);
            index.sentences.push(Vec::new());
            continue;
        }
        if line.is_empty() {
            close(&mut corpus, &mut index, &mut sentence, sentence_start);
            continue;
        }
        if line.starts_with('#') && !line.contains('\t') {
            continue;
        }
        let (token, tag) = line
            .split_once('\t')
            .ok_or_else(|| err(format!("expected token<TAB>tag, found {line:?}")))?;
        if token.is_empty() || token.contains(char::is_whitespace) {
            return Err(err(format!("invalid token {token:?}")));
        }
        let tag = IobTag::parse(tag).map_err(|e| err(format!("bad tag {tag:?}: {e}")))?;
        if corpus.documents.is_empty() {
            return Err(err(format!("token line before any {DOC_HEADER:?} header")));
        }
        if sentence.tokens.is_empty() {
            sentence_start = n;
        }
        sentence.tokens.push(AnnotatedToken::new(token, tag));
    }
    close(&mut corpus, &mut index, &mut sentence, sentence_start);
    Ok((corpus, index))
}

pub fn parse_str(s: &str) -> std::result::Result<AnnotatedCorpus, ConllError> {
    parse_conll(s.as_bytes()).map(|(c, _)| c)
}

pub fn read_conll(path: &Path) -> Result<(AnnotatedCorpus, LineIndex)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conll(io::BufReader::new(file)).map_err(|e| Error::data(path, e.line, e.message))
}

/// Pairs the tokens of two CoNLL files position by position. A divergence
/// is reported with the line numbers of both files.
pub fn align_files(golden: &Path, system: &Path) -> Result<Vec<TagPair>> {
    let (gold, gold_lines) = read_conll(golden)?;
    let (sys, sys_lines) = read_conll(system)?;
    eval::align(&gold, &sys).map_err(|e| {
        let (d, s, t) = match &e {
            EvalError::Empty | EvalError::DocumentCount { .. } => {
                (gold.documents.len().min(sys.documents.len()), None, None)
            }
            EvalError::DocumentId { index, .. } => (*index, None, None),
            EvalError::SentenceCount { document, gold, system } => {
                (*document, Some((*gold).min(*system)), None)
            }
            EvalError::SentenceLength {
                document,
                sentence,
                gold,
                system,
            } => (*document, Some(*sentence), Some((*gold).min(*system))),
            EvalError::TokenText {
                document,
                sentence,
                token,
                ..
            } => (*document, Some(*sentence), Some(*token)),
        };
        let line = gold_lines.locate(d, s, t);
        let other = sys_lines.locate(d, s, t);
        Error::data(
            golden,
            line,
            format!("{e} (system file {}:{other})", system.display()),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# doc_id = 1\nThe\tO\nGames\tB-Name-Event-Occasion-Game\n\n# doc_id = 2\na\tB-Name-God\n\nb\tO\nc\tB-Name-God\n\n";

    #[test]
    fn round_trip() {
        let c = parse_str(SAMPLE).unwrap();
        assert_eq!(c.documents.len(), 2);
        assert_eq!(c.documents[1].sentences.len(), 2);
        assert_eq!(to_string(&c), SAMPLE);
    }

    #[test]
    fn empty() {
        assert_eq!(to_string(&AnnotatedCorpus::default()), "");
        assert_eq!(parse_str("").unwrap(), AnnotatedCorpus::default());
    }

    #[test]
    fn single_sentence_layout() {
        let c = parse_str("# doc_id = d\nx\tO\ny\tB-Name\n").unwrap();
        assert_eq!(to_string(&c), "# doc_id = d\nx\tO\ny\tB-Name\n\n");
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_str("# doc_id = 1\nok\tO\nbad tag\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_str("# doc_id = 1\nx\tB-Nope\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_str("x\tO\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn line_index() {
        let (_, idx) = parse_conll(SAMPLE.as_bytes()).unwrap();
        assert_eq!(idx.documents, [1, 5]);
        assert_eq!(idx.sentences, [vec![2], vec![6, 8]]);
        assert_eq!(idx.locate(1, Some(1), Some(1)), 9);
    }

    #[test]
    fn alignment_reports_lines() {
        let dir = tempfile::tempdir().unwrap();
        let g = dir.path().join("g.conll");
        let s = dir.path().join("s.conll");
        std::fs::write(&g, SAMPLE).unwrap();
        std::fs::write(&s, SAMPLE.replace("c\tB", "d\tB")).unwrap();
        assert_eq!(align_files(&g, &g).unwrap().len(), 5);
        match align_files(&g, &s).unwrap_err() {
            Error::Data { line, message, .. } => {
                assert_eq!(line, 9);
                assert!(message.contains("s.conll:9"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unwritable_token() {
        let c = AnnotatedCorpus {
            documents: vec![AnnotatedDocument {
                doc_id: "1".into(),
                sentences: vec![AnnotatedSentence {
                    tokens: vec![AnnotatedToken::new("a b", IobTag::Outside)],
                }],
            }],
        };
        assert!(emit_conll(&c, &mut Vec::new()).is_err());
    }
}
