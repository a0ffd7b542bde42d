use std::path::Path;

use proptest::prelude::*;
use uner::conll;
use uner::dump::{parse_dump_stream, DumpFormat};
use uner::tables;
use uner_core::annotate::{AnnotatedCorpus, AnnotatedDocument, AnnotatedSentence, AnnotatedToken};
use uner_core::catalog::ClassCatalog;
use uner_core::iob::IobTag;
use uner_core::label::UnerLabel;

fn token() -> impl Strategy<Value = String> {
    prop_oneof!["[A-Za-zéü0-9]{1,6}", Just("#".to_string()), Just(",".to_string()), Just("B-x".to_string())]
}

fn sentence() -> impl Strategy<Value = AnnotatedSentence> {
    prop::collection::vec((token(), 0usize..3, 0usize..3), 1..12).prop_map(|raw| {
        let labels = ["Name-Person-Name", "Name-Location-GPE-City", "Name-God"];
        let mut tokens = Vec::new();
        let mut open: Option<usize> = None;
        for (text, kind, l) in raw {
            let tag = match (kind, open) {
                (1, _) => {
                    open = Some(l);
                    IobTag::Begin(UnerLabel::parse(labels[l]).unwrap())
                }
                (2, Some(o)) => IobTag::Inside(UnerLabel::parse(labels[o]).unwrap()),
                _ => {
                    open = None;
                    IobTag::Outside
                }
            };
            tokens.push(AnnotatedToken::new(text, tag));
        }
        AnnotatedSentence { tokens }
    })
}

fn corpus() -> impl Strategy<Value = AnnotatedCorpus> {
    prop::collection::vec(prop::collection::vec(sentence(), 1..4), 0..4).prop_map(|docs| AnnotatedCorpus {
        documents: docs
            .into_iter()
            .enumerate()
            .map(|(i, sentences)| AnnotatedDocument { doc_id: format!("doc {i}"), sentences })
            .collect(),
    })
}

proptest! {
    #[test]
    fn conll_round_trip(c in corpus()) {
        let text = conll::to_string(&c);
        prop_assert_eq!(conll::parse_str(&text).unwrap(), c.clone());
        let mut buf = Vec::new();
        let n = conll::emit_conll(&c, &mut buf).unwrap();
        prop_assert_eq!(n as usize, text.len());
        prop_assert!(text.is_empty() || text.ends_with("\n\n"));
    }

    #[test]
    fn cache_round_trip_keeps_class_order(
        entries in prop::collection::btree_map("[A-Za-z ()é]{1,10}", prop::collection::vec("dbo:[A-Z][a-z]{1,6}", 0..5), 0..10)
    ) {
        let mut catalog = ClassCatalog::new();
        for (t, c) in &entries {
            prop_assume!(t.trim() == t);
            catalog.insert(t.clone(), c.iter().cloned());
        }
        let text = tables::format_cache(&catalog);
        let back = tables::parse_cache(Path::new("cache.tsv"), &text).unwrap();
        prop_assert_eq!(back, catalog);
    }
}

#[test]
fn one_document_two_tokens() {
    let c = AnnotatedCorpus {
        documents: vec![AnnotatedDocument {
            doc_id: "7".into(),
            sentences: vec![AnnotatedSentence {
                tokens: vec![
                    AnnotatedToken::new("Bengkulu", IobTag::parse("B-Name-Location-GPE-Province_State").unwrap()),
                    AnnotatedToken::new(".", IobTag::Outside),
                ],
            }],
        }],
    };
    assert_eq!(conll::to_string(&c), "# doc_id = 7\nBengkulu\tB-Name-Location-GPE-Province_State\n.\tO\n\n");
    assert_eq!(conll::to_string(&AnnotatedCorpus::default()), "");
}

#[test]
fn json_lines_examples() {
    let input = r#"{"id":"12","url":"u","title":"T","text":"body"}"#;
    let mut r = parse_dump_stream(input.as_bytes(), DumpFormat::JsonLines);
    let d = r.next().unwrap().unwrap();
    assert_eq!((d.doc_id.as_str(), d.title.as_str(), d.markup_text.as_str()), ("12", "T", "body"));
    assert!(r.next().is_none());
    assert_eq!((r.documents(), r.malformed().len()), (1, 0));

    let mut empty = parse_dump_stream(&b""[..], DumpFormat::JsonLines);
    assert!(empty.next().is_none());
    assert_eq!(empty.documents(), 0);

    let mut missing = parse_dump_stream(r#"{"id":"1","url":"","title":"T"}"#.as_bytes(), DumpFormat::JsonLines);
    assert!(missing.next().is_none());
    assert_eq!(missing.malformed().len(), 1);
}

#[test]
fn anchored_format() {
    let input = "<doc id=\"3\" url=\"u\" title=\"Bengkulu\">\nBengkulu\n\n<a href=\"Bengkulu\">Bengkulu</a> is a province.\n</doc>\n";
    let docs: Vec<_> = parse_dump_stream(input.as_bytes(), DumpFormat::PlainAnchored).map(Result::unwrap).collect();
    assert_eq!(docs.len(), 1);
    assert_eq!(docs[0].doc_id, "3");
    assert_eq!(docs[0].markup_text, "<a href=\"Bengkulu\">Bengkulu</a> is a province.");
}
