//! Streaming readers for extracted encyclopedia dumps.
//!
//! Two layouts are understood. `json_lines` has one object per line with
//! `id`, `url`, `title` and `text`. `plain_anchored` is the `<doc ...>` ...
//! `</doc>` layout written by WikiExtractor when links are preserved.
//! Records that cannot be read are skipped and counted, never fatal; only
//! IO failures stop the stream.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead};
use std::str::FromStr;

use serde_json::Value;
use uner_core::links::RawDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpFormat {
    #[default]
    JsonLines,
    PlainAnchored,
}

impl FromStr for DumpFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json_lines" | "jsonl" => Ok(DumpFormat::JsonLines),
            "plain_anchored" | "doc" => Ok(DumpFormat::PlainAnchored),
            _ => Err(format!("unknown dump format {s:?} (json_lines or plain_anchored)")),
        }
    }
}

impl fmt::Display for DumpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DumpFormat::JsonLines => "json_lines",
            DumpFormat::PlainAnchored => "plain_anchored",
        })
    }
}

/// A skipped record and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Malformed {
    pub line: usize,
    pub reason: String,
}

/// IO failure, with the 1-based line being read.
#[derive(Debug)]
pub struct DumpError {
    pub line: usize,
    pub source: io::Error,
}

impl fmt::Display for DumpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.source)
    }
}

impl std::error::Error for DumpError {}

pub struct DumpReader<R> {
    reader: R,
    format: DumpFormat,
    line: usize,
    buf: String,
    seen: HashSet<String>,
    malformed: Vec<Malformed>,
    documents: usize,
    failed: bool,
    pending: Option<(usize, String)>,
}

/// Streams documents out of `reader` in file order.
pub fn parse_dump_stream<R: BufRead>(reader: R, format: DumpFormat) -> DumpReader<R> {
    DumpReader {
        reader,
        format,
        line: 0,
        buf: String::new(),
        seen: HashSet::new(),
        malformed: Vec::new(),
        documents: 0,
        failed: false,
        pending: None,
    }
}

impl<R: BufRead> DumpReader<R> {
    pub fn malformed(&self) -> &[Malformed] {
        &self.malformed
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    fn next_line(&mut self) -> Result<Option<&str>, DumpError> {
        self.buf.clear();
        let n = self.reader.read_line(&mut self.buf).map_err(|source| DumpError {
            line: self.line + 1,
            source,
        })?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        let trimmed = self.buf.trim_end_matches(['\n', '\r']);
        Ok(Some(trimmed))
    }

    fn skip(&mut self, line: usize, reason: impl Into<String>) {
        self.malformed.push(Malformed {
            line,
            reason: reason.into(),
        });
    }

    fn accept(&mut self, line: usize, doc: RawDocument) -> Option<RawDocument> {
        if doc.doc_id.is_empty() {
            self.skip(line, "empty document id");
            return None;
        }
        if !self.seen.insert(doc.doc_id.clone()) {
            self.skip(line, format!("duplicate document id {:?}", doc.doc_id));
            return None;
        }
        self.documents += 1;
        Some(doc)
    }

    fn next_json(&mut self) -> Result<Option<RawDocument>, DumpError> {
        loop {
            let Some(text) = self.next_line()? else {
                return Ok(None);
            };
            if text.trim().is_empty() {
                continue;
            }
            let parsed = parse_json_record(text);
            let line = self.line;
            match parsed {
                Ok(doc) => {
                    if let Some(doc) = self.accept(line, doc) {
                        return Ok(Some(doc));
                    }
                }
                Err(reason) => self.skip(line, reason),
            }
        }
    }

    fn next_anchored(&mut self) -> Result<Option<RawDocument>, DumpError> {
        loop {
            let (start, header_line) = match self.pending.take() {
                Some(p) => p,
                None => {
                    let Some(text) = self.next_line()? else {
                        return Ok(None);
                    };
                    if text.trim().is_empty() {
                        continue;
                    }
                    let text = text.to_owned();
                    (self.line, text)
                }
            };
            let header = match parse_doc_header(&header_line) {
                Ok(h) => h,
                Err(reason) => {
                    self.skip(start, reason);
                    continue;
                }
            };
            let mut body: Vec<String> = Vec::new();
            let mut closed = false;
            while let Some(text) = self.next_line()? {
                if text.trim_end() == "</doc>" {
                    closed = true;
                    break;
                }
                if text.starts_with("<doc ") {
                    let text = text.to_owned();
                    self.pending = Some((self.line, text));
                    break;
                }
                body.push(text.to_owned());
            }
            if !closed {
                let reason = if self.pending.is_some() {
                    "document not closed before the next <doc>"
                } else {
                    "document not closed before end of input"
                };
                self.skip(start, reason);
                continue;
            }
            if let Some(doc) = self.accept(start, anchored_document(header, body)) {
                return Ok(Some(doc));
            }
        }
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<RawDocument, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let r = match self.format {
            DumpFormat::JsonLines => self.next_json(),
            DumpFormat::PlainAnchored => self.next_anchored(),
        };
        match r {
            Ok(doc) => doc.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

fn parse_json_record(line: &str) -> Result<RawDocument, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("record is not a JSON object")?;
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err("field \"id\" is not a string".into()),
        None => return Err("missing field \"id\"".into()),
    };
    let string = |key: &str, required: bool| -> Result<String, String> {
        match obj.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Null) | None if !required => Ok(String::new()),
            Some(_) => Err(format!("field {key:?} is not a string")),
            None => Err(format!("missing field {key:?}")),
        }
    };
    Ok(RawDocument {
        doc_id: id,
        source_url: string("url", false)?,
        title: string("title", true)?,
        markup_text: string("text", true)?,
    })
}

#[derive(Debug, Default)]
struct DocHeader {
    id: String,
    url: String,
    title: String,
}

fn parse_doc_header(line: &str) -> Result<DocHeader, String> {
    let inner = line
        .trim()
        .strip_prefix("<doc ")
        .and_then(|s| s.strip_suffix('>'))
        .ok_or_else(|| "expected a <doc ...> header".to_owned())?;
    let mut header = DocHeader::default();
    let mut rest = inner.trim_start();
    let mut has_id = false;
    while !rest.is_empty() {
        let eq = rest.find("=\"").ok_or("malformed <doc> attribute")?;
        let name = rest[..eq].trim();
        let after = &rest[eq + 2..];
        let close = after.find('"').ok_or("unterminated <doc> attribute")?;
        let value = unescape_html(&after[..close]);
        match name {
            "id" => {
                header.id = value;
                has_id = true;
            }
            "url" => header.url = value,
            "title" => header.title = value,
            _ => {}
        }
        rest = after[close + 1..].trim_start();
    }
    if !has_id {
        return Err("<doc> header without id".into());
    }
    Ok(header)
}

fn anchored_document(header: DocHeader, mut body: Vec<String>) -> RawDocument {
    // WikiExtractor repeats the title as the first body line
    if body.first().is_some_and(|l| l.trim() == header.title) {
        body.remove(0);
    }
    while body.first().is_some_and(|l| l.trim().is_empty()) {
        body.remove(0);
    }
    while body.last().is_some_and(|l| l.trim().is_empty()) {
        body.pop();
    }
    RawDocument {
        doc_id: header.id,
        title: header.title,
        source_url: header.url,
        markup_text: body.join("\n"),
    }
}

fn unescape_html(s: &str) -> String {
    if !s.contains('&') {
        return s.to_owned();
    }
    s.replace("&quot;", "\"")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&#39;", "'")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(input: &str, format: DumpFormat) -> (Vec<RawDocument>, Vec<Malformed>) {
        let mut r = parse_dump_stream(input.as_bytes(), format);
        let docs = r.by_ref().collect::<Result<Vec<_>, _>>().unwrap();
        (docs, r.malformed().to_vec())
    }

    #[test]
    fn json_record() {
        let (docs, bad) = read(
            r#"{"id":"12","url":"u","title":"T","text":"body"}"#,
            DumpFormat::JsonLines,
        );
        assert!(bad.is_empty());
        assert_eq!(
            docs,
            [RawDocument {
                doc_id: "12".into(),
                title: "T".into(),
                source_url: "u".into(),
                markup_text: "body".into()
            }]
        );
    }

    #[test]
    fn empty_input() {
        let (docs, bad) = read("", DumpFormat::JsonLines);
        assert!(docs.is_empty() && bad.is_empty());
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let input = concat!(
            "{\"id\":\"1\",\"url\":\"u\",\"title\":\"T\"}\n",
            "not json\n",
            "\n",
            "{\"id\":2,\"title\":\"B\",\"text\":\"ok\"}\n",
            "{\"id\":\"2\",\"title\":\"B\",\"text\":\"dup\"}\n",
        );
        let (docs, bad) = read(input, DumpFormat::JsonLines);
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].doc_id, "2");
        assert_eq!(bad.iter().map(|m| m.line).collect::<Vec<_>>(), [1, 2, 5]);
        assert!(bad[0].reason.contains("text"));
    }

    #[test]
    fn anchored_layout() {
        let input = concat!(
            "<doc id=\"7\" url=\"https://x/?curid=7\" title=\"A &amp; B\">\n",
            "A & B\n",
            "\n",
            "First <a href=\"C%20D\">line</a>.\n",
            "Second.\n",
            "</doc>\n",
            "stray\n",
            "<doc id=\"8\" title=\"Open\">\n",
            "never closed\n",
            "<doc id=\"9\" title=\"N\">\n",
            "x\n",
            "</doc>\n",
        );
        let (docs, bad) = read(input, DumpFormat::PlainAnchored);
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].title, "A & B");
        assert_eq!(docs[0].markup_text, "First <a href=\"C%20D\">line</a>.\nSecond.");
        assert_eq!(docs[1].doc_id, "9");
        assert_eq!(bad.iter().map(|m| m.line).collect::<Vec<_>>(), [7, 8]);
    }

    #[test]
    fn unterminated_final_document() {
        let (docs, bad) = read("<doc id=\"1\" title=\"T\">\nbody\n", DumpFormat::PlainAnchored);
        assert!(docs.is_empty());
        assert_eq!(bad.len(), 1);
    }
}
