//! Plain text and hyperlink spans out of extracted-dump markup.
//!
//! Two link forms are recognised: the anchor form written by dump
//! extractors, `<a href="TARGET">SURFACE</a>` (target percent-decoded), and
//! the wiki form `[[TARGET|SURFACE]]` / `[[TARGET]]`. Offsets are counted in
//! Unicode scalar values.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use percent_encoding::percent_decode_str;

/// One article as read from a dump, markup still inline.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawDocument {
    pub doc_id: String,
    pub title: String,
    pub source_url: String,
    pub markup_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinkSpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub target: String,
}

/// An article's plain text together with its resolved link spans.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub text: String,
    pub links: Vec<LinkSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    #[error("document has an empty id")]
    EmptyId,
    #[error("link {index} has an invalid range {start}..{end}")]
    BadRange { index: usize, start: usize, end: usize },
    #[error("link {index} surface does not match the text at its offsets")]
    SurfaceMismatch { index: usize },
    #[error("link {index} has an empty target")]
    EmptyTarget { index: usize },
    #[error("link {index} overlaps or precedes the previous link")]
    Unordered { index: usize },
}

impl Document {
    pub fn from_raw(raw: &RawDocument) -> (Document, Extraction) {
        let extraction = extract_links(&raw.markup_text);
        let doc = Document {
            doc_id: raw.doc_id.clone(),
            title: raw.title.clone(),
            text: extraction.text.clone(),
            links: extraction.links.clone(),
        };
        (doc, extraction)
    }

    /// Checks the span invariants against the text.
    pub fn validate(&self) -> Result<(), DocumentError> {
        if self.doc_id.is_empty() {
            return Err(DocumentError::EmptyId);
        }
        let chars: Vec<char> = self.text.chars().collect();
        let mut last_end = 0;
        for (index, link) in self.links.iter().enumerate() {
            if link.start >= link.end || link.end > chars.len() {
                return Err(DocumentError::BadRange {
                    index,
                    start: link.start,
                    end: link.end,
                });
            }
            if index > 0 && link.start < last_end {
                return Err(DocumentError::Unordered { index });
            }
            if !chars[link.start..link.end].iter().copied().eq(link.surface.chars()) {
                return Err(DocumentError::SurfaceMismatch { index });
            }
            if link.target.is_empty() {
                return Err(DocumentError::EmptyTarget { index });
            }
            last_end = link.end;
        }
        Ok(())
    }
}

/// Result of [`extract_links`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extraction {
    pub text: String,
    pub links: Vec<LinkSpan>,
    /// Markup occurrences that were emitted as literal text or discarded.
    pub malformed: usize,
    /// Targets whose `#fragment` was removed.
    pub fragments_stripped: usize,
}

const WIKI_OPEN: &str = "[[";
const WIKI_CLOSE: &str = "]]";
const ANCHOR_OPEN: &str = "<a href=\"";
const ANCHOR_CLOSE: &str = "</a>";

/// Strips link markup and returns the plain text plus spans addressing it.
///
/// Unclosed or nested markup stays in the text as literal characters and
/// yields no span. The returned text never contains recognisable markup, so
/// running the function again on it is the identity.
pub fn extract_links(markup: &str) -> Extraction {
    let mut current = single_pass(markup, false);
    loop {
        if !(current.text.contains(WIKI_OPEN) || current.text.contains(ANCHOR_OPEN)) {
            return current.into_extraction();
        }
        // Literal leftovers of one pass can line up into valid markup; run
        // again over the text and carry the earlier spans forward.
        let next = single_pass(&current.text, true);
        if next.text == current.text {
            return current.into_extraction();
        }
        let origins = next.origins.as_deref().unwrap_or_default();
        let mut merged = Vec::with_capacity(current.links.len() + next.links.len());
        let mut malformed = current.malformed + next.malformed;
        for link in &current.links {
            match remap(origins, link.start, link.end) {
                Some((start, end)) => merged.push(LinkSpan {
                    start,
                    end,
                    ..link.clone()
                }),
                None => malformed += 1,
            }
        }
        let carried = merged.len();
        for link in next.links {
            let overlaps = merged[..carried]
                .iter()
                .any(|old| old.start < link.end && link.start < old.end);
            if overlaps {
                malformed += 1;
            } else {
                merged.push(link);
            }
        }
        merged.sort_by_key(|l| l.start);
        current = Pass {
            text: next.text,
            links: merged,
            malformed,
            fragments_stripped: current.fragments_stripped + next.fragments_stripped,
            origins: None,
        };
    }
}

/// Sorted, de-duplicated link targets, compared by code point.
pub fn collect_unique_targets<'a, I>(documents: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut set = BTreeSet::new();
    for doc in documents {
        for link in &doc.links {
            if !set.contains(link.target.as_str()) {
                set.insert(link.target.clone());
            }
        }
    }
    set.into_iter().collect()
}

struct Pass {
    text: String,
    links: Vec<LinkSpan>,
    malformed: usize,
    fragments_stripped: usize,
    origins: Option<Vec<usize>>,
}

impl Pass {
    fn into_extraction(self) -> Extraction {
        Extraction {
            text: self.text,
            links: self.links,
            malformed: self.malformed,
            fragments_stripped: self.fragments_stripped,
        }
    }
}

fn remap(origins: &[usize], start: usize, end: usize) -> Option<(usize, usize)> {
    let first = origins.binary_search(&start).ok()?;
    let last = first + (end - start) - 1;
    (origins.get(last) == Some(&(end - 1))).then_some((first, last + 1))
}

struct Output {
    text: String,
    len: usize,
    origins: Option<Vec<usize>>,
}

impl Output {
    fn push(&mut self, c: char, origin: usize) {
        self.text.push(c);
        self.len += 1;
        if let Some(o) = self.origins.as_mut() {
            o.push(origin);
        }
    }

    fn push_run(&mut self, chars: &[char], first_origin: usize) {
        for (k, &c) in chars.iter().enumerate() {
            self.push(c, first_origin + k);
        }
    }
}

fn single_pass(markup: &str, track_origins: bool) -> Pass {
    let chars: Vec<char> = markup.chars().collect();
    let mut out = Output {
        text: String::with_capacity(markup.len()),
        len: 0,
        origins: track_origins.then(Vec::new),
    };
    let mut links = Vec::new();
    let mut malformed = 0;
    let mut fragments_stripped = 0;
    let mut i = 0;
    while i < chars.len() {
        let parsed = if starts_with(&chars, i, WIKI_OPEN) {
            Some(parse_wiki(&chars, i))
        } else if starts_with(&chars, i, ANCHOR_OPEN) {
            Some(parse_anchor(&chars, i))
        } else {
            None
        };
        match parsed {
            None => {
                out.push(chars[i], i);
                i += 1;
            }
            Some(Err(opener_len)) => {
                malformed += 1;
                out.push_run(&chars[i..i + opener_len], i);
                i += opener_len;
            }
            Some(Ok(link)) => {
                let (lead, trail) = trim_counts(&chars[link.surface.clone()]);
                let start = out.len + lead;
                out.push_run(&chars[link.surface.clone()], link.surface.start);
                let end = out.len - trail;
                let target = normalize_target(&chars[link.target], link.percent_encoded);
                if target.fragment {
                    fragments_stripped += 1;
                }
                match target.value {
                    Some(target) if start < end => links.push(LinkSpan {
                        start,
                        end,
                        surface: chars[link.surface.start + lead..link.surface.end - trail]
                            .iter()
                            .collect(),
                        target,
                    }),
                    _ => malformed += 1,
                }
                i = link.next;
            }
        }
    }
    Pass {
        text: out.text,
        links,
        malformed,
        fragments_stripped,
        origins: out.origins,
    }
}

struct RawLink {
    target: core::ops::Range<usize>,
    surface: core::ops::Range<usize>,
    percent_encoded: bool,
    next: usize,
}

/// `Err` carries the length of the opener to emit literally.
fn parse_wiki(chars: &[char], at: usize) -> Result<RawLink, usize> {
    let opener = WIKI_OPEN.len();
    let body = at + opener;
    let close = find(chars, body, WIKI_CLOSE).ok_or(opener)?;
    let inner = &chars[body..close];
    if inner.is_empty()
        || inner.contains(&'\n')
        || find(inner, 0, WIKI_OPEN).is_some()
        || find(inner, 0, ANCHOR_OPEN).is_some()
    {
        return Err(opener);
    }
    let (target, surface) = match inner.iter().position(|&c| c == '|') {
        Some(p) => (body..body + p, body + p + 1..close),
        None => (body..close, body..close),
    };
    if is_blank(&chars[surface.clone()]) {
        return Err(opener);
    }
    Ok(RawLink {
        target,
        surface,
        percent_encoded: false,
        next: close + WIKI_CLOSE.len(),
    })
}

fn parse_anchor(chars: &[char], at: usize) -> Result<RawLink, usize> {
    let opener = ANCHOR_OPEN.chars().count();
    let target_start = at + opener;
    let quote = find(chars, target_start, "\"").ok_or(opener)?;
    if chars.get(quote + 1) != Some(&'>') {
        return Err(opener);
    }
    let surface_start = quote + 2;
    let close = find(chars, surface_start, ANCHOR_CLOSE).ok_or(opener)?;
    let target = target_start..quote;
    let surface = surface_start..close;
    let target_chars = &chars[target.clone()];
    let surface_chars = &chars[surface.clone()];
    if target_chars.iter().any(|&c| c == '<' || c == '>' || c == '\n')
        || is_blank(surface_chars)
        || find(surface_chars, 0, ANCHOR_OPEN).is_some()
        || find(surface_chars, 0, WIKI_OPEN).is_some()
    {
        return Err(opener);
    }
    Ok(RawLink {
        target,
        surface,
        percent_encoded: true,
        next: close + ANCHOR_CLOSE.chars().count(),
    })
}

struct Target {
    value: Option<String>,
    fragment: bool,
}

fn normalize_target(raw: &[char], percent_encoded: bool) -> Target {
    let raw: String = raw.iter().collect();
    let decoded = if percent_encoded {
        String::from(percent_decode_str(&raw).decode_utf8_lossy())
    } else {
        raw
    };
    let (page, fragment) = match decoded.split_once('#') {
        Some((page, _)) => (page, true),
        None => (decoded.as_str(), false),
    };
    let mut value = String::with_capacity(page.len());
    for word in page.split_whitespace() {
        if !value.is_empty() {
            value.push(' ');
        }
        value.push_str(word);
    }
    Target {
        value: (!value.is_empty()).then_some(value),
        fragment,
    }
}

fn trim_counts(chars: &[char]) -> (usize, usize) {
    let lead = chars.iter().take_while(|c| c.is_whitespace()).count();
    if lead == chars.len() {
        return (lead, 0);
    }
    let trail = chars.iter().rev().take_while(|c| c.is_whitespace()).count();
    (lead, trail)
}

fn is_blank(chars: &[char]) -> bool {
    chars.iter().all(|c| c.is_whitespace())
}

fn starts_with(chars: &[char], at: usize, pat: &str) -> bool {
    pat.chars().enumerate().all(|(i, p)| chars.get(at + i) == Some(&p))
}

fn find(chars: &[char], from: usize, pat: &str) -> Option<usize> {
    (from..chars.len()).find(|&k| starts_with(chars, k, pat))
}
