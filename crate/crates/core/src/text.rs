//! Offset-preserving tokenizer and rule-based sentence splitter.
//!
//! Tokens are whitespace-delimited chunks with every punctuation or symbol
//! character (Unicode general categories P* and S*) split off as a token of
//! its own. Sentences end after `.`, `!` or `?` when whitespace and then an
//! uppercase letter follow, and at blank lines. Abbreviations are not
//! special-cased, so `Mr. X` splits after `Mr.`.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use unicode_general_category::{get_general_category, GeneralCategory as Gc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Character offsets into the source text.
    pub start: usize,
    pub end: usize,
}

pub fn is_punct_or_symbol(c: char) -> bool {
    matches!(
        get_general_category(c),
        Gc::ConnectorPunctuation
            | Gc::DashPunctuation
            | Gc::OpenPunctuation
            | Gc::ClosePunctuation
            | Gc::InitialPunctuation
            | Gc::FinalPunctuation
            | Gc::OtherPunctuation
            | Gc::MathSymbol
            | Gc::CurrencySymbol
            | Gc::ModifierSymbol
            | Gc::OtherSymbol
    )
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut current_start = 0;
    let flush = |tokens: &mut Vec<Token>, current: &mut String, start: usize, end: usize| {
        if !current.is_empty() {
            tokens.push(Token {
                text: core::mem::take(current),
                start,
                end,
            });
        }
    };
    for (i, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            flush(&mut tokens, &mut current, current_start, i);
        } else if is_punct_or_symbol(c) {
            flush(&mut tokens, &mut current, current_start, i);
            tokens.push(Token {
                text: c.into(),
                start: i,
                end: i + 1,
            });
        } else {
            if current.is_empty() {
                current_start = i;
            }
            current.push(c);
        }
    }
    let len = current_start + current.chars().count();
    flush(&mut tokens, &mut current, current_start, len);
    tokens
}

/// Token texts only; how dictionary surfaces are compared against a corpus.
pub fn token_texts(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Character ranges of the sentences in `text`, trimmed of whitespace.
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let chars: Vec<char> = text.chars().collect();
    let mut ranges = Vec::new();
    let mut start: Option<usize> = None;
    let mut last = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            if c == '\n' {
                if let Some(s) = start {
                    let mut k = i + 1;
                    while k < chars.len() && chars[k].is_whitespace() && chars[k] != '\n' {
                        k += 1;
                    }
                    if chars.get(k) == Some(&'\n') {
                        ranges.push(s..last + 1);
                        start = None;
                    }
                }
            }
            i += 1;
            continue;
        }
        start.get_or_insert(i);
        last = i;
        if is_terminal(c) {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if j > i + 1 && chars.get(j).is_some_and(|n| n.is_uppercase()) {
                if let Some(s) = start.take() {
                    ranges.push(s..i + 1);
                }
            }
        }
        i += 1;
    }
    if let Some(s) = start {
        ranges.push(s..last + 1);
    }
    ranges
}
