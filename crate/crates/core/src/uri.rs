//! Knowledge-base resource URIs for link targets.
//!
//! Spaces become underscores; ASCII characters outside the kept set are
//! percent-encoded; non-ASCII characters are written as-is, which is how
//! IRI-based knowledge bases name their resources.

use alloc::string::String;
use core::fmt::{self, Write};

use percent_encoding::percent_decode_str;

/// Resource base of the English DBpedia.
pub const DEFAULT_RESOURCE_BASE: &str = "http://dbpedia.org/resource";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityUri(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UriError {
    #[error("link target is empty")]
    EmptyTarget,
    #[error("uri {0:?} does not start with the resource base")]
    ForeignBase(String),
}

impl EntityUri {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn kept(c: char) -> bool {
    c.is_ascii_alphanumeric()
        || matches!(
            c,
            '-' | '.' | '_' | '~' | '(' | ')' | '!' | '*' | '\'' | ',' | ':' | ';' | '@' | '$'
        )
}

pub fn build_entity_uri(target: &str, resource_base: &str) -> Result<EntityUri, UriError> {
    if target.is_empty() {
        return Err(UriError::EmptyTarget);
    }
    let base = resource_base.trim_end_matches('/');
    let mut uri = String::with_capacity(base.len() + 1 + target.len());
    uri.push_str(base);
    uri.push('/');
    for c in target.chars() {
        if c == ' ' {
            uri.push('_');
        } else if !c.is_ascii() || kept(c) {
            uri.push(c);
        } else {
            let _ = write!(uri, "%{:02X}", c as u32);
        }
    }
    Ok(EntityUri(uri))
}

/// Inverse of [`build_entity_uri`] for targets without literal underscores
/// (underscores and spaces name the same page).
pub fn target_from_uri(uri: &str, resource_base: &str) -> Result<String, UriError> {
    let base = resource_base.trim_end_matches('/');
    let local = uri
        .strip_prefix(base)
        .and_then(|rest| rest.strip_prefix('/'))
        .ok_or_else(|| UriError::ForeignBase(uri.into()))?;
    let decoded = percent_decode_str(local).decode_utf8_lossy();
    let target: String = decoded.chars().map(|c| if c == '_' { ' ' } else { c }).collect();
    if target.is_empty() {
        return Err(UriError::EmptyTarget);
    }
    Ok(target)
}
