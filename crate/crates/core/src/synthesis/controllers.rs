//! Text form of aspect controllers.
//!
//! ```text
//! [CODE] [ASPECT_2] [ASPECT_3] [KEY] keyword1 keyword2 [SNT] first sentence [SNT] second sentence
//! ```
//!
//! Codes appear in ascending order, elements are separated by exactly one
//! space and there is no trailing whitespace.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

const CODE: &str = "[CODE]";
const KEY: &str = "[KEY]";
const SNT: &str = "[SNT]";
const SNT_SEP: &str = " [SNT] ";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ControllerError {
    #[error("controller set has no aspect codes")]
    EmptyCodes,
    #[error("aspect code {code} out of range for {aspects} aspects")]
    CodeOutOfRange { code: usize, aspects: usize },
    #[error("invalid keyword {0:?}")]
    InvalidKeyword(String),
    #[error("duplicate keyword {0:?}")]
    DuplicateKeyword(String),
    #[error("invalid sentence {0:?}")]
    InvalidSentence(String),
    #[error("byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

fn parse_err(offset: usize, message: impl Into<String>) -> ControllerError {
    ControllerError::Parse { offset, message: message.into() }
}

/// Aspect codes, keywords and aspect-relevant sentences for one summary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerSet {
    pub codes: BTreeSet<usize>,
    pub keywords: Vec<String>,
    pub sentences: Vec<String>,
}

fn valid_keyword(k: &str) -> bool {
    !k.is_empty() && !k.starts_with('[') && !k.contains(char::is_whitespace)
}

pub(crate) fn valid_sentence(s: &str) -> bool {
    !s.is_empty() && s.trim() == s && !s.contains(SNT)
}

impl ControllerSet {
    /// Checks everything serialization relies on.
    pub fn validate(&self, aspect_count: usize) -> Result<(), ControllerError> {
        if self.codes.is_empty() {
            return Err(ControllerError::EmptyCodes);
        }
        if let Some(&code) = self.codes.iter().find(|&&c| c >= aspect_count) {
            return Err(ControllerError::CodeOutOfRange { code, aspects: aspect_count });
        }
        let mut seen = BTreeSet::new();
        for k in &self.keywords {
            if !valid_keyword(k) {
                return Err(ControllerError::InvalidKeyword(k.clone()));
            }
            if !seen.insert(k.as_str()) {
                return Err(ControllerError::DuplicateKeyword(k.clone()));
            }
        }
        if let Some(s) = self.sentences.iter().find(|s| !valid_sentence(s)) {
            return Err(ControllerError::InvalidSentence(s.clone()));
        }
        Ok(())
    }
}

pub fn serialize_controllers(c: &ControllerSet, aspect_count: usize) -> Result<String, ControllerError> {
    c.validate(aspect_count)?;
    let mut out = String::from(CODE);
    for code in &c.codes {
        out.push_str(&format!(" [ASPECT_{code}]"));
    }
    out.push(' ');
    out.push_str(KEY);
    for k in &c.keywords {
        out.push(' ');
        out.push_str(k);
    }
    for s in &c.sentences {
        out.push_str(SNT_SEP);
        out.push_str(s);
    }
    Ok(out)
}

fn aspect_code(token: &str) -> Option<usize> {
    let digits = token.strip_prefix("[ASPECT_")?.strip_suffix(']')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

/// Inverse of [`serialize_controllers`]. Errors carry the byte offset of
/// the offending element.
pub fn parse_controllers(s: &str, aspect_count: usize) -> Result<ControllerSet, ControllerError> {
    if !s.starts_with(CODE) {
        return Err(parse_err(0, "missing [CODE] header"));
    }
    let mut pos = CODE.len();
    let mut codes = BTreeSet::new();

    // Codes, up to and including [KEY].
    loop {
        if pos >= s.len() {
            return Err(parse_err(pos, "missing [KEY] marker"));
        }
        if !s[pos..].starts_with(' ') {
            return Err(parse_err(pos, "expected a single space"));
        }
        pos += 1;
        let end = s[pos..].find(' ').map_or(s.len(), |i| pos + i);
        let token = &s[pos..end];
        if token == KEY {
            pos = end;
            break;
        }
        let Some(code) = aspect_code(token) else {
            return Err(parse_err(pos, format!("unknown marker {token:?}")));
        };
        if code >= aspect_count {
            return Err(parse_err(pos, format!("aspect code {code} out of range for {aspect_count} aspects")));
        }
        if codes.last().is_some_and(|&last| code <= last) {
            return Err(parse_err(pos, format!("aspect code {code} out of ascending order")));
        }
        codes.insert(code);
        pos = end;
    }
    if codes.is_empty() {
        return Err(parse_err(pos, "no aspect codes"));
    }

    // Keywords until the first sentence marker.
    let mut keywords = Vec::new();
    while pos < s.len() && !s[pos..].starts_with(SNT_SEP) {
        if !s[pos..].starts_with(' ') {
            return Err(parse_err(pos, "expected a single space"));
        }
        pos += 1;
        let end = s[pos..].find(' ').map_or(s.len(), |i| pos + i);
        let token = &s[pos..end];
        if token.is_empty() {
            return Err(parse_err(pos, "empty element"));
        }
        if token.starts_with('[') {
            return Err(parse_err(pos, format!("unknown marker {token:?}")));
        }
        if keywords.iter().any(|k| k == token) {
            return Err(parse_err(pos, format!("duplicate keyword {token:?}")));
        }
        keywords.push(token.to_string());
        pos = end;
    }

    let mut sentences = Vec::new();
    while pos < s.len() {
        pos += SNT_SEP.len();
        let end = s[pos..].find(SNT_SEP).map_or(s.len(), |i| pos + i);
        let sentence = &s[pos..end];
        if !valid_sentence(sentence) {
            return Err(parse_err(pos, format!("invalid sentence {sentence:?}")));
        }
        sentences.push(sentence.to_string());
        pos = end;
    }

    Ok(ControllerSet { codes, keywords, sentences })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(codes: &[usize], keywords: &[&str], sentences: &[&str]) -> ControllerSet {
        ControllerSet {
            codes: codes.iter().copied().collect(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn layout() {
        let c = set(&[3, 2], &["k1", "k2"], &["s1", "s2"]);
        let s = serialize_controllers(&c, 6).unwrap();
        assert_eq!(s, "[CODE] [ASPECT_2] [ASPECT_3] [KEY] k1 k2 [SNT] s1 [SNT] s2");
        assert_eq!(parse_controllers(&s, 6).unwrap(), c);
    }

    #[test]
    fn empty_tails() {
        let c = set(&[0], &[], &[]);
        let s = serialize_controllers(&c, 1).unwrap();
        assert_eq!(s, "[CODE] [ASPECT_0] [KEY]");
        assert_eq!(parse_controllers(&s, 1).unwrap(), c);
    }

    #[test]
    fn sentences_keep_inner_spacing_and_markers_like_text() {
        let c = set(&[1], &["room"], &["The  room, [really]  was great!", "Ok."]);
        let s = serialize_controllers(&c, 2).unwrap();
        assert_eq!(parse_controllers(&s, 2).unwrap(), c);
    }

    #[test]
    fn serialize_errors() {
        assert_eq!(serialize_controllers(&set(&[], &[], &[]), 3), Err(ControllerError::EmptyCodes));
        assert!(matches!(serialize_controllers(&set(&[3], &[], &[]), 3), Err(ControllerError::CodeOutOfRange { .. })));
        assert!(serialize_controllers(&set(&[0], &["two words"], &[]), 3).is_err());
        assert!(serialize_controllers(&set(&[0], &["a", "a"], &[]), 3).is_err());
        assert!(serialize_controllers(&set(&[0], &[], &[" padded"]), 3).is_err());
        assert!(serialize_controllers(&set(&[0], &[], &["has [SNT] inside"]), 3).is_err());
    }

    fn offset(r: Result<ControllerSet, ControllerError>) -> usize {
        match r {
            Err(ControllerError::Parse { offset, .. }) => offset,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert_eq!(offset(parse_controllers("[ASPECT_0] [KEY]", 2)), 0);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_0] [FOO] [KEY]", 2)), 18);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_5] [KEY]", 2)), 7);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_1] [ASPECT_0] [KEY]", 2)), 18);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_0]", 2)), 17);
        assert_eq!(offset(parse_controllers("[CODE] [KEY]", 2)), 12);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_0] [KEY] a [BAD]", 2)), 26);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_0] [KEY] a ", 2)), 26);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_0] [KEY] [SNT]", 2)), 24);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_0] [KEY] [SNT]  x", 2)), 30);
        assert_eq!(offset(parse_controllers("[CODE] [ASPECT_01] [KEY]", 2)), 7);
    }
}
