//! Rule-based sentence segmentation and tokenization.
//!
//! Both are pure functions of their input: no locale, no models, no state.

use serde::{Deserialize, Serialize};

/// Words that take a trailing period without ending a sentence.
///
/// Compared case-insensitively against the alphanumeric run that directly
/// precedes the period.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "no", "vs", "etc", "inc", "ltd",
    "co", "corp", "dept", "approx", "apt", "ave", "blvd", "rd", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec", "e.g", "i.e", "a.m", "p.m", "u.s", "u.k",
];

/// A sentence of a review: its surface string and its lowercase tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub raw: String,
    pub tokens: Vec<String>,
}

/// Lowercase, split on anything that is not alphanumeric, drop the separators.
///
/// `"Wi-Fi 5GHz"` becomes `["wi", "fi", "5ghz"]`.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

/// The word (letters, digits and inner periods) ending right before byte `end`.
fn word_before(text: &str, end: usize) -> &str {
    let head = &text[..end];
    let start = head
        .char_indices()
        .rev()
        .find(|&(_, c)| !(c.is_alphanumeric() || c == '.'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    head[start..].trim_start_matches('.')
}

fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Split text into sentences.
///
/// A boundary is a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) followed either by the end of the text or by whitespace and an
/// uppercase letter or digit, optionally behind an opening quote or
/// bracket. A single period after a word from [`ABBREVIATIONS`] is never a
/// boundary. Pieces without any token are
/// dropped, so the result never contains an empty sentence.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map(|&(p, _)| p).unwrap_or(text.len());

        let single_period = c == '.' && j - run_start == 1;
        let guarded = single_period && is_abbreviation(word_before(text, pos));

        let boundary = if j == chars.len() {
            true
        } else {
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let gap = k > j;
            while k < chars.len() && is_opener(chars[k].1) {
                k += 1;
            }
            gap && k < chars.len()
                && (chars[k].1.is_uppercase() || chars[k].1.is_ascii_digit())
        };

        if boundary && !guarded {
            pieces.push(&text[start..end]);
            start = end;
        }
        i = j.max(i + 1);
    }
    if start < text.len() {
        pieces.push(&text[start..]);
    }

    pieces
        .into_iter()
        .map(str::trim)
        .filter_map(|raw| {
            let tokens = tokenize(raw);
            (!tokens.is_empty()).then(|| (raw.to_string(), tokens))
        })
        .enumerate()
        .map(|(index, (raw, tokens))| Sentence { index, raw, tokens })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raws(text: &str) -> Vec<String> {
        split_sentences(text).into_iter().map(|s| s.raw).collect()
    }

    #[test]
    fn two_terminal_periods() {
        assert_eq!(raws("Great room. Bad food."), vec!["Great room.", "Bad food."]);
    }

    #[test]
    fn no_terminator() {
        assert_eq!(raws("Great room"), vec!["Great room"]);
    }

    #[test]
    fn empty_text() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
        assert!(split_sentences("... !!").is_empty());
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(
            raws("We met Dr. Smith at the desk. He was kind."),
            vec!["We met Dr. Smith at the desk.", "He was kind."]
        );
        assert_eq!(raws("Close to shops, e.g. Zara."), vec!["Close to shops, e.g. Zara."]);
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        assert_eq!(raws("Room 3.5 stars. it was fine"), vec!["Room 3.5 stars. it was fine"]);
    }

    #[test]
    fn runs_and_closers() {
        assert_eq!(
            raws("Loved it!!! \"Best stay ever.\" Would return?"),
            vec!["Loved it!!!", "\"Best stay ever.\"", "Would return?"]
        );
    }

    #[test]
    fn dense_indices() {
        let s = split_sentences("A one. B two! C three?");
        assert_eq!(s.iter().map(|s| s.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn tokenize_rules() {
        assert_eq!(tokenize("The room was spotless!"), vec!["the", "room", "was", "spotless"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Wi-Fi 5GHz"), vec!["wi", "fi", "5ghz"]);
        assert_eq!(tokenize("Café  ÜBER"), vec!["café", "über"]);
    }

    #[test]
    fn resplit_is_idempotent_on_examples() {
        let text = "Dr. Who stayed here. The pool was warm!  Staff? Friendly. e.g. nice";
        for s in split_sentences(text) {
            let again = split_sentences(&s.raw);
            assert_eq!(again.len(), 1);
            assert_eq!(again[0].raw, s.raw);
        }
    }
}
