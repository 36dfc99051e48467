//! The harness tokenizer shared by edit validation, BLEU and word matching.
//!
//! Text is split on Unicode whitespace and every punctuation character becomes its
//! own token. No case folding happens here.

use std::sync::LazyLock;

use regex::Regex;

static TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\p{P}|[^\s\p{P}]+").expect("static token pattern"));

/// Splits `text` into tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    TOKEN.find_iter(text).map(|m| m.as_str()).collect()
}

/// Tokenizes and lowercases, for the optional case-folded word matching.
pub fn tokenize_folded(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(str::to_lowercase).collect()
}
