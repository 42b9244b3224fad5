//! Tokenization and word-level sequence similarity.

use std::fmt;
use std::ops::Deref;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TextError {
    #[error("token {0} is empty")]
    EmptyToken(usize),
    #[error("token {index} ({token:?}) contains whitespace")]
    WhitespaceInToken { index: usize, token: String },
    #[error("similarity {0} outside [0, 1]")]
    RatioOutOfRange(f64),
}

/// An ordered list of non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Result<Self, TextError> {
        for (index, token) in tokens.iter().enumerate() {
            if token.is_empty() {
                return Err(TextError::EmptyToken(index));
            }
            if token.chars().any(char::is_whitespace) {
                return Err(TextError::WhitespaceInToken {
                    index,
                    token: token.clone(),
                });
            }
        }
        Ok(Self(tokens))
    }

    /// Splits on whitespace only, with no punctuation handling. This is how
    /// pre-tokenized corpora (WMT files, parallel text) are read.
    pub fn from_whitespace(text: &str) -> Self {
        Self(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl TryFrom<Vec<String>> for TokenSequence {
    type Error = TextError;

    fn try_from(tokens: Vec<String>) -> Result<Self, TextError> {
        Self::new(tokens)
    }
}

impl From<TokenSequence> for Vec<String> {
    fn from(seq: TokenSequence) -> Self {
        seq.0
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenSequence {
    /// Collects already-clean tokens; each item is re-split on whitespace so
    /// the invariants hold whatever the input.
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(
            iter.into_iter()
                .flat_map(|s| {
                    s.as_ref()
                        .split_whitespace()
                        .map(str::to_owned)
                        .collect::<Vec<_>>()
                })
                .collect(),
        )
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join())
    }
}

static EDGE_PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\p{P}*)(.*?)(\p{P}*)$").expect("valid regex"));

/// Splits `text` on Unicode whitespace, then detaches leading and trailing
/// punctuation characters (general category P) as one-character tokens.
/// Interior punctuation stays attached.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let caps = EDGE_PUNCT.captures(chunk).expect("pattern matches any string");
        let lead = caps.get(1).map_or("", |m| m.as_str());
        let core = caps.get(2).map_or("", |m| m.as_str());
        let trail = caps.get(3).map_or("", |m| m.as_str());
        out.extend(lead.chars().map(String::from));
        if !core.is_empty() {
            out.push(core.to_owned());
        }
        out.extend(trail.chars().map(String::from));
    }
    TokenSequence(out)
}

/// Collapses every whitespace run to one space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A similarity value guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct SimilarityRatio<F>(F);

impl<F: Scalar> SimilarityRatio<F> {
    pub fn new(value: F) -> Result<Self, TextError> {
        if value >= F::zero() && value <= F::one() {
            Ok(Self(value))
        } else {
            Err(TextError::RatioOutOfRange(value.to_f64_lossy()))
        }
    }

    pub fn value(self) -> F {
        self.0
    }
}

/// Longest common contiguous block of `a[alo..ahi]` and `b[blo..bhi]`.
/// Returns `(i, j, len)`; among blocks of maximal length the one starting
/// earliest in `a` wins, then earliest in `b`.
#[allow(clippy::needless_range_loop)]
fn longest_block<T: PartialEq>(
    a: &[T],
    b: &[T],
    (alo, ahi): (usize, usize),
    (blo, bhi): (usize, usize),
) -> (usize, usize, usize) {
    let width = bhi - blo;
    let mut prev = vec![0usize; width + 1];
    let mut cur = vec![0usize; width + 1];
    let (mut best_i, mut best_j, mut best_len) = (alo, blo, 0);
    for i in alo..ahi {
        for j in blo..bhi {
            let k = j - blo + 1;
            cur[k] = if a[i] == b[j] { prev[k - 1] + 1 } else { 0 };
            if cur[k] > best_len {
                best_len = cur[k];
                best_i = i + 1 - best_len;
                best_j = j + 1 - best_len;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (best_i, best_j, best_len)
}

/// Total number of elements matched by Ratcliff/Obershelp block recursion.
pub fn matched_elements<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut matched = 0;
    let mut stack = vec![((0, a.len()), (0, b.len()))];
    while let Some(((alo, ahi), (blo, bhi))) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, len) = longest_block(a, b, (alo, ahi), (blo, bhi));
        if len == 0 {
            continue;
        }
        matched += len;
        stack.push(((alo, i), (blo, j)));
        stack.push(((i + len, ahi), (j + len, bhi)));
    }
    matched
}

/// Gestalt pattern matching ratio `2M / (|a| + |b|)` over whole tokens.
/// Two empty sequences are identical (1.0).
pub fn gestalt_similarity<T: PartialEq, F: Scalar>(a: &[T], b: &[T]) -> SimilarityRatio<F> {
    let total = a.len() + b.len();
    if total == 0 {
        return SimilarityRatio(F::one());
    }
    let m = matched_elements(a, b);
    SimilarityRatio(F::from_usize_lossy(2 * m) / F::from_usize_lossy(total))
}
