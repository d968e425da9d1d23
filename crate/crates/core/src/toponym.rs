//! Toponym extraction from free text.
//!
//! Three stages, each exposed on its own:
//!
//! 1. [`preprocess`]: whitespace tokenization. URLs, the retweet marker `RT`,
//!    @-mentions, numbers and tokens made only of special characters become
//!    [`Token::Noise`]; punctuation hugging a word is stripped; survivors are
//!    lowercased.
//! 2. [`generate_candidates`]: every word uni-gram plus every adjacent
//!    bi-gram of two words. Bi-grams touching noise are never formed.
//! 3. [`prune`]: a candidate survives when the phrase as a whole is not a
//!    stop-word and is present in the gazetteer. Stop-words are removed only
//!    after bi-grams exist, so "new york" survives a stop-list holding "new".

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gazetteer::{normalize, GazetteerIndex};

pub const NOISE: &str = "<noise>";

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Word(String),
    Noise,
}

impl Token {
    pub fn as_str(&self) -> &str {
        match self {
            Token::Word(w) => w,
            Token::Noise => NOISE,
        }
    }

    fn word(&self) -> Option<&str> {
        match self {
            Token::Word(w) => Some(w),
            Token::Noise => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessOptions {
    /// Keep the body of `#tag` tokens as a word. When false the whole hashtag
    /// is noise.
    pub unwrap_hashtags: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            unwrap_hashtags: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToponymCandidate {
    pub phrase: String,
    /// 1 for uni-grams, 2 for bi-grams.
    pub arity: u8,
    /// Index of the first token in the token stream.
    pub position: usize,
}

fn is_url(token: &str) -> bool {
    let lower = token.get(..8).unwrap_or(token).to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn is_number(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | ',' | ':' | '/' | '%'))
}

fn classify(raw: &str, options: PreprocessOptions) -> Token {
    if is_url(raw) {
        return Token::Noise;
    }
    // Leading '@' and '#' are kept so mentions and hashtags stay recognizable.
    let token = raw
        .trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@' && c != '#')
        .trim_end_matches(|c: char| !c.is_alphanumeric());
    if token.is_empty() || token == "RT" || token.starts_with('@') || is_url(token) {
        return Token::Noise;
    }
    let token = match token.strip_prefix('#') {
        Some(_) if !options.unwrap_hashtags => return Token::Noise,
        Some(body) => body.trim_start_matches(|c: char| !c.is_alphanumeric()),
        None => token,
    };
    if token.is_empty() || is_number(token) {
        return Token::Noise;
    }
    Token::Word(normalize(token))
}

pub fn preprocess_with(text: &str, options: PreprocessOptions) -> Vec<Token> {
    text.split_whitespace()
        .map(|raw| classify(raw, options))
        .collect()
}

pub fn preprocess(text: &str) -> Vec<Token> {
    preprocess_with(text, PreprocessOptions::default())
}

pub fn generate_candidates(tokens: &[Token]) -> Vec<ToponymCandidate> {
    let mut out = Vec::with_capacity(tokens.len() * 2);
    for (i, token) in tokens.iter().enumerate() {
        let Some(first) = token.word() else { continue };
        out.push(ToponymCandidate {
            phrase: first.to_owned(),
            arity: 1,
            position: i,
        });
        if let Some(second) = tokens.get(i + 1).and_then(Token::word) {
            out.push(ToponymCandidate {
                phrase: format!("{first} {second}"),
                arity: 2,
                position: i,
            });
        }
    }
    out
}

/// A lowercase stop-word list.
#[derive(Debug, Clone, Default)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| normalize(w.as_ref()))
            .filter(|w| !w.is_empty())
            .collect();
        StopWords { words }
    }

    /// The bundled English list.
    pub fn english() -> Self {
        StopWords::new(BUNDLED_STOPWORDS.lines())
    }

    /// One word per line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        Ok(StopWords::new(text.lines()))
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.words.contains(phrase)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn without(&self, word: &str) -> StopWords {
        let mut words = self.words.clone();
        words.remove(word);
        StopWords { words }
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub fn prune(
    candidates: Vec<ToponymCandidate>,
    index: &GazetteerIndex,
    stopwords: &StopWords,
) -> Vec<ToponymCandidate> {
    candidates
        .into_iter()
        .filter(|c| !stopwords.contains(&c.phrase) && index.contains_normalized(&c.phrase))
        .collect()
}

pub fn extract_toponyms(
    text: &str,
    index: &GazetteerIndex,
    stopwords: &StopWords,
) -> Vec<ToponymCandidate> {
    prune(generate_candidates(&preprocess(text)), index, stopwords)
}

/// Bundles the gazetteer, stop-words and options so a pipeline can share one
/// extractor across workers.
#[derive(Debug, Clone)]
pub struct ToponymExtractor {
    index: Arc<GazetteerIndex>,
    stopwords: Arc<StopWords>,
    options: PreprocessOptions,
}

impl ToponymExtractor {
    pub fn new(index: Arc<GazetteerIndex>, stopwords: Arc<StopWords>) -> Self {
        ToponymExtractor {
            index,
            stopwords,
            options: PreprocessOptions::default(),
        }
    }

    pub fn with_options(mut self, options: PreprocessOptions) -> Self {
        self.options = options;
        self
    }

    pub fn index(&self) -> &GazetteerIndex {
        &self.index
    }

    pub fn extract(&self, text: &str) -> Vec<ToponymCandidate> {
        let tokens = preprocess_with(text, self.options);
        prune(generate_candidates(&tokens), &self.index, &self.stopwords)
    }
}
