//! Scan description text for URLs, registrable domains, the word context
//! preceding each URL, and cryptocurrency addresses.
//!
//! All operations are pure functions over one description and safe to run in
//! parallel across records.

pub mod crypto;
pub mod psl;

use thiserror::Error;

pub use crypto::{Coin, CryptoConfig};
use psl::SuffixList;

#[derive(Debug, Error)]
pub enum TextScanError {
    #[error("no host in `{0}`")]
    NoHost(String),
}

/// One URL found in a description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrlMention {
    /// The maximal matched substring, trailing punctuation trimmed.
    pub raw_url: String,
    /// Registrable domain (eTLD+1, lowercase) of the URL's host.
    pub domain_key: String,
    /// 0-based line number within the description.
    pub line_index: usize,
    /// 0-based char offset of the URL start within its line.
    pub char_offset: usize,
}

/// A word (unigram or bigram) seen in the context preceding a URL.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ContextPair {
    pub word: String,
    pub domain_key: String,
    pub video_id: String,
    pub channel_id: String,
}

/// One cryptocurrency address candidate. Only `checksum_valid` matches count
/// as CR usage downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CryptoMatch {
    pub coin: Coin,
    pub address: String,
    pub line_index: usize,
    pub char_offset: usize,
    pub checksum_valid: bool,
}

const TRIGGERS: [&str; 3] = ["https://", "http://", "www."];

fn is_url_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '<' | '>' | '"' | '`') && !c.is_control()
}

fn is_trailing_junk(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | ')' | ']' | '}')
}

/// A trigger only fires at a text boundary, so `awww.example.com` stays text.
fn boundary_ok(prev: Option<char>) -> bool {
    match prev {
        None => true,
        Some(c) => !(c.is_alphanumeric() || matches!(c, '.' | '-' | '@')),
    }
}

fn trigger_at(chars: &[char], i: usize) -> Option<usize> {
    for trigger in TRIGGERS {
        let len = trigger.len(); // triggers are ASCII
        if i + len <= chars.len()
            && chars[i..i + len]
                .iter()
                .zip(trigger.bytes())
                .all(|(c, t)| c.to_ascii_lowercase() == t as char)
        {
            return Some(len);
        }
    }
    None
}

/// Candidate URL spans of one line as (start, end) char ranges, trailing
/// punctuation trimmed. Used both for extraction and for excising URLs
/// before tokenization.
fn url_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let prev = if i == 0 { None } else { Some(chars[i - 1]) };
        if boundary_ok(prev) {
            if let Some(trigger_len) = trigger_at(chars, i) {
                let mut j = i;
                while j < chars.len() && is_url_char(chars[j]) {
                    j += 1;
                }
                let mut end = j;
                while end > i && is_trailing_junk(chars[end - 1]) {
                    end -= 1;
                }
                if end > i + trigger_len {
                    spans.push((i, end));
                }
                i = j.max(i + 1);
                continue;
            }
        }
        i += 1;
    }
    spans
}

/// Host of a URL-ish string: the part after `scheme://` (any scheme) or the
/// string itself when no scheme is present, cut at the first `/`, `?`, or
/// `#`, with userinfo and port stripped.
fn host_of(raw: &str) -> Option<&str> {
    let rest = match raw.find("://") {
        Some(pos) => &raw[pos + 3..],
        None => raw,
    };
    let end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let authority = &rest[..end];
    let host_port = match authority.rfind('@') {
        Some(pos) => &authority[pos + 1..],
        None => authority,
    };
    let host = match host_port.find(':') {
        Some(pos) => &host_port[..pos],
        None => host_port,
    };
    if host.is_empty() {
        None
    } else {
        Some(host)
    }
}

/// Every maximal substring beginning with `http://`, `https://`, or `www.`
/// that parses to a host with a registrable domain, ordered by
/// (line_index, char_offset). Unparseable candidates are silently skipped.
pub fn extract_urls(description: &str, suffixes: &SuffixList) -> Vec<UrlMention> {
    let mut mentions = Vec::new();
    for (line_index, line) in description.split('\n').enumerate() {
        let chars: Vec<char> = line.chars().collect();
        for (start, end) in url_spans(&chars) {
            let raw: String = chars[start..end].iter().collect();
            let Some(host) = host_of(&raw) else { continue };
            let Some(domain_key) = suffixes.registrable_domain(host) else { continue };
            if !domain_key.contains('.') {
                continue;
            }
            mentions.push(UrlMention { raw_url: raw, domain_key, line_index, char_offset: start });
        }
    }
    mentions
}

/// Registrable domain of one URL. Unknown suffixes are not an error (they
/// fall back to last-two-labels); a missing or invalid host is.
pub fn registrable_domain(url: &str, suffixes: &SuffixList) -> Result<String, TextScanError> {
    let host = host_of(url).ok_or_else(|| TextScanError::NoHost(url.to_string()))?;
    suffixes.registrable_domain(host).ok_or_else(|| TextScanError::NoHost(url.to_string()))
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

/// Lowercase unigrams and bigrams of one line, URLs excised first. Splits on
/// any char that is not a letter, digit, apostrophe, or hyphen; bigrams are
/// adjacent unigrams rendered as "a b".
pub fn tokenize_ngrams(line: &str) -> Vec<String> {
    let mut chars: Vec<char> = line.chars().collect();
    for (start, end) in url_spans(&chars) {
        for c in chars.iter_mut().take(end).skip(start) {
            *c = ' ';
        }
    }
    let mut unigrams: Vec<String> = Vec::new();
    let mut current = String::new();
    for c in chars.iter().chain(std::iter::once(&' ')) {
        if is_token_char(*c) {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            if current.chars().any(|c| c.is_alphanumeric()) {
                unigrams.push(std::mem::take(&mut current));
            } else {
                current.clear();
            }
        }
    }
    let bigrams: Vec<String> =
        unigrams.windows(2).map(|pair| format!("{} {}", pair[0], pair[1])).collect();
    let mut tokens = unigrams;
    tokens.extend(bigrams);
    tokens
}

/// For each URL mention, pair it with every token from the same line
/// strictly before the URL and from the entire previous line. Duplicates
/// within one URL's context are emitted once.
pub fn context_pairs(
    description: &str,
    video_id: &str,
    channel_id: &str,
    suffixes: &SuffixList,
) -> Vec<ContextPair> {
    let lines: Vec<&str> = description.split('\n').collect();
    let mentions = extract_urls(description, suffixes);
    let mut prev_line_tokens: Vec<Option<Vec<String>>> = vec![None; lines.len()];

    let mut pairs = Vec::new();
    for mention in &mentions {
        let mut context: std::collections::BTreeSet<String> = Default::default();
        let prefix: String =
            lines[mention.line_index].chars().take(mention.char_offset).collect();
        context.extend(tokenize_ngrams(&prefix));
        if mention.line_index > 0 {
            let cache = &mut prev_line_tokens[mention.line_index - 1];
            let tokens = cache
                .get_or_insert_with(|| tokenize_ngrams(lines[mention.line_index - 1]));
            context.extend(tokens.iter().cloned());
        }
        for word in context {
            pairs.push(ContextPair {
                word,
                domain_key: mention.domain_key.clone(),
                video_id: video_id.to_string(),
                channel_id: channel_id.to_string(),
            });
        }
    }
    pairs
}

/// Find cryptocurrency address candidates with the default configuration.
pub fn detect_crypto(description: &str) -> Vec<CryptoMatch> {
    detect_crypto_with(description, &CryptoConfig::default())
}

/// Candidates are maximal alphanumeric runs matched against the per-coin
/// syntactic patterns; `checksum_valid` carries the per-coin checksum result.
pub fn detect_crypto_with(description: &str, config: &CryptoConfig) -> Vec<CryptoMatch> {
    let mut matches = Vec::new();
    for (line_index, line) in description.split('\n').enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_ascii_alphanumeric() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                // runs glued to non-ascii word chars are not addresses
                let glued = (start > 0 && chars[start - 1].is_alphanumeric())
                    || (i < chars.len() && chars[i].is_alphanumeric());
                if !glued {
                    let run: String = chars[start..i].iter().collect();
                    if let Some((coin, checksum_valid)) = crypto::classify_candidate(&run, config)
                    {
                        matches.push(CryptoMatch {
                            coin,
                            address: run,
                            line_index,
                            char_offset: start,
                            checksum_valid,
                        });
                    }
                }
            } else {
                i += 1;
            }
        }
    }
    matches
}
