//! Registrable-domain (eTLD+1) resolution against a public suffix snapshot.
//!
//! The snapshot is plain text, one suffix per line, `//` comments ignored;
//! `*.` marks wildcard rules and `!` exception rules. Hosts whose suffix is
//! not covered by the snapshot fall back to last-two-labels.

use std::collections::HashSet;
use std::sync::OnceLock;

const BUNDLED: &str = include_str!("../../data/public_suffix_list.dat");

#[derive(Debug, Clone, Default)]
pub struct SuffixList {
    exact: HashSet<String>,
    wildcard_tails: HashSet<String>,
    exceptions: HashSet<String>,
}

impl SuffixList {
    pub fn parse(data: &str) -> SuffixList {
        let mut list = SuffixList::default();
        for raw in data.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let rule = line.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
            if let Some(exception) = rule.strip_prefix('!') {
                list.exceptions.insert(exception.to_string());
            } else if let Some(tail) = rule.strip_prefix("*.") {
                list.wildcard_tails.insert(tail.to_string());
            } else {
                list.exact.insert(rule);
            }
        }
        list
    }

    /// The compiled-in snapshot.
    pub fn bundled() -> &'static SuffixList {
        static LIST: OnceLock<SuffixList> = OnceLock::new();
        LIST.get_or_init(|| SuffixList::parse(BUNDLED))
    }

    pub fn rule_count(&self) -> usize {
        self.exact.len() + self.wildcard_tails.len() + self.exceptions.len()
    }

    /// Number of labels the host's public suffix spans, or 0 when no rule
    /// matches.
    fn suffix_labels(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        // exception rules win outright; suffix = rule minus leftmost label
        for start in 0..n {
            if self.exceptions.contains(&labels[start..].join(".")) {
                return n - start - 1;
            }
        }
        let mut best = 0usize;
        for start in 0..n {
            let candidate = labels[start..].join(".");
            if self.exact.contains(&candidate) {
                best = best.max(n - start);
            }
            if start + 1 < n && self.wildcard_tails.contains(&labels[start + 1..].join(".")) {
                best = best.max(n - start);
            }
        }
        best
    }

    /// Lowercase eTLD+1 for a host, `None` when the host is syntactically
    /// unusable (empty/invalid labels, or a plain IPv4 address).
    pub fn registrable_domain(&self, host: &str) -> Option<String> {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        if host.is_empty() {
            return None;
        }
        let labels: Vec<&str> = host.split('.').collect();
        for label in &labels {
            if label.is_empty() || !valid_label(label) {
                return None;
            }
        }
        if labels.iter().all(|l| l.bytes().all(|b| b.is_ascii_digit())) {
            return None;
        }

        let suffix = self.suffix_labels(&labels);
        if suffix == 0 {
            // unknown suffix: last two labels
            let keep = labels.len().min(2);
            return Some(labels[labels.len() - keep..].join("."));
        }
        if suffix >= labels.len() {
            // the host itself is a public suffix
            return Some(host);
        }
        Some(labels[labels.len() - suffix - 1..].join("."))
    }
}

fn valid_label(label: &str) -> bool {
    !label.starts_with('-')
        && !label.ends_with('-')
        && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_label_host() {
        let list = SuffixList::bundled();
        assert_eq!(list.registrable_domain("patreon.com").unwrap(), "patreon.com");
        assert_eq!(list.registrable_domain("www.patreon.com").unwrap(), "patreon.com");
    }

    #[test]
    fn multi_label_suffix() {
        let list = SuffixList::bundled();
        assert_eq!(list.registrable_domain("a.b.example.co.uk").unwrap(), "example.co.uk");
        assert_eq!(list.registrable_domain("shop.example.co.uk").unwrap(), "example.co.uk");
        assert_eq!(list.registrable_domain("t.co").unwrap(), "t.co");
        assert_eq!(list.registrable_domain("x.t.co").unwrap(), "t.co");
    }

    #[test]
    fn host_that_is_a_suffix_returns_itself() {
        let list = SuffixList::bundled();
        assert_eq!(list.registrable_domain("co.uk").unwrap(), "co.uk");
        assert_eq!(list.registrable_domain("com").unwrap(), "com");
    }

    #[test]
    fn unknown_suffix_falls_back_to_last_two_labels() {
        let list = SuffixList::bundled();
        assert_eq!(list.registrable_domain("foo.bar.unknowntld").unwrap(), "bar.unknowntld");
        assert_eq!(list.registrable_domain("single").unwrap(), "single");
    }

    #[test]
    fn wildcard_and_exception_rules() {
        let list = SuffixList::bundled();
        // *.ck makes b.ck a suffix
        assert_eq!(list.registrable_domain("a.b.ck").unwrap(), "a.b.ck");
        // !www.ck carves the exception back out
        assert_eq!(list.registrable_domain("www.ck").unwrap(), "www.ck");
        assert_eq!(list.registrable_domain("foo.www.ck").unwrap(), "www.ck");
    }

    #[test]
    fn private_section_rules() {
        let list = SuffixList::bundled();
        assert_eq!(list.registrable_domain("user.github.io").unwrap(), "user.github.io");
        assert_eq!(list.registrable_domain("some.blog.blogspot.com").unwrap(), "blog.blogspot.com");
    }

    #[test]
    fn rejects_bad_hosts() {
        let list = SuffixList::bundled();
        assert!(list.registrable_domain("").is_none());
        assert!(list.registrable_domain("a..b").is_none());
        assert!(list.registrable_domain("-bad.com").is_none());
        assert!(list.registrable_domain("1.2.3.4").is_none());
        assert!(list.registrable_domain("ex ample.com").is_none());
    }

    #[test]
    fn idempotent_on_own_output() {
        let list = SuffixList::bundled();
        for host in ["www.patreon.com", "a.b.example.co.uk", "x.t.co", "foo.bar.unknowntld"] {
            let key = list.registrable_domain(host).unwrap();
            assert_eq!(list.registrable_domain(&key).unwrap(), key);
        }
    }
}
