//! The category system, default seed tables, manual override list, and the
//! per-video / per-channel labeling semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cograph::BipartiteGraph;
use crate::corpus::VideoRecord;
use crate::labelprop::{self, PropagationConfig, PropagationResult, SeedSet};
use crate::textscan::{self, psl::SuffixList, CryptoMatch};
use crate::Score;

/// Monetization categories. `Cr` is assigned only via crypto-address
/// detection, never via label propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CategoryLabel {
    /// Requests for donation through third-party platforms.
    Do,
    /// Requests for cryptocurrency.
    Cr,
    /// Sales of products/services by the channel.
    Pc,
    /// Affiliate marketing.
    Am,
    /// Not monetization.
    Nm,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 5] = [
        CategoryLabel::Do,
        CategoryLabel::Cr,
        CategoryLabel::Pc,
        CategoryLabel::Am,
        CategoryLabel::Nm,
    ];

    /// The four classes that participate in label propagation, in score-column
    /// order.
    pub const PROPAGATED: [CategoryLabel; 4] = [
        CategoryLabel::Do,
        CategoryLabel::Pc,
        CategoryLabel::Am,
        CategoryLabel::Nm,
    ];

    /// Score-column index for propagated classes; `None` for `Cr`.
    pub fn column(self) -> Option<usize> {
        match self {
            CategoryLabel::Do => Some(0),
            CategoryLabel::Pc => Some(1),
            CategoryLabel::Am => Some(2),
            CategoryLabel::Nm => Some(3),
            CategoryLabel::Cr => None,
        }
    }

    pub fn from_column(column: usize) -> CategoryLabel {
        Self::PROPAGATED[column]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CategoryLabel::Do => "DO",
            CategoryLabel::Cr => "CR",
            CategoryLabel::Pc => "PC",
            CategoryLabel::Am => "AM",
            CategoryLabel::Nm => "NM",
        }
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CategoryLabel {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "DO" => Ok(CategoryLabel::Do),
            "CR" => Ok(CategoryLabel::Cr),
            "PC" => Ok(CategoryLabel::Pc),
            "AM" => Ok(CategoryLabel::Am),
            "NM" => Ok(CategoryLabel::Nm),
            other => Err(TaxonomyError::InvalidLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("unknown category label `{0}`")]
    InvalidLabel(String),
    #[error("CR cannot be used as a {0} label; it is assigned only via address detection")]
    CryptoNotPropagatable(&'static str),
    #[error("seed file line {line}: {message}")]
    SeedParse { line: usize, message: String },
    #[error("override file line {line}: {message}")]
    OverrideParse { line: usize, message: String },
    #[error("lexicon file line {line}: {message}")]
    LexiconParse { line: usize, message: String },
    #[error(transparent)]
    Propagation(#[from] labelprop::PropagationError),
}

/// Where a lexicon label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Seed,
    Propagated,
    Override,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Seed => "seed",
            Provenance::Propagated => "propagated",
            Provenance::Override => "override",
        }
    }
}

impl FromStr for Provenance {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seed" => Ok(Provenance::Seed),
            "propagated" => Ok(Provenance::Propagated),
            "override" => Ok(Provenance::Override),
            other => Err(TaxonomyError::InvalidLabel(other.to_string())),
        }
    }
}

/// Default word and domain seeds.
///
/// Domain seeds are stored as registrable domains (eTLD+1) even though they
/// are conventionally quoted as bare names; the mapping is fixed here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTable {
    pub words: BTreeMap<String, CategoryLabel>,
    pub domains: BTreeMap<String, CategoryLabel>,
}

const DEFAULT_WORD_SEEDS: &[(&str, CategoryLabel)] = &[
    ("donate", CategoryLabel::Do),
    ("donation", CategoryLabel::Do),
    ("stream labs", CategoryLabel::Do),
    ("paypal", CategoryLabel::Do),
    ("merch", CategoryLabel::Pc),
    ("merchandise", CategoryLabel::Pc),
    ("shirt", CategoryLabel::Pc),
    ("shirts", CategoryLabel::Pc),
    ("swag", CategoryLabel::Pc),
    ("merch shop", CategoryLabel::Pc),
    ("mugs", CategoryLabel::Pc),
    ("mug", CategoryLabel::Pc),
    ("coaching", CategoryLabel::Pc),
    ("course", CategoryLabel::Pc),
    ("courses", CategoryLabel::Pc),
    ("lesson", CategoryLabel::Pc),
    ("lessons", CategoryLabel::Pc),
    ("promo code", CategoryLabel::Am),
    ("code", CategoryLabel::Am),
    ("discount", CategoryLabel::Am),
    ("intro", CategoryLabel::Nm),
    ("follow instagram", CategoryLabel::Nm),
    ("facebook", CategoryLabel::Nm),
    ("soundcloud", CategoryLabel::Nm),
    ("snapchat", CategoryLabel::Nm),
    ("twitch", CategoryLabel::Nm),
];

const DEFAULT_DOMAIN_SEEDS: &[(&str, CategoryLabel)] = &[
    ("paypal.com", CategoryLabel::Do),
    ("subscribestar.com", CategoryLabel::Do),
    ("patreon.com", CategoryLabel::Do),
    ("gofundme.com", CategoryLabel::Do),
    ("ko-fi.com", CategoryLabel::Do),
    ("teespring.com", CategoryLabel::Pc),
    ("bonfire.com", CategoryLabel::Pc),
    ("merchlabs.com", CategoryLabel::Pc),
    ("represent.com", CategoryLabel::Pc),
    ("crowdmade.com", CategoryLabel::Pc),
    ("amazon.com", CategoryLabel::Am),
    ("etsy.com", CategoryLabel::Am),
    ("ebay.com", CategoryLabel::Am),
    ("skillshare.com", CategoryLabel::Am),
    ("squarespace.com", CategoryLabel::Am),
    ("thegreatcourses.com", CategoryLabel::Am),
    ("facebook.com", CategoryLabel::Nm),
    ("deviantart.com", CategoryLabel::Nm),
    ("twitter.com", CategoryLabel::Nm),
    ("cnn.com", CategoryLabel::Nm),
    ("dropbox.com", CategoryLabel::Nm),
    ("washingtontimes.com", CategoryLabel::Nm),
    ("pastebin.com", CategoryLabel::Nm),
    ("videvo.net", CategoryLabel::Nm),
    ("audiomack.com", CategoryLabel::Nm),
    ("canva.com", CategoryLabel::Nm),
    ("t.co", CategoryLabel::Nm),
    ("soundcloud.com", CategoryLabel::Nm),
    ("tiktok.com", CategoryLabel::Nm),
    ("freesfx.co.uk", CategoryLabel::Nm),
    ("imgur.com", CategoryLabel::Nm),
    ("pinterest.com", CategoryLabel::Nm),
    ("wired.com", CategoryLabel::Nm),
    ("snapchat.com", CategoryLabel::Nm),
    ("pnas.org", CategoryLabel::Nm),
    ("tapas.io", CategoryLabel::Nm),
    ("washingtonpost.com", CategoryLabel::Nm),
];

impl SeedTable {
    /// The default seed table.
    pub fn defaults() -> SeedTable {
        let words = DEFAULT_WORD_SEEDS
            .iter()
            .map(|(w, l)| (w.to_string(), *l))
            .collect();
        let domains = DEFAULT_DOMAIN_SEEDS
            .iter()
            .map(|(d, l)| (d.to_string(), *l))
            .collect();
        SeedTable { words, domains }
    }

    pub fn to_seed_set(&self) -> Result<SeedSet, TaxonomyError> {
        if self.words.values().chain(self.domains.values()).any(|l| *l == CategoryLabel::Cr) {
            return Err(TaxonomyError::CryptoNotPropagatable("seed"));
        }
        Ok(SeedSet::new(self.words.clone(), self.domains.clone())?)
    }

    /// Sectioned text form: one `[XX]` header per category followed by
    /// comma-separated `words:` and `domains:` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for label in CategoryLabel::PROPAGATED {
            let words: Vec<&str> = self
                .words
                .iter()
                .filter(|(_, l)| **l == label)
                .map(|(w, _)| w.as_str())
                .collect();
            let domains: Vec<&str> = self
                .domains
                .iter()
                .filter(|(_, l)| **l == label)
                .map(|(d, _)| d.as_str())
                .collect();
            out.push_str(&format!("[{label}]\n"));
            out.push_str(&format!("words: {}\n", words.join(", ")));
            out.push_str(&format!("domains: {}\n", domains.join(", ")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SeedTable, TaxonomyError> {
        let mut words = BTreeMap::new();
        let mut domains = BTreeMap::new();
        let mut current: Option<CategoryLabel> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let label = name.parse::<CategoryLabel>().map_err(|e| {
                    TaxonomyError::SeedParse { line: line_no, message: e.to_string() }
                })?;
                if label == CategoryLabel::Cr {
                    return Err(TaxonomyError::CryptoNotPropagatable("seed"));
                }
                current = Some(label);
                continue;
            }
            let label = current.ok_or_else(|| TaxonomyError::SeedParse {
                line: line_no,
                message: "entry before any [category] header".to_string(),
            })?;
            let (kind, rest) = line.split_once(':').ok_or_else(|| TaxonomyError::SeedParse {
                line: line_no,
                message: "expected `words:` or `domains:`".to_string(),
            })?;
            let target = match kind.trim() {
                "words" => &mut words,
                "domains" => &mut domains,
                other => {
                    return Err(TaxonomyError::SeedParse {
                        line: line_no,
                        message: format!("unknown section `{other}`"),
                    })
                }
            };
            for item in rest.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                if let Some(prev) = target.insert(item.to_string(), label) {
                    if prev != label {
                        return Err(TaxonomyError::SeedParse {
                            line: line_no,
                            message: format!("`{item}` seeded with two labels"),
                        });
                    }
                }
            }
        }
        Ok(SeedTable { words, domains })
    }
}

/// Manual relabeling that beats propagated labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideList {
    pub entries: BTreeMap<String, (CategoryLabel, String)>,
}

impl OverrideList {
    pub fn new() -> OverrideList {
        OverrideList::default()
    }

    pub fn insert(
        &mut self,
        domain_key: impl Into<String>,
        label: CategoryLabel,
        reason: impl Into<String>,
    ) -> Result<(), TaxonomyError> {
        if label == CategoryLabel::Cr {
            return Err(TaxonomyError::CryptoNotPropagatable("override"));
        }
        self.entries.insert(domain_key.into(), (label, reason.into()));
        Ok(())
    }

    /// Tab-separated: domain_key, label, reason.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (domain, (label, reason)) in &self.entries {
            out.push_str(&format!("{domain}\t{label}\t{reason}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<OverrideList, TaxonomyError> {
        let mut list = OverrideList::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let domain = parts.next().unwrap_or("");
            let label = parts.next().ok_or_else(|| TaxonomyError::OverrideParse {
                line: line_no,
                message: "expected domain<TAB>label[<TAB>reason]".to_string(),
            })?;
            let reason = parts.next().unwrap_or("").to_string();
            let label = label.parse::<CategoryLabel>().map_err(|e| {
                TaxonomyError::OverrideParse { line: line_no, message: e.to_string() }
            })?;
            list.insert(domain.to_string(), label, reason)?;
        }
        Ok(list)
    }
}

/// One labeled domain in the lexicon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub label: CategoryLabel,
    pub provenance: Provenance,
    /// Final propagation scores in column order DO, PC, AM, NM.
    pub scores: [Score; 4],
}

/// The learned map domain -> label with provenance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainLexicon {
    pub entries: BTreeMap<String, LexiconEntry>,
}

impl DomainLexicon {
    pub fn get(&self, domain_key: &str) -> Option<&LexiconEntry> {
        self.entries.get(domain_key)
    }

    pub fn label_of(&self, domain_key: &str) -> Option<CategoryLabel> {
        self.entries.get(domain_key).map(|e| e.label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tab-separated: domain_key, label, provenance, DO, PC, AM, NM scores;
    /// sorted by domain_key.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (domain, e) in &self.entries {
            out.push_str(&format!(
                "{domain}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.label,
                e.provenance.as_str(),
                e.scores[0],
                e.scores[1],
                e.scores[2],
                e.scores[3],
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<DomainLexicon, TaxonomyError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 7 {
                return Err(TaxonomyError::LexiconParse {
                    line: line_no,
                    message: format!("expected 7 tab-separated fields, got {}", parts.len()),
                });
            }
            let label = parts[1].parse::<CategoryLabel>().map_err(|e| {
                TaxonomyError::LexiconParse { line: line_no, message: e.to_string() }
            })?;
            let provenance = parts[2].parse::<Provenance>().map_err(|e| {
                TaxonomyError::LexiconParse { line: line_no, message: e.to_string() }
            })?;
            let mut scores = [0.0; 4];
            for (i, s) in parts[3..7].iter().enumerate() {
                scores[i] = s.parse::<Score>().map_err(|e| TaxonomyError::LexiconParse {
                    line: line_no,
                    message: format!("bad score `{s}`: {e}"),
                })?;
            }
            entries.insert(parts[0].to_string(), LexiconEntry { label, provenance, scores });
        }
        Ok(DomainLexicon { entries })
    }
}

/// Outcome of `build_lexicon`, keeping the propagation run for inspection.
#[derive(Debug, Clone)]
pub struct LexiconBuild {
    pub lexicon: DomainLexicon,
    pub propagation: PropagationResult<Score>,
}

/// Run propagation over a pruned graph, stamp provenance, and apply overrides
/// last.
pub fn build_lexicon(
    graph: &BipartiteGraph,
    seeds: &SeedTable,
    overrides: &OverrideList,
    config: &PropagationConfig<Score>,
) -> Result<LexiconBuild, TaxonomyError> {
    let seed_set = seeds.to_seed_set()?;
    let matrix = graph.to_matrix::<Score>();
    let result = labelprop::propagate(&matrix, graph.words(), graph.domains(), &seed_set, config)?;
    let labels = labelprop::assign_labels(&result.arrays.domain_scores, graph.domains(), config.tie_order);

    let mut entries = BTreeMap::new();
    for (idx, domain) in graph.domains().iter().enumerate() {
        let provenance = if seed_set.domain_seeds().contains_key(domain) {
            Provenance::Seed
        } else {
            Provenance::Propagated
        };
        let label = match provenance {
            Provenance::Seed => seed_set.domain_seeds()[domain],
            _ => labels[domain],
        };
        entries.insert(
            domain.clone(),
            LexiconEntry { label, provenance, scores: result.arrays.domain_scores[idx] },
        );
    }
    for (domain, (label, _reason)) in &overrides.entries {
        let scores = entries.get(domain).map(|e| e.scores).unwrap_or([0.0; 4]);
        entries.insert(
            domain.clone(),
            LexiconEntry { label: *label, provenance: Provenance::Override, scores },
        );
    }
    Ok(LexiconBuild { lexicon: DomainLexicon { entries }, propagation: result })
}

/// The `n` most-linked DO-labeled domains, for manual override review.
/// `usage` counts URL occurrences per domain.
pub fn rank_donation_overrides(
    lexicon: &DomainLexicon,
    usage: &BTreeMap<String, u64>,
    n: usize,
) -> Vec<(String, u64)> {
    let mut ranked: Vec<(String, u64)> = lexicon
        .entries
        .iter()
        .filter(|(_, e)| e.label == CategoryLabel::Do)
        .map(|(d, _)| (d.clone(), usage.get(d).copied().unwrap_or(0)))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

/// Labels exhibited by pre-extracted scan results. `NM` never appears.
pub fn label_scan<'a>(
    domain_keys: impl IntoIterator<Item = &'a str>,
    has_valid_crypto: bool,
    lexicon: &DomainLexicon,
) -> BTreeSet<CategoryLabel> {
    let mut labels = BTreeSet::new();
    for key in domain_keys {
        if let Some(label) = lexicon.label_of(key) {
            if label != CategoryLabel::Nm {
                labels.insert(label);
            }
        }
    }
    if has_valid_crypto {
        labels.insert(CategoryLabel::Cr);
    }
    labels
}

/// Labels exhibited by one video: the union of its domains' lexicon labels
/// (NM excluded), plus CR iff at least one checksum-valid address.
pub fn label_video(
    video: &VideoRecord,
    suffixes: &SuffixList,
    lexicon: &DomainLexicon,
    crypto: &[CryptoMatch],
) -> BTreeSet<CategoryLabel> {
    let mentions = textscan::extract_urls(&video.description, suffixes);
    label_scan(
        mentions.iter().map(|m| m.domain_key.as_str()),
        crypto.iter().any(|m| m.checksum_valid),
        lexicon,
    )
}

/// Union of `label_video` over a channel's videos in a period.
pub fn label_channel_period(
    videos: &[&VideoRecord],
    suffixes: &SuffixList,
    lexicon: &DomainLexicon,
) -> BTreeSet<CategoryLabel> {
    let mut labels = BTreeSet::new();
    for video in videos {
        let crypto = textscan::detect_crypto(&video.description);
        labels.extend(label_video(video, suffixes, lexicon, &crypto));
    }
    labels
}
