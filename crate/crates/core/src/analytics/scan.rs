//! Pre-scanned corpus: per-video URL mentions and checksum-valid addresses,
//! computed once and shared by the measurement ops.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{Datelike, NaiveDate};

use crate::corpus::VideoRecord;
use crate::taxonomy::{self, CategoryLabel, DomainLexicon};
use crate::textscan::{self, psl::SuffixList, Coin, CryptoConfig};

/// Scan results for one video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoScan {
    pub video_id: String,
    pub channel_id: String,
    pub upload_date: NaiveDate,
    pub category: String,
    pub view_count: Option<u64>,
    /// (raw_url, domain_key) per mention, in description order.
    pub url_mentions: Vec<(String, String)>,
    /// Checksum-valid addresses only.
    pub crypto: Vec<(Coin, String)>,
}

impl VideoScan {
    pub fn scan(record: &VideoRecord, suffixes: &SuffixList, config: &CryptoConfig) -> VideoScan {
        let url_mentions = textscan::extract_urls(&record.description, suffixes)
            .into_iter()
            .map(|m| (m.raw_url, m.domain_key))
            .collect();
        let crypto = textscan::detect_crypto_with(&record.description, config)
            .into_iter()
            .filter(|m| m.checksum_valid)
            .map(|m| (m.coin, m.address))
            .collect();
        VideoScan {
            video_id: record.video_id.clone(),
            channel_id: record.channel_id.clone(),
            upload_date: record.upload_date,
            category: record.category.clone(),
            view_count: record.view_count,
            url_mentions,
            crypto,
        }
    }

    pub fn year(&self) -> i32 {
        self.upload_date.year()
    }

    /// Monetization labels this video exhibits (never NM).
    pub fn labels(&self, lexicon: &DomainLexicon) -> BTreeSet<CategoryLabel> {
        taxonomy::label_scan(
            self.url_mentions.iter().map(|(_, key)| key.as_str()),
            !self.crypto.is_empty(),
            lexicon,
        )
    }

    /// Count of distinct monetization-labeled URLs plus distinct valid
    /// addresses in this description.
    pub fn distinct_monetized_links(&self, lexicon: &DomainLexicon) -> u64 {
        let urls: HashSet<&str> = self
            .url_mentions
            .iter()
            .filter(|(_, key)| {
                matches!(
                    lexicon.label_of(key),
                    Some(label) if label != CategoryLabel::Nm
                )
            })
            .map(|(raw, _)| raw.as_str())
            .collect();
        let addresses: HashSet<&str> = self.crypto.iter().map(|(_, a)| a.as_str()).collect();
        (urls.len() + addresses.len()) as u64
    }
}

/// A fully scanned corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusScan {
    pub videos: Vec<VideoScan>,
}

impl CorpusScan {
    pub fn scan(records: &[VideoRecord], suffixes: &SuffixList) -> CorpusScan {
        Self::scan_with(records, suffixes, &CryptoConfig::default())
    }

    pub fn scan_with(
        records: &[VideoRecord],
        suffixes: &SuffixList,
        config: &CryptoConfig,
    ) -> CorpusScan {
        CorpusScan {
            videos: records.iter().map(|r| VideoScan::scan(r, suffixes, config)).collect(),
        }
    }

    pub fn channel_ids(&self) -> BTreeSet<&str> {
        self.videos.iter().map(|v| v.channel_id.as_str()).collect()
    }

    /// URL occurrences per domain over the whole corpus.
    pub fn usage_counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        for video in &self.videos {
            for (_, key) in &video.url_mentions {
                *counts.entry(key.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Valid-address occurrences per coin.
    pub fn coin_counts(&self) -> BTreeMap<Coin, u64> {
        let mut counts = BTreeMap::new();
        for video in &self.videos {
            for (coin, _) in &video.crypto {
                *counts.entry(*coin).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Per-channel union of video labels.
    pub fn channel_labels(&self, lexicon: &DomainLexicon) -> BTreeMap<&str, BTreeSet<CategoryLabel>> {
        let mut map: BTreeMap<&str, BTreeSet<CategoryLabel>> = BTreeMap::new();
        for video in &self.videos {
            map.entry(video.channel_id.as_str())
                .or_default()
                .extend(video.labels(lexicon));
        }
        map
    }
}
