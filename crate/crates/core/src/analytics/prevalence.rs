//! Prevalence, top-domain, adoption-series, and decile measurements.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::scan::CorpusScan;
use super::stats::{bucket_of, quantile_boundaries, wilson_ci};
use super::AnalyticsError;
use crate::corpus::ChannelRecord;
use crate::taxonomy::{CategoryLabel, DomainLexicon};
use crate::textscan::Coin;

/// Report column order: PC, AM, DO, CR, then Any at index 4.
pub const STRATEGY_ORDER: [CategoryLabel; 4] =
    [CategoryLabel::Pc, CategoryLabel::Am, CategoryLabel::Do, CategoryLabel::Cr];

pub const STRATEGY_NAMES: [&str; 5] = ["PC", "AM", "DO", "CR", "Any"];

fn share_pct(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

fn tally(labels: &BTreeSet<CategoryLabel>, counts: &mut [u64; 5]) {
    for (i, strategy) in STRATEGY_ORDER.iter().enumerate() {
        if labels.contains(strategy) {
            counts[i] += 1;
        }
    }
    if !labels.is_empty() {
        counts[4] += 1;
    }
}

/// One row of the prevalence table. Shares are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub category: String,
    pub video_share: [f64; 5],
    pub video_count: u64,
    pub channel_share: [f64; 5],
    pub channel_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceReport {
    /// Per-category rows sorted by name, then the aggregate "All" row.
    pub rows: Vec<PrevalenceRow>,
}

/// Video- and channel-level prevalence per content category and overall.
/// A video counts once per strategy it exhibits; a channel counts if at
/// least one of its videos does.
pub fn prevalence_table(
    scan: &CorpusScan,
    profiles: &BTreeMap<String, ChannelRecord>,
    lexicon: &DomainLexicon,
) -> Result<PrevalenceReport, AnalyticsError> {
    if scan.videos.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    struct Cell {
        video_hits: [u64; 5],
        videos: u64,
        channel_hits: [u64; 5],
        channels: u64,
    }
    impl Cell {
        fn new() -> Cell {
            Cell { video_hits: [0; 5], videos: 0, channel_hits: [0; 5], channels: 0 }
        }
    }
    let mut cells: BTreeMap<String, Cell> = BTreeMap::new();
    let mut all = Cell::new();

    for video in &scan.videos {
        let labels = video.labels(lexicon);
        let cell = cells.entry(video.category.clone()).or_insert_with(Cell::new);
        cell.videos += 1;
        all.videos += 1;
        tally(&labels, &mut cell.video_hits);
        tally(&labels, &mut all.video_hits);
    }

    let channel_labels = scan.channel_labels(lexicon);
    for (channel_id, labels) in &channel_labels {
        let category = profiles
            .get(*channel_id)
            .map(|p| p.derived_category.clone())
            .unwrap_or_default();
        let cell = cells.entry(category).or_insert_with(Cell::new);
        cell.channels += 1;
        all.channels += 1;
        tally(labels, &mut cell.channel_hits);
        tally(labels, &mut all.channel_hits);
    }

    let mut rows = Vec::with_capacity(cells.len() + 1);
    let to_row = |category: String, cell: &Cell| PrevalenceRow {
        category,
        video_share: std::array::from_fn(|i| share_pct(cell.video_hits[i], cell.videos)),
        video_count: cell.videos,
        channel_share: std::array::from_fn(|i| share_pct(cell.channel_hits[i], cell.channels)),
        channel_count: cell.channels,
    };
    for (category, cell) in &cells {
        rows.push(to_row(category.clone(), cell));
    }
    rows.push(to_row("All".to_string(), &all));
    Ok(PrevalenceReport { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopDomainRow {
    pub strategy: CategoryLabel,
    /// Domain key, or coin ticker for CR.
    pub name: String,
    pub occurrences: u64,
    /// Percent of all channels linking/posting it.
    pub channel_share: f64,
    /// Percent of the strategy's total usages.
    pub employment_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopDomainReport {
    pub rows: Vec<TopDomainRow>,
}

/// Top `n` domains (or coins) per strategy by occurrence count.
pub fn top_domains(scan: &CorpusScan, lexicon: &DomainLexicon, n: usize) -> TopDomainReport {
    let total_channels = scan.channel_ids().len() as u64;

    // per monetization domain: occurrences and distinct channels
    let mut occurrences: BTreeMap<&str, u64> = BTreeMap::new();
    let mut channels: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut coin_occ: BTreeMap<Coin, u64> = BTreeMap::new();
    let mut coin_channels: BTreeMap<Coin, BTreeSet<&str>> = BTreeMap::new();
    for video in &scan.videos {
        for (_, key) in &video.url_mentions {
            match lexicon.label_of(key) {
                Some(label) if label != CategoryLabel::Nm && label != CategoryLabel::Cr => {
                    *occurrences.entry(key.as_str()).or_insert(0) += 1;
                    channels.entry(key.as_str()).or_default().insert(&video.channel_id);
                }
                _ => {}
            }
        }
        for (coin, _) in &video.crypto {
            *coin_occ.entry(*coin).or_insert(0) += 1;
            coin_channels.entry(*coin).or_default().insert(&video.channel_id);
        }
    }

    let mut strategy_totals: BTreeMap<CategoryLabel, u64> = BTreeMap::new();
    for (key, occ) in &occurrences {
        let label = lexicon.label_of(key).expect("counted above");
        *strategy_totals.entry(label).or_insert(0) += occ;
    }
    let cr_total: u64 = coin_occ.values().sum();

    let mut rows = Vec::new();
    for strategy in STRATEGY_ORDER {
        if strategy == CategoryLabel::Cr {
            let mut coins: Vec<(Coin, u64)> = coin_occ.iter().map(|(c, o)| (*c, *o)).collect();
            coins.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.as_str().cmp(b.0.as_str())));
            for (coin, occ) in coins.into_iter().take(n) {
                rows.push(TopDomainRow {
                    strategy,
                    name: coin.as_str().to_string(),
                    occurrences: occ,
                    channel_share: share_pct(coin_channels[&coin].len() as u64, total_channels),
                    employment_rate: share_pct(occ, cr_total),
                });
            }
        } else {
            let mut domains: Vec<(&str, u64)> = occurrences
                .iter()
                .filter(|(key, _)| lexicon.label_of(key) == Some(strategy))
                .map(|(key, occ)| (*key, *occ))
                .collect();
            domains.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            let total = strategy_totals.get(&strategy).copied().unwrap_or(0);
            for (key, occ) in domains.into_iter().take(n) {
                rows.push(TopDomainRow {
                    strategy,
                    name: key.to_string(),
                    occurrences: occ,
                    channel_share: share_pct(channels[key].len() as u64, total_channels),
                    employment_rate: share_pct(occ, total),
                });
            }
        }
    }
    TopDomainReport { rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionYearRow {
    pub year: i32,
    /// Percent of the cohort's channels using each strategy that year
    /// (PC, AM, DO, CR, Any).
    pub share: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSeries {
    pub label: String,
    pub channel_count: u64,
    pub years: Vec<AdoptionYearRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionSeries {
    pub cohorts: Vec<CohortSeries>,
}

/// Per-year channel adoption shares, optionally split into first-upload
/// cohorts over half-open year intervals `[lo, hi)`. A channel counts in
/// year y iff one of its videos uploaded in y carries the strategy; the
/// denominator is the cohort size.
pub fn adoption_series(
    scan: &CorpusScan,
    profiles: &BTreeMap<String, ChannelRecord>,
    lexicon: &DomainLexicon,
    cohorts: Option<&[(i32, i32)]>,
) -> AdoptionSeries {
    if scan.videos.is_empty() {
        return AdoptionSeries { cohorts: Vec::new() };
    }
    let mut year_labels: BTreeMap<(&str, i32), BTreeSet<CategoryLabel>> = BTreeMap::new();
    let mut min_year = i32::MAX;
    let mut max_year = i32::MIN;
    for video in &scan.videos {
        let year = video.year();
        min_year = min_year.min(year);
        max_year = max_year.max(year);
        year_labels
            .entry((video.channel_id.as_str(), year))
            .or_default()
            .extend(video.labels(lexicon));
    }

    use chrono::Datelike;
    let cohort_defs: Vec<(String, Option<(i32, i32)>)> = match cohorts {
        None => vec![("all".to_string(), None)],
        Some(bounds) => bounds
            .iter()
            .map(|(lo, hi)| (format!("[{lo},{hi})"), Some((*lo, *hi))))
            .collect(),
    };

    let mut series = Vec::new();
    for (label, bounds) in cohort_defs {
        let members: BTreeSet<&str> = profiles
            .values()
            .filter(|p| match bounds {
                None => true,
                Some((lo, hi)) => {
                    let y = p.first_upload.year();
                    y >= lo && y < hi
                }
            })
            .map(|p| p.channel_id.as_str())
            .collect();
        let mut years = Vec::new();
        for year in min_year..=max_year {
            let mut counts = [0u64; 5];
            for channel in &members {
                if let Some(labels) = year_labels.get(&(*channel, year)) {
                    tally(labels, &mut counts);
                }
            }
            years.push(AdoptionYearRow {
                year,
                share: std::array::from_fn(|i| share_pct(counts[i], members.len() as u64)),
            });
        }
        series.push(CohortSeries { label, channel_count: members.len() as u64, years });
    }
    AdoptionSeries { cohorts: series }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecileMetric {
    Subscribers,
    Videos,
    Views,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileSpec {
    pub metric: DecileMetric,
    /// Explicit ascending cut points; computed from the data when absent.
    pub boundaries: Option<Vec<f64>>,
    /// 10 deciles by default; 5 and 20 work the same way.
    pub groups: usize,
}

impl DecileSpec {
    pub fn deciles(metric: DecileMetric) -> DecileSpec {
        DecileSpec { metric, boundaries: None, groups: 10 }
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.groups < 2 {
            return Err(AnalyticsError::InvalidSpec("need at least 2 groups".to_string()));
        }
        if let Some(bounds) = &self.boundaries {
            if bounds.len() != self.groups - 1 {
                return Err(AnalyticsError::InvalidSpec(format!(
                    "{} groups need {} boundaries, got {}",
                    self.groups,
                    self.groups - 1,
                    bounds.len()
                )));
            }
            if bounds.windows(2).any(|w| w[0] >= w[1]) {
                return Err(AnalyticsError::InvalidSpec(
                    "boundaries must be strictly ascending".to_string(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileGroupRow {
    pub group: usize,
    pub channels: u64,
    /// Adopting channels per strategy (PC, AM, DO, CR, Any).
    pub adopters: [u64; 5],
    /// Percent, with Wilson 95% bounds (also percent).
    pub share: [f64; 5],
    pub ci_low: [f64; 5],
    pub ci_high: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileReport {
    pub metric: DecileMetric,
    pub boundaries: Vec<f64>,
    pub groups: Vec<DecileGroupRow>,
}

/// Bucket channels by a popularity/productivity metric and measure per-bucket
/// adoption with Wilson 95% intervals.
pub fn adoption_by_decile(
    scan: &CorpusScan,
    profiles: &BTreeMap<String, ChannelRecord>,
    lexicon: &DomainLexicon,
    spec: &DecileSpec,
) -> Result<DecileReport, AnalyticsError> {
    spec.validate()?;

    let mut metric_by_channel: BTreeMap<&str, f64> = BTreeMap::new();
    match spec.metric {
        DecileMetric::Subscribers => {
            for channel in scan.channel_ids() {
                let subs = profiles
                    .get(channel)
                    .and_then(|p| p.subscriber_count)
                    .ok_or_else(|| AnalyticsError::MissingMetric(channel.to_string()))?;
                metric_by_channel.insert(channel, subs as f64);
            }
        }
        DecileMetric::Videos => {
            for video in &scan.videos {
                *metric_by_channel.entry(video.channel_id.as_str()).or_insert(0.0) += 1.0;
            }
        }
        DecileMetric::Views => {
            for video in &scan.videos {
                let views = video
                    .view_count
                    .ok_or_else(|| AnalyticsError::MissingMetric(video.channel_id.clone()))?;
                *metric_by_channel.entry(video.channel_id.as_str()).or_insert(0.0) +=
                    views as f64;
            }
        }
    }

    let boundaries = match &spec.boundaries {
        Some(bounds) => bounds.clone(),
        None => {
            let mut values: Vec<f64> = metric_by_channel.values().copied().collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            quantile_boundaries(&values, spec.groups)
        }
    };

    let channel_labels = scan.channel_labels(lexicon);
    let mut rows: Vec<DecileGroupRow> = (0..spec.groups)
        .map(|group| DecileGroupRow {
            group,
            channels: 0,
            adopters: [0; 5],
            share: [0.0; 5],
            ci_low: [0.0; 5],
            ci_high: [0.0; 5],
        })
        .collect();
    for (channel, value) in &metric_by_channel {
        let bucket = bucket_of(*value, &boundaries).min(spec.groups - 1);
        rows[bucket].channels += 1;
        if let Some(labels) = channel_labels.get(channel) {
            tally(labels, &mut rows[bucket].adopters);
        }
    }
    for row in &mut rows {
        for i in 0..5 {
            row.share[i] = share_pct(row.adopters[i], row.channels);
            if row.channels > 0 {
                let (lo, hi) = wilson_ci(row.adopters[i], row.channels, 0.95)?;
                row.ci_low[i] = 100.0 * lo;
                row.ci_high[i] = 100.0 * hi;
            }
        }
    }
    Ok(DecileReport { metric: spec.metric, boundaries, groups: rows })
}
