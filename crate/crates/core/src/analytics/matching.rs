//! Stratified matched pairs, productivity and problematic-channel contrasts,
//! donation-domain shares, and earnings histograms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::scan::CorpusScan;
use super::stats::{
    bucket_of, mann_whitney_u, quantile_boundaries, wilson_ci, StatResult,
};
use super::AnalyticsError;
use crate::corpus::ChannelRecord;
use crate::taxonomy::{CategoryLabel, DomainLexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Month,
    Year,
}

/// Period index: months since year 0 for monthly granularity, the calendar
/// year otherwise.
pub fn period_of(date: chrono::NaiveDate, granularity: Granularity) -> i32 {
    match granularity {
        Granularity::Month => date.year() * 12 + date.month0() as i32,
        Granularity::Year => date.year(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MatchDesign {
    /// Treated channels first adopt in `[x_min, x_max]`; controls never
    /// adopt; both must share the treated channel's category and all strata
    /// over the `window` periods strictly before x.
    AdoptionSplit { x_min: i32, x_max: i32 },
    /// Treated channels are the source-tagged problematic ones; controls are
    /// general channels within `control_categories`; strata must match over
    /// the listed periods, plus the first-upload period when requested.
    FixedPeriods {
        periods: Vec<i32>,
        control_categories: BTreeSet<String>,
        match_first_period: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSpec {
    pub granularity: Granularity,
    /// Periods strictly before x that must agree (AdoptionSplit).
    pub window: usize,
    /// Strata per metric (10 deciles).
    pub groups: usize,
    /// Per-period top trim on each metric.
    pub trim_fraction: f64,
    pub design: MatchDesign,
}

impl MatchSpec {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.window < 1 {
            return Err(AnalyticsError::InvalidSpec("window must be >= 1".to_string()));
        }
        if self.groups < 2 {
            return Err(AnalyticsError::InvalidSpec("need at least 2 strata".to_string()));
        }
        if !(0.0..0.5).contains(&self.trim_fraction) {
            return Err(AnalyticsError::InvalidSpec(
                "trim fraction must be in [0, 0.5)".to_string(),
            ));
        }
        if let MatchDesign::FixedPeriods { periods, .. } = &self.design {
            if periods.is_empty() {
                return Err(AnalyticsError::InvalidSpec("no match periods given".to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub treated: String,
    pub control: String,
    /// Adoption period for AdoptionSplit; the first listed period otherwise.
    pub x: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchDiagnostics {
    pub treated_candidates: u64,
    pub control_pool: u64,
    pub matched: u64,
    pub unmatched_treated: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPairSet {
    pub pairs: Vec<MatchedPair>,
    pub diagnostics: MatchDiagnostics,
}

impl MatchedPairSet {
    /// Tab-separated pairs plus a trailing diagnostics comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for pair in &self.pairs {
            out.push_str(&format!("{}\t{}\t{}\n", pair.treated, pair.control, pair.x));
        }
        out.push_str(&format!(
            "# treated={} controls={} matched={} unmatched={}\n",
            self.diagnostics.treated_candidates,
            self.diagnostics.control_pool,
            self.diagnostics.matched,
            self.diagnostics.unmatched_treated,
        ));
        out
    }
}

/// Per-channel, per-period activity: videos produced and views received by
/// videos uploaded in the period.
#[derive(Debug, Clone, Default)]
pub struct ActivityTable {
    per_channel: HashMap<String, BTreeMap<i32, (u64, u64)>>,
}

impl ActivityTable {
    pub fn build(scan: &CorpusScan, granularity: Granularity) -> ActivityTable {
        let mut per_channel: HashMap<String, BTreeMap<i32, (u64, u64)>> = HashMap::new();
        for video in &scan.videos {
            let period = period_of(video.upload_date, granularity);
            let cell = per_channel
                .entry(video.channel_id.clone())
                .or_default()
                .entry(period)
                .or_insert((0, 0));
            cell.0 += 1;
            cell.1 += video.view_count.unwrap_or(0);
        }
        ActivityTable { per_channel }
    }

    pub fn activity(&self, channel: &str, period: i32) -> (u64, u64) {
        self.per_channel
            .get(channel)
            .and_then(|periods| periods.get(&period))
            .copied()
            .unwrap_or((0, 0))
    }

    pub fn videos(&self, channel: &str, period: i32) -> u64 {
        self.activity(channel, period).0
    }

    fn all_periods(&self) -> BTreeSet<i32> {
        self.per_channel.values().flat_map(|m| m.keys().copied()).collect()
    }
}

/// Value above which a metric is trimmed for a period: the (1 - fraction)
/// quantile; entries strictly above it are discarded, ties retained.
fn trim_threshold(sorted: &[u64], fraction: f64) -> u64 {
    if fraction <= 0.0 || sorted.is_empty() {
        return u64::MAX;
    }
    let n = sorted.len() as f64;
    let rank = ((1.0 - fraction) * n).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Per-period strata: channel -> (video decile, view decile), holding only
/// channels active in the period (>= 1 video and >= 1 view) that survive the
/// per-metric top trim.
#[derive(Debug, Clone, Default)]
pub struct StrataIndex {
    per_period: HashMap<i32, HashMap<String, (usize, usize)>>,
}

impl StrataIndex {
    pub fn build(activity: &ActivityTable, groups: usize, trim_fraction: f64) -> StrataIndex {
        let mut per_period = HashMap::new();
        for period in activity.all_periods() {
            let mut active: Vec<(&str, u64, u64)> = activity
                .per_channel
                .iter()
                .filter_map(|(channel, periods)| {
                    periods.get(&period).and_then(|(videos, views)| {
                        (*videos >= 1 && *views >= 1)
                            .then_some((channel.as_str(), *videos, *views))
                    })
                })
                .collect();
            active.sort_by(|a, b| a.0.cmp(b.0));

            let mut videos_sorted: Vec<u64> = active.iter().map(|(_, v, _)| *v).collect();
            videos_sorted.sort_unstable();
            let mut views_sorted: Vec<u64> = active.iter().map(|(_, _, v)| *v).collect();
            views_sorted.sort_unstable();
            let video_cap = trim_threshold(&videos_sorted, trim_fraction);
            let view_cap = trim_threshold(&views_sorted, trim_fraction);

            let kept: Vec<(&str, u64, u64)> = active
                .into_iter()
                .filter(|(_, videos, views)| *videos <= video_cap && *views <= view_cap)
                .collect();
            let mut videos_kept: Vec<u64> = kept.iter().map(|(_, v, _)| *v).collect();
            videos_kept.sort_unstable();
            let mut views_kept: Vec<u64> = kept.iter().map(|(_, _, v)| *v).collect();
            views_kept.sort_unstable();
            let video_bounds = quantile_boundaries(&videos_kept, groups);
            let view_bounds = quantile_boundaries(&views_kept, groups);

            let strata: HashMap<String, (usize, usize)> = kept
                .into_iter()
                .map(|(channel, videos, views)| {
                    (
                        channel.to_string(),
                        (bucket_of(videos, &video_bounds), bucket_of(views, &view_bounds)),
                    )
                })
                .collect();
            per_period.insert(period, strata);
        }
        StrataIndex { per_period }
    }

    pub fn stratum(&self, channel: &str, period: i32) -> Option<(usize, usize)> {
        self.per_period.get(&period).and_then(|m| m.get(channel)).copied()
    }
}

/// First period in which a channel exhibits any monetization strategy.
pub fn first_adoption_periods(
    scan: &CorpusScan,
    lexicon: &DomainLexicon,
    granularity: Granularity,
) -> BTreeMap<String, i32> {
    let mut first: BTreeMap<String, i32> = BTreeMap::new();
    for video in &scan.videos {
        if video.labels(lexicon).is_empty() {
            continue;
        }
        let period = period_of(video.upload_date, granularity);
        first
            .entry(video.channel_id.clone())
            .and_modify(|p| *p = (*p).min(period))
            .or_insert(period);
    }
    first
}

/// Greedy 1:1 matching without replacement. Treated channels are scanned in
/// (x, channel_id) order and take the lexicographically smallest eligible
/// control satisfying every constraint.
pub fn stratified_match(
    scan: &CorpusScan,
    profiles: &BTreeMap<String, ChannelRecord>,
    lexicon: &DomainLexicon,
    spec: &MatchSpec,
) -> Result<MatchedPairSet, AnalyticsError> {
    spec.validate()?;
    let activity = ActivityTable::build(scan, spec.granularity);
    let strata = StrataIndex::build(&activity, spec.groups, spec.trim_fraction);
    let adoption = first_adoption_periods(scan, lexicon, spec.granularity);

    // (treated, x, required periods)
    let mut treated: Vec<(String, i32, Vec<i32>)> = Vec::new();
    let mut controls: Vec<&str>;

    match &spec.design {
        MatchDesign::AdoptionSplit { x_min, x_max } => {
            for (channel, x) in &adoption {
                if x >= x_min && x <= x_max {
                    let window: Vec<i32> =
                        (1..=spec.window as i32).map(|back| x - back).collect();
                    treated.push((channel.clone(), *x, window));
                }
            }
            treated.sort_by(|a, b| (a.1, a.0.as_str()).cmp(&(b.1, b.0.as_str())));
            controls = profiles
                .keys()
                .filter(|c| !adoption.contains_key(*c))
                .map(|c| c.as_str())
                .collect();
        }
        MatchDesign::FixedPeriods { periods, control_categories, .. } => {
            for (channel, profile) in profiles {
                if profile.source_tag.is_problematic() {
                    treated.push((channel.clone(), periods[0], periods.clone()));
                }
            }
            treated.sort_by(|a, b| a.0.cmp(&b.0));
            controls = profiles
                .values()
                .filter(|p| {
                    !p.source_tag.is_problematic()
                        && control_categories.contains(&p.derived_category)
                })
                .map(|p| p.channel_id.as_str())
                .collect();
        }
    }
    controls.sort_unstable();

    let eligible = |treated_id: &str, control_id: &str, periods: &[i32]| -> bool {
        let (Some(t_profile), Some(c_profile)) =
            (profiles.get(treated_id), profiles.get(control_id))
        else {
            return false;
        };
        match &spec.design {
            MatchDesign::AdoptionSplit { .. } => {
                if t_profile.derived_category != c_profile.derived_category {
                    return false;
                }
            }
            MatchDesign::FixedPeriods { match_first_period, .. } => {
                if *match_first_period
                    && period_of(t_profile.first_upload, spec.granularity)
                        != period_of(c_profile.first_upload, spec.granularity)
                {
                    return false;
                }
            }
        }
        periods.iter().all(|p| {
            match (strata.stratum(treated_id, *p), strata.stratum(control_id, *p)) {
                (Some(t), Some(c)) => t == c,
                _ => false,
            }
        })
    };

    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut pairs = Vec::new();
    let mut unmatched = 0u64;
    for (treated_id, x, periods) in &treated {
        let found = controls
            .iter()
            .find(|c| !used.contains(**c) && eligible(treated_id, c, periods));
        match found {
            Some(control) => {
                used.insert(control);
                pairs.push(MatchedPair {
                    treated: treated_id.clone(),
                    control: control.to_string(),
                    x: *x,
                });
            }
            None => unmatched += 1,
        }
    }

    Ok(MatchedPairSet {
        diagnostics: MatchDiagnostics {
            treated_candidates: treated.len() as u64,
            control_pool: controls.len() as u64,
            matched: pairs.len() as u64,
            unmatched_treated: unmatched,
        },
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastPoint {
    /// Relative period offset from x (0 = adoption period).
    pub offset: i32,
    pub treated_mean: f64,
    pub treated_ci: (f64, f64),
    pub control_mean: f64,
    pub control_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductivityContrast {
    pub points: Vec<ContrastPoint>,
    /// Mean per-channel video total over offsets 1..=12.
    pub treated_total: f64,
    pub control_total: f64,
    pub ratio: f64,
}

fn mean_ci(values: &[f64]) -> (f64, (f64, f64)) {
    if values.is_empty() {
        return (0.0, (0.0, 0.0));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, (mean, mean));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let half = 1.959963984540054 * (var / n).sqrt();
    (mean, (mean - half, mean + half))
}

/// Mean videos per group per relative period, plus the 1..=12 aggregate and
/// its treated/control ratio.
pub fn productivity_contrast(
    pairs: &MatchedPairSet,
    activity: &ActivityTable,
    window: usize,
    horizon: usize,
) -> ProductivityContrast {
    let mut points = Vec::new();
    for offset in -(window as i32)..=(horizon as i32) {
        let treated: Vec<f64> = pairs
            .pairs
            .iter()
            .map(|p| activity.videos(&p.treated, p.x + offset) as f64)
            .collect();
        let control: Vec<f64> = pairs
            .pairs
            .iter()
            .map(|p| activity.videos(&p.control, p.x + offset) as f64)
            .collect();
        let (treated_mean, treated_ci) = mean_ci(&treated);
        let (control_mean, control_ci) = mean_ci(&control);
        points.push(ContrastPoint { offset, treated_mean, treated_ci, control_mean, control_ci });
    }

    let total = |channel_of: &dyn Fn(&MatchedPair) -> &str| -> f64 {
        if pairs.pairs.is_empty() {
            return 0.0;
        }
        pairs
            .pairs
            .iter()
            .map(|p| {
                (1..=12).map(|m| activity.videos(channel_of(p), p.x + m) as f64).sum::<f64>()
            })
            .sum::<f64>()
            / pairs.pairs.len() as f64
    };
    let treated_total = total(&|p: &MatchedPair| p.treated.as_str());
    let control_total = total(&|p: &MatchedPair| p.control.as_str());
    let ratio = if control_total > 0.0 { treated_total / control_total } else { f64::NAN };
    ProductivityContrast { points, treated_total, control_total, ratio }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionShareRow {
    pub strategy: String,
    pub treated_pct: f64,
    pub treated_ci: (f64, f64),
    pub control_pct: f64,
    pub control_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub bucket: String,
    pub treated_pct: f64,
    pub control_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Panel (a): adoption shares with Wilson 95% intervals.
    pub adoption: Vec<AdoptionShareRow>,
    /// Panel (b): pooled quartile cut points over monetized-video shares.
    pub share_cut_points: Vec<f64>,
    pub share_buckets: Vec<BucketRow>,
    pub share_test: StatResult,
    /// Panel (c): per-channel median distinct monetization links per video.
    pub link_buckets: Vec<BucketRow>,
    pub link_test: StatResult,
}

pub const DEFAULT_LINK_BUCKET_BOUNDS: [f64; 3] = [2.0, 5.0, 10.0];

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn link_bucket_label(index: usize, bounds: &[f64]) -> String {
    if index == 0 {
        return "0".to_string();
    }
    let lo = if index == 1 { 1.0 } else { bounds[index - 2] + 1.0 };
    if index <= bounds.len() {
        let hi = bounds[index - 1];
        if lo == hi {
            format!("{lo}")
        } else {
            format!("{lo}-{hi}")
        }
    } else {
        format!(">{}", bounds[bounds.len() - 1])
    }
}

fn link_bucket_index(value: f64, bounds: &[f64]) -> usize {
    if value == 0.0 {
        return 0;
    }
    for (i, bound) in bounds.iter().enumerate() {
        if value <= *bound {
            return i + 1;
        }
    }
    bounds.len() + 1
}

/// Compare the treated and control groups of a matched-pair set: adoption
/// shares, monetized-video shares bucketed by pooled quartiles, and median
/// distinct links per video, with Mann-Whitney tests on the two latter.
pub fn problematic_contrast(
    scan: &CorpusScan,
    pairs: &MatchedPairSet,
    lexicon: &DomainLexicon,
    link_bounds: &[f64],
) -> Result<ComparisonReport, AnalyticsError> {
    let treated_ids: BTreeSet<&str> = pairs.pairs.iter().map(|p| p.treated.as_str()).collect();
    let control_ids: BTreeSet<&str> = pairs.pairs.iter().map(|p| p.control.as_str()).collect();
    if treated_ids.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }

    // per-channel aggregates over the whole corpus
    #[derive(Default)]
    struct ChannelAgg {
        videos: u64,
        monetized: u64,
        labels: BTreeSet<CategoryLabel>,
        links_per_video: Vec<f64>,
    }
    let mut agg: BTreeMap<&str, ChannelAgg> = BTreeMap::new();
    for video in &scan.videos {
        let id = video.channel_id.as_str();
        if !treated_ids.contains(id) && !control_ids.contains(id) {
            continue;
        }
        let labels = video.labels(lexicon);
        let entry = agg.entry(id).or_default();
        entry.videos += 1;
        if !labels.is_empty() {
            entry.monetized += 1;
        }
        entry.labels.extend(labels);
        entry.links_per_video.push(video.distinct_monetized_links(lexicon) as f64);
    }

    let share_of = |id: &str| -> f64 {
        let a = &agg[id];
        if a.videos == 0 {
            0.0
        } else {
            a.monetized as f64 / a.videos as f64
        }
    };
    let median_links_of = |id: &str| -> f64 {
        let mut v = agg[id].links_per_video.clone();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        median(&v)
    };

    // panel (a): adoption shares
    let mut adoption = Vec::new();
    let strategies: [(&str, Box<dyn Fn(&ChannelAgg) -> bool>); 5] = [
        ("PC", Box::new(|a| a.labels.contains(&CategoryLabel::Pc))),
        ("AM", Box::new(|a| a.labels.contains(&CategoryLabel::Am))),
        ("DO", Box::new(|a| a.labels.contains(&CategoryLabel::Do))),
        ("CR", Box::new(|a| a.labels.contains(&CategoryLabel::Cr))),
        ("Any", Box::new(|a| !a.labels.is_empty())),
    ];
    for (name, predicate) in &strategies {
        let count_in = |ids: &BTreeSet<&str>| -> u64 {
            ids.iter().filter(|id| agg.get(*id).map(predicate.as_ref()).unwrap_or(false)).count()
                as u64
        };
        let t_hits = count_in(&treated_ids);
        let c_hits = count_in(&control_ids);
        let (t_lo, t_hi) = wilson_ci(t_hits, treated_ids.len() as u64, 0.95)?;
        let (c_lo, c_hi) = wilson_ci(c_hits, control_ids.len() as u64, 0.95)?;
        adoption.push(AdoptionShareRow {
            strategy: name.to_string(),
            treated_pct: 100.0 * t_hits as f64 / treated_ids.len() as f64,
            treated_ci: (100.0 * t_lo, 100.0 * t_hi),
            control_pct: 100.0 * c_hits as f64 / control_ids.len() as f64,
            control_ci: (100.0 * c_lo, 100.0 * c_hi),
        });
    }

    // panel (b): monetized-video shares, pooled quartiles
    let treated_shares: Vec<f64> = treated_ids.iter().map(|id| share_of(id)).collect();
    let control_shares: Vec<f64> = control_ids.iter().map(|id| share_of(id)).collect();
    let mut pooled: Vec<f64> = treated_shares.iter().chain(control_shares.iter()).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let share_cut_points: Vec<f64> = quantile_boundaries(&pooled, 4);
    let bucket_pct = |values: &[f64]| -> Vec<f64> {
        let mut counts = vec![0u64; 4];
        for v in values {
            counts[bucket_of(*v, &share_cut_points).min(3)] += 1;
        }
        counts.iter().map(|c| 100.0 * *c as f64 / values.len().max(1) as f64).collect()
    };
    let treated_bucket_pct = bucket_pct(&treated_shares);
    let control_bucket_pct = bucket_pct(&control_shares);
    let share_buckets = (0..4)
        .map(|i| BucketRow {
            bucket: format!("Q{}", i + 1),
            treated_pct: treated_bucket_pct[i],
            control_pct: control_bucket_pct[i],
        })
        .collect();
    let share_test = mann_whitney_u(&treated_shares, &control_shares)?;

    // panel (c): median distinct links per video
    let treated_links: Vec<f64> = treated_ids.iter().map(|id| median_links_of(id)).collect();
    let control_links: Vec<f64> = control_ids.iter().map(|id| median_links_of(id)).collect();
    let n_buckets = link_bounds.len() + 2;
    let link_pct = |values: &[f64]| -> Vec<f64> {
        let mut counts = vec![0u64; n_buckets];
        for v in values {
            counts[link_bucket_index(*v, link_bounds)] += 1;
        }
        counts.iter().map(|c| 100.0 * *c as f64 / values.len().max(1) as f64).collect()
    };
    let treated_link_pct = link_pct(&treated_links);
    let control_link_pct = link_pct(&control_links);
    let link_buckets = (0..n_buckets)
        .map(|i| BucketRow {
            bucket: link_bucket_label(i, link_bounds),
            treated_pct: treated_link_pct[i],
            control_pct: control_link_pct[i],
        })
        .collect();
    let link_test = mann_whitney_u(&treated_links, &control_links)?;

    Ok(ComparisonReport {
        adoption,
        share_cut_points,
        share_buckets,
        share_test,
        link_buckets,
        link_test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonationShareRow {
    pub domain: String,
    pub total_channels: u64,
    pub problematic_channels: u64,
    pub share_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonationShareReport {
    /// Problematic share among all channels that use any DO domain.
    pub baseline_pct: f64,
    pub rows: Vec<DonationShareRow>,
}

/// Per-DO-domain problematic usage share, highest first. A domain is listed
/// when used by at least `min_channels` channels OR at least
/// `min_problematic` problematic channels.
pub fn donation_domain_share(
    scan: &CorpusScan,
    profiles: &BTreeMap<String, ChannelRecord>,
    lexicon: &DomainLexicon,
    min_channels: u64,
    min_problematic: u64,
) -> DonationShareReport {
    let is_problematic = |channel: &str| {
        profiles.get(channel).map(|p| p.source_tag.is_problematic()).unwrap_or(false)
    };
    let mut users: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut any_do_users: BTreeSet<&str> = BTreeSet::new();
    for video in &scan.videos {
        for (_, key) in &video.url_mentions {
            if lexicon.label_of(key) == Some(CategoryLabel::Do) {
                users.entry(key.as_str()).or_default().insert(video.channel_id.as_str());
                any_do_users.insert(video.channel_id.as_str());
            }
        }
    }

    let baseline_hits = any_do_users.iter().filter(|c| is_problematic(c)).count() as u64;
    let baseline_pct = if any_do_users.is_empty() {
        0.0
    } else {
        100.0 * baseline_hits as f64 / any_do_users.len() as f64
    };

    let mut rows: Vec<DonationShareRow> = users
        .iter()
        .filter_map(|(domain, channels)| {
            let total = channels.len() as u64;
            let problematic = channels.iter().filter(|c| is_problematic(c)).count() as u64;
            (total >= min_channels || problematic >= min_problematic).then(|| DonationShareRow {
                domain: domain.to_string(),
                total_channels: total,
                problematic_channels: problematic,
                share_pct: 100.0 * problematic as f64 / total as f64,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        b.share_pct
            .partial_cmp(&a.share_pct)
            .unwrap()
            .then_with(|| a.domain.cmp(&b.domain))
    });
    DonationShareReport { baseline_pct, rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarningsSource {
    PatreonSnapshot,
    BtcChainSnapshot,
    EthChainSnapshot,
}

impl std::str::FromStr for EarningsSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "patreon_snapshot" => Ok(EarningsSource::PatreonSnapshot),
            "btc_chain_snapshot" => Ok(EarningsSource::BtcChainSnapshot),
            "eth_chain_snapshot" => Ok(EarningsSource::EthChainSnapshot),
            other => Err(format!("unknown earnings source `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarningsRecord {
    pub channel_id: String,
    pub source: EarningsSource,
    pub lifetime_usd: f64,
}

/// Parse the tab-separated snapshot form: channel_id, source, lifetime_usd.
pub fn parse_earnings(text: &str) -> Result<Vec<EarningsRecord>, AnalyticsError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(AnalyticsError::EarningsParse {
                line: line_no,
                message: format!("expected 3 tab-separated fields, got {}", parts.len()),
            });
        }
        let source: EarningsSource = parts[1]
            .parse()
            .map_err(|e| AnalyticsError::EarningsParse { line: line_no, message: e })?;
        let lifetime_usd: f64 = parts[2].parse().map_err(|e| AnalyticsError::EarningsParse {
            line: line_no,
            message: format!("bad amount `{}`: {e}", parts[2]),
        })?;
        if !(lifetime_usd >= 0.0) {
            return Err(AnalyticsError::EarningsParse {
                line: line_no,
                message: format!("negative amount {lifetime_usd}"),
            });
        }
        records.push(EarningsRecord {
            channel_id: parts[0].to_string(),
            source,
            lifetime_usd,
        });
    }
    Ok(records)
}

pub const EARNINGS_BUCKET_LABELS: [&str; 5] = ["0", "(0,1k]", "(1k,10k]", "(10k,100k]", ">100k"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarningsHistogram {
    pub buckets: [u64; 5],
    pub median: Option<f64>,
}

/// Histogram over {0, (0,1k], (1k,10k], (10k,100k], >100k} USD plus the
/// median over all records.
pub fn earnings_buckets(records: &[EarningsRecord]) -> EarningsHistogram {
    let mut buckets = [0u64; 5];
    for record in records {
        let v = record.lifetime_usd;
        let idx = if v == 0.0 {
            0
        } else if v <= 1_000.0 {
            1
        } else if v <= 10_000.0 {
            2
        } else if v <= 100_000.0 {
            3
        } else {
            4
        };
        buckets[idx] += 1;
    }
    let median = if records.is_empty() {
        None
    } else {
        let mut values: Vec<f64> = records.iter().map(|r| r.lifetime_usd).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(median(&values))
    };
    EarningsHistogram { buckets, median }
}
