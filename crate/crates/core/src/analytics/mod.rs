//! The measurement suite: prevalence, top domains, adoption series, deciles,
//! stratified matching, contrasts, donation-domain shares, earnings buckets,
//! validation sampling, and the statistics behind the figures.
//!
//! Everything here is a pure function over an immutable [`scan::CorpusScan`]
//! and lexicon snapshot; fixed seeds give bitwise-identical reports.

pub mod matching;
pub mod prevalence;
pub mod report;
pub mod scan;
pub mod stats;
pub mod validation;

use thiserror::Error;

pub use matching::{
    donation_domain_share, earnings_buckets, parse_earnings, problematic_contrast,
    productivity_contrast, stratified_match, ActivityTable, ComparisonReport,
    DonationShareReport, EarningsHistogram, EarningsRecord, EarningsSource, Granularity,
    MatchDesign, MatchSpec, MatchedPair, MatchedPairSet, ProductivityContrast, StrataIndex,
    DEFAULT_LINK_BUCKET_BOUNDS,
};
pub use prevalence::{
    adoption_by_decile, adoption_series, prevalence_table, top_domains, AdoptionSeries,
    DecileMetric, DecileReport, DecileSpec, PrevalenceReport, TopDomainReport, STRATEGY_NAMES,
    STRATEGY_ORDER,
};
pub use scan::{CorpusScan, VideoScan};
pub use stats::{
    cohen_kappa, mann_whitney_u, mann_whitney_u_with, wilson_ci, MwuMethod, StatResult,
    StatsError,
};
pub use validation::{
    confusion_matrix, validation_samples, ConfusionMatrix, SampleSizes, SampleStrategy,
    ValidationSample,
};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("channel `{0}` is missing the requested metric")]
    MissingMetric(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("earnings file line {line}: {message}")]
    EarningsParse { line: usize, message: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
}
