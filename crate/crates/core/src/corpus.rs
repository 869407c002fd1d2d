//! Ingest and enrich video/channel corpora from line-delimited record files.
//!
//! The video file carries one JSON object per line with fields video_id,
//! channel_id, upload_date (ISO-8601 day), description, view_count (integer
//! or null), category. The optional channel file carries channel_id,
//! subscriber_count (integer or null), source_tag.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: schema violation in field `{field}`")]
    SchemaViolation { line: usize, field: String },
    #[error("channel `{0}` has no present view counts to impute from")]
    AllViewsMissing(String),
    #[error("duplicate channel metadata for `{0}`")]
    DuplicateChannelMeta(String),
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Which corpus a channel was sourced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    #[default]
    General,
    AltLite,
    AltRight,
    Manosphere,
}

impl SourceTag {
    pub const ALL: [SourceTag; 4] =
        [SourceTag::General, SourceTag::AltLite, SourceTag::AltRight, SourceTag::Manosphere];

    /// Alt-lite, Alt-right, and Manosphere channels.
    pub fn is_problematic(self) -> bool {
        self != SourceTag::General
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoRecord {
    pub video_id: String,
    pub channel_id: String,
    pub upload_date: NaiveDate,
    pub description: String,
    pub view_count: Option<u64>,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelMeta {
    pub channel_id: String,
    pub subscriber_count: Option<u64>,
    #[serde(default)]
    pub source_tag: SourceTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub channel_id: String,
    pub subscriber_count: Option<u64>,
    /// Earliest upload date over the channel's videos.
    pub first_upload: NaiveDate,
    /// Modal category over the channel's videos, lexicographic tie-break.
    pub derived_category: String,
    pub source_tag: SourceTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SourceCount {
    pub videos: u64,
    pub channels: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub video_count: u64,
    pub channel_count: u64,
    pub per_source: BTreeMap<SourceTag, SourceCount>,
    pub missing_view_count: u64,
    /// missing_view_count / video_count; 0 for an empty corpus.
    pub missing_view_fraction: f64,
}

// Wire shape used for lenient parsing: types are loosened so that the
// offending field can be named.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireVideo {
    video_id: String,
    channel_id: String,
    upload_date: String,
    description: String,
    view_count: Option<i64>,
    category: String,
}

fn parse_record(line: &str, line_no: usize) -> Result<VideoRecord, CorpusError> {
    let wire: WireVideo = serde_json::from_str(line).map_err(|e| {
        let message = e.to_string();
        let field = message
            .split('`')
            .nth(1)
            .map(|f| f.to_string())
            .unwrap_or_else(|| "record".to_string());
        CorpusError::SchemaViolation { line: line_no, field }
    })?;
    let violation =
        |field: &str| CorpusError::SchemaViolation { line: line_no, field: field.to_string() };
    if wire.video_id.is_empty() {
        return Err(violation("video_id"));
    }
    if wire.channel_id.is_empty() {
        return Err(violation("channel_id"));
    }
    let upload_date = NaiveDate::parse_from_str(&wire.upload_date, "%Y-%m-%d")
        .map_err(|_| violation("upload_date"))?;
    let view_count = match wire.view_count {
        Some(v) if v < 0 => return Err(violation("view_count")),
        Some(v) => Some(v as u64),
        None => None,
    };
    Ok(VideoRecord {
        video_id: wire.video_id,
        channel_id: wire.channel_id,
        upload_date,
        description: wire.description,
        view_count,
        category: wire.category,
    })
}

/// Streaming reader over a line-delimited video file.
///
/// In strict mode the first malformed line (or duplicate video_id) aborts the
/// stream with an error; in lenient mode such lines are skipped and counted.
pub struct CorpusReader<R: BufRead> {
    reader: R,
    strict: bool,
    line_no: usize,
    skipped: usize,
    seen_ids: HashSet<String>,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, strict: bool) -> CorpusReader<R> {
        CorpusReader { reader, strict, line_no: 0, skipped: 0, seen_ids: HashSet::new(), done: false }
    }

    /// Malformed lines skipped so far (lenient mode).
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<VideoRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut line = String::new();
        loop {
            line.clear();
            match self.reader.read_line(&mut line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
            self.line_no += 1;
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if trimmed.is_empty() {
                continue;
            }
            let parsed = parse_record(trimmed, self.line_no).and_then(|record| {
                if !self.seen_ids.insert(record.video_id.clone()) {
                    Err(CorpusError::SchemaViolation {
                        line: self.line_no,
                        field: "video_id".to_string(),
                    })
                } else {
                    Ok(record)
                }
            });
            match parsed {
                Ok(record) => return Some(Ok(record)),
                Err(e) if self.strict => {
                    self.done = true;
                    return Some(Err(e));
                }
                Err(_) => self.skipped += 1,
            }
        }
    }
}

/// Open a video file for streaming.
pub fn load_corpus(
    path: impl AsRef<Path>,
    strict: bool,
) -> Result<CorpusReader<BufReader<File>>, CorpusError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(CorpusError::FileNotFound(path.to_path_buf()));
    }
    Ok(CorpusReader::new(BufReader::new(File::open(path)?), strict))
}

/// Read a whole video file; returns the records and the skipped-line count.
pub fn read_videos(
    path: impl AsRef<Path>,
    strict: bool,
) -> Result<(Vec<VideoRecord>, usize), CorpusError> {
    let mut reader = load_corpus(path, strict)?;
    let mut records = Vec::new();
    for item in reader.by_ref() {
        records.push(item?);
    }
    Ok((records, reader.skipped()))
}

/// Serialize records back to the line-delimited form.
pub fn write_videos(mut writer: impl Write, records: &[VideoRecord]) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Replace MISSING view counts by the channel's mean of present counts,
/// rounded half-up. Returns how many records were imputed.
pub fn impute_views(records: &mut [VideoRecord]) -> Result<u64, CorpusError> {
    let mut sums: HashMap<&str, (u128, u64, bool)> = HashMap::new();
    for record in records.iter() {
        let entry = sums.entry(record.channel_id.as_str()).or_insert((0, 0, false));
        match record.view_count {
            Some(v) => {
                entry.0 += v as u128;
                entry.1 += 1;
            }
            None => entry.2 = true,
        }
    }
    let mut means: HashMap<String, u64> = HashMap::new();
    for (channel, (sum, count, has_missing)) in sums {
        if !has_missing {
            continue;
        }
        if count == 0 {
            return Err(CorpusError::AllViewsMissing(channel.to_string()));
        }
        let mean = ((2 * sum + count as u128) / (2 * count as u128)) as u64;
        means.insert(channel.to_string(), mean);
    }
    let mut imputed = 0;
    for record in records.iter_mut() {
        if record.view_count.is_none() {
            record.view_count = Some(means[record.channel_id.as_str()]);
            imputed += 1;
        }
    }
    Ok(imputed)
}

/// One ChannelRecord per distinct channel: modal category (lexicographic
/// tie-break), earliest upload, metadata merged in when supplied.
pub fn derive_channel_profiles(
    records: &[VideoRecord],
    meta: Option<&[ChannelMeta]>,
) -> Result<BTreeMap<String, ChannelRecord>, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut meta_map: HashMap<&str, &ChannelMeta> = HashMap::new();
    if let Some(meta) = meta {
        for m in meta {
            if meta_map.insert(m.channel_id.as_str(), m).is_some() {
                return Err(CorpusError::DuplicateChannelMeta(m.channel_id.clone()));
            }
        }
    }

    let mut categories: HashMap<&str, BTreeMap<&str, u64>> = HashMap::new();
    let mut first_upload: HashMap<&str, NaiveDate> = HashMap::new();
    for record in records {
        *categories
            .entry(record.channel_id.as_str())
            .or_default()
            .entry(record.category.as_str())
            .or_insert(0) += 1;
        first_upload
            .entry(record.channel_id.as_str())
            .and_modify(|d| *d = (*d).min(record.upload_date))
            .or_insert(record.upload_date);
    }

    let mut profiles = BTreeMap::new();
    for (channel_id, counts) in categories {
        // BTreeMap iterates categories in sorted order, so keeping the first
        // maximum implements the lexicographic tie-break
        let mut derived_category = "";
        let mut best = 0;
        for (category, count) in &counts {
            if *count > best {
                best = *count;
                derived_category = category;
            }
        }
        let (subscriber_count, source_tag) = match meta_map.get(channel_id) {
            Some(m) => (m.subscriber_count, m.source_tag),
            None => (None, SourceTag::General),
        };
        profiles.insert(
            channel_id.to_string(),
            ChannelRecord {
                channel_id: channel_id.to_string(),
                subscriber_count,
                first_upload: first_upload[channel_id],
                derived_category: derived_category.to_string(),
                source_tag,
            },
        );
    }
    Ok(profiles)
}

/// Load the optional channel metadata file (always strict; it is small).
pub fn load_channel_meta(path: impl AsRef<Path>) -> Result<Vec<ChannelMeta>, CorpusError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(CorpusError::FileNotFound(path.to_path_buf()));
    }
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let meta: ChannelMeta = serde_json::from_str(&line).map_err(|e| {
            let field = e
                .to_string()
                .split('`')
                .nth(1)
                .map(|f| f.to_string())
                .unwrap_or_else(|| "record".to_string());
            CorpusError::SchemaViolation { line: idx + 1, field }
        })?;
        out.push(meta);
    }
    Ok(out)
}

/// Exact corpus counts.
pub fn corpus_stats(
    records: &[VideoRecord],
    profiles: &BTreeMap<String, ChannelRecord>,
) -> DatasetStats {
    let mut per_source: BTreeMap<SourceTag, SourceCount> = BTreeMap::new();
    for profile in profiles.values() {
        per_source.entry(profile.source_tag).or_default().channels += 1;
    }
    let mut missing = 0u64;
    for record in records {
        if record.view_count.is_none() {
            missing += 1;
        }
        let tag = profiles
            .get(&record.channel_id)
            .map(|p| p.source_tag)
            .unwrap_or(SourceTag::General);
        per_source.entry(tag).or_default().videos += 1;
    }
    let video_count = records.len() as u64;
    DatasetStats {
        video_count,
        channel_count: profiles.len() as u64,
        per_source,
        missing_view_count: missing,
        missing_view_fraction: if video_count == 0 {
            0.0
        } else {
            missing as f64 / video_count as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn video(
        id: &str,
        channel: &str,
        date: &str,
        views: Option<u64>,
        category: &str,
    ) -> VideoRecord {
        VideoRecord {
            video_id: id.to_string(),
            channel_id: channel.to_string(),
            upload_date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            description: String::new(),
            view_count: views,
            category: category.to_string(),
        }
    }

    fn read_str(data: &str, strict: bool) -> (Vec<VideoRecord>, usize, Option<CorpusError>) {
        let mut reader = CorpusReader::new(data.as_bytes(), strict);
        let mut records = Vec::new();
        let mut error = None;
        for item in reader.by_ref() {
            match item {
                Ok(r) => records.push(r),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        (records, reader.skipped(), error)
    }

    const GOOD_LINE: &str = r#"{"video_id":"v1","channel_id":"c1","upload_date":"2018-03-01","description":"hello\nworld","view_count":12,"category":"Gaming"}"#;

    #[test]
    fn empty_file_yields_nothing() {
        let (records, skipped, error) = read_str("", true);
        assert!(records.is_empty());
        assert_eq!(skipped, 0);
        assert!(error.is_none());
    }

    #[test]
    fn well_formed_line_round_trips() {
        let (records, _, error) = read_str(GOOD_LINE, true);
        assert!(error.is_none());
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.video_id, "v1");
        assert_eq!(r.description, "hello\nworld");
        assert_eq!(r.view_count, Some(12));

        let mut buffer = Vec::new();
        write_videos(&mut buffer, &records).unwrap();
        let (again, _, _) = read_str(std::str::from_utf8(&buffer).unwrap(), true);
        assert_eq!(again, records);
    }

    #[test]
    fn lenient_mode_skips_and_counts() {
        let data = format!(
            "{GOOD_LINE}\nnot json at all\n{}",
            GOOD_LINE.replace("\"v1\"", "\"v2\"")
        );
        let (records, skipped, error) = read_str(&data, false);
        assert!(error.is_none());
        assert_eq!(records.len(), 2);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn strict_mode_aborts_with_line_and_field() {
        let bad_date = GOOD_LINE.replace("2018-03-01", "not-a-date");
        let data = format!("{GOOD_LINE}\n{}", bad_date.replace("\"v1\"", "\"v2\""));
        let (records, _, error) = read_str(&data, true);
        assert_eq!(records.len(), 1);
        match error {
            Some(CorpusError::SchemaViolation { line, field }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "upload_date");
            }
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_video_id_is_a_violation() {
        let data = format!("{GOOD_LINE}\n{GOOD_LINE}");
        let (_, _, error) = read_str(&data, true);
        assert!(matches!(error, Some(CorpusError::SchemaViolation { line: 2, .. })));
        let (records, skipped, _) = read_str(&data, false);
        assert_eq!((records.len(), skipped), (1, 1));
    }

    #[test]
    fn negative_views_rejected() {
        let data = GOOD_LINE.replace(":12", ":-3");
        let (_, _, error) = read_str(&data, true);
        match error {
            Some(CorpusError::SchemaViolation { field, .. }) => assert_eq!(field, "view_count"),
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn impute_uses_channel_mean_half_up() {
        let mut records = vec![
            video("v1", "c1", "2018-01-01", Some(10), "Gaming"),
            video("v2", "c1", "2018-01-02", None, "Gaming"),
            video("v3", "c1", "2018-01-03", Some(20), "Gaming"),
        ];
        assert_eq!(impute_views(&mut records).unwrap(), 1);
        assert_eq!(records[1].view_count, Some(15));

        // half-up: mean(1, 2) = 1.5 -> 2
        let mut records = vec![
            video("v1", "c1", "2018-01-01", Some(1), "Gaming"),
            video("v2", "c1", "2018-01-02", Some(2), "Gaming"),
            video("v3", "c1", "2018-01-03", None, "Gaming"),
        ];
        impute_views(&mut records).unwrap();
        assert_eq!(records[2].view_count, Some(2));
    }

    #[test]
    fn impute_noop_and_idempotent() {
        let mut records = vec![
            video("v1", "c1", "2018-01-01", Some(10), "Gaming"),
            video("v2", "c2", "2018-01-02", Some(7), "Music"),
        ];
        let before = records.clone();
        assert_eq!(impute_views(&mut records).unwrap(), 0);
        assert_eq!(records, before);

        let mut once = vec![
            video("v1", "c1", "2018-01-01", Some(10), "Gaming"),
            video("v2", "c1", "2018-01-02", None, "Gaming"),
        ];
        impute_views(&mut once).unwrap();
        let twice = {
            let mut t = once.clone();
            impute_views(&mut t).unwrap();
            t
        };
        assert_eq!(once, twice);
    }

    #[test]
    fn impute_all_missing_errors() {
        let mut records = vec![
            video("v1", "c1", "2018-01-01", None, "Gaming"),
            video("v2", "c1", "2018-01-02", None, "Gaming"),
        ];
        assert!(matches!(
            impute_views(&mut records),
            Err(CorpusError::AllViewsMissing(c)) if c == "c1"
        ));
    }

    #[test]
    fn profiles_modal_category_and_tie_break() {
        let records = vec![
            video("v1", "c1", "2018-01-03", None, "Gaming"),
            video("v2", "c1", "2018-01-01", None, "Gaming"),
            video("v3", "c1", "2018-01-02", None, "Music"),
            video("v4", "c2", "2018-05-01", None, "Music"),
            video("v5", "c2", "2018-05-02", None, "Gaming"),
        ];
        let profiles = derive_channel_profiles(&records, None).unwrap();
        assert_eq!(profiles["c1"].derived_category, "Gaming");
        assert_eq!(profiles["c2"].derived_category, "Gaming", "tie breaks lexicographically");
        assert_eq!(profiles["c1"].first_upload.to_string(), "2018-01-01");
        assert_eq!(profiles["c1"].source_tag, SourceTag::General);
        assert_eq!(profiles["c1"].subscriber_count, None);
    }

    #[test]
    fn profiles_merge_meta_and_reject_duplicates() {
        let records = vec![video("v1", "c1", "2018-01-01", None, "Gaming")];
        let meta = vec![ChannelMeta {
            channel_id: "c1".to_string(),
            subscriber_count: Some(50_000),
            source_tag: SourceTag::AltRight,
        }];
        let profiles = derive_channel_profiles(&records, Some(&meta)).unwrap();
        assert_eq!(profiles["c1"].subscriber_count, Some(50_000));
        assert_eq!(profiles["c1"].source_tag, SourceTag::AltRight);

        let dup = vec![meta[0].clone(), meta[0].clone()];
        assert!(matches!(
            derive_channel_profiles(&records, Some(&dup)),
            Err(CorpusError::DuplicateChannelMeta(c)) if c == "c1"
        ));
    }

    #[test]
    fn profiles_reject_empty_corpus() {
        assert!(matches!(derive_channel_profiles(&[], None), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn stats_hand_count() {
        let records = vec![
            video("v1", "c1", "2018-01-01", Some(5), "Gaming"),
            video("v2", "c1", "2018-01-02", None, "Gaming"),
            video("v3", "c2", "2018-01-03", Some(9), "Music"),
        ];
        let profiles = derive_channel_profiles(&records, None).unwrap();
        let stats = corpus_stats(&records, &profiles);
        assert_eq!(stats.video_count, 3);
        assert_eq!(stats.channel_count, 2);
        assert_eq!(stats.missing_view_count, 1);
        assert!((stats.missing_view_fraction - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.per_source[&SourceTag::General].videos, 3);
        assert_eq!(stats.per_source[&SourceTag::General].channels, 2);
    }

    #[test]
    fn stats_empty_corpus_all_zeros() {
        let stats = corpus_stats(&[], &BTreeMap::new());
        assert_eq!(stats.video_count, 0);
        assert_eq!(stats.channel_count, 0);
        assert_eq!(stats.missing_view_fraction, 0.0);
    }
}
