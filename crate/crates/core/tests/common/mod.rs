//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here deliberately re-derives results through a different route
//! than the library: dense textbook matrices instead of CSR, big-integer
//! base58 instead of byte-wise decoding, and a from-scratch constraint
//! checker for matched pairs.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use altmon::corpus::{ChannelRecord, VideoRecord};
use altmon::labelprop::SeedSet;
use altmon::taxonomy::CategoryLabel;
use chrono::NaiveDate;
use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

// ---------------------------------------------------------------------------
// dense label propagation oracle
// ---------------------------------------------------------------------------

/// Dense propagation state: word and domain score tables of width 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub words: Vec<Vec<f64>>,
    pub domains: Vec<Vec<f64>>,
}

pub fn dense_row_normalize(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter().map(|v| v / sum).collect()
            } else {
                row.clone()
            }
        })
        .collect()
}

pub fn dense_column_normalize(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut sums = vec![0.0; cols];
    for row in m {
        for (c, v) in row.iter().enumerate() {
            sums[c] += v;
        }
    }
    m.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, v)| if sums[c] > 0.0 { v / sums[c] } else { *v })
                .collect()
        })
        .collect()
}

pub fn dense_initialize(
    n_words: usize,
    n_domains: usize,
    word_seeds: &[(usize, usize)],
    domain_seeds: &[(usize, usize)],
) -> DenseState {
    let mut state = DenseState {
        words: vec![vec![0.0; 4]; n_words],
        domains: vec![vec![0.0; 4]; n_domains],
    };
    for &(row, col) in word_seeds {
        state.words[row][col] = 1.0;
    }
    for &(row, col) in domain_seeds {
        state.domains[row][col] = 1.0;
    }
    state
}

fn dense_column_normalize_scores(scores: &mut [Vec<f64>]) {
    let mut sums = [0.0f64; 4];
    for row in scores.iter() {
        for k in 0..4 {
            sums[k] += row[k];
        }
    }
    for row in scores.iter_mut() {
        for k in 0..4 {
            if sums[k] > 0.0 {
                row[k] /= sums[k];
            }
        }
    }
}

/// One textbook step: d_j = M_domain^T w, w_j = M_word d, column-normalize
/// both to sum 1, then re-clamp seeds.
pub fn dense_step(
    m_word: &[Vec<f64>],
    m_domain: &[Vec<f64>],
    state: &DenseState,
    word_seeds: &[(usize, usize)],
    domain_seeds: &[(usize, usize)],
) -> DenseState {
    let n_words = m_word.len();
    let n_domains = if n_words > 0 { m_word[0].len() } else { 0 };

    let mut next_domains = vec![vec![0.0; 4]; n_domains];
    for (c, out) in next_domains.iter_mut().enumerate() {
        for k in 0..4 {
            let mut acc = 0.0;
            for r in 0..n_words {
                acc += m_domain[r][c] * state.words[r][k];
            }
            out[k] = acc;
        }
    }
    let mut next_words = vec![vec![0.0; 4]; n_words];
    for (r, out) in next_words.iter_mut().enumerate() {
        for k in 0..4 {
            let mut acc = 0.0;
            for c in 0..n_domains {
                acc += m_word[r][c] * state.domains[c][k];
            }
            out[k] = acc;
        }
    }
    dense_column_normalize_scores(&mut next_domains);
    dense_column_normalize_scores(&mut next_words);
    for &(row, col) in word_seeds {
        next_words[row] = vec![0.0; 4];
        next_words[row][col] = 1.0;
    }
    for &(row, col) in domain_seeds {
        next_domains[row] = vec![0.0; 4];
        next_domains[row][col] = 1.0;
    }
    DenseState { words: next_words, domains: next_domains }
}

// ---------------------------------------------------------------------------
// random graph fixtures
// ---------------------------------------------------------------------------

pub struct RandomGraph {
    pub words: Vec<String>,
    pub domains: Vec<String>,
    pub edges: Vec<(usize, usize, u64)>,
    pub seeds: SeedSet,
    /// Seed rows against the sorted indexes: (row, class column).
    pub word_seed_rows: Vec<(usize, usize)>,
    pub domain_seed_rows: Vec<(usize, usize)>,
}

/// A random bipartite graph with random seeds covering all four classes.
pub fn random_graph(rng: &mut ChaCha20Rng) -> RandomGraph {
    let n_words = rng.gen_range(4..=50);
    let n_domains = rng.gen_range(4..=50);
    let words: Vec<String> = (0..n_words).map(|i| format!("w{i:03}")).collect();
    let domains: Vec<String> = (0..n_domains).map(|i| format!("d{i:03}.com")).collect();

    let mut edges = Vec::new();
    for w in 0..n_words {
        for d in 0..n_domains {
            if rng.gen_bool(0.08) {
                edges.push((w, d, rng.gen_range(1..=9u64)));
            }
        }
    }
    // keep the graph connected enough to exercise propagation
    if edges.is_empty() {
        edges.push((0, 0, 1));
    }

    let mut word_seeds = BTreeMap::new();
    let mut domain_seeds = BTreeMap::new();
    let mut word_seed_rows = Vec::new();
    let mut domain_seed_rows = Vec::new();
    for (column, class) in CategoryLabel::PROPAGATED.iter().enumerate() {
        // at least one seed per class; words and domains both possible
        let n_seeds = rng.gen_range(1..=3);
        for _ in 0..n_seeds {
            if rng.gen_bool(0.5) {
                let row = rng.gen_range(0..n_words);
                if !word_seed_rows.iter().any(|(r, _)| *r == row) {
                    word_seeds.insert(words[row].clone(), *class);
                    word_seed_rows.push((row, column));
                }
            } else {
                let row = rng.gen_range(0..n_domains);
                if !domain_seed_rows.iter().any(|(r, _)| *r == row) {
                    domain_seeds.insert(domains[row].clone(), *class);
                    domain_seed_rows.push((row, column));
                }
            }
        }
        // guarantee coverage even if the draws above all collided
        if !word_seed_rows.iter().any(|(_, c)| *c == column)
            && !domain_seed_rows.iter().any(|(_, c)| *c == column)
        {
            let row = (0..n_words)
                .find(|r| !word_seed_rows.iter().any(|(wr, _)| wr == r))
                .expect("more words than classes");
            word_seeds.insert(words[row].clone(), *class);
            word_seed_rows.push((row, column));
        }
    }

    let seeds = SeedSet::new(word_seeds, domain_seeds).expect("no CR seeds");
    RandomGraph { words, domains, edges, seeds, word_seed_rows, domain_seed_rows }
}

pub fn dense_matrix(graph: &RandomGraph) -> Vec<Vec<f64>> {
    let mut dense = vec![vec![0.0; graph.domains.len()]; graph.words.len()];
    for (w, d, weight) in &graph.edges {
        dense[*w][*d] += *weight as f64;
    }
    dense
}

// ---------------------------------------------------------------------------
// independent base58 oracle (big-integer route)
// ---------------------------------------------------------------------------

pub fn sha256d4(data: &[u8]) -> [u8; 4] {
    let first = Sha256::digest(data);
    let second = Sha256::digest(first);
    [second[0], second[1], second[2], second[3]]
}

/// Big-integer base58 encoding, the reverse route of the library's byte-wise
/// decoder.
pub fn bigint_base58_encode(payload: &[u8], alphabet: &[u8; 58]) -> String {
    let mut out = String::new();
    let mut n = BigUint::from_bytes_be(payload);
    let base = BigUint::from(58u8);
    let zero = BigUint::from(0u8);
    let mut digits = Vec::new();
    while n > zero {
        let digit = (&n % &base).to_u32_digits().first().copied().unwrap_or(0);
        digits.push(alphabet[digit as usize] as char);
        n /= &base;
    }
    for b in payload {
        if *b == 0 {
            out.push(alphabet[0] as char);
        } else {
            break;
        }
    }
    out.extend(digits.iter().rev());
    out
}

/// Big-integer base58 decoding.
pub fn bigint_base58_decode(s: &str, alphabet: &[u8; 58]) -> Option<Vec<u8>> {
    let mut n = BigUint::from(0u8);
    let base = BigUint::from(58u8);
    for ch in s.bytes() {
        let digit = alphabet.iter().position(|a| *a == ch)? as u32;
        n = n * &base + BigUint::from(digit);
    }
    let mut bytes = n.to_bytes_be();
    if bytes == [0] {
        bytes.clear();
    }
    let zeros = s.bytes().take_while(|b| *b == alphabet[0]).count();
    let mut out = vec![0u8; zeros];
    out.append(&mut bytes);
    Some(out)
}

/// Build a checksum-valid versioned address through the big-integer route.
pub fn oracle_address(version: u8, body: &[u8; 20], alphabet: &[u8; 58]) -> String {
    let mut payload = vec![version];
    payload.extend_from_slice(body);
    let checksum = sha256d4(&payload);
    payload.extend_from_slice(&checksum);
    bigint_base58_encode(&payload, alphabet)
}

/// Oracle-side verdict on a base58 candidate: does it decode to 25 bytes
/// with a known version byte and a verifying checksum?
pub fn oracle_verdict(candidate: &str, alphabet: &[u8; 58], versions: &[u8]) -> bool {
    let Some(payload) = bigint_base58_decode(candidate, alphabet) else { return false };
    if payload.len() != 25 || !versions.contains(&payload[0]) {
        return false;
    }
    sha256d4(&payload[..21]) == payload[21..]
}

// ---------------------------------------------------------------------------
// synthetic corpora
// ---------------------------------------------------------------------------

pub fn date(year: i32, month: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, month, day).unwrap()
}

pub fn make_video(
    id: impl Into<String>,
    channel: impl Into<String>,
    upload: NaiveDate,
    views: Option<u64>,
    category: &str,
    description: impl Into<String>,
) -> VideoRecord {
    VideoRecord {
        video_id: id.into(),
        channel_id: channel.into(),
        upload_date: upload,
        description: description.into(),
        view_count: views,
        category: category.to_string(),
    }
}

pub const CLASS_VOCAB: [(&str, &[&str]); 4] = [
    (
        "DO",
        &[
            "donate", "donation", "paypal", "support", "tip", "pledge", "fund", "contribute",
            "sponsor me", "stream labs",
        ],
    ),
    (
        "PC",
        &[
            "merch", "merchandise", "shirt", "shirts", "mug", "mugs", "swag", "hoodie",
            "apparel", "merch shop",
        ],
    ),
    (
        "AM",
        &[
            "code", "discount", "promo code", "coupon", "deal", "affiliate", "gear", "review",
            "offer", "save",
        ],
    ),
    (
        "NM",
        &[
            "intro", "facebook", "soundcloud", "snapchat", "twitch", "follow", "instagram",
            "social", "follow instagram", "community",
        ],
    ),
];

pub const FILLER_WORDS: [&str; 8] =
    ["video", "today", "new", "episode", "thanks", "watching", "everyone", "weekly"];

pub struct PlantedCorpus {
    pub records: Vec<VideoRecord>,
    /// Ground-truth class per planted domain.
    pub truth: BTreeMap<String, CategoryLabel>,
}

/// A corpus of category-consistent descriptions: every planted domain is
/// preceded by words from its class vocabulary (plus light filler noise).
pub fn planted_corpus(
    n_descriptions: usize,
    n_channels: usize,
    domains_per_class: usize,
    seed: u64,
) -> PlantedCorpus {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let classes = [CategoryLabel::Do, CategoryLabel::Pc, CategoryLabel::Am, CategoryLabel::Nm];
    let mut truth = BTreeMap::new();
    let mut planted: Vec<(String, usize)> = Vec::new();
    for (class_idx, class) in classes.iter().enumerate() {
        for i in 0..domains_per_class {
            let name = format!("site{:02}{:03}.com", class_idx, i);
            truth.insert(name.clone(), *class);
            planted.push((name, class_idx));
        }
    }
    // anchor domains from the default seed table, one per class
    let anchors = ["patreon.com", "teespring.com", "amazon.com", "twitter.com"];

    let mut records = Vec::with_capacity(n_descriptions);
    for i in 0..n_descriptions {
        let channel = format!("ch{:04}", i % n_channels);
        let (domain, class_idx) = if rng.gen_bool(0.15) {
            let class_idx = rng.gen_range(0..4);
            (anchors[class_idx].to_string(), class_idx)
        } else {
            let (domain, class_idx) = &planted[rng.gen_range(0..planted.len())];
            (domain.clone(), *class_idx)
        };
        let vocab = CLASS_VOCAB[class_idx].1;
        let mut line = String::new();
        let n_words = rng.gen_range(2..=3);
        for w in 0..n_words {
            if w > 0 {
                line.push(' ');
            }
            if rng.gen_bool(0.15) {
                line.push_str(FILLER_WORDS[rng.gen_range(0..FILLER_WORDS.len())]);
            } else {
                line.push_str(vocab[rng.gen_range(0..vocab.len())]);
            }
        }
        let description = format!("{line}: https://{domain}/x{i}");
        records.push(make_video(
            format!("v{i:06}"),
            channel,
            date(2015 + (i % 5) as i32, 1 + (i % 12) as u32, 1 + (i % 28) as u32),
            Some(rng.gen_range(0..10_000)),
            "Gaming",
            description,
        ));
    }
    PlantedCorpus { records, truth }
}

// ---------------------------------------------------------------------------
// independent matched-pair verifier
// ---------------------------------------------------------------------------

/// One violated constraint found by the verifier.
#[derive(Debug)]
pub struct Violation {
    pub treated: String,
    pub control: String,
    pub constraint: String,
}

/// Re-checks every matched pair from scratch: channels are re-aggregated
/// directly from the records, trims and deciles are recomputed with an
/// independent (count-based) method, and each constraint is verified.
pub fn verify_adoption_pairs(
    pairs: &altmon::analytics::MatchedPairSet,
    records: &[VideoRecord],
    profiles: &BTreeMap<String, ChannelRecord>,
    adopted_at: &BTreeMap<String, i32>,
    window: usize,
    groups: usize,
    trim_fraction: f64,
) -> Vec<Violation> {
    use chrono::Datelike;
    // per-channel monthly activity, straight from the records
    let mut activity: HashMap<(String, i32), (u64, u64)> = HashMap::new();
    let mut periods: BTreeSet<i32> = BTreeSet::new();
    for record in records {
        let period = record.upload_date.year() * 12 + record.upload_date.month0() as i32;
        periods.insert(period);
        let cell = activity.entry((record.channel_id.clone(), period)).or_insert((0, 0));
        cell.0 += 1;
        cell.1 += record.view_count.unwrap_or(0);
    }
    let channels: BTreeSet<&String> = profiles.keys().collect();

    // per period: surviving channels and their (video, view) deciles
    let mut strata: HashMap<i32, HashMap<&String, (usize, usize)>> = HashMap::new();
    for period in &periods {
        let mut active: Vec<(&String, u64, u64)> = channels
            .iter()
            .filter_map(|ch| {
                let (videos, views) = activity.get(&((*ch).clone(), *period)).copied()?;
                (videos >= 1 && views >= 1).then_some((*ch, videos, views))
            })
            .collect();
        active.sort_by(|a, b| a.0.cmp(b.0));
        // trim: drop entries strictly above the (1-f) quantile, per metric
        let cap = |mut values: Vec<u64>| -> u64 {
            if trim_fraction <= 0.0 || values.is_empty() {
                return u64::MAX;
            }
            values.sort_unstable();
            let rank = ((1.0 - trim_fraction) * values.len() as f64).ceil().max(1.0) as usize;
            values[rank.min(values.len()) - 1]
        };
        let video_cap = cap(active.iter().map(|(_, v, _)| *v).collect());
        let view_cap = cap(active.iter().map(|(_, _, v)| *v).collect());
        let kept: Vec<(&String, u64, u64)> = active
            .into_iter()
            .filter(|(_, videos, views)| *videos <= video_cap && *views <= view_cap)
            .collect();

        // decile via explicit rank positions rather than cut points
        let decile_of = |value: u64, mut sorted: Vec<u64>| -> usize {
            sorted.sort_unstable();
            let n = sorted.len();
            let mut bucket = 0;
            for j in 1..groups {
                let boundary = sorted[((j * n).div_ceil(groups)).max(1) - 1];
                if boundary < value {
                    bucket = j;
                }
            }
            bucket
        };
        let videos_all: Vec<u64> = kept.iter().map(|(_, v, _)| *v).collect();
        let views_all: Vec<u64> = kept.iter().map(|(_, _, v)| *v).collect();
        let map: HashMap<&String, (usize, usize)> = kept
            .iter()
            .map(|(ch, videos, views)| {
                (
                    *ch,
                    (
                        decile_of(*videos, videos_all.clone()),
                        decile_of(*views, views_all.clone()),
                    ),
                )
            })
            .collect();
        strata.insert(*period, map);
    }

    let mut violations = Vec::new();
    let mut seen: BTreeSet<&String> = BTreeSet::new();
    for pair in &pairs.pairs {
        let mut fail = |constraint: &str| {
            violations.push(Violation {
                treated: pair.treated.clone(),
                control: pair.control.clone(),
                constraint: constraint.to_string(),
            });
        };
        if adopted_at.get(&pair.treated) != Some(&pair.x) {
            fail("treated channel does not adopt at x");
        }
        if adopted_at.contains_key(&pair.control) {
            fail("control channel adopts");
        }
        match (profiles.get(&pair.treated), profiles.get(&pair.control)) {
            (Some(t), Some(c)) => {
                if t.derived_category != c.derived_category {
                    fail("category mismatch");
                }
            }
            _ => fail("unknown channel"),
        }
        for back in 1..=window as i32 {
            let period = pair.x - back;
            let table = strata.get(&period);
            let t = table.and_then(|m| m.get(&pair.treated));
            let c = table.and_then(|m| m.get(&pair.control));
            match (t, c) {
                (Some(ts), Some(cs)) if ts == cs => {}
                (Some(_), Some(_)) => fail("stratum mismatch"),
                _ => fail("channel inactive or trimmed in window"),
            }
        }
        if !seen.insert(&pair.treated) {
            fail("treated channel reused");
        }
        if !seen.insert(&pair.control) {
            fail("control channel reused");
        }
    }
    violations
}

/// Read peak RSS in bytes from /proc/self/status (Linux only).
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest.trim().trim_end_matches(" kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}
