//! Accumulate context pairs into the word-domain bipartite co-occurrence
//! graph, prune rare words, and expose the weighted matrix.
//!
//! Accumulation is stream-order-insensitive and shardable: shards accumulate
//! independently, merge by summing counts and unioning channel sets, and the
//! final indexes are rebuilt by a global sort, so any shard count produces an
//! identical graph.

use std::collections::{HashMap, HashSet};

use num_traits::Float;
use thiserror::Error;

use crate::labelprop::SparseMatrix;
use crate::textscan::ContextPair;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Immutable word-domain graph. Word and domain indexes are sorted
/// lexicographically; edges are sorted by (word_idx, domain_idx).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    words: Vec<String>,
    domains: Vec<String>,
    /// Distinct channels each word appeared in (any context pair).
    word_channels: Vec<u32>,
    edges: Vec<(u32, u32, u64)>,
    pruned_k: Option<u32>,
}

impl BipartiteGraph {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn word_channels(&self) -> &[u32] {
        &self.word_channels
    }

    pub fn edges(&self) -> &[(u32, u32, u64)] {
        &self.edges
    }

    pub fn pruned_k(&self) -> Option<u32> {
        self.pruned_k
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    pub fn domain_index(&self, domain: &str) -> Option<usize> {
        self.domains.binary_search_by(|d| d.as_str().cmp(domain)).ok()
    }

    pub fn total_edge_weight(&self) -> u64 {
        self.edges.iter().map(|(_, _, w)| w).sum()
    }

    /// Words co-occurring with a domain, heaviest first, ties by word.
    pub fn top_words_for_domain(&self, domain: &str, n: usize) -> Vec<(String, u64)> {
        let Some(d_idx) = self.domain_index(domain) else { return Vec::new() };
        let mut hits: Vec<(String, u64)> = self
            .edges
            .iter()
            .filter(|(_, d, _)| *d as usize == d_idx)
            .map(|(w, _, weight)| (self.words[*w as usize].clone(), *weight))
            .collect();
        hits.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        hits.truncate(n);
        hits
    }

    /// The weighted matrix of shape |words| x |domains|.
    pub fn to_matrix<F: Float>(&self) -> SparseMatrix<F> {
        SparseMatrix::from_triples(
            self.words.len(),
            self.domains.len(),
            self.edges
                .iter()
                .map(|(w, d, weight)| (*w as usize, *d as usize, F::from(*weight).unwrap())),
        )
        .expect("edge indexes are in range by construction")
    }

    /// Canonical text form: a header line, then the word index (token and
    /// channel count), the domain index, and the edge triples, all
    /// tab-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let k = self.pruned_k.map(|k| k.to_string()).unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "graph\t{}\t{}\t{}\t{}\n",
            self.words.len(),
            self.domains.len(),
            self.edges.len(),
            k
        ));
        for (word, channels) in self.words.iter().zip(self.word_channels.iter()) {
            out.push_str(&format!("word\t{word}\t{channels}\n"));
        }
        for domain in &self.domains {
            out.push_str(&format!("domain\t{domain}\n"));
        }
        for (w, d, weight) in &self.edges {
            out.push_str(&format!("edge\t{w}\t{d}\t{weight}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<BipartiteGraph, GraphError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "empty graph file".to_string(),
        })?;
        let head: Vec<&str> = header.split('\t').collect();
        if head.len() != 5 || head[0] != "graph" {
            return Err(GraphError::Parse { line: 1, message: "bad header".to_string() });
        }
        let parse_count = |s: &str, line: usize| {
            s.parse::<usize>()
                .map_err(|e| GraphError::Parse { line, message: format!("bad count `{s}`: {e}") })
        };
        let n_words = parse_count(head[1], 1)?;
        let n_domains = parse_count(head[2], 1)?;
        let n_edges = parse_count(head[3], 1)?;
        let pruned_k = match head[4] {
            "-" => None,
            s => Some(s.parse::<u32>().map_err(|e| GraphError::Parse {
                line: 1,
                message: format!("bad k `{s}`: {e}"),
            })?),
        };

        let mut graph = BipartiteGraph {
            words: Vec::with_capacity(n_words),
            domains: Vec::with_capacity(n_domains),
            word_channels: Vec::with_capacity(n_words),
            edges: Vec::with_capacity(n_edges),
            pruned_k,
        };
        for (idx, line) in lines {
            let line_no = idx + 1;
            let parts: Vec<&str> = line.split('\t').collect();
            match parts.first().copied() {
                Some("word") if parts.len() == 3 => {
                    graph.words.push(parts[1].to_string());
                    graph.word_channels.push(parse_count(parts[2], line_no)? as u32);
                }
                Some("domain") if parts.len() == 2 => graph.domains.push(parts[1].to_string()),
                Some("edge") if parts.len() == 4 => {
                    let w = parse_count(parts[1], line_no)? as u32;
                    let d = parse_count(parts[2], line_no)? as u32;
                    let weight = parse_count(parts[3], line_no)? as u64;
                    if w as usize >= n_words || d as usize >= n_domains {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "edge index out of range".to_string(),
                        });
                    }
                    graph.edges.push((w, d, weight));
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!("unrecognized line `{line}`"),
                    })
                }
            }
        }
        if graph.words.len() != n_words
            || graph.domains.len() != n_domains
            || graph.edges.len() != n_edges
        {
            return Err(GraphError::Parse {
                line: 1,
                message: "header counts do not match body".to_string(),
            });
        }
        Ok(graph)
    }
}

/// Mergeable accumulation state for one shard of the pair stream.
#[derive(Debug, Default)]
pub struct Accumulator {
    pair_counts: HashMap<(String, String), u64>,
    word_channels: HashMap<String, HashSet<String>>,
}

impl Accumulator {
    pub fn new() -> Accumulator {
        Accumulator::default()
    }

    pub fn add(&mut self, pair: &ContextPair) {
        self.add_parts(&pair.word, &pair.domain_key, &pair.channel_id);
    }

    pub fn add_parts(&mut self, word: &str, domain_key: &str, channel_id: &str) {
        *self
            .pair_counts
            .entry((word.to_string(), domain_key.to_string()))
            .or_insert(0) += 1;
        self.word_channels
            .entry(word.to_string())
            .or_default()
            .insert(channel_id.to_string());
    }

    pub fn merge(&mut self, other: Accumulator) {
        for (key, count) in other.pair_counts {
            *self.pair_counts.entry(key).or_insert(0) += count;
        }
        for (word, channels) in other.word_channels {
            self.word_channels.entry(word).or_default().extend(channels);
        }
    }

    /// Build the graph: indexes sorted, edges sorted, per-word channel counts.
    pub fn finish(self) -> BipartiteGraph {
        let mut words: Vec<String> = self.word_channels.keys().cloned().collect();
        words.sort();
        let mut domains: Vec<String> =
            self.pair_counts.keys().map(|(_, d)| d.clone()).collect::<HashSet<_>>().into_iter().collect();
        domains.sort();

        let word_pos: HashMap<&str, u32> =
            words.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();
        let domain_pos: HashMap<&str, u32> =
            domains.iter().enumerate().map(|(i, d)| (d.as_str(), i as u32)).collect();

        let word_channels: Vec<u32> =
            words.iter().map(|w| self.word_channels[w].len() as u32).collect();

        let mut edges: Vec<(u32, u32, u64)> = self
            .pair_counts
            .iter()
            .map(|((w, d), count)| (word_pos[w.as_str()], domain_pos[d.as_str()], *count))
            .collect();
        edges.sort_unstable();

        BipartiteGraph { words, domains, word_channels, edges, pruned_k: None }
    }
}

/// Single-pass accumulation of a pair stream.
pub fn accumulate(pairs: impl IntoIterator<Item = ContextPair>) -> BipartiteGraph {
    let mut acc = Accumulator::new();
    for pair in pairs {
        acc.add(&pair);
    }
    acc.finish()
}

/// Retain exactly the words appearing in at least `k` distinct channels;
/// domains stay even if left edgeless.
pub fn prune_words(graph: &BipartiteGraph, k: u32) -> BipartiteGraph {
    assert!(k >= 1, "prune threshold must be >= 1");
    let keep: Vec<bool> = graph.word_channels.iter().map(|c| *c >= k).collect();
    let mut remap = vec![u32::MAX; graph.words.len()];
    let mut words = Vec::new();
    let mut word_channels = Vec::new();
    for (idx, kept) in keep.iter().enumerate() {
        if *kept {
            remap[idx] = words.len() as u32;
            words.push(graph.words[idx].clone());
            word_channels.push(graph.word_channels[idx]);
        }
    }
    let edges: Vec<(u32, u32, u64)> = graph
        .edges
        .iter()
        .filter(|(w, _, _)| keep[*w as usize])
        .map(|(w, d, weight)| (remap[*w as usize], *d, *weight))
        .collect();
    BipartiteGraph {
        words,
        domains: graph.domains.clone(),
        word_channels,
        edges,
        pruned_k: Some(k),
    }
}
