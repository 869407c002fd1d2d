//! Label propagation over the word-domain co-occurrence matrix.
//!
//! The iteration works on a matrix `M` of shape `|words| x |domains|` and two
//! score arrays of shape `|words| x 4` and `|domains| x 4` (columns DO, PC,
//! AM, NM). Each step multiplies the previous arrays by L1-normalized views
//! of `M` (column-stochastic for the domain update, row-stochastic for the
//! word update), L1-normalizes each score column to sum 1, then re-clamps
//! seed rows to their one-hot labels. Iteration stops when the max-abs change
//! of the domain array drops below `epsilon`, or at `max_iters`.
//!
//! Everything here is generic over the scalar type; the crate root fixes
//! `f64` aliases for the pipeline.

use std::collections::BTreeMap;
use std::fmt::Display;

use num_traits::Float;
use thiserror::Error;

use crate::taxonomy::CategoryLabel;

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error("category {0} has no seed present in the graph index")]
    NoSeedForCategory(CategoryLabel),
    #[error("CR seeds cannot participate in propagation")]
    CryptoSeed,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Sparse nonnegative matrix in compressed-row form. Rows index words,
/// columns index domains.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<F> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<F>,
}

impl<F: Float> SparseMatrix<F> {
    /// Build from (row, col, value) triples. Duplicate coordinates are
    /// summed; zero values are kept out of the structure.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, F)>,
    ) -> Result<SparseMatrix<F>, PropagationError> {
        let mut entries: Vec<(usize, usize, F)> = Vec::new();
        for (r, c, v) in triples {
            if r >= rows || c >= cols {
                return Err(PropagationError::ShapeMismatch(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            entries.push((r, c, v));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut merged: Vec<(usize, usize, F)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 = last.2 + v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|(_, _, v)| *v != F::zero());

        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = merged.iter().map(|e| e.1).collect();
        let values = merged.iter().map(|e| e.2).collect();
        Ok(SparseMatrix { rows, cols, row_ptr, col_idx, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> F {
        self.row(r).find(|(col, _)| *col == c).map(|(_, v)| v).unwrap_or_else(F::zero)
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let mut dense = vec![vec![F::zero(); self.cols]; self.rows];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                dense[r][c] = v;
            }
        }
        dense
    }

    /// Row-stochastic view: each nonzero row divided by its sum.
    pub fn normalize_rows(&self) -> SparseMatrix<F> {
        let mut out = self.clone();
        for r in 0..self.rows {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            let mut sum = F::zero();
            for v in &self.values[lo..hi] {
                sum = sum + *v;
            }
            if sum > F::zero() {
                for v in &mut out.values[lo..hi] {
                    *v = *v / sum;
                }
            }
        }
        out
    }

    /// Column-stochastic view: each nonzero column divided by its sum.
    pub fn normalize_columns(&self) -> SparseMatrix<F> {
        let mut col_sums = vec![F::zero(); self.cols];
        for (c, v) in self.col_idx.iter().zip(self.values.iter()) {
            col_sums[*c] = col_sums[*c] + *v;
        }
        let mut out = self.clone();
        for (c, v) in out.col_idx.iter().zip(out.values.iter_mut()) {
            if col_sums[*c] > F::zero() {
                *v = *v / col_sums[*c];
            }
        }
        out
    }
}

/// Column-stochastic normalization of `M` (the domain-update operator).
pub fn normalize_for_domains<F: Float>(m: &SparseMatrix<F>) -> SparseMatrix<F> {
    m.normalize_columns()
}

/// Row-stochastic normalization of `M` (the word-update operator).
pub fn normalize_for_words<F: Float>(m: &SparseMatrix<F>) -> SparseMatrix<F> {
    m.normalize_rows()
}

/// Seed words and domains, each carrying one propagated class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    word_seeds: BTreeMap<String, CategoryLabel>,
    domain_seeds: BTreeMap<String, CategoryLabel>,
}

impl SeedSet {
    pub fn new(
        word_seeds: BTreeMap<String, CategoryLabel>,
        domain_seeds: BTreeMap<String, CategoryLabel>,
    ) -> Result<SeedSet, PropagationError> {
        if word_seeds.values().chain(domain_seeds.values()).any(|l| l.column().is_none()) {
            return Err(PropagationError::CryptoSeed);
        }
        Ok(SeedSet { word_seeds, domain_seeds })
    }

    pub fn word_seeds(&self) -> &BTreeMap<String, CategoryLabel> {
        &self.word_seeds
    }

    pub fn domain_seeds(&self) -> &BTreeMap<String, CategoryLabel> {
        &self.domain_seeds
    }
}

/// Propagation state: per-word and per-domain scores in column order
/// DO, PC, AM, NM.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelArrays<F> {
    pub word_scores: Vec<[F; 4]>,
    pub domain_scores: Vec<[F; 4]>,
}

impl<F: Float> LabelArrays<F> {
    pub fn zeros(words: usize, domains: usize) -> LabelArrays<F> {
        LabelArrays {
            word_scores: vec![[F::zero(); 4]; words],
            domain_scores: vec![[F::zero(); 4]; domains],
        }
    }
}

/// Seed rows to re-clamp after every iteration: (row index, class column).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClampSet {
    pub word_rows: Vec<(usize, usize)>,
    pub domain_rows: Vec<(usize, usize)>,
}

/// A seed that named a word or domain absent from the graph index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingSeed {
    pub key: String,
    pub label: CategoryLabel,
    pub is_domain: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Initialized<F> {
    pub arrays: LabelArrays<F>,
    pub clamp: ClampSet,
    pub missing: Vec<MissingSeed>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig<F> {
    /// Convergence threshold on the max-abs change of the domain array.
    pub epsilon: F,
    pub max_iters: usize,
    /// Preference order for exact argmax ties when reading labels off.
    pub tie_order: [CategoryLabel; 4],
}

pub const DEFAULT_TIE_ORDER: [CategoryLabel; 4] = [
    CategoryLabel::Nm,
    CategoryLabel::Do,
    CategoryLabel::Pc,
    CategoryLabel::Am,
];

impl<F: Float> Default for PropagationConfig<F> {
    fn default() -> Self {
        PropagationConfig {
            epsilon: F::from(1e-15).unwrap(),
            max_iters: 1000,
            tie_order: DEFAULT_TIE_ORDER,
        }
    }
}

impl<F: Float> PropagationConfig<F> {
    pub fn validate(&self) -> Result<(), PropagationError> {
        if !(self.epsilon > F::zero()) {
            return Err(PropagationError::InvalidConfig("epsilon must be > 0".into()));
        }
        if self.max_iters == 0 {
            return Err(PropagationError::InvalidConfig("max_iters must be >= 1".into()));
        }
        let mut seen = [false; 4];
        for label in self.tie_order {
            match label.column() {
                Some(c) => seen[c] = true,
                None => {
                    return Err(PropagationError::InvalidConfig(
                        "tie_order cannot contain CR".into(),
                    ))
                }
            }
        }
        if seen != [true; 4] {
            return Err(PropagationError::InvalidConfig(
                "tie_order must mention each propagated class once".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult<F> {
    pub arrays: LabelArrays<F>,
    pub iterations: usize,
    pub converged: bool,
    /// Last max-abs elementwise delta of the domain array.
    pub residual: F,
    pub missing_seeds: Vec<MissingSeed>,
}

/// Seed rows get 1 in their class column, 0 elsewhere; everything else is
/// all-zero. Seeds absent from the indexes are reported, not fatal, but a
/// class losing all of its seeds is.
pub fn initialize<F: Float>(
    seeds: &SeedSet,
    words: &[String],
    domains: &[String],
) -> Result<Initialized<F>, PropagationError> {
    let word_pos: BTreeMap<&str, usize> =
        words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let domain_pos: BTreeMap<&str, usize> =
        domains.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();

    let mut arrays = LabelArrays::zeros(words.len(), domains.len());
    let mut clamp = ClampSet::default();
    let mut missing = Vec::new();
    let mut covered = [false; 4];

    for (word, label) in seeds.word_seeds() {
        let column = label.column().ok_or(PropagationError::CryptoSeed)?;
        match word_pos.get(word.as_str()) {
            Some(&row) => {
                arrays.word_scores[row][column] = F::one();
                clamp.word_rows.push((row, column));
                covered[column] = true;
            }
            None => missing.push(MissingSeed { key: word.clone(), label: *label, is_domain: false }),
        }
    }
    for (domain, label) in seeds.domain_seeds() {
        let column = label.column().ok_or(PropagationError::CryptoSeed)?;
        match domain_pos.get(domain.as_str()) {
            Some(&row) => {
                arrays.domain_scores[row][column] = F::one();
                clamp.domain_rows.push((row, column));
                covered[column] = true;
            }
            None => missing.push(MissingSeed { key: domain.clone(), label: *label, is_domain: true }),
        }
    }

    for (column, present) in covered.iter().enumerate() {
        if !present {
            return Err(PropagationError::NoSeedForCategory(CategoryLabel::from_column(column)));
        }
    }

    Ok(Initialized { arrays, clamp, missing })
}

fn clamp_rows<F: Float>(arrays: &mut LabelArrays<F>, clamp: &ClampSet) {
    for &(row, column) in &clamp.word_rows {
        let mut one_hot = [F::zero(); 4];
        one_hot[column] = F::one();
        arrays.word_scores[row] = one_hot;
    }
    for &(row, column) in &clamp.domain_rows {
        let mut one_hot = [F::zero(); 4];
        one_hot[column] = F::one();
        arrays.domain_scores[row] = one_hot;
    }
}

fn normalize_score_columns<F: Float>(scores: &mut [[F; 4]]) {
    let mut sums = [F::zero(); 4];
    for row in scores.iter() {
        for (c, v) in row.iter().enumerate() {
            sums[c] = sums[c] + *v;
        }
    }
    for row in scores.iter_mut() {
        for (c, v) in row.iter_mut().enumerate() {
            if sums[c] > F::zero() {
                *v = *v / sums[c];
            }
        }
    }
}

/// The multiply-and-normalize portion of one update, before seed
/// re-clamping: domain scores from `M_domain^T * w`, word scores from
/// `M_word * d`, then per-column L1 normalization. Every nonzero column of
/// the result sums to 1.
pub fn normalized_update<F: Float>(
    m_word: &SparseMatrix<F>,
    m_domain: &SparseMatrix<F>,
    arrays: &LabelArrays<F>,
) -> Result<LabelArrays<F>, PropagationError> {
    let (n_words, n_domains) = (m_word.rows(), m_word.cols());
    if m_domain.rows() != n_words || m_domain.cols() != n_domains {
        return Err(PropagationError::ShapeMismatch(format!(
            "M_word is {}x{} but M_domain is {}x{}",
            n_words,
            n_domains,
            m_domain.rows(),
            m_domain.cols()
        )));
    }
    if arrays.word_scores.len() != n_words || arrays.domain_scores.len() != n_domains {
        return Err(PropagationError::ShapeMismatch(format!(
            "arrays are {}x4 / {}x4 but M is {}x{}",
            arrays.word_scores.len(),
            arrays.domain_scores.len(),
            n_words,
            n_domains
        )));
    }

    let mut next = LabelArrays::zeros(n_words, n_domains);
    // d' = M_domain^T * w  (scatter over rows keeps the reduction order fixed)
    for r in 0..n_words {
        let w_row = arrays.word_scores[r];
        for (c, v) in m_domain.row(r) {
            for k in 0..4 {
                next.domain_scores[c][k] = next.domain_scores[c][k] + v * w_row[k];
            }
        }
    }
    // w' = M_word * d
    for r in 0..n_words {
        let mut acc = [F::zero(); 4];
        for (c, v) in m_word.row(r) {
            let d_row = arrays.domain_scores[c];
            for k in 0..4 {
                acc[k] = acc[k] + v * d_row[k];
            }
        }
        next.word_scores[r] = acc;
    }

    normalize_score_columns(&mut next.domain_scores);
    normalize_score_columns(&mut next.word_scores);
    Ok(next)
}

/// One simultaneous update from the previous arrays: the normalized update
/// followed by seed re-clamping.
pub fn iterate_once<F: Float>(
    m_word: &SparseMatrix<F>,
    m_domain: &SparseMatrix<F>,
    arrays: &LabelArrays<F>,
    clamp: &ClampSet,
) -> Result<LabelArrays<F>, PropagationError> {
    let mut next = normalized_update(m_word, m_domain, arrays)?;
    clamp_rows(&mut next, clamp);
    Ok(next)
}

/// Run the iteration to convergence (or `max_iters`).
pub fn propagate<F: Float>(
    m: &SparseMatrix<F>,
    words: &[String],
    domains: &[String],
    seeds: &SeedSet,
    config: &PropagationConfig<F>,
) -> Result<PropagationResult<F>, PropagationError> {
    config.validate()?;
    if m.rows() != words.len() || m.cols() != domains.len() {
        return Err(PropagationError::ShapeMismatch(format!(
            "matrix is {}x{} but indexes are {} words / {} domains",
            m.rows(),
            m.cols(),
            words.len(),
            domains.len()
        )));
    }
    let init = initialize::<F>(seeds, words, domains)?;
    let m_word = normalize_for_words(m);
    let m_domain = normalize_for_domains(m);

    let mut arrays = init.arrays;
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = F::infinity();
    while iterations < config.max_iters {
        let next = iterate_once(&m_word, &m_domain, &arrays, &init.clamp)?;
        iterations += 1;
        residual = F::zero();
        for (new_row, old_row) in next.domain_scores.iter().zip(arrays.domain_scores.iter()) {
            for k in 0..4 {
                let delta = (new_row[k] - old_row[k]).abs();
                if delta > residual {
                    residual = delta;
                }
            }
        }
        arrays = next;
        if residual < config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(PropagationResult { arrays, iterations, converged, residual, missing_seeds: init.missing })
}

/// Read final labels off the domain scores: argmax over the four columns,
/// exact ties resolved by `tie_order`, all-zero rows labeled NM.
pub fn assign_labels<F: Float>(
    domain_scores: &[[F; 4]],
    domains: &[String],
    tie_order: [CategoryLabel; 4],
) -> BTreeMap<String, CategoryLabel> {
    domains
        .iter()
        .zip(domain_scores.iter())
        .map(|(domain, row)| (domain.clone(), label_of_row(row, tie_order)))
        .collect()
}

fn label_of_row<F: Float>(row: &[F; 4], tie_order: [CategoryLabel; 4]) -> CategoryLabel {
    let mut max = row[0];
    for v in &row[1..] {
        if *v > max {
            max = *v;
        }
    }
    if max <= F::zero() {
        return CategoryLabel::Nm;
    }
    for label in tie_order {
        let column = label.column().expect("tie_order validated");
        if row[column] == max {
            return label;
        }
    }
    CategoryLabel::Nm
}

/// Per-domain TSV export: domain_key, DO, PC, AM, NM scores, assigned label,
/// sorted by domain_key.
pub fn export_domain_scores<F: Float + Display>(
    domain_scores: &[[F; 4]],
    domains: &[String],
    tie_order: [CategoryLabel; 4],
) -> String {
    let mut rows: Vec<(&String, &[F; 4])> = domains.iter().zip(domain_scores.iter()).collect();
    rows.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = String::new();
    for (domain, row) in rows {
        let label = label_of_row(row, tie_order);
        out.push_str(&format!(
            "{domain}\t{}\t{}\t{}\t{}\t{label}\n",
            row[0], row[1], row[2], row[3]
        ));
    }
    out
}
