//! Wilson intervals, Mann-Whitney U, Cohen's kappa, and the shared quantile
//! conventions.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid counts: successes={successes} n={n}")]
    InvalidCounts { successes: u64, n: u64 },
    #[error("sample `{0}` is empty")]
    EmptySample(&'static str),
    #[error("annotator vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("samples contain non-finite values")]
    NonFinite,
}

/// A statistic with its p-value or interval and a method tag.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StatResult {
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub method: String,
}

fn normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// z for a central interval at the given level (e.g. 0.95 -> 1.95996...).
fn z_for_level(level: f64) -> f64 {
    normal().inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, n: u64, level: f64) -> Result<(f64, f64), StatsError> {
    if n == 0 || successes > n || !(0.0..1.0).contains(&level) {
        return Err(StatsError::InvalidCounts { successes, n });
    }
    let z = z_for_level(level);
    let n_f = n as f64;
    let p_hat = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p_hat + z2 / (2.0 * n_f)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    // at the boundary counts the half-width equals the center algebraically
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

/// How `mann_whitney_u` computes its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwuMethod {
    /// Exact when |a|+|b| <= 12 and tie-free, else the normal approximation.
    Auto,
    /// Exact enumeration of the tie-free U distribution.
    Exact,
    /// Normal approximation with tie correction and continuity correction.
    NormalApprox,
}

/// Midranks of the pooled sample, returned per input position.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|a, b| pooled[*a].partial_cmp(&pooled[*b]).expect("finite values"));
    let mut ranks = vec![0.0; pooled.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Counts of rank subsets by U value for the tie-free null distribution with
/// group sizes (m, n): table[u] = #{subsets with U1 = u}. Built from the
/// recurrence on whether the largest pooled rank sits in group A (adding n to
/// U1) or in group B.
fn u_distribution(m: usize, n: usize) -> Vec<f64> {
    fn count(
        m: usize,
        n: usize,
        memo: &mut std::collections::HashMap<(usize, usize), Vec<f64>>,
    ) -> Vec<f64> {
        if m == 0 || n == 0 {
            return vec![1.0];
        }
        if let Some(hit) = memo.get(&(m, n)) {
            return hit.clone();
        }
        let in_a = count(m - 1, n, memo);
        let in_b = count(m, n - 1, memo);
        let mut out = vec![0.0; m * n + 1];
        for (u, c) in in_a.iter().enumerate() {
            out[u + n] += c;
        }
        for (u, c) in in_b.iter().enumerate() {
            out[u] += c;
        }
        memo.insert((m, n), out.clone());
        out
    }
    let mut memo = std::collections::HashMap::new();
    count(m, n, &mut memo)
}

/// Exact two-sided p for tie-free samples: 2 * P(U <= min(U1, U2)), capped.
fn exact_two_sided_p(m: usize, n: usize, u_min: f64) -> f64 {
    let table = u_distribution(m, n);
    let total: f64 = table.iter().sum();
    let cutoff = u_min.floor() as usize;
    let below: f64 = table.iter().take(cutoff + 1).sum();
    (2.0 * below / total).min(1.0)
}

fn approx_two_sided_p(u_min: f64, m: usize, n: usize, tie_sizes: &[u64]) -> f64 {
    let m_f = m as f64;
    let n_f = n as f64;
    let total = m_f + n_f;
    let mu = m_f * n_f / 2.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|t| {
            let t = *t as f64;
            t * t * t - t
        })
        .sum();
    let variance =
        m_f * n_f / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let z = (u_min - mu + 0.5) / variance.sqrt();
    (2.0 * normal().cdf(z)).min(1.0)
}

/// Mann-Whitney U with the automatic method choice.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    mann_whitney_u_with(a, b, MwuMethod::Auto)
}

/// Mann-Whitney U from rank sums with midrank ties. `U` is reported for
/// sample `a`. Exact enumeration requires tie-free data.
pub fn mann_whitney_u_with(
    a: &[f64],
    b: &[f64],
    method: MwuMethod,
) -> Result<StatResult, StatsError> {
    if a.is_empty() {
        return Err(StatsError::EmptySample("a"));
    }
    if b.is_empty() {
        return Err(StatsError::EmptySample("b"));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (m, n) = (a.len(), b.len());
    let mut pooled: Vec<f64> = Vec::with_capacity(m + n);
    pooled.extend_from_slice(a);
    pooled.extend_from_slice(b);
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..m].iter().sum();
    let u_a = rank_sum_a - (m * (m + 1)) as f64 / 2.0;
    let u_b = (m * n) as f64 - u_a;
    let u_min = u_a.min(u_b);

    let mut sorted = pooled.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut tie_sizes: Vec<u64> = Vec::new();
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                tie_sizes.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        tie_sizes.push(run);
    }
    let tie_free = tie_sizes.is_empty();

    let effective = match method {
        MwuMethod::Auto => {
            if m + n <= 12 && tie_free {
                MwuMethod::Exact
            } else {
                MwuMethod::NormalApprox
            }
        }
        m => m,
    };
    let (p, tag) = match effective {
        MwuMethod::Exact => {
            if !tie_free {
                // exact enumeration assumes distinct ranks
                (approx_two_sided_p(u_min, m, n, &tie_sizes), "normal-approx")
            } else {
                (exact_two_sided_p(m, n, u_min), "exact")
            }
        }
        MwuMethod::NormalApprox => (approx_two_sided_p(u_min, m, n, &tie_sizes), "normal-approx"),
        MwuMethod::Auto => unreachable!(),
    };
    Ok(StatResult {
        statistic: u_a,
        p_value: Some(p),
        interval: None,
        method: format!("mann-whitney-u/{tag}"),
    })
}

/// Cohen's kappa over two binary annotation vectors.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<StatResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::EmptySample("annotations"));
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b.iter()).filter(|(x, y)| x == y).count() as f64 / n;
    let pa = a.iter().filter(|x| **x).count() as f64 / n;
    let pb = b.iter().filter(|x| **x).count() as f64 / n;
    let expected = pa * pb + (1.0 - pa) * (1.0 - pb);
    let kappa = if expected >= 1.0 { 1.0 } else { (observed - expected) / (1.0 - expected) };
    Ok(StatResult { statistic: kappa, p_value: None, interval: None, method: "cohen-kappa".to_string() })
}

/// Quantile boundaries over sorted values: boundary_j = x[ceil(j*n/groups)]
/// (1-indexed). With `groups` buckets there are `groups - 1` boundaries.
pub fn quantile_boundaries<T: Copy>(sorted: &[T], groups: usize) -> Vec<T> {
    assert!(groups >= 1);
    let n = sorted.len();
    (1..groups)
        .map(|j| {
            let rank = (j * n).div_ceil(groups).max(1);
            sorted[rank - 1]
        })
        .collect()
}

/// Bucket index with ties to the lower bucket: the count of boundaries
/// strictly below the value.
pub fn bucket_of<T: PartialOrd>(value: T, boundaries: &[T]) -> usize {
    boundaries.iter().filter(|b| **b < value).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_zero_successes_hits_zero() {
        let (lo, hi) = wilson_ci(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 1.0);
    }

    #[test]
    fn wilson_five_of_ten() {
        let (lo, hi) = wilson_ci(5, 10, 0.95).unwrap();
        assert!((lo - 0.2366).abs() < 5e-4, "lo = {lo}");
        assert!((hi - 0.7634).abs() < 5e-4, "hi = {hi}");
    }

    #[test]
    fn wilson_symmetry() {
        for n in [7u64, 10, 33] {
            for k in 0..=n {
                let (lo, hi) = wilson_ci(k, n, 0.95).unwrap();
                let (lo2, hi2) = wilson_ci(n - k, n, 0.95).unwrap();
                assert!((lo - (1.0 - hi2)).abs() < 1e-12);
                assert!((hi - (1.0 - lo2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wilson_rejects_bad_counts() {
        assert!(wilson_ci(5, 4, 0.95).is_err());
        assert!(wilson_ci(0, 0, 0.95).is_err());
    }

    #[test]
    fn mwu_identical_samples() {
        let a = [1.0, 2.0, 3.0];
        let result = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(result.statistic, 4.5); // |a||b|/2
        assert!(result.p_value.unwrap() > 0.9);
    }

    #[test]
    fn mwu_separated_samples_exact() {
        let result = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(result.statistic, 0.0);
        assert!((result.p_value.unwrap() - 0.1).abs() < 1e-12);
        assert!(result.method.ends_with("exact"));
    }

    #[test]
    fn mwu_single_element_ties_use_midranks() {
        let result = mann_whitney_u(&[1.0], &[1.0]).unwrap();
        assert_eq!(result.statistic, 0.5);
        assert_eq!(result.p_value, Some(1.0));
    }

    #[test]
    fn mwu_rejects_empty() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
    }

    #[test]
    fn kappa_fixtures() {
        let one = cohen_kappa(&[true, true, false, false], &[true, true, false, false]).unwrap();
        assert_eq!(one.statistic, 1.0);
        let zero = cohen_kappa(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(zero.statistic, 0.0);
        let minus = cohen_kappa(&[true, false], &[false, true]).unwrap();
        assert_eq!(minus.statistic, -1.0);
    }

    #[test]
    fn kappa_degenerate_full_agreement() {
        let r = cohen_kappa(&[true, true], &[true, true]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn kappa_length_mismatch() {
        assert!(cohen_kappa(&[true], &[true, false]).is_err());
    }

    #[test]
    fn quantile_buckets_match_fixtures() {
        // 10 distinct values, 10 groups -> one per bucket
        let values: Vec<u64> = (1..=10).collect();
        let boundaries = quantile_boundaries(&values, 10);
        assert_eq!(boundaries.len(), 9);
        let mut counts = [0usize; 10];
        for v in &values {
            counts[bucket_of(*v, &boundaries)] += 1;
        }
        assert_eq!(counts, [1; 10]);

        // 20 values, 2 groups -> clean halves
        let values: Vec<u64> = (1..=20).collect();
        let boundaries = quantile_boundaries(&values, 2);
        assert_eq!(boundaries, vec![10]);
        assert_eq!(bucket_of(10u64, &boundaries), 0, "ties go to the lower bucket");
        assert_eq!(bucket_of(11u64, &boundaries), 1);
    }
}
