//! Validation sampling of the lexicon and confusion-matrix scoring of the
//! resulting annotations.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::taxonomy::{CategoryLabel, DomainLexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStrategy {
    /// Per predicted class, uniform without replacement.
    RStrat,
    /// Per predicted class, most popular by usage.
    PStrat,
    /// Uniform over all labeled domains.
    Random,
}

impl SampleStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleStrategy::RStrat => "rstrat",
            SampleStrategy::PStrat => "pstrat",
            SampleStrategy::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizes {
    /// Per predicted class.
    pub rstrat: usize,
    /// Per predicted class.
    pub pstrat: usize,
    /// Over the whole lexicon.
    pub random: usize,
}

impl Default for SampleSizes {
    fn default() -> Self {
        SampleSizes { rstrat: 50, pstrat: 50, random: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledDomain {
    pub domain: String,
    pub predicted: CategoryLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSample {
    pub strategy: SampleStrategy,
    pub items: Vec<SampledDomain>,
    pub warnings: Vec<String>,
}

/// Partial Fisher-Yates: the first `k` entries of a seeded shuffle.
fn sample_without_replacement<T: Clone>(pool: &[T], k: usize, rng: &mut ChaCha20Rng) -> Vec<T> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    let k = k.min(pool.len());
    for i in 0..k {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    indices[..k].iter().map(|i| pool[*i].clone()).collect()
}

/// Draw the three validation samples. Reproducible given the seed; classes
/// smaller than the requested size are truncated with a warning.
pub fn validation_samples(
    lexicon: &DomainLexicon,
    usage: &BTreeMap<String, u64>,
    sizes: &SampleSizes,
    seed: u64,
) -> Vec<ValidationSample> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<CategoryLabel, Vec<&str>> = BTreeMap::new();
    for (domain, entry) in &lexicon.entries {
        by_class.entry(entry.label).or_default().push(domain.as_str());
    }

    let mut rstrat = ValidationSample {
        strategy: SampleStrategy::RStrat,
        items: Vec::new(),
        warnings: Vec::new(),
    };
    for class in CategoryLabel::PROPAGATED {
        let pool = by_class.get(&class).map(|v| v.as_slice()).unwrap_or(&[]);
        if pool.len() < sizes.rstrat {
            rstrat.warnings.push(format!(
                "class {class} has {} domains, requested {}",
                pool.len(),
                sizes.rstrat
            ));
        }
        let mut picked = sample_without_replacement(pool, sizes.rstrat, &mut rng);
        picked.sort_unstable();
        rstrat
            .items
            .extend(picked.into_iter().map(|domain| SampledDomain {
                domain: domain.to_string(),
                predicted: class,
            }));
    }

    let mut pstrat = ValidationSample {
        strategy: SampleStrategy::PStrat,
        items: Vec::new(),
        warnings: Vec::new(),
    };
    for class in CategoryLabel::PROPAGATED {
        let pool = by_class.get(&class).map(|v| v.as_slice()).unwrap_or(&[]);
        if pool.len() < sizes.pstrat {
            pstrat.warnings.push(format!(
                "class {class} has {} domains, requested {}",
                pool.len(),
                sizes.pstrat
            ));
        }
        let mut ranked: Vec<&str> = pool.to_vec();
        ranked.sort_by(|a, b| {
            let ua = usage.get(*a).copied().unwrap_or(0);
            let ub = usage.get(*b).copied().unwrap_or(0);
            ub.cmp(&ua).then_with(|| a.cmp(b))
        });
        pstrat.items.extend(ranked.into_iter().take(sizes.pstrat).map(|domain| SampledDomain {
            domain: domain.to_string(),
            predicted: class,
        }));
    }

    let mut random = ValidationSample {
        strategy: SampleStrategy::Random,
        items: Vec::new(),
        warnings: Vec::new(),
    };
    let all: Vec<&str> = lexicon.entries.keys().map(|d| d.as_str()).collect();
    if all.len() < sizes.random {
        random
            .warnings
            .push(format!("lexicon has {} domains, requested {}", all.len(), sizes.random));
    }
    let mut picked = sample_without_replacement(&all, sizes.random, &mut rng);
    picked.sort_unstable();
    random.items.extend(picked.into_iter().map(|domain| SampledDomain {
        domain: domain.to_string(),
        predicted: lexicon.entries[domain].label,
    }));

    vec![rstrat, pstrat, random]
}

/// 5x5 real-by-predicted counts over the category enum, with per-class
/// precision (diagonal over column sum) and overall accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: [CategoryLabel; 5],
    pub counts: [[u64; 5]; 5],
    pub precision: [Option<f64>; 5],
    pub accuracy: f64,
}

fn label_pos(label: CategoryLabel) -> usize {
    CategoryLabel::ALL.iter().position(|l| *l == label).expect("label enum")
}

pub fn confusion_matrix(annotations: &[(String, CategoryLabel, CategoryLabel)]) -> ConfusionMatrix {
    let mut counts = [[0u64; 5]; 5];
    for (_, real, predicted) in annotations {
        counts[label_pos(*real)][label_pos(*predicted)] += 1;
    }
    let mut precision = [None; 5];
    for (col, slot) in precision.iter_mut().enumerate() {
        let column_sum: u64 = (0..5).map(|row| counts[row][col]).sum();
        if column_sum > 0 {
            *slot = Some(counts[col][col] as f64 / column_sum as f64);
        }
    }
    let total: u64 = counts.iter().flatten().sum();
    let trace: u64 = (0..5).map(|i| counts[i][i]).sum();
    let accuracy = if total == 0 { 0.0 } else { trace as f64 / total as f64 };
    ConfusionMatrix { labels: CategoryLabel::ALL, counts, precision, accuracy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{LexiconEntry, Provenance};

    fn lexicon(per_class: usize) -> DomainLexicon {
        let mut lex = DomainLexicon::default();
        for class in CategoryLabel::PROPAGATED {
            for i in 0..per_class {
                lex.entries.insert(
                    format!("{}-{i}.com", class.as_str().to_lowercase()),
                    LexiconEntry { label: class, provenance: Provenance::Propagated, scores: [0.0; 4] },
                );
            }
        }
        lex
    }

    #[test]
    fn small_class_truncates_with_warning() {
        let lex = lexicon(3);
        let samples = validation_samples(&lex, &BTreeMap::new(), &SampleSizes::default(), 1);
        let rstrat = &samples[0];
        assert_eq!(rstrat.items.len(), 12, "3 per class");
        assert_eq!(rstrat.warnings.len(), 4);
    }

    #[test]
    fn fixed_seed_reproduces_samples() {
        let lex = lexicon(80);
        let usage: BTreeMap<String, u64> =
            lex.entries.keys().enumerate().map(|(i, d)| (d.clone(), i as u64)).collect();
        let a = validation_samples(&lex, &usage, &SampleSizes::default(), 42);
        let b = validation_samples(&lex, &usage, &SampleSizes::default(), 42);
        assert_eq!(a, b);
        let c = validation_samples(&lex, &usage, &SampleSizes::default(), 43);
        assert_ne!(a, c, "different seed, different rstrat draw");
    }

    #[test]
    fn pstrat_orders_by_usage_then_name() {
        let lex = lexicon(4);
        let mut usage = BTreeMap::new();
        usage.insert("do-2.com".to_string(), 50u64);
        usage.insert("do-0.com".to_string(), 10);
        usage.insert("do-1.com".to_string(), 10);
        let samples = validation_samples(&lex, &usage, &SampleSizes { rstrat: 1, pstrat: 3, random: 1 }, 7);
        let pstrat = &samples[1];
        let do_items: Vec<&str> = pstrat
            .items
            .iter()
            .filter(|i| i.predicted == CategoryLabel::Do)
            .map(|i| i.domain.as_str())
            .collect();
        assert_eq!(do_items, vec!["do-2.com", "do-0.com", "do-1.com"]);
    }

    #[test]
    fn confusion_matrix_perfect_and_mixed() {
        let perfect: Vec<(String, CategoryLabel, CategoryLabel)> = CategoryLabel::ALL
            .iter()
            .map(|l| ("x".to_string(), *l, *l))
            .collect();
        let cm = confusion_matrix(&perfect);
        assert_eq!(cm.accuracy, 1.0);
        for i in 0..5 {
            assert_eq!(cm.counts[i][i], 1);
            assert_eq!(cm.precision[i], Some(1.0));
        }

        let half = vec![
            ("a".to_string(), CategoryLabel::Do, CategoryLabel::Do),
            ("b".to_string(), CategoryLabel::Do, CategoryLabel::Am),
        ];
        let cm = confusion_matrix(&half);
        assert_eq!(cm.accuracy, 0.5);
        assert_eq!(cm.precision[label_pos(CategoryLabel::Am)], Some(0.0));
    }

    #[test]
    fn do_row_recall_from_fixture() {
        // a row (98, 0, 0, 0) has perfect recall for DO
        let mut annotations = Vec::new();
        for _ in 0..98 {
            annotations.push(("u".to_string(), CategoryLabel::Do, CategoryLabel::Do));
        }
        let cm = confusion_matrix(&annotations);
        let row = cm.counts[label_pos(CategoryLabel::Do)];
        let row_sum: u64 = row.iter().sum();
        assert_eq!(row[label_pos(CategoryLabel::Do)] as f64 / row_sum as f64, 1.0);
    }
}
