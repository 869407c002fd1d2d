//! Plot-ready CSV renderings of the report types. One header line each;
//! fields are quoted only when they need it.

use super::matching::{
    ComparisonReport, DonationShareReport, EarningsHistogram, MatchedPairSet,
    ProductivityContrast, EARNINGS_BUCKET_LABELS,
};
use super::prevalence::{
    AdoptionSeries, DecileReport, PrevalenceReport, TopDomainReport, STRATEGY_NAMES,
};
use super::validation::{ConfusionMatrix, ValidationSample};

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn prevalence_csv(report: &PrevalenceReport) -> String {
    let mut out = String::new();
    let mut header = vec!["category".to_string()];
    for name in STRATEGY_NAMES {
        header.push(format!("video_{name}_pct"));
    }
    header.push("video_n".to_string());
    for name in STRATEGY_NAMES {
        header.push(format!("channel_{name}_pct"));
    }
    header.push("channel_n".to_string());
    push_row(&mut out, &header);
    for row in &report.rows {
        let mut cells = vec![field(&row.category)];
        cells.extend(row.video_share.iter().map(|v| v.to_string()));
        cells.push(row.video_count.to_string());
        cells.extend(row.channel_share.iter().map(|v| v.to_string()));
        cells.push(row.channel_count.to_string());
        push_row(&mut out, &cells);
    }
    out
}

pub fn top_domains_csv(report: &TopDomainReport) -> String {
    let mut out = String::from("strategy,name,occurrences,channel_pct,employment_rate_pct\n");
    for row in &report.rows {
        push_row(
            &mut out,
            &[
                row.strategy.to_string(),
                field(&row.name),
                row.occurrences.to_string(),
                row.channel_share.to_string(),
                row.employment_rate.to_string(),
            ],
        );
    }
    out
}

pub fn adoption_series_csv(series: &AdoptionSeries) -> String {
    let mut out = String::from("cohort,cohort_channels,year,PC_pct,AM_pct,DO_pct,CR_pct,Any_pct\n");
    for cohort in &series.cohorts {
        for year in &cohort.years {
            let mut cells = vec![
                field(&cohort.label),
                cohort.channel_count.to_string(),
                year.year.to_string(),
            ];
            cells.extend(year.share.iter().map(|v| v.to_string()));
            push_row(&mut out, &cells);
        }
    }
    out
}

pub fn decile_csv(report: &DecileReport) -> String {
    let mut out = String::from("group,channels,strategy,adopters,share_pct,ci_low_pct,ci_high_pct\n");
    for group in &report.groups {
        for (i, name) in STRATEGY_NAMES.iter().enumerate() {
            push_row(
                &mut out,
                &[
                    group.group.to_string(),
                    group.channels.to_string(),
                    name.to_string(),
                    group.adopters[i].to_string(),
                    group.share[i].to_string(),
                    group.ci_low[i].to_string(),
                    group.ci_high[i].to_string(),
                ],
            );
        }
    }
    out
}

pub fn matched_pairs_csv(pairs: &MatchedPairSet) -> String {
    let mut out = String::from("treated,control,x\n");
    for pair in &pairs.pairs {
        push_row(&mut out, &[field(&pair.treated), field(&pair.control), pair.x.to_string()]);
    }
    out
}

pub fn productivity_csv(contrast: &ProductivityContrast) -> String {
    let mut out = String::from(
        "offset,treated_mean,treated_ci_low,treated_ci_high,control_mean,control_ci_low,control_ci_high\n",
    );
    for point in &contrast.points {
        push_row(
            &mut out,
            &[
                point.offset.to_string(),
                point.treated_mean.to_string(),
                point.treated_ci.0.to_string(),
                point.treated_ci.1.to_string(),
                point.control_mean.to_string(),
                point.control_ci.0.to_string(),
                point.control_ci.1.to_string(),
            ],
        );
    }
    out.push_str(&format!(
        "# totals months 1-12: treated={} control={} ratio={}\n",
        contrast.treated_total, contrast.control_total, contrast.ratio
    ));
    out
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("panel,key,treated,treated_ci_low,treated_ci_high,control,control_ci_low,control_ci_high\n");
    for row in &report.adoption {
        push_row(
            &mut out,
            &[
                "adoption".to_string(),
                row.strategy.clone(),
                row.treated_pct.to_string(),
                row.treated_ci.0.to_string(),
                row.treated_ci.1.to_string(),
                row.control_pct.to_string(),
                row.control_ci.0.to_string(),
                row.control_ci.1.to_string(),
            ],
        );
    }
    for row in &report.share_buckets {
        push_row(
            &mut out,
            &[
                "monetized_share".to_string(),
                field(&row.bucket),
                row.treated_pct.to_string(),
                String::new(),
                String::new(),
                row.control_pct.to_string(),
                String::new(),
                String::new(),
            ],
        );
    }
    for row in &report.link_buckets {
        push_row(
            &mut out,
            &[
                "links_per_video".to_string(),
                field(&row.bucket),
                row.treated_pct.to_string(),
                String::new(),
                String::new(),
                row.control_pct.to_string(),
                String::new(),
                String::new(),
            ],
        );
    }
    out.push_str(&format!(
        "# share_p={} links_p={} cut_points={:?}\n",
        report.share_test.p_value.unwrap_or(f64::NAN),
        report.link_test.p_value.unwrap_or(f64::NAN),
        report.share_cut_points,
    ));
    out
}

pub fn donation_share_csv(report: &DonationShareReport) -> String {
    let mut out = String::from("domain,total_channels,problematic_channels,problematic_pct\n");
    push_row(
        &mut out,
        &[
            "All".to_string(),
            String::new(),
            String::new(),
            report.baseline_pct.to_string(),
        ],
    );
    for row in &report.rows {
        push_row(
            &mut out,
            &[
                field(&row.domain),
                row.total_channels.to_string(),
                row.problematic_channels.to_string(),
                row.share_pct.to_string(),
            ],
        );
    }
    out
}

pub fn earnings_csv(histogram: &EarningsHistogram) -> String {
    let mut out = String::from("bucket,channels\n");
    for (label, count) in EARNINGS_BUCKET_LABELS.iter().zip(histogram.buckets.iter()) {
        push_row(&mut out, &[field(label), count.to_string()]);
    }
    out.push_str(&format!(
        "# median={}\n",
        histogram.median.map(|m| m.to_string()).unwrap_or_else(|| "absent".to_string())
    ));
    out
}

pub fn confusion_csv(matrix: &ConfusionMatrix) -> String {
    let mut out = String::from("real\\predicted");
    for label in matrix.labels {
        out.push_str(&format!(",{label}"));
    }
    out.push('\n');
    for (i, label) in matrix.labels.iter().enumerate() {
        let mut cells = vec![label.to_string()];
        cells.extend(matrix.counts[i].iter().map(|c| c.to_string()));
        push_row(&mut out, &cells);
    }
    let mut cells = vec!["precision".to_string()];
    cells.extend(matrix.precision.iter().map(|p| match p {
        Some(v) => v.to_string(),
        None => String::new(),
    }));
    push_row(&mut out, &cells);
    out.push_str(&format!("# accuracy={}\n", matrix.accuracy));
    out
}

pub fn samples_tsv(samples: &[ValidationSample]) -> String {
    let mut out = String::new();
    for sample in samples {
        for item in &sample.items {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                sample.strategy.as_str(),
                item.domain,
                item.predicted
            ));
        }
        for warning in &sample.warnings {
            out.push_str(&format!("# {}: {warning}\n", sample.strategy.as_str()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::prevalence::PrevalenceRow;

    #[test]
    fn csv_quotes_only_when_needed() {
        assert_eq!(field("Gaming"), "Gaming");
        assert_eq!(field("News & Politics"), "News & Politics");
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn prevalence_csv_shape() {
        let report = PrevalenceReport {
            rows: vec![PrevalenceRow {
                category: "All".to_string(),
                video_share: [1.0, 2.0, 3.0, 4.0, 5.0],
                video_count: 10,
                channel_share: [0.0; 5],
                channel_count: 2,
            }],
        };
        let csv = prevalence_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("category,video_PC_pct"));
        assert!(lines[1].starts_with("All,1,2,3,4,5,10,"));
    }
}
