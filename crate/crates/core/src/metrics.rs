//! Scoring and reporting: macro F1, R², MRR, rank correlation between runs,
//! operator frequency tables and a paired t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hash;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("length mismatch ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input is empty or too short")]
    TooShort,
    #[error("targets have zero variance")]
    ZeroVariance,
    #[error("ranks start at 1")]
    InvalidRank,
    #[error("sequence is constant")]
    DegenerateSequence,
}

/// Unweighted mean of per-class F1 over the classes present in `labels`.
/// A class with no true and no predicted positives scores 0.
pub fn macro_f1<T: Eq + Hash + Ord>(predictions: &[T], labels: &[T]) -> Result<f64, MetricError> {
    if predictions.len() != labels.len() {
        return Err(MetricError::LengthMismatch(predictions.len(), labels.len()));
    }
    if labels.is_empty() {
        return Err(MetricError::TooShort);
    }
    let classes: BTreeSet<&T> = labels.iter().collect();
    let mut total = 0.0;
    for c in &classes {
        let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
        for (p, l) in predictions.iter().zip(labels) {
            match (p == *c, l == *c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
        let denom = 2 * tp + fp + fneg;
        total += if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
    }
    Ok(total / classes.len() as f64)
}

pub fn r2(predictions: &[f64], targets: &[f64]) -> Result<f64, MetricError> {
    if predictions.len() != targets.len() {
        return Err(MetricError::LengthMismatch(predictions.len(), targets.len()));
    }
    if targets.len() < 2 {
        return Err(MetricError::TooShort);
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    let ss_res: f64 = predictions.iter().zip(targets).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mrr(ranks: &[usize]) -> Result<f64, MetricError> {
    if ranks.is_empty() {
        return Err(MetricError::TooShort);
    }
    if ranks.contains(&0) {
        return Err(MetricError::InvalidRank);
    }
    Ok(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return Err(MetricError::DegenerateSequence);
    }
    Ok((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman correlation of two runs' operator-id sequences, aligned by
/// position and truncated to the shorter run.
pub fn diversity_correlation(run_a: &[u32], run_b: &[u32]) -> Result<f64, MetricError> {
    let n = run_a.len().min(run_b.len());
    if n < 2 {
        return Err(MetricError::TooShort);
    }
    let a: Vec<f64> = run_a[..n].iter().map(|&x| x as f64).collect();
    let b: Vec<f64> = run_b[..n].iter().map(|&x| x as f64).collect();
    pearson(&average_ranks(&a), &average_ranks(&b))
}

/// One recommendation run: skeletons in ranked order, each as its operator
/// labels, plus the index of the best-scoring one when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRun {
    pub skeletons: Vec<Vec<String>>,
    pub best: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub first_position: Vec<(String, usize)>,
    pub all_positions: Vec<(String, usize)>,
    pub top_model: Vec<(String, usize)>,
}

fn ranked(counts: BTreeMap<String, usize>) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Operator counts in first position, in any position, and in the best
/// pipeline of each run.
pub fn frequency_report(runs: &[RankedRun]) -> FrequencyReport {
    let mut first = BTreeMap::new();
    let mut all = BTreeMap::new();
    let mut top = BTreeMap::new();
    let bump = |m: &mut BTreeMap<String, usize>, ops: &[String]| {
        for op in ops {
            *m.entry(op.clone()).or_insert(0) += 1;
        }
    };
    for run in runs {
        if let Some(s) = run.skeletons.first() {
            bump(&mut first, s);
        }
        for s in &run.skeletons {
            bump(&mut all, s);
        }
        if let Some(s) = run.best.and_then(|b| run.skeletons.get(b)) {
            bump(&mut top, s);
        }
    }
    FrequencyReport {
        first_position: ranked(first),
        all_positions: ranked(all),
        top_model: ranked(top),
    }
}

pub fn write_frequency_csv(report: &FrequencyReport, w: impl std::io::Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["table", "operator", "count"])?;
    for (name, table) in [
        ("first_position", &report.first_position),
        ("all_positions", &report.all_positions),
        ("top_model", &report.top_model),
    ] {
        for (op, c) in table {
            out.write_record([name, op.as_str(), &c.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Paired two-tailed t-test; returns `(t, p)`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MetricError::TooShort);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(MetricError::DegenerateSequence);
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("n >= 2");
    Ok((t, 2.0 * (1.0 - dist.cdf(t.abs()))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    F1,
    R2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub system: String,
    pub scores: Vec<f64>,
    pub metric: MetricKind,
    #[serde(default)]
    pub source: String,
}

impl RunRecord {
    pub fn mean(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len().max(1) as f64
    }

    pub fn check(&self) -> Result<(), String> {
        if self.scores.is_empty() {
            return Err(format!("{}/{}: no scores", self.dataset, self.system));
        }
        if self.scores.iter().any(|s| !s.is_finite()) {
            return Err(format!("{}/{}: non-finite score", self.dataset, self.system));
        }
        if self.metric == MetricKind::F1 && self.scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(format!("{}/{}: F1 outside [0, 1]", self.dataset, self.system));
        }
        Ok(())
    }
}

/// Rows `dataset, system, score, task, source`, one per (dataset, system)
/// with scores averaged over runs.
pub fn write_results_csv(records: &[RunRecord], w: impl std::io::Write) -> csv::Result<()> {
    let mut groups: BTreeMap<(String, String), (Vec<f64>, MetricKind, String)> = BTreeMap::new();
    for r in records {
        let e = groups
            .entry((r.dataset.clone(), r.system.clone()))
            .or_insert_with(|| (Vec::new(), r.metric, r.source.clone()));
        e.0.extend_from_slice(&r.scores);
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dataset", "system", "score", "task", "source"])?;
    for ((dataset, system), (scores, metric, source)) in groups {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let task = match metric {
            MetricKind::F1 => "classification",
            MetricKind::R2 => "regression",
        };
        out.write_record([dataset, system, format!("{mean:.6}"), task.to_string(), source])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_examples() {
        assert_eq!(macro_f1(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap(), 1.0);
        assert!((macro_f1(&["A", "B", "A", "B"], &["A", "A", "B", "B"]).unwrap() - 0.5).abs() < 1e-12);
        assert!((macro_f1(&[1, 1, 1, 1], &[0, 0, 1, 1]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(macro_f1(&[1], &[1, 2]).unwrap_err(), MetricError::LengthMismatch(1, 2));
    }

    #[test]
    fn r2_examples() {
        assert_eq!(r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r2(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!((r2(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r2(&[1.0, 1.0], &[5.0, 5.0]).unwrap_err(), MetricError::ZeroVariance);
    }

    #[test]
    fn mrr_examples() {
        assert_eq!(mrr(&[1, 1, 1]).unwrap(), 1.0);
        assert!((mrr(&[1, 2, 4]).unwrap() - 1.75 / 3.0).abs() < 1e-12);
        assert_eq!(mrr(&[]).unwrap_err(), MetricError::TooShort);
        assert_eq!(mrr(&[0]).unwrap_err(), MetricError::InvalidRank);
    }

    #[test]
    fn spearman_examples() {
        let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
        assert!(close(diversity_correlation(&[1, 2, 3, 4], &[1, 2, 3, 4]).unwrap(), 1.0));
        assert!(close(diversity_correlation(&[1, 2, 3, 4], &[4, 3, 2, 1]).unwrap(), -1.0));
        assert!((diversity_correlation(&[1, 2, 3, 4], &[2, 1, 4, 3]).unwrap() - 0.6).abs() < 1e-12);
        // truncated to the shorter run
        assert!(close(diversity_correlation(&[1, 2, 3, 9, 9], &[1, 2, 3]).unwrap(), 1.0));
        assert_eq!(diversity_correlation(&[5, 5, 5], &[1, 2, 3]).unwrap_err(), MetricError::DegenerateSequence);
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), [1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn frequency_tables() {
        let one = RankedRun {
            skeletons: vec![vec!["xgboost".into()]],
            best: None,
        };
        let r = frequency_report(&[one]);
        assert_eq!(r.first_position, [("xgboost".to_string(), 1)]);
        assert!(r.top_model.is_empty());
        assert_eq!(frequency_report(&[]), FrequencyReport::default());
    }

    #[test]
    fn t_test_reference() {
        // scipy.stats.ttest_rel([1, 2, 3, 4, 5], [1.5, 2.1, 3.9, 4.2, 5.8]) -> t = -2.8358..., p = 0.0470...
        let (t, p) = paired_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.5, 2.1, 3.9, 4.2, 5.8]).unwrap();
        let d = [-0.5f64, -0.1, -0.9, -0.2, -0.8];
        let mean = d.iter().sum::<f64>() / 5.0;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((t - mean / (sd / 5f64.sqrt())).abs() < 1e-12);
        assert!(p > 0.0 && p < 0.1, "{p}");
    }

    #[test]
    fn results_are_averaged_per_system() {
        let recs: Vec<RunRecord> = [0.7, 0.8, 0.9]
            .iter()
            .map(|&s| RunRecord {
                dataset: "d".into(),
                system: "kgpip".into(),
                scores: vec![s],
                metric: MetricKind::F1,
                source: "run".into(),
            })
            .collect();
        let mut buf = Vec::new();
        write_results_csv(&recs, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dataset,system,score,task,source\nd,kgpip,0.800000,classification,run\n"
        );
    }
}
