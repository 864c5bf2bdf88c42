//! Per-cohort accuracy and average precision, the accuracy-across-cohorts
//! family of bias metrics: report the metric per protected-attribute group
//! alongside the pooled value and the across-cohort spread.

use crate::{Error, Result};
use ndarray::Array2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohortMetric {
    Accuracy,
    AveragePrecision,
}

/// Ground truth for cohort evaluation: either one class index per sample
/// (accuracy, or AP over the implied one-hot columns) or an explicit binary
/// relevance matrix `[n × c]` for multi-label AP.
#[derive(Debug, Clone)]
pub enum CohortLabels<'a> {
    Classes(&'a [u32]),
    MultiLabel(&'a Array2<f64>),
}

/// Per-cohort values indexed by attribute value, plus the pooled metric and
/// the across-cohort population standard deviation.
#[derive(Debug, Clone)]
pub struct CohortStats {
    /// (attribute value, metric) for every observed cohort, ascending.
    pub per_cohort: Vec<(u32, f64)>,
    pub overall: f64,
    pub std_dev: f64,
}

/// Average precision of one score column against binary relevance: walk the
/// ranking by descending score (stable on ties, so equal scores keep input
/// order) and average the precision at each positive. None if no positives.
pub fn average_precision(scores: &[f64], relevant: &[bool]) -> Option<f64> {
    debug_assert_eq!(scores.len(), relevant.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let mut hits = 0usize;
    let mut precision_sum = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        if relevant[idx] {
            hits += 1;
            precision_sum += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        None
    } else {
        Some(precision_sum / hits as f64)
    }
}

fn accuracy_of(scores: &Array2<f64>, labels: &[u32], idx: &[usize]) -> f64 {
    let correct = idx
        .iter()
        .filter(|&&i| {
            let row = scores.row(i);
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite scores"))
                .map(|(j, _)| j)
                .unwrap_or(0);
            argmax == labels[i] as usize
        })
        .count();
    correct as f64 / idx.len() as f64
}

/// Mean AP over score columns that have at least one positive in `idx`.
fn mean_ap_of(scores: &Array2<f64>, labels: &CohortLabels<'_>, idx: &[usize]) -> Result<f64> {
    let c = scores.ncols();
    let mut aps = Vec::new();
    for class in 0..c {
        let col: Vec<f64> = idx.iter().map(|&i| scores[(i, class)]).collect();
        let rel: Vec<bool> = match labels {
            CohortLabels::Classes(l) => idx.iter().map(|&i| l[i] as usize == class).collect(),
            CohortLabels::MultiLabel(m) => idx.iter().map(|&i| m[(i, class)] > 0.5).collect(),
        };
        if let Some(ap) = average_precision(&col, &rel) {
            aps.push(ap);
        }
    }
    if aps.is_empty() {
        return Err(Error::Data(
            "no score column has a positive label in this cohort".into(),
        ));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Evaluate `metric` per cohort (samples sharing an attribute value), on the
/// pooled set, and as the across-cohort standard deviation.
pub fn cohort_eval(
    scores: &Array2<f64>,
    labels: &CohortLabels<'_>,
    attributes: &[u32],
    metric: CohortMetric,
) -> Result<CohortStats> {
    let n = scores.nrows();
    if n == 0 {
        return Err(Error::Data("cannot evaluate an empty score matrix".into()));
    }
    if attributes.len() != n {
        return Err(Error::Dimension(format!(
            "{n} score rows but {} attribute labels",
            attributes.len()
        )));
    }
    match labels {
        CohortLabels::Classes(l) => {
            if l.len() != n {
                return Err(Error::Dimension(format!(
                    "{n} score rows but {} labels",
                    l.len()
                )));
            }
            if let Some(&bad) = l.iter().find(|&&v| v as usize >= scores.ncols()) {
                return Err(Error::Data(format!(
                    "label {bad} is out of range for {} score columns",
                    scores.ncols()
                )));
            }
        }
        CohortLabels::MultiLabel(m) => {
            if m.dim() != scores.dim() {
                return Err(Error::Dimension(format!(
                    "label matrix is {:?} but scores are {:?}",
                    m.dim(),
                    scores.dim()
                )));
            }
        }
    }
    if matches!(metric, CohortMetric::Accuracy) && matches!(labels, CohortLabels::MultiLabel(_)) {
        return Err(Error::Data(
            "accuracy needs class labels, not a multi-label matrix".into(),
        ));
    }

    let mut cohort_values: Vec<u32> = attributes.to_vec();
    cohort_values.sort_unstable();
    cohort_values.dedup();

    let evaluate = |idx: &[usize]| -> Result<f64> {
        match metric {
            CohortMetric::Accuracy => match labels {
                CohortLabels::Classes(l) => Ok(accuracy_of(scores, l, idx)),
                CohortLabels::MultiLabel(_) => unreachable!("rejected above"),
            },
            CohortMetric::AveragePrecision => mean_ap_of(scores, labels, idx),
        }
    };

    let mut per_cohort = Vec::with_capacity(cohort_values.len());
    for &value in &cohort_values {
        let idx: Vec<usize> = (0..n).filter(|&i| attributes[i] == value).collect();
        per_cohort.push((value, evaluate(&idx)?));
    }
    let all: Vec<usize> = (0..n).collect();
    let overall = evaluate(&all)?;

    let k = per_cohort.len() as f64;
    let mean = per_cohort.iter().map(|(_, v)| v).sum::<f64>() / k;
    let std_dev = (per_cohort
        .iter()
        .map(|(_, v)| (v - mean) * (v - mean))
        .sum::<f64>()
        / k)
        .sqrt();

    Ok(CohortStats {
        per_cohort,
        overall,
        std_dev,
    })
}
