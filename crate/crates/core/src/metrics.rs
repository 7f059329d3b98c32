//! Classification metrics and the per-stage graph construction timing report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{predicted} predictions but {truth} labels")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("class index {index} out of range for {classes} classes")]
    ClassIndex { index: usize, classes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class vectors are indexed by class; `confusion[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<String>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<usize>,
    pub weighted_avg: Averages,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest precision, recall and F1 with support-weighted averages.
pub fn evaluate(
    predicted: &[usize],
    truth: &[usize],
    class_names: &[&str],
) -> Result<MetricsReport, MetricsError> {
    if predicted.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(MetricsError::Empty);
    }
    let t = class_names.len();
    let mut confusion = vec![vec![0usize; t]; t];
    for (&p, &y) in predicted.iter().zip(truth) {
        for index in [p, y] {
            if index >= t {
                return Err(MetricsError::ClassIndex { index, classes: t });
            }
        }
        confusion[y][p] += 1;
    }
    let mut precision = Vec::with_capacity(t);
    let mut recall = Vec::with_capacity(t);
    let mut f1 = Vec::with_capacity(t);
    let mut support = Vec::with_capacity(t);
    for (c, row) in confusion.iter().enumerate() {
        let tp = row[c];
        let predicted_c: usize = confusion.iter().map(|r| r[c]).sum();
        let actual_c: usize = row.iter().sum();
        let p = ratio(tp, predicted_c);
        let r = ratio(tp, actual_c);
        precision.push(p);
        recall.push(r);
        f1.push(if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        });
        support.push(actual_c);
    }
    let n = truth.len() as f64;
    let weighted = |v: &[f64]| {
        v.iter()
            .zip(&support)
            .map(|(x, &s)| x * s as f64)
            .sum::<f64>()
            / n
    };
    let correct: usize = (0..t).map(|c| confusion[c][c]).sum();
    Ok(MetricsReport {
        classes: class_names.iter().map(|s| s.to_string()).collect(),
        weighted_avg: Averages {
            precision: weighted(&precision),
            recall: weighted(&recall),
            f1: weighted(&f1),
        },
        macro_f1: f1.iter().sum::<f64>() / t as f64,
        accuracy: correct as f64 / n,
        precision,
        recall,
        f1,
        support,
        confusion,
    })
}

pub const STAGE_NAMES: [&str; 4] = [
    "original_extraction",
    "single_tx_compression",
    "multi_tx_compression",
    "structure_augmentation",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub mean: f64,
    /// Percentage of the total.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub unit: String,
    pub addresses: usize,
    pub stages: Vec<StageTiming>,
    pub total: f64,
}

/// Mean per-address cost of each construction stage and its share of the total.
pub fn timing_report(per_address: &[[f64; 4]], unit: &str) -> TimingReport {
    let n = per_address.len();
    let mut means = [0.0; 4];
    if n > 0 {
        for row in per_address {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
    }
    let total: f64 = means.iter().sum();
    let stages = STAGE_NAMES
        .iter()
        .zip(means)
        .map(|(name, mean)| StageTiming {
            stage: name.to_string(),
            mean,
            ratio: if total > 0.0 {
                100.0 * mean / total
            } else {
                0.0
            },
        })
        .collect();
    TimingReport {
        unit: unit.to_string(),
        addresses: n,
        stages,
        total,
    }
}
