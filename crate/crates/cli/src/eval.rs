//! Error reporting for a trained model against labeled records.

use std::time::Instant;

use hyperrobust::model::{predict_with_features, ModelParameters};
use hyperrobust::robustness::{label_hypergraph, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::records::SampleRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    pub mean_abs_error: f64,
    /// Population standard deviation of the absolute errors.
    pub std_abs_error: f64,
    /// Error of always predicting the mean test label.
    pub baseline_mean_abs_error: f64,
    pub baseline_prediction: f64,
    pub prediction_seconds: f64,
    /// Set when labeling was re-run for timing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeling_seconds: Option<f64>,
}

impl EvalReport {
    /// The report with timing fields cleared, for comparing runs.
    pub fn without_timing(&self) -> Self {
        EvalReport {
            prediction_seconds: 0.0,
            labeling_seconds: None,
            ..self.clone()
        }
    }
}

/// Sum after sorting, so the result does not depend on input order.
fn ordered_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Mean and population standard deviation of `|prediction − label|`.
pub fn error_stats(predictions: &[f64], labels: &[f64]) -> (f64, f64) {
    assert_eq!(predictions.len(), labels.len());
    let errors: Vec<f64> = predictions.iter().zip(labels).map(|(p, l)| (p - l).abs()).collect();
    let n = errors.len() as f64;
    let mean = ordered_sum(&errors) / n;
    let deviations: Vec<f64> = errors.iter().map(|e| (e - mean).powi(2)).collect();
    (mean, (ordered_sum(&deviations) / n).sqrt())
}

pub fn report(predictions: &[f64], labels: &[f64], prediction_seconds: f64) -> Result<EvalReport> {
    if labels.is_empty() {
        return Err(CliError::Data("no samples to evaluate".into()));
    }
    let (mean_abs_error, std_abs_error) = error_stats(predictions, labels);
    let baseline_prediction = ordered_sum(labels) / labels.len() as f64;
    let (baseline_mean_abs_error, _) = error_stats(&vec![baseline_prediction; labels.len()], labels);
    Ok(EvalReport {
        count: labels.len(),
        mean_abs_error,
        std_abs_error,
        baseline_mean_abs_error,
        baseline_prediction,
        prediction_seconds,
        labeling_seconds: None,
    })
}

/// Clamped predictions for every record, from its stored failure order.
pub fn predict_records(params: &ModelParameters, records: &[SampleRecord]) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            let s = r.to_sample()?;
            Ok(predict_with_features(&s.hypergraph, &s.features, params)?)
        })
        .collect()
}

pub fn evaluate(params: &ModelParameters, records: &[SampleRecord], time_labeling: Option<&QuadratureConfig>) -> Result<EvalReport> {
    let start = Instant::now();
    let predictions = predict_records(params, records)?;
    let prediction_seconds = start.elapsed().as_secs_f64();
    let labels: Vec<f64> = records.iter().map(|r| r.label_r).collect();
    let mut out = report(&predictions, &labels, prediction_seconds)?;
    if let Some(quad) = time_labeling {
        let start = Instant::now();
        for r in records {
            label_hypergraph(&r.hypergraph()?, r.attack_spec()?, quad)?;
        }
        out.labeling_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(out)
}
