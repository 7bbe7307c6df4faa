//! Labeling versus prediction wall-clock comparison.
//!
//! Both sides run sequentially on the calling thread. Prediction uses the
//! failure order stored in each record, so its time covers feature
//! construction and the forward pass only.

use std::time::Instant;

use hyperrobust::model::{predict_with_features, ModelParameters};
use hyperrobust::robustness::{label_hypergraph, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::records::SampleRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub count: usize,
    pub mean_label_seconds: f64,
    pub mean_predict_seconds: f64,
    /// Mean labeling time over mean prediction time.
    pub ratio: f64,
    pub mean_eval_count: f64,
}

pub fn bench(params: &ModelParameters, records: &[SampleRecord], quad: &QuadratureConfig) -> Result<BenchReport> {
    if records.is_empty() {
        return Err(CliError::Data("no samples to benchmark".into()));
    }
    let mut label_seconds = 0.0;
    let mut predict_seconds = 0.0;
    let mut evals = 0usize;
    for r in records {
        let h = r.hypergraph()?;
        let attack = r.attack_spec()?;

        let start = Instant::now();
        let label = label_hypergraph(&h, attack, quad)?;
        label_seconds += start.elapsed().as_secs_f64();
        evals += label.eval_count;

        let start = Instant::now();
        let features = hyperrobust::model::build_features(&h, &r.failure_order)?;
        std::hint::black_box(predict_with_features(&h, &features, params)?);
        predict_seconds += start.elapsed().as_secs_f64();
    }
    let n = records.len() as f64;
    Ok(BenchReport {
        count: records.len(),
        mean_label_seconds: label_seconds / n,
        mean_predict_seconds: predict_seconds / n,
        ratio: label_seconds / predict_seconds.max(f64::MIN_POSITIVE),
        mean_eval_count: evals as f64 / n,
    })
}
