//! Dataset generation, relabeling and training over sample records.
//!
//! Sample `i` of a run is generated from seed `cfg.seed + i`; test samples
//! continue the index after the training samples. Work is spread over the
//! current rayon pool, and outputs are always in index order.

use hyperrobust::cascade::{dynamic_failure_order, static_attack_order, AttackSpec};
use hyperrobust::generators::Family;
use hyperrobust::model::{train, Sample, TrainOutcome};
use hyperrobust::robustness::{label_hypergraph, QuadratureConfig};
use hyperrobust::Hypergraph;
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::records::{CascadeRecord, SampleRecord, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<SampleRecord>,
    pub test: Vec<SampleRecord>,
}

/// The order stored with a sample: descending hyperdegree for static
/// attacks, cascade failure order for dynamic ones.
pub fn failure_order(h: &Hypergraph, attack: &AttackSpec) -> Vec<usize> {
    match attack {
        AttackSpec::Static => static_attack_order(h),
        AttackSpec::Dynamic(params) => dynamic_failure_order(h, params),
    }
}

pub fn make_record(
    family: &str,
    seed: u64,
    h: &Hypergraph,
    attack: &AttackSpec,
    quad: &QuadratureConfig,
) -> Result<SampleRecord> {
    let label = label_hypergraph(h, *attack, quad)?;
    Ok(SampleRecord {
        schema_version: SCHEMA_VERSION,
        family: family.to_string(),
        seed,
        num_nodes: h.num_nodes(),
        edges: h.edges().to_vec(),
        attack: attack.name().to_string(),
        cascade: match attack {
            AttackSpec::Static => None,
            AttackSpec::Dynamic(p) => Some(CascadeRecord {
                alpha: p.alpha,
                beta: p.beta,
            }),
        },
        failure_order: failure_order(h, attack),
        label_r: label.r,
        eval_count: label.eval_count,
        label_epsilon: quad.epsilon,
    })
}

fn generate_one(cfg: &PipelineConfig, family: Family, seed: u64, attack: &AttackSpec, quad: &QuadratureConfig) -> Result<SampleRecord> {
    let h = cfg.generator(family, seed).generate()?;
    make_record(family.name(), seed, &h, attack, quad)
}

/// Generates and labels the train and test splits described by `cfg`.
pub fn generate_dataset(cfg: &PipelineConfig) -> Result<Dataset> {
    cfg.validate()?;
    let families = cfg.families()?;
    let attack = cfg.attack_spec()?;
    let quad = cfg.quadrature()?;
    let n_train = cfg.train_count * families.len();
    let jobs = |range: std::ops::Range<usize>| -> Result<Vec<SampleRecord>> {
        range
            .into_par_iter()
            .map(|i| {
                let split_index = if i < n_train { i } else { i - n_train };
                let family = families[split_index % families.len()];
                generate_one(cfg, family, cfg.seed.wrapping_add(i as u64), &attack, &quad)
            })
            .collect()
    };
    Ok(Dataset {
        train: jobs(0..n_train)?,
        test: jobs(n_train..n_train + cfg.test_count)?,
    })
}

/// Relabels existing structures under a new attack or tolerance.
pub fn relabel(records: &[SampleRecord], attack: &AttackSpec, quad: &QuadratureConfig) -> Result<Vec<SampleRecord>> {
    records
        .par_iter()
        .map(|r| make_record(&r.family, r.seed, &r.hypergraph()?, attack, quad))
        .collect()
}

pub fn to_samples(records: &[SampleRecord]) -> Result<Vec<Sample>> {
    records.par_iter().map(SampleRecord::to_sample).collect()
}

pub fn train_model(records: &[SampleRecord], cfg: &PipelineConfig) -> Result<TrainOutcome> {
    let samples = to_samples(records)?;
    Ok(train(&samples, cfg.architecture()?, &cfg.train_config()?)?)
}
