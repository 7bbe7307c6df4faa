//! Flat TOML configuration shared by every command.
//!
//! Every key is optional. A minimal file:
//!
//! ```toml
//! family = "ER"        # ER, WS, SF, SBM, UF or "mixed"
//! num_nodes = 50
//! train_count = 200
//! test_count = 50
//! attack = "static"    # or "dynamic" with alpha / beta
//! ```
//!
//! See the README for the full key list and defaults.

use std::path::Path;

use hyperrobust::cascade::{AttackSpec, CascadeParams};
use hyperrobust::generators::{CardinalityRange, Family, FamilyParams, GeneratorConfig};
use hyperrobust::model::{AggregationMode, Architecture, TrainConfig};
use hyperrobust::robustness::QuadratureConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MIXED: &str = "mixed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub family: String,
    pub num_nodes: usize,
    /// Training samples per family.
    pub train_count: usize,
    /// Test samples in total (round-robin over families when mixed).
    pub test_count: usize,
    pub seed: u64,

    pub attack: String,
    pub alpha: f64,
    pub beta: f64,
    /// Target surrogate error; the quadrature tolerance is 1/50 of it.
    pub delta_pred: f64,
    /// Explicit quadrature tolerance, overriding `delta_pred`.
    pub epsilon: Option<f64>,
    pub d_max: u32,

    pub p: f64,
    pub card_min: usize,
    pub card_max: usize,
    pub k_nn: usize,
    pub p_rw: f64,
    pub m: usize,
    pub communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub uf_k: usize,

    pub layers: usize,
    pub width: usize,
    /// `sum` or `mean`.
    pub aggregation: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub eta_max: f64,
    pub eta_min: f64,
    pub t_max: usize,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub validation_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let arch = Architecture::default();
        let cascade = CascadeParams::default();
        let card = CardinalityRange::default();
        PipelineConfig {
            family: "ER".into(),
            num_nodes: 200,
            train_count: 1000,
            test_count: 200,
            seed: 0,
            attack: "static".into(),
            alpha: cascade.alpha,
            beta: cascade.beta,
            delta_pred: 5e-3,
            epsilon: None,
            d_max: 10,
            p: 0.05,
            card_min: card.min,
            card_max: card.max,
            k_nn: 10,
            p_rw: 0.5,
            m: 5,
            communities: 5,
            p_in: 0.1,
            p_out: 0.01,
            uf_k: 5,
            layers: arch.layers,
            width: arch.width,
            aggregation: "sum".into(),
            epochs: train.epochs,
            batch_size: train.batch_size,
            eta_max: train.eta_max,
            eta_min: train.eta_min,
            t_max: train.t_max,
            weight_decay: train.weight_decay,
            beta1: train.beta1,
            beta2: train.beta2,
            validation_fraction: train.validation_fraction,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| CliError::Config {
            path: origin.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    /// Families in round-robin order; a single entry unless mixed.
    pub fn families(&self) -> Result<Vec<Family>> {
        if self.family.eq_ignore_ascii_case(MIXED) {
            Ok(Family::ALL.to_vec())
        } else {
            Ok(vec![self.family.parse()?])
        }
    }

    pub fn attack_spec(&self) -> Result<AttackSpec> {
        match self.attack.as_str() {
            "static" => Ok(AttackSpec::Static),
            "dynamic" => Ok(AttackSpec::Dynamic(CascadeParams::new(self.alpha, self.beta)?)),
            other => Err(CliError::Data(format!("attack must be static or dynamic, got {other:?}"))),
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        if self.d_max < 1 {
            return Err(CliError::Data("d_max must be >= 1".into()));
        }
        Ok(match self.epsilon {
            Some(eps) => QuadratureConfig::with_epsilon(eps, self.d_max)?,
            None => QuadratureConfig {
                d_max: self.d_max,
                ..QuadratureConfig::from_target_error(self.delta_pred)?
            },
        })
    }

    pub fn generator(&self, family: Family, seed: u64) -> GeneratorConfig {
        let cardinality = CardinalityRange {
            min: self.card_min,
            max: self.card_max,
        };
        let params = match family {
            Family::Er => FamilyParams::Er { p: self.p, cardinality },
            Family::Ws => FamilyParams::Ws {
                k_nn: self.k_nn,
                p_rw: self.p_rw,
            },
            Family::Sf => FamilyParams::Sf { m: self.m, cardinality },
            Family::Sbm => FamilyParams::Sbm {
                communities: self.communities,
                p_in: self.p_in,
                p_out: self.p_out,
                cardinality,
            },
            Family::Uf => FamilyParams::Uf { p: self.p, k: self.uf_k },
        };
        GeneratorConfig {
            num_nodes: self.num_nodes,
            seed,
            params,
        }
    }

    pub fn architecture(&self) -> Result<Architecture> {
        let aggregation = match self.aggregation.as_str() {
            "sum" => AggregationMode::InjectiveSum,
            "mean" => AggregationMode::MeanAblation,
            other => return Err(CliError::Data(format!("aggregation must be sum or mean, got {other:?}"))),
        };
        let arch = Architecture {
            layers: self.layers,
            width: self.width,
            aggregation,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            eta_max: self.eta_max,
            eta_min: self.eta_min,
            t_max: self.t_max,
            epochs: self.epochs,
            batch_size: self.batch_size,
            weight_decay: self.weight_decay,
            beta1: self.beta1,
            beta2: self.beta2,
            seed: self.seed,
            validation_fraction: self.validation_fraction,
            ..TrainConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates every derived piece, including each family's generator.
    pub fn validate(&self) -> Result<()> {
        for family in self.families()? {
            self.generator(family, self.seed).validate()?;
        }
        self.attack_spec()?;
        self.quadrature()?;
        self.architecture()?;
        self.train_config()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = PipelineConfig::from_toml_str("", Path::new("x.toml")).unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.quadrature().unwrap(), QuadratureConfig::default());
        assert_eq!(cfg.train_config().unwrap(), TrainConfig::default());
        assert_eq!(cfg.architecture().unwrap(), Architecture::default());
    }

    #[test]
    fn keys_override_and_unknown_keys_fail() {
        let text = "family = \"mixed\"\nnum_nodes = 30\nattack = \"dynamic\"\nalpha = 2.0\nepsilon = 1e-3\nd_max = 6\naggregation = \"mean\"\n";
        let cfg = PipelineConfig::from_toml_str(text, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.families().unwrap().len(), 5);
        assert_eq!(cfg.attack_spec().unwrap(), AttackSpec::Dynamic(CascadeParams::new(2.0, 1.0).unwrap()));
        let q = cfg.quadrature().unwrap();
        assert_eq!((q.epsilon, q.d_max), (1e-3, 6));
        assert_eq!(cfg.architecture().unwrap().aggregation, AggregationMode::MeanAblation);
        assert!(PipelineConfig::from_toml_str("colour = 1", Path::new("x.toml")).is_err());
    }

    #[test]
    fn invalid_values_are_reported() {
        for text in ["family = \"XX\"", "attack = \"both\"", "p = 1.5", "aggregation = \"max\"", "epochs = 0"] {
            let cfg = PipelineConfig::from_toml_str(text, Path::new("x.toml")).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
    }
}
