//! Experiment configuration: a JSON document describing the class model, the
//! transition matrix (special case or explicit), the sweep, and the
//! aggregators to simulate.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::special_case_transition;
use crate::classify::AlphaGrid;
use crate::error::{Error, Result};
use crate::model::{simplex_means, GaussianClassModel, TransitionMatrix};
use crate::synthgraph::DegreeSpec;

/// Default seed; fixed so documented runs reproduce.
pub const DEFAULT_SEED: u64 = 20_240_521;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const MIN_TRIALS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Agnostic,
    Wsa,
    Sca,
    ScaNorm,
    ScaK,
    GcnBaseline,
    GinBaseline,
}

impl Aggregator {
    pub const ALL: [Aggregator; 7] = [
        Aggregator::Agnostic,
        Aggregator::Wsa,
        Aggregator::Sca,
        Aggregator::ScaNorm,
        Aggregator::ScaK,
        Aggregator::GcnBaseline,
        Aggregator::GinBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Agnostic => "agnostic",
            Aggregator::Wsa => "wsa",
            Aggregator::Sca => "sca",
            Aggregator::ScaNorm => "sca_norm",
            Aggregator::ScaK => "sca_k",
            Aggregator::GcnBaseline => "gcn_baseline",
            Aggregator::GinBaseline => "gin_baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaPolicy {
    /// Two-class symmetric transitions only.
    ClosedForm,
    #[default]
    Grid,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSpec {
    /// Common pairwise separation `‖μ_m − μ_ℓ‖²/σ²`.
    pub gamma0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeansSpec {
    Explicit(Vec<Vec<f64>>),
    Simplex { simplex: SimplexSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhSpec {
    Single(f64),
    List(Vec<f64>),
    Grid { start: f64, stop: f64, step: f64 },
}

impl Default for PhSpec {
    fn default() -> Self {
        PhSpec::Grid {
            start: 0.0,
            stop: 1.0,
            step: 0.05,
        }
    }
}

impl PhSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match self {
            PhSpec::Single(v) => vec![*v],
            PhSpec::List(v) => v.clone(),
            PhSpec::Grid { start, stop, step } => {
                if !(*step > 0.0 && stop >= start) {
                    return Err(Error::Config(format!("bad p_h grid {start}:{step}:{stop}")));
                }
                let n = ((stop - start) / step).round() as usize;
                (0..=n).map(|k| start + (stop - start) * k as f64 / n.max(1) as f64).collect()
            }
        };
        if values.is_empty() {
            return Err(Error::Config("p_h list is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("p_h = {bad} is outside [0, 1]")));
        }
        Ok(values)
    }
}

/// Parameters of `gen-graph`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(rename = "N")]
    pub nodes: usize,
    pub degrees: DegreeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "M")]
    pub num_classes: usize,
    #[serde(rename = "F")]
    pub feature_dim: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
    pub means: MeansSpec,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special_case: Option<u8>,
    #[serde(default)]
    pub p_h: PhSpec,
    #[serde(default = "default_degrees")]
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub alpha: AlphaPolicy,
    #[serde(default)]
    pub alpha_grid: AlphaGrid,
    #[serde(default)]
    pub aggregators: Vec<Aggregator>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(rename = "K", default = "default_hops")]
    pub hops: usize,
    #[serde(default)]
    pub gin_epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
}

fn default_sigma() -> f64 {
    1.0
}
fn default_degrees() -> Vec<usize> {
    vec![1, 2, 4, 8]
}
fn default_trials() -> u64 {
    DEFAULT_TRIALS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_hops() -> usize {
    2
}

/// One transition matrix of the sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// `"1"`, `"2"`, `"3"` for special cases, `"custom"` for an explicit matrix.
    pub case: String,
    /// The sweep value, or the prior-weighted homophily of an explicit matrix.
    pub p_h: f64,
    pub transition: TransitionMatrix,
}

impl ExperimentConfig {
    /// Parses a config document, or the `"config"` member of a run manifest.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let value = match value.get("config") {
            Some(inner) if value.get("M").is_none() => inner.clone(),
            _ => value,
        };
        let config: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Config(format!("M = {} but at least 2 classes are needed", self.num_classes)));
        }
        if self.feature_dim < 1 {
            return Err(Error::Config("F must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma = {} must be positive", self.sigma)));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!("trials = {} is below the minimum {MIN_TRIALS}", self.trials)));
        }
        if self.degrees.is_empty() {
            return Err(Error::Config("degree list is empty".into()));
        }
        if self.aggregators.contains(&Aggregator::ScaK) && !(1..=crate::classify::MAX_HOPS).contains(&self.hops) {
            return Err(Error::Config(format!("K = {} must lie in 1..={}", self.hops, crate::classify::MAX_HOPS)));
        }
        match (&self.transition, self.special_case) {
            (Some(_), Some(_)) => return Err(Error::Config("give either P or special_case, not both".into())),
            (None, None) => return Err(Error::Config("missing transition spec: give P or special_case".into())),
            _ => {}
        }
        self.p_h.values()?;
        Ok(())
    }

    pub fn build_model(&self) -> Result<GaussianClassModel> {
        let m = self.num_classes;
        let priors = self.priors.clone().unwrap_or_else(|| vec![1.0 / m as f64; m]);
        let means = match &self.means {
            MeansSpec::Simplex { simplex } => simplex_means(m, self.feature_dim, simplex.gamma0, self.sigma)?,
            MeansSpec::Explicit(rows) => rows.iter().map(|r| DVector::from_vec(r.clone())).collect(),
        };
        GaussianClassModel::isotropic(priors, means, self.sigma)
    }

    pub fn sweep(&self) -> Result<Vec<SweepPoint>> {
        if let Some(rows) = &self.transition {
            let transition = TransitionMatrix::from_rows(rows)?;
            let priors = self.build_model()?.priors().to_vec();
            return Ok(vec![SweepPoint {
                case: "custom".into(),
                p_h: transition.average_homophily(&priors),
                transition,
            }]);
        }
        let case = self.special_case.expect("validated");
        self.p_h
            .values()?
            .into_iter()
            .map(|p_h| {
                let transition = special_case_transition(case, p_h)?;
                if transition.order() != self.num_classes {
                    return Err(Error::Config(format!(
                        "special case {case} has {} classes but M = {}",
                        transition.order(),
                        self.num_classes
                    )));
                }
                Ok(SweepPoint {
                    case: case.to_string(),
                    p_h,
                    transition,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE1: &str = r#"{
        "M": 2, "F": 20, "sigma": 1.0,
        "means": {"simplex": {"gamma0": 1.0}},
        "special_case": 1,
        "p_h": {"start": 0.0, "stop": 1.0, "step": 0.1},
        "degrees": [1, 4],
        "alpha": "closed_form",
        "aggregators": ["wsa", "sca"],
        "trials": 2000
    }"#;

    #[test]
    fn parses_and_builds() {
        let c = ExperimentConfig::from_json_str(CASE1).unwrap();
        assert_eq!(c.alpha, AlphaPolicy::ClosedForm);
        assert_eq!(c.seed, DEFAULT_SEED);
        let sweep = c.sweep().unwrap();
        assert_eq!(sweep.len(), 11);
        assert_eq!(sweep[5].p_h, 0.5);
        assert_eq!(sweep[10].p_h, 1.0);
        assert_eq!(c.build_model().unwrap().feature_dim(), 20);
    }

    #[test]
    fn reads_config_inside_a_manifest() {
        let manifest = format!(r#"{{"version": "x", "config": {CASE1}}}"#);
        assert_eq!(ExperimentConfig::from_json_str(&manifest).unwrap().degrees, vec![1, 4]);
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = [
            CASE1.replace("\"trials\": 2000", "\"trials\": 10"),
            CASE1.replace("\"special_case\": 1,", ""),
            CASE1.replace("\"degrees\"", "\"degree\""),
            CASE1.replace("\"M\": 2", "\"M\": 1"),
            CASE1.replace("\"step\": 0.1", "\"step\": -0.1"),
        ];
        for doc in &bad {
            assert!(ExperimentConfig::from_json_str(doc).is_err(), "{doc}");
        }
        let wrong_order = CASE1.replace("\"M\": 2", "\"M\": 4");
        let err = ExperimentConfig::from_json_str(&wrong_order).unwrap().sweep();
        assert!(err.is_err());
    }

    #[test]
    fn explicit_matrix_reports_average_homophily() {
        let doc = r#"{"M": 2, "F": 1, "means": [[1.0], [-1.0]], "P": [[0.9, 0.1], [0.3, 0.7]],
                      "priors": [0.75, 0.25], "aggregators": ["agnostic"]}"#;
        let c = ExperimentConfig::from_json_str(doc).unwrap();
        let sweep = c.sweep().unwrap();
        assert_eq!(sweep[0].case, "custom");
        assert!((sweep[0].p_h - (0.75 * 0.9 + 0.25 * 0.7)).abs() < 1e-15);
    }
}
