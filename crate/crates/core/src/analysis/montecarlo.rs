//! Monte Carlo estimation of classification error for every
//! (aggregator, p_h, degree) cell of an experiment.
//!
//! All aggregators of one (p_h, degree) point score the same sampled
//! neighborhoods (common random numbers), so their differences carry less noise
//! than their individual errors.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Aggregator, AlphaPolicy, ExperimentConfig, SweepPoint};
use crate::aggregate::{sca_aggregate, sca_khop_aggregate, wsa_aggregate, AggregationWeights};
use crate::classify::{
    bayes_graph_agnostic, build_sca_classifier, build_wsa_classifier, graph_agnostic_deflection, lda_classifier,
    optimal_alpha_closed_form, optimize_alpha_grid, sca_deflection, sca_khop_moments, sca_moments,
    weighted_sum_moments, wsa_deflection, wsa_moments, ANY_DEGREE,
};
use crate::decision::{error_upper_bound, DeflectionTable};
use crate::error::{Error, Result};
use crate::family::ClassifierAtProfile;
use crate::model::{DegreePriors, GaussianClassModel, TransitionMatrix};
use crate::rng::StreamSeed;
use crate::synthgraph::{NeighborhoodSample, NeighborhoodSampler};

/// Cells with fewer errors than this are flagged unreliable.
pub const MIN_RELIABLE_ERRORS: u64 = 20;
const CHUNK: u64 = 8192;

#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub aggregator: Aggregator,
    pub case: String,
    pub p_h: f64,
    pub degree: usize,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    /// `√(ê(1−ê)/T)`.
    pub stderr: f64,
    /// Union bound; `None` when two classes are indistinguishable.
    pub bound: Option<f64>,
    /// Neighbor weight used by `wsa`.
    pub alpha_star: Option<f64>,
    #[serde(skip)]
    pub deflection: DeflectionTable,
    pub unreliable: bool,
}

impl CellResult {
    pub fn note(&self) -> String {
        let mut notes = Vec::new();
        if self.unreliable {
            notes.push(format!("unreliable: fewer than {MIN_RELIABLE_ERRORS} errors"));
        }
        if self.bound.is_none() {
            notes.push("indistinguishable classes".to_string());
        }
        notes.join("; ")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub aggregator: Aggregator,
    pub case: String,
    pub p_h: f64,
    pub degree: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct MonteCarloResult {
    /// Sorted by aggregator, case, p_h, degree.
    pub cells: Vec<CellResult>,
    pub failures: Vec<CellFailure>,
}

impl MonteCarloResult {
    pub fn cell(&self, aggregator: Aggregator, p_h: f64, degree: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.aggregator == aggregator && c.p_h == p_h && c.degree == degree)
    }
}

/// How an aggregator turns a sampled neighborhood into a representation.
#[derive(Debug, Clone)]
enum Former {
    Raw,
    Weighted(AggregationWeights),
    Concat { normalize: bool },
    Hops,
}

#[derive(Debug, Clone)]
struct Prepared {
    aggregator: Aggregator,
    former: Former,
    classifier: ClassifierAtProfile,
    deflection: DeflectionTable,
    bound: Option<f64>,
    alpha: Option<f64>,
}

impl Prepared {
    fn predict(&self, s: &NeighborhoodSample) -> Result<usize> {
        let x = &s.focal_feature;
        let z = match &self.former {
            Former::Raw => return Ok(self.classifier.classify(x)),
            Former::Weighted(w) => wsa_aggregate(x, &s.neighbor_features, w, None)?,
            Former::Concat { normalize } => sca_aggregate(x, &s.neighbor_features, *normalize)?,
            Former::Hops => {
                let hops: Vec<&[DVector<f64>]> = (1..=s.outer_hops.len() + 1).map(|k| s.hop_features(k)).collect();
                sca_khop_aggregate(x, &hops)?
            }
        };
        Ok(self.classifier.classify(&z.values))
    }
}

fn bound_or_none(table: &DeflectionTable, priors: &[f64]) -> Result<Option<f64>> {
    match error_upper_bound(table, priors) {
        Ok(b) => Ok(Some(b)),
        Err(Error::Indistinguishable { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Neighbor weight for `wsa` under the configured policy.
pub fn select_alpha(
    config: &ExperimentConfig,
    model: &GaussianClassModel,
    point: &SweepPoint,
    degree: usize,
    priors: &DegreePriors,
) -> Result<f64> {
    match config.alpha {
        AlphaPolicy::Fixed(a) => Ok(a),
        AlphaPolicy::Grid => Ok(optimize_alpha_grid(model, &point.transition, degree, &config.alpha_grid, priors)?.alpha),
        AlphaPolicy::ClosedForm => {
            let p = &point.transition;
            if p.order() != 2 || p.get(0, 0) != p.get(1, 1) {
                return Err(Error::Config(
                    "alpha = closed_form needs two classes with p_11 = p_22".into(),
                ));
            }
            optimal_alpha_closed_form(p.get(0, 0), graph_agnostic_deflection(model)?.get(0, 1))
        }
    }
}

fn prepare(
    aggregator: Aggregator,
    config: &ExperimentConfig,
    model: &GaussianClassModel,
    point: &SweepPoint,
    degree: usize,
) -> Result<Prepared> {
    let priors = DegreePriors::from_model(model);
    let p: &TransitionMatrix = &point.transition;
    let agnostic = |aggregator| -> Result<Prepared> {
        let table = graph_agnostic_deflection(model)?;
        Ok(Prepared {
            aggregator,
            former: Former::Raw,
            classifier: bayes_graph_agnostic(model)?.at(ANY_DEGREE)?.clone(),
            bound: bound_or_none(&table, model.priors())?,
            deflection: DeflectionTable::new(degree, table.values().clone())?,
            alpha: None,
        })
    };
    let weighted = |aggregator, weights: AggregationWeights, alpha| -> Result<Prepared> {
        let (self_w, ws) = weights.resolve(degree, Some(&vec![degree; degree]))?;
        let mom = weighted_sum_moments(model, p, self_w, &ws, &priors)?;
        let table = wsa_deflection(&mom)?;
        Ok(Prepared {
            aggregator,
            former: Former::Weighted(weights),
            classifier: lda_classifier(&mom)?,
            bound: bound_or_none(&table, &mom.pooling_priors)?,
            deflection: table,
            alpha,
        })
    };
    match aggregator {
        Aggregator::Agnostic => agnostic(aggregator),
        Aggregator::Wsa => {
            let alpha = select_alpha(config, model, point, degree, &priors)?;
            let mom = wsa_moments(model, p, alpha, degree, &priors)?;
            let table = wsa_deflection(&mom)?;
            let family = build_wsa_classifier(&mom)?;
            Ok(Prepared {
                aggregator,
                former: Former::Weighted(AggregationWeights::UniformAlpha(alpha)),
                classifier: family.at_degree(degree)?.clone(),
                bound: bound_or_none(&table, &mom.pooling_priors)?,
                deflection: table,
                alpha: Some(alpha),
            })
        }
        Aggregator::Sca | Aggregator::ScaNorm => {
            let normalize = aggregator == Aggregator::ScaNorm;
            let mom = sca_moments(model, p, degree, &priors)?;
            let table = sca_deflection(&mom)?;
            Ok(Prepared {
                aggregator,
                former: Former::Concat { normalize },
                classifier: build_sca_classifier(&mom, normalize)?.at_degree(degree)?.clone(),
                bound: bound_or_none(&table, &mom.pooling_priors)?,
                deflection: table,
                alpha: None,
            })
        }
        Aggregator::ScaK => {
            let profile = vec![degree; config.hops];
            let mom = sca_khop_moments(model, p, &profile, &priors)?;
            let table = sca_deflection(&mom)?;
            Ok(Prepared {
                aggregator,
                former: Former::Hops,
                classifier: build_sca_classifier(&mom, false)?.at(&profile)?.clone(),
                bound: bound_or_none(&table, &mom.pooling_priors)?,
                deflection: table,
                alpha: None,
            })
        }
        // Sampled neighbors are given the focal degree, so GCN weights all equal 1/d.
        Aggregator::GcnBaseline => weighted(aggregator, AggregationWeights::Custom {
            self_weight: if degree == 0 { 1.0 } else { 1.0 / degree as f64 },
            neighbor_weights: vec![1.0 / degree.max(1) as f64; degree],
        }, None),
        Aggregator::GinBaseline => weighted(aggregator, AggregationWeights::Gin { epsilon: config.gin_epsilon }, None),
    }
}

/// Analytic summary of one cell: the classifier's deflections and union bound.
#[derive(Debug, Clone)]
pub struct AnalyticCell {
    pub aggregator: Aggregator,
    pub alpha: Option<f64>,
    pub bound: Option<f64>,
    pub deflection: DeflectionTable,
}

/// Builds the cell's classifier and evaluates its bound without sampling.
pub fn analytic_cell(
    aggregator: Aggregator,
    config: &ExperimentConfig,
    model: &GaussianClassModel,
    point: &SweepPoint,
    degree: usize,
) -> Result<AnalyticCell> {
    let p = prepare(aggregator, config, model, point, degree)?;
    Ok(AnalyticCell {
        aggregator,
        alpha: p.alpha,
        bound: p.bound,
        deflection: p.deflection,
    })
}

/// Seed of the neighborhoods shared by all aggregators at one point.
pub fn point_seed(seed: u64, case: &str, p_h: f64, degree: usize) -> StreamSeed {
    StreamSeed::new(seed)
        .derive_str("monte-carlo")
        .derive_str(case)
        .derive_f64(p_h)
        .derive(degree as u64)
}

struct PointOutcome {
    cells: Vec<CellResult>,
    failures: Vec<CellFailure>,
}

fn run_point(config: &ExperimentConfig, model: &GaussianClassModel, point: &SweepPoint, degree: usize) -> PointOutcome {
    let failure = |aggregator, message: String| CellFailure {
        aggregator,
        case: point.case.clone(),
        p_h: point.p_h,
        degree,
        message,
    };
    let mut prepared = Vec::new();
    let mut failures = Vec::new();
    let mut aggregators = config.aggregators.clone();
    aggregators.sort();
    aggregators.dedup();
    for &a in &aggregators {
        match prepare(a, config, model, point, degree) {
            Ok(p) => prepared.push(p),
            Err(e) => failures.push(failure(a, e.to_string())),
        }
    }
    if prepared.is_empty() {
        return PointOutcome {
            cells: Vec::new(),
            failures,
        };
    }
    let hops = if aggregators.contains(&Aggregator::ScaK) { config.hops } else { 1 };
    let sampler = match NeighborhoodSampler::new(
        model,
        &point.transition,
        &vec![degree; hops],
        point_seed(config.seed, &point.case, point.p_h, degree),
    ) {
        Ok(s) => s,
        Err(e) => {
            failures.extend(prepared.iter().map(|p| failure(p.aggregator, e.to_string())));
            return PointOutcome {
                cells: Vec::new(),
                failures,
            };
        }
    };

    let trials = config.trials;
    let chunks = trials.div_ceil(CHUNK);
    let counted: Result<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let (start, end) = (c * CHUNK, ((c + 1) * CHUNK).min(trials));
            let mut counts = vec![0u64; prepared.len()];
            let mut sample = sampler.sample(start);
            for t in start..end {
                if t > start {
                    sampler.sample_into(t, &mut sample);
                }
                for (slot, p) in prepared.iter().enumerate() {
                    if p.predict(&sample)? != sample.focal_label {
                        counts[slot] += 1;
                    }
                }
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; prepared.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        );
    let counts = match counted {
        Ok(c) => c,
        Err(e) => {
            failures.extend(prepared.iter().map(|p| failure(p.aggregator, e.to_string())));
            return PointOutcome {
                cells: Vec::new(),
                failures,
            };
        }
    };

    let cells = prepared
        .into_iter()
        .zip(counts)
        .map(|(p, errors)| {
            let rate = errors as f64 / trials as f64;
            CellResult {
                aggregator: p.aggregator,
                case: point.case.clone(),
                p_h: point.p_h,
                degree,
                trials,
                errors,
                error_rate: rate,
                stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
                bound: p.bound,
                alpha_star: p.alpha,
                deflection: p.deflection,
                unreliable: errors < MIN_RELIABLE_ERRORS,
            }
        })
        .collect();
    PointOutcome { cells, failures }
}

/// Runs every (p_h, degree) point on the current rayon pool. Cells that cannot
/// be built or evaluated become [`CellFailure`]s; other cells still run.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<MonteCarloResult> {
    config.validate()?;
    if config.aggregators.is_empty() {
        return Err(Error::Config("nothing to simulate: the aggregator list is empty".into()));
    }
    let model = config.build_model()?;
    let sweep = config.sweep()?;
    let points: Vec<(&SweepPoint, usize)> = sweep
        .iter()
        .flat_map(|pt| config.degrees.iter().map(move |&d| (pt, d)))
        .collect();
    let outcomes: Vec<PointOutcome> = points
        .par_iter()
        .map(|&(pt, d)| run_point(config, &model, pt, d))
        .collect();
    let mut result = MonteCarloResult::default();
    for o in outcomes {
        result.cells.extend(o.cells);
        result.failures.extend(o.failures);
    }
    let key = |a: Aggregator, case: &str, p_h: f64, d: usize| (a, case.to_string(), ordered(p_h), d);
    result
        .cells
        .sort_by_key(|c| key(c.aggregator, &c.case, c.p_h, c.degree));
    result
        .failures
        .sort_by_key(|c| key(c.aggregator, &c.case, c.p_h, c.degree));
    Ok(result)
}

fn ordered(x: f64) -> i64 {
    // Total order on finite p_h values, matching numeric order.
    let bits = x.to_bits() as i64;
    if bits < 0 {
        bits ^ i64::MAX
    } else {
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::config::{MeansSpec, PhSpec, SimplexSpec};
    use crate::decision::q_function;

    fn config(aggregators: Vec<Aggregator>, p_h: Vec<f64>, degrees: Vec<usize>, trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            num_classes: 2,
            feature_dim: 5,
            sigma: 1.0,
            priors: None,
            means: MeansSpec::Simplex {
                simplex: SimplexSpec { gamma0: 4.0 },
            },
            transition: None,
            special_case: Some(1),
            p_h: PhSpec::List(p_h),
            degrees,
            alpha: AlphaPolicy::ClosedForm,
            alpha_grid: Default::default(),
            aggregators,
            trials,
            seed: 7,
            hops: 2,
            gin_epsilon: 0.0,
            graph: None,
        }
    }

    #[test]
    fn agnostic_error_is_near_q1() {
        let c = config(vec![Aggregator::Agnostic], vec![0.5], vec![0], 200_000);
        let r = run_monte_carlo(&c).unwrap();
        let cell = &r.cells[0];
        let q1 = q_function(1.0).unwrap();
        assert!((cell.error_rate - q1).abs() < 4.0 * cell.stderr, "{}", cell.error_rate);
        assert!((cell.bound.unwrap() - q1).abs() < 1e-15);
        assert!(!cell.unreliable);
    }

    #[test]
    fn empty_aggregator_list_is_rejected() {
        let err = run_monte_carlo(&config(vec![], vec![0.5], vec![1], 1000)).unwrap_err();
        assert!(err.to_string().contains("nothing to simulate"));
    }

    #[test]
    fn results_are_sorted_and_deterministic() {
        let aggs = vec![Aggregator::Sca, Aggregator::Wsa, Aggregator::Agnostic];
        let c = config(aggs, vec![0.9, 0.1], vec![4, 1], 5000);
        let a = run_monte_carlo(&c).unwrap();
        let b = run_monte_carlo(&c).unwrap();
        assert_eq!(a.cells.len(), 12);
        let keys: Vec<_> = a.cells.iter().map(|c| (c.aggregator, c.p_h, c.degree)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)));
        assert_eq!(keys, sorted);
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.errors, y.errors);
        }
    }

    #[test]
    fn closed_form_policy_needs_symmetric_two_class_matrix() {
        let mut c = config(vec![Aggregator::Wsa], vec![0.5], vec![1], 1000);
        c.num_classes = 4;
        c.special_case = Some(3);
        let r = run_monte_carlo(&c).unwrap();
        assert!(r.cells.is_empty());
        assert_eq!(r.failures.len(), 1);
        assert!(r.failures[0].message.contains("closed_form"));
    }
}
