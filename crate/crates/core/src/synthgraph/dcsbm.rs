//! Degree-corrected stochastic block model with class affinities calibrated
//! so that the class of a random neighbor of a class-m node follows row m of
//! the transition matrix.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampler::FeatureSampler;
use super::LabeledGraph;
use crate::error::{Error, Result};
use crate::model::{validate_model, GaussianClassModel, TransitionMatrix};
use crate::rng::{Categorical, StreamSeed};

/// Share of node pairs whose edge probability may be clamped to one.
pub const MAX_CLAMPED_FRACTION: f64 = 1e-3;

/// Expected degrees (degree propensities) of the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeSpec {
    Constant(f64),
    List(Vec<f64>),
    /// Density `∝ θ^(-exponent)` on `[min, max]`.
    PowerLaw { exponent: f64, min: f64, max: f64 },
}

impl DegreeSpec {
    fn propensities(&self, n: usize, seed: StreamSeed) -> Result<Vec<f64>> {
        let theta: Vec<f64> = match self {
            DegreeSpec::Constant(d) => vec![*d; n],
            DegreeSpec::List(list) => {
                if list.len() != n {
                    return Err(Error::dim("expected degree list length", n, list.len()));
                }
                list.clone()
            }
            DegreeSpec::PowerLaw { exponent, min, max } => {
                if !(*min > 0.0 && max >= min) {
                    return Err(Error::InvalidArgument("power law needs 0 < min <= max".into()));
                }
                let g = 1.0 - exponent;
                (0..n as u64)
                    .map(|i| {
                        let u: f64 = seed.trial_rng(i).random();
                        if g.abs() < 1e-12 {
                            min * (max / min).powf(u)
                        } else {
                            (min.powf(g) + u * (max.powf(g) - min.powf(g))).powf(1.0 / g)
                        }
                    })
                    .collect()
            }
        };
        if let Some(bad) = theta.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidArgument(format!("expected degree {bad} is not finite and nonnegative")));
        }
        Ok(theta)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub clamped_pairs: u64,
    pub total_pairs: u64,
    /// Nodes without edges; the exported files leave them out.
    pub isolated_nodes: usize,
    /// Calibrated block affinities `ω_{m,ℓ}`.
    pub affinity: Vec<Vec<f64>>,
}

/// Samples a labeled graph with features.
///
/// Each pair `(i, j)` is an edge independently with probability
/// `min(1, θ_i θ_j ω_{y_i y_j})`, where `ω_{m,ℓ}` is the symmetrized
/// `p_{m,ℓ} / Θ_ℓ` and `Θ_ℓ` the realized total propensity of class `ℓ`.
pub fn generate_dcsbm(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    degrees: &DegreeSpec,
    n: usize,
    seed: u64,
) -> Result<(LabeledGraph, GenerationReport)> {
    if n < 2 {
        return Err(Error::InvalidArgument("DC-SBM needs at least two nodes".into()));
    }
    let diag = validate_model(model, p)?;
    if !diag.balanced {
        return Err(Error::InvalidArgument(format!(
            "transition matrix violates detailed balance π_m p_ml = π_l p_lm (worst {:e}); \
             an undirected graph cannot realize it",
            diag.max_balance_violation
        )));
    }
    let root = StreamSeed::new(seed).derive_str("dcsbm");
    let m = model.num_classes();

    let label_dist = Categorical::new(model.priors());
    let mut label_rng = root.derive_str("labels").trial_rng(0);
    let labels: Vec<usize> = (0..n).map(|_| label_dist.sample(&mut label_rng)).collect();
    let theta = degrees.propensities(n, root.derive_str("degrees"))?;

    // Members of each block sorted by decreasing propensity.
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, &y) in labels.iter().enumerate() {
        blocks[y].push(i);
    }
    for b in &mut blocks {
        b.sort_by(|&a, &c| theta[c].total_cmp(&theta[a]).then(a.cmp(&c)));
    }
    let mass: Vec<f64> = blocks.iter().map(|b| b.iter().map(|&i| theta[i]).sum()).collect();
    let mut omega = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            if mass[a] > 0.0 && mass[b] > 0.0 {
                omega[(a, b)] = 0.5 * (p.get(a, b) / mass[b] + p.get(b, a) / mass[a]);
            }
        }
    }

    let mut clamped = 0u64;
    let total_pairs = (n as u64) * (n as u64 - 1) / 2;
    for a in 0..m {
        for b in a..m {
            clamped += count_clamped(&blocks[a], &blocks[b], &theta, omega[(a, b)], a == b);
        }
    }
    if clamped as f64 > MAX_CLAMPED_FRACTION * total_pairs as f64 {
        return Err(Error::ClampOverflow {
            clamped,
            pairs: total_pairs,
        });
    }
    if clamped > 0 {
        log::warn!("DC-SBM: {clamped} of {total_pairs} edge probabilities clamped to 1");
    }

    let mut edges = Vec::new();
    let edge_seed = root.derive_str("edges");
    for a in 0..m {
        for b in a..m {
            let pair_seed = edge_seed.derive((a * m + b) as u64);
            sample_block(&blocks[a], &blocks[b], &theta, omega[(a, b)], a == b, pair_seed, &mut edges);
        }
    }

    let feature_seed = root.derive_str("features");
    let fs = FeatureSampler::new(model);
    let features = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| fs.sample(y, &mut feature_seed.trial_rng(i as u64)))
        .collect();

    let graph = LabeledGraph::from_edges(n, edges, labels.into_iter().map(Some).collect(), m)?.with_features(features)?;
    let report = GenerationReport {
        clamped_pairs: clamped,
        total_pairs,
        isolated_nodes: (0..n).filter(|&i| graph.degree(i) == 0).count(),
        affinity: omega.row_iter().map(|r| r.iter().cloned().collect()).collect(),
    };
    Ok((graph, report))
}

fn count_clamped(from: &[usize], to: &[usize], theta: &[f64], omega: f64, same: bool) -> u64 {
    if omega <= 0.0 {
        return 0;
    }
    let mut count = 0u64;
    for (pos, &u) in from.iter().enumerate() {
        let tu = theta[u];
        // `to` is sorted by decreasing θ, so clamped partners form a prefix.
        let k = to.partition_point(|&v| tu * theta[v] * omega > 1.0);
        count += if same { k.saturating_sub(pos + 1) as u64 } else { k as u64 };
    }
    count
}

/// Independent Bernoulli edges between two blocks by geometric skipping with
/// thinning (Miller and Hagberg); both blocks sorted by decreasing θ.
fn sample_block(
    from: &[usize],
    to: &[usize],
    theta: &[f64],
    omega: f64,
    same: bool,
    seed: StreamSeed,
    edges: &mut Vec<(usize, usize)>,
) {
    if omega <= 0.0 {
        return;
    }
    let prob = |u: usize, v: usize| (theta[u] * theta[v] * omega).min(1.0);
    for (pos, &u) in from.iter().enumerate() {
        let mut rng = seed.trial_rng(pos as u64);
        let mut idx = if same { pos + 1 } else { 0 };
        if idx >= to.len() {
            continue;
        }
        let mut bound = prob(u, to[idx]);
        while idx < to.len() && bound > 0.0 {
            if bound < 1.0 {
                let r: f64 = rng.random();
                let skip = ((1.0 - r).ln() / (1.0 - bound).ln()).floor();
                if skip >= (to.len() - idx) as f64 {
                    break;
                }
                idx += skip as usize;
            }
            if idx >= to.len() {
                break;
            }
            let q = prob(u, to[idx]);
            let r: f64 = rng.random();
            if r < q / bound {
                edges.push((u, to[idx]));
            }
            bound = q;
            idx += 1;
        }
    }
}
