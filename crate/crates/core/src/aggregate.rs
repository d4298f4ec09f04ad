//! Representation-forming aggregators: weighted sum (WSA), sum-then-concatenate
//! (SCA), k-hop SCA, and the GCN / GIN weightings.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `z = α_self x + Σ_j α_j x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationWeights {
    /// `α_self = 1`, every neighbor weighted `α̃`.
    UniformAlpha(f64),
    /// `α_self = 1/d_i`, `α_j = 1/√(d_i d_j)`; needs neighbor degrees.
    Gcn,
    /// `α_self = 1 + ε`, `α_j = 1`.
    Gin { epsilon: f64 },
    Custom { self_weight: f64, neighbor_weights: Vec<f64> },
}

impl AggregationWeights {
    /// Resolves `(α_self, [α_j])` for a node of degree `degree`.
    pub fn resolve(&self, degree: usize, neighbor_degrees: Option<&[usize]>) -> Result<(f64, Vec<f64>)> {
        if degree == 0 {
            return Ok((1.0, Vec::new()));
        }
        Ok(match self {
            AggregationWeights::UniformAlpha(a) => (1.0, vec![*a; degree]),
            AggregationWeights::Gin { epsilon } => (1.0 + epsilon, vec![1.0; degree]),
            AggregationWeights::Gcn => {
                let nd = neighbor_degrees
                    .ok_or_else(|| Error::InvalidArgument("GCN weights need the neighbor degrees".into()))?;
                if nd.len() != degree {
                    return Err(Error::dim("neighbor degree count", degree, nd.len()));
                }
                let di = degree as f64;
                let ws = nd
                    .iter()
                    .map(|&dj| {
                        if dj == 0 {
                            Err(Error::InvalidArgument("a neighbor cannot have degree 0".into()))
                        } else {
                            Ok(1.0 / (di * dj as f64).sqrt())
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (1.0 / di, ws)
            }
            AggregationWeights::Custom {
                self_weight,
                neighbor_weights,
            } => {
                if neighbor_weights.len() != degree {
                    return Err(Error::InvalidArgument(format!(
                        "custom weight rule lists {} neighbor weights for degree {degree}",
                        neighbor_weights.len()
                    )));
                }
                (*self_weight, neighbor_weights.clone())
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    Raw,
    Wsa,
    Sca,
    ScaK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub kind: RepresentationKind,
    pub values: DVector<f64>,
    pub degree_profile: Vec<usize>,
    /// SCA with no neighbors: the neighbor block is identically zero.
    pub degenerate: bool,
}

impl Representation {
    pub fn raw(x: &DVector<f64>) -> Self {
        Representation {
            kind: RepresentationKind::Raw,
            values: x.clone(),
            degree_profile: Vec::new(),
            degenerate: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn check_dims(focal: &DVector<f64>, neighbors: &[DVector<f64>]) -> Result<()> {
    match neighbors.iter().find(|x| x.len() != focal.len()) {
        Some(bad) => Err(Error::dim("neighbor feature length", focal.len(), bad.len())),
        None => Ok(()),
    }
}

fn neighbor_sum(dim: usize, neighbors: &[DVector<f64>]) -> DVector<f64> {
    let mut s = DVector::zeros(dim);
    for x in neighbors {
        s += x;
    }
    s
}

/// Weighted sum aggregation. Degree-0 nodes pass through unchanged.
pub fn wsa_aggregate(
    focal: &DVector<f64>,
    neighbors: &[DVector<f64>],
    weights: &AggregationWeights,
    neighbor_degrees: Option<&[usize]>,
) -> Result<Representation> {
    check_dims(focal, neighbors)?;
    let d = neighbors.len();
    let values = match weights {
        AggregationWeights::UniformAlpha(a) => focal + neighbor_sum(focal.len(), neighbors) * *a,
        _ => {
            let (self_w, ws) = weights.resolve(d, neighbor_degrees)?;
            let mut z = focal * self_w;
            for (x, w) in neighbors.iter().zip(ws) {
                z.axpy(w, x, 1.0);
            }
            z
        }
    };
    Ok(Representation {
        kind: RepresentationKind::Wsa,
        values,
        degree_profile: vec![d],
        degenerate: false,
    })
}

/// `[x ; Σ_j x_j]`, or `[x ; mean_j x_j]` when `normalize` is set.
pub fn sca_aggregate(focal: &DVector<f64>, neighbors: &[DVector<f64>], normalize: bool) -> Result<Representation> {
    check_dims(focal, neighbors)?;
    let f = focal.len();
    let d = neighbors.len();
    let mut s = neighbor_sum(f, neighbors);
    if normalize && d > 0 {
        s /= d as f64;
    }
    let mut values = DVector::zeros(2 * f);
    values.rows_mut(0, f).copy_from(focal);
    values.rows_mut(f, f).copy_from(&s);
    Ok(Representation {
        kind: RepresentationKind::Sca,
        values,
        degree_profile: vec![d],
        degenerate: d == 0,
    })
}

/// `[x ; s⁽¹⁾ ; … ; s⁽ᴷ⁾]` with `s⁽ᵏ⁾` the sum over hop-k neighbors.
pub fn sca_khop_aggregate(focal: &DVector<f64>, hops: &[&[DVector<f64>]]) -> Result<Representation> {
    if hops.is_empty() {
        return Err(Error::InvalidArgument("k-hop aggregation needs K >= 1".into()));
    }
    let f = focal.len();
    let mut values = DVector::zeros((hops.len() + 1) * f);
    values.rows_mut(0, f).copy_from(focal);
    for (k, hop) in hops.iter().enumerate() {
        check_dims(focal, hop)?;
        values.rows_mut((k + 1) * f, f).copy_from(&neighbor_sum(f, hop));
    }
    Ok(Representation {
        kind: RepresentationKind::ScaK,
        values,
        degree_profile: hops.iter().map(|h| h.len()).collect(),
        degenerate: hops.iter().all(|h| h.is_empty()),
    })
}
