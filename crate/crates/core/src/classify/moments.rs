//! First and second moments of aggregated representations, marginalized over
//! neighbor labels drawn from the rows of the (k-hop) transition matrix.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::add_outer;
use crate::model::{check_prob_vector, khop_transition, DegreePriors, GaussianClassModel, TransitionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    /// `z = a x + Σ_j β_j x_j`, stored as `(a, Σβ_j, Σβ_j²)`.
    WeightedSum {
        self_weight: f64,
        weight_sum: f64,
        weight_sq_sum: f64,
    },
    /// `[x ; s⁽¹⁾ ; … ; s⁽ᴷ⁾]`; one neighbor block per hop.
    Concatenated,
}

/// Class-conditional mean `ν̄_m` and covariance `R_m` of a representation at
/// one degree profile, plus their pooled covariance `R̄ = Σ_m π_{m,d} R_m`.
#[derive(Debug, Clone)]
pub struct MomentSummary {
    pub kind: MomentKind,
    pub profile: Vec<usize>,
    pub pooling_priors: Vec<f64>,
    pub class_means: Vec<DVector<f64>>,
    pub class_covariances: Vec<DMatrix<f64>>,
    pub pooled_covariance: DMatrix<f64>,
    /// The feature covariance `C` and class means `μ_m` of the model.
    pub feature_covariance: DMatrix<f64>,
    pub feature_means: Vec<DVector<f64>>,
    /// `μ̄_{m,k} = Σ_ℓ [Pᵏ]_{mℓ} μ_ℓ`, indexed `[k-1][m]`.
    pub neighbor_means: Vec<Vec<DVector<f64>>>,
    /// `H̄_k = C + Σ_m π_{m,d} spread_{m,k}`, one per hop; concatenated kinds only.
    pub neighbor_scatter: Vec<DMatrix<f64>>,
}

impl MomentSummary {
    pub fn degree(&self) -> usize {
        self.profile.first().copied().unwrap_or(0)
    }

    pub fn num_classes(&self) -> usize {
        self.class_means.len()
    }

    pub fn representation_dim(&self) -> usize {
        self.pooled_covariance.nrows()
    }
}

fn check_order(model: &GaussianClassModel, p: &TransitionMatrix) -> Result<()> {
    if p.order() != model.num_classes() {
        return Err(Error::dim("transition matrix order", model.num_classes(), p.order()));
    }
    Ok(())
}

/// `μ̄_m = Σ_ℓ p_{mℓ} μ_ℓ`.
pub fn neighbor_class_means(model: &GaussianClassModel, p: &TransitionMatrix) -> Result<Vec<DVector<f64>>> {
    check_order(model, p)?;
    let m = model.num_classes();
    Ok((0..m)
        .map(|a| {
            let mut acc = DVector::zeros(model.feature_dim());
            for (l, mu) in model.means().iter().enumerate() {
                acc.axpy(p.get(a, l), mu, 1.0);
            }
            acc
        })
        .collect())
}

/// `Σ_q p_{mq} (μ_q − μ̄_m)(μ_q − μ̄_m)ᵀ` for every class `m`.
pub fn neighbor_mean_spread(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    neighbor_means: &[DVector<f64>],
) -> Vec<DMatrix<f64>> {
    let f = model.feature_dim();
    neighbor_means
        .iter()
        .enumerate()
        .map(|(a, mubar)| {
            let mut acc = DMatrix::zeros(f, f);
            for (q, mu) in model.means().iter().enumerate() {
                let w = p.get(a, q);
                if w > 0.0 {
                    add_outer(&mut acc, &(mu - mubar), w);
                }
            }
            acc
        })
        .collect()
}

fn pooling_priors(model: &GaussianClassModel, priors: &DegreePriors, profile: &[usize]) -> Result<Vec<f64>> {
    let pi = priors.for_profile(profile).to_vec();
    if pi.len() != model.num_classes() {
        return Err(Error::dim("degree prior length", model.num_classes(), pi.len()));
    }
    check_prob_vector("degree priors", &pi)?;
    Ok(pi)
}

fn pool(priors: &[f64], covs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = covs[0].nrows();
    covs.iter()
        .zip(priors)
        .fold(DMatrix::zeros(n, n), |acc, (r, &w)| acc + r * w)
}

/// Mean and covariance of `z = x + α̃ Σ_j x_j` given the focal class `m`
/// and the neighbor class counts `n_q`.
pub fn wsa_conditional_moments(
    model: &GaussianClassModel,
    class: usize,
    alpha: f64,
    counts: &[usize],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if counts.len() != model.num_classes() {
        return Err(Error::dim("neighbor class counts", model.num_classes(), counts.len()));
    }
    if class >= model.num_classes() {
        return Err(Error::InvalidArgument(format!("class {} out of range", class + 1)));
    }
    let d: usize = counts.iter().sum();
    let mut mean = model.means()[class].clone();
    for (q, &n) in counts.iter().enumerate() {
        mean.axpy(alpha * n as f64, &model.means()[q], 1.0);
    }
    Ok((mean, model.covariance() * (1.0 + alpha * alpha * d as f64)))
}

/// Moments of `z = a x + Σ_j β_j x_j` for a node with `β.len()` neighbors.
pub fn weighted_sum_moments(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    self_weight: f64,
    neighbor_weights: &[f64],
    priors: &DegreePriors,
) -> Result<MomentSummary> {
    check_order(model, p)?;
    let profile = vec![neighbor_weights.len()];
    let pi = pooling_priors(model, priors, &profile)?;
    let s1: f64 = neighbor_weights.iter().sum();
    let s2: f64 = neighbor_weights.iter().map(|b| b * b).sum();
    let mubar = neighbor_class_means(model, p)?;
    let spread = neighbor_mean_spread(model, p, &mubar);
    let c = model.covariance();
    let class_means: Vec<_> = model
        .means()
        .iter()
        .zip(&mubar)
        .map(|(mu, mb)| mu * self_weight + mb * s1)
        .collect();
    let class_covariances: Vec<_> = spread
        .iter()
        .map(|sp| c * (self_weight * self_weight + s2) + sp * s2)
        .collect();
    let pooled_covariance = pool(&pi, &class_covariances);
    Ok(MomentSummary {
        kind: MomentKind::WeightedSum {
            self_weight,
            weight_sum: s1,
            weight_sq_sum: s2,
        },
        profile,
        pooling_priors: pi,
        class_means,
        class_covariances,
        pooled_covariance,
        feature_covariance: c.clone(),
        feature_means: model.means().to_vec(),
        neighbor_means: vec![mubar],
        neighbor_scatter: Vec::new(),
    })
}

/// Moments of the weighted sum `z = x + α̃ Σ_j x_j` at degree `d`.
pub fn wsa_moments(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    alpha: f64,
    degree: usize,
    priors: &DegreePriors,
) -> Result<MomentSummary> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("aggregation weight {alpha} is not finite")));
    }
    weighted_sum_moments(model, p, 1.0, &vec![alpha; degree], priors)
}

/// Moments of `[x ; s]` with `s = Σ_j x_j` at degree `d`.
pub fn sca_moments(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    degree: usize,
    priors: &DegreePriors,
) -> Result<MomentSummary> {
    sca_khop_moments(model, p, &[degree], priors)
}

/// Moments of `[x ; s⁽¹⁾ ; … ; s⁽ᴷ⁾]` for hop sizes `profile = [d_1, …, d_K]`.
/// Hop-k labels are drawn independently from the rows of `Pᵏ`, so the blocks
/// are uncorrelated given the focal class.
pub fn sca_khop_moments(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    profile: &[usize],
    priors: &DegreePriors,
) -> Result<MomentSummary> {
    check_order(model, p)?;
    if profile.is_empty() {
        return Err(Error::InvalidArgument("degree profile must list at least one hop".into()));
    }
    let pi = pooling_priors(model, priors, profile)?;
    let f = model.feature_dim();
    let m = model.num_classes();
    let blocks = profile.len() + 1;
    let c = model.covariance();

    let mut class_means: Vec<DVector<f64>> = model
        .means()
        .iter()
        .map(|mu| {
            let mut v = DVector::zeros(blocks * f);
            v.rows_mut(0, f).copy_from(mu);
            v
        })
        .collect();
    let mut class_covariances: Vec<DMatrix<f64>> = (0..m)
        .map(|_| {
            let mut r = DMatrix::zeros(blocks * f, blocks * f);
            r.view_mut((0, 0), (f, f)).copy_from(c);
            r
        })
        .collect();
    let mut neighbor_means = Vec::with_capacity(profile.len());
    let mut neighbor_scatter = Vec::with_capacity(profile.len());

    for (k, &dk) in profile.iter().enumerate() {
        let pk = khop_transition(p, k + 1)?;
        let mubar = neighbor_class_means(model, &pk)?;
        let spread = neighbor_mean_spread(model, &pk, &mubar);
        let off = (k + 1) * f;
        let dkf = dk as f64;
        for a in 0..m {
            class_means[a].rows_mut(off, f).copy_from(&(&mubar[a] * dkf));
            class_covariances[a]
                .view_mut((off, off), (f, f))
                .copy_from(&((c + &spread[a]) * dkf));
        }
        neighbor_scatter.push(c + pool(&pi, &spread));
        neighbor_means.push(mubar);
    }
    let pooled_covariance = pool(&pi, &class_covariances);
    Ok(MomentSummary {
        kind: MomentKind::Concatenated,
        profile: profile.to_vec(),
        pooling_priors: pi,
        class_means,
        class_covariances,
        pooled_covariance,
        feature_covariance: c.clone(),
        feature_means: model.means().to_vec(),
        neighbor_means,
        neighbor_scatter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class() -> GaussianClassModel {
        let means = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![-1.0, 0.0])];
        GaussianClassModel::isotropic(vec![0.5, 0.5], means, 1.0).unwrap()
    }

    #[test]
    fn conditional_moments_examples() {
        let model = two_class();
        let (mean, cov) = wsa_conditional_moments(&model, 0, 1.0, &[3, 0]).unwrap();
        assert_eq!(mean, DVector::from_vec(vec![4.0, 0.0]));
        assert_eq!(cov, DMatrix::identity(2, 2) * 4.0);
        let (mean, cov) = wsa_conditional_moments(&model, 0, 0.0, &[1, 5]).unwrap();
        assert_eq!(mean, model.means()[0]);
        assert_eq!(cov, DMatrix::identity(2, 2));
    }

    #[test]
    fn pure_homophily_has_no_spread() {
        let model = two_class();
        let p = TransitionMatrix::identity(2);
        let mom = wsa_moments(&model, &p, 0.5, 4, &DegreePriors::from_model(&model)).unwrap();
        assert_eq!(mom.class_means[0], DVector::from_vec(vec![3.0, 0.0]));
        assert!((&mom.pooled_covariance - DMatrix::identity(2, 2) * 2.0).norm() < 1e-15);
    }

    #[test]
    fn balanced_mixing_spread() {
        let model = two_class();
        let p = TransitionMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let mubar = neighbor_class_means(&model, &p).unwrap();
        assert_eq!(mubar[0], DVector::zeros(2));
        let spread = neighbor_mean_spread(&model, &p, &mubar);
        assert_eq!(spread[0][(0, 0)], 1.0);
        assert_eq!(spread[0][(1, 1)], 0.0);
    }

    #[test]
    fn sca_blocks() {
        let model = two_class();
        let p = TransitionMatrix::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let mom = sca_moments(&model, &p, 3, &DegreePriors::from_model(&model)).unwrap();
        assert_eq!(mom.representation_dim(), 4);
        // μ̄_1 = (0.5, 0), spread_1 = 0.75·0.25² + 0.25·1.5² = 0.75 on the first axis.
        assert!((mom.class_means[0][2] - 1.5).abs() < 1e-15);
        assert!((mom.class_covariances[0][(2, 2)] - 3.0 * 1.75).abs() < 1e-14);
        assert!((mom.neighbor_scatter[0][(0, 0)] - 1.75).abs() < 1e-14);
        assert_eq!(mom.pooled_covariance[(0, 2)], 0.0);
    }

    #[test]
    fn zero_degree_sca_has_empty_block() {
        let model = two_class();
        let p = TransitionMatrix::identity(2);
        let mom = sca_moments(&model, &p, 0, &DegreePriors::from_model(&model)).unwrap();
        assert_eq!(mom.pooled_covariance.view((2, 2), (2, 2)).norm(), 0.0);
    }
}
