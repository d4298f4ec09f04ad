//! Classifiers on concatenated representations `[x ; s⁽¹⁾ ; … ; s⁽ᴷ⁾]`.
//!
//! The pooled covariance is block diagonal with blocks `C` and `d_k H̄_k`, so
//! the Bayes rule splits per block: `C⁻¹μ_m` on `x` and `H̄_k⁻¹μ̄_{m,k}` on
//! `s⁽ᵏ⁾`. A hop with no neighbors contributes a zero block and zero weights.

use super::moments::{sca_khop_moments, MomentKind, MomentSummary};
use crate::decision::{deflection_with_factor, DeflectionTable};
use crate::error::{Error, Result};
use crate::family::{ClassifierAtProfile, LinearClassifierFamily};
use crate::linalg::SpdFactor;
use crate::model::{DegreePriors, GaussianClassModel, TransitionMatrix};

pub const MAX_HOPS: usize = 3;

fn require_concatenated(mom: &MomentSummary) -> Result<()> {
    match mom.kind {
        MomentKind::Concatenated => Ok(()),
        MomentKind::WeightedSum { .. } => Err(Error::InvalidArgument(
            "expected concatenated moments, got weighted-sum ones".into(),
        )),
    }
}

fn concatenated_classifier(mom: &MomentSummary, normalize: bool) -> Result<ClassifierAtProfile> {
    require_concatenated(mom)?;
    if normalize && mom.profile.len() != 1 {
        return Err(Error::InvalidArgument("normalized concatenation is defined for one hop only".into()));
    }
    let f = mom.feature_covariance.nrows();
    let dim = mom.representation_dim();
    let c = SpdFactor::new(&mom.feature_covariance, "feature covariance")?;
    let m = mom.num_classes();
    let mut weights = Vec::with_capacity(m);
    let mut biases = Vec::with_capacity(m);
    for (mu, &pi) in mom.feature_means.iter().zip(&mom.pooling_priors) {
        let mut w = nalgebra::DVector::zeros(dim);
        let wx = c.solve(mu);
        biases.push(-0.5 * mu.dot(&wx) + pi.ln());
        w.rows_mut(0, f).copy_from(&wx);
        weights.push(w);
    }
    for (k, &dk) in mom.profile.iter().enumerate() {
        if dk == 0 {
            continue;
        }
        let h = SpdFactor::new(&mom.neighbor_scatter[k], "neighbor scatter")?;
        let scale = if normalize { dk as f64 } else { 1.0 };
        for a in 0..m {
            let mubar = &mom.neighbor_means[k][a];
            let v = h.solve(mubar);
            biases[a] -= 0.5 * dk as f64 * mubar.dot(&v);
            weights[a].rows_mut((k + 1) * f, f).copy_from(&(v * scale));
        }
    }
    Ok(ClassifierAtProfile { weights, biases })
}

/// Single-degree family for `[x ; s]`, or for `[x ; s/d]` when `normalize`.
/// Both make the same decisions on matching inputs.
pub fn build_sca_classifier(mom: &MomentSummary, normalize: bool) -> Result<LinearClassifierFamily> {
    let clf = concatenated_classifier(mom, normalize)?;
    let mut family = LinearClassifierFamily::new(mom.representation_dim(), mom.num_classes());
    family.insert(mom.profile.clone(), clf.weights, clf.biases)?;
    Ok(family)
}

/// `γ(m, ℓ) = γ0(m, ℓ) + Σ_k d_k (μ̄_{m,k} − μ̄_{ℓ,k})ᵀ H̄_k⁻¹ (μ̄_{m,k} − μ̄_{ℓ,k})`.
pub fn sca_deflection(mom: &MomentSummary) -> Result<DeflectionTable> {
    require_concatenated(mom)?;
    let c = SpdFactor::new(&mom.feature_covariance, "feature covariance")?;
    let mut values = deflection_with_factor(&mom.feature_means, &c)?.values().clone();
    for (k, &dk) in mom.profile.iter().enumerate() {
        if dk == 0 {
            continue;
        }
        let h = SpdFactor::new(&mom.neighbor_scatter[k], "neighbor scatter")?;
        values += deflection_with_factor(&mom.neighbor_means[k], &h)?.values() * dk as f64;
    }
    DeflectionTable::new(mom.degree(), values)
}

/// Family for `[x ; s⁽¹⁾ ; … ; s⁽ᴷ⁾]` at one hop profile, `1 ≤ K ≤ 3`.
pub fn build_sca_khop_classifier(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    profile: &[usize],
    priors: &DegreePriors,
) -> Result<LinearClassifierFamily> {
    if profile.is_empty() || profile.len() > MAX_HOPS {
        return Err(Error::InvalidArgument(format!(
            "k-hop concatenation supports 1 to {MAX_HOPS} hops, got {}",
            profile.len()
        )));
    }
    let mom = sca_khop_moments(model, p, profile, priors)?;
    build_sca_classifier(&mom, false)
}
