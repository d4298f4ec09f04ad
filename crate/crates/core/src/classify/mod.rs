//! Moment computations, Bayes-optimal linear classifiers, deflection tables,
//! and `α̃` optimization for aggregated representations.

mod moments;
mod sca;
mod wsa;

pub use moments::{
    neighbor_class_means, neighbor_mean_spread, sca_khop_moments, sca_moments, weighted_sum_moments,
    wsa_conditional_moments, wsa_moments, MomentKind, MomentSummary,
};
pub use sca::{build_sca_classifier, build_sca_khop_classifier, sca_deflection, MAX_HOPS};
pub use wsa::{
    build_wsa_classifier, lda_classifier, optimal_alpha_closed_form, optimize_alpha_grid, two_class_deflection,
    two_class_pooled_inverse, wsa_deflection, AlphaGrid, AlphaSearch,
};

use crate::decision::{deflection_with_factor, DeflectionTable};
use crate::error::Result;
use crate::family::LinearClassifierFamily;
use crate::model::GaussianClassModel;

/// Profile key of degree-independent classifiers.
pub const ANY_DEGREE: &[usize] = &[];

/// `w_m = C⁻¹μ_m`, `b_m = −½ μ_mᵀC⁻¹μ_m + ln π_m`, stored under [`ANY_DEGREE`].
pub fn bayes_graph_agnostic(model: &GaussianClassModel) -> Result<LinearClassifierFamily> {
    let c = model.covariance_factor();
    let mut weights = Vec::with_capacity(model.num_classes());
    let mut biases = Vec::with_capacity(model.num_classes());
    for (mu, &pi) in model.means().iter().zip(model.priors()) {
        let w = c.solve(mu);
        biases.push(-0.5 * mu.dot(&w) + pi.ln());
        weights.push(w);
    }
    let mut family = LinearClassifierFamily::new(model.feature_dim(), model.num_classes());
    family.insert(ANY_DEGREE.to_vec(), weights, biases)?;
    Ok(family)
}

/// `γ0(m, ℓ) = (μ_m − μ_ℓ)ᵀ C⁻¹ (μ_m − μ_ℓ)`.
pub fn graph_agnostic_deflection(model: &GaussianClassModel) -> Result<DeflectionTable> {
    deflection_with_factor(model.means(), model.covariance_factor())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn agnostic_rule_examples() {
        let means = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![-1.0, 0.0])];
        let model = GaussianClassModel::new(vec![0.5, 0.5], means, DMatrix::identity(2, 2)).unwrap();
        let fam = bayes_graph_agnostic(&model).unwrap();
        assert_eq!(fam.classify(ANY_DEGREE, &DVector::from_vec(vec![0.1, 5.0])).unwrap(), 0);
        assert_eq!(fam.classify(ANY_DEGREE, &DVector::from_vec(vec![-0.1, -5.0])).unwrap(), 1);
        assert!(fam.classify(&[3], &DVector::zeros(2)).is_err());
        assert_eq!(graph_agnostic_deflection(&model).unwrap().get(0, 1), 4.0);
    }
}
