//! Bayes-optimal linear classifiers on weighted-sum representations and the
//! search for the neighbor weight `α̃`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::moments::{wsa_moments, MomentKind, MomentSummary};
use crate::decision::{deflection_with_factor, error_upper_bound, DeflectionTable};
use crate::error::{Error, Result};
use crate::family::{ClassifierAtProfile, LinearClassifierFamily};
use crate::linalg::SpdFactor;
use crate::model::{DegreePriors, GaussianClassModel, TransitionMatrix};

/// `w_m = R̄⁻¹ν̄_m`, `b_m = −½ ν̄_mᵀR̄⁻¹ν̄_m + ln π_{m,d}`.
pub fn lda_classifier(mom: &MomentSummary) -> Result<ClassifierAtProfile> {
    let factor = SpdFactor::new(&mom.pooled_covariance, "pooled covariance")?;
    let mut weights = Vec::with_capacity(mom.num_classes());
    let mut biases = Vec::with_capacity(mom.num_classes());
    for (nu, &pi) in mom.class_means.iter().zip(&mom.pooling_priors) {
        let w = factor.solve(nu);
        biases.push(-0.5 * nu.dot(&w) + pi.ln());
        weights.push(w);
    }
    Ok(ClassifierAtProfile { weights, biases })
}

fn require_weighted_sum(mom: &MomentSummary) -> Result<()> {
    match mom.kind {
        MomentKind::WeightedSum { .. } => Ok(()),
        MomentKind::Concatenated => Err(Error::InvalidArgument(
            "expected weighted-sum moments, got concatenated ones".into(),
        )),
    }
}

/// Single-degree family for a weighted-sum representation.
pub fn build_wsa_classifier(mom: &MomentSummary) -> Result<LinearClassifierFamily> {
    require_weighted_sum(mom)?;
    let clf = lda_classifier(mom)?;
    let mut family = LinearClassifierFamily::new(mom.representation_dim(), mom.num_classes());
    family.insert(mom.profile.clone(), clf.weights, clf.biases)?;
    Ok(family)
}

/// Pairwise deflections `(ν̄_m − ν̄_ℓ)ᵀ R̄⁻¹ (ν̄_m − ν̄_ℓ)` at the moments' degree.
pub fn wsa_deflection(mom: &MomentSummary) -> Result<DeflectionTable> {
    require_weighted_sum(mom)?;
    let factor = SpdFactor::new(&mom.pooled_covariance, "pooled covariance")?;
    Ok(deflection_with_factor(&mom.class_means, &factor)?.with_degree(mom.degree()))
}

fn check_homophily(p_h: f64, gamma0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_h) {
        return Err(Error::Probability {
            name: "p_h".into(),
            reason: format!("{p_h} is outside [0, 1]"),
        });
    }
    if !(gamma0 >= 0.0) || !gamma0.is_finite() {
        return Err(Error::InvalidArgument(format!("γ0 = {gamma0} must be finite and nonnegative")));
    }
    Ok(())
}

/// Two classes with `p_11 = p_22 = p_h`:
/// `γ_d = (1 + α̃d(2p_h−1))² γ0 / (1 + dα̃² + dα̃² p_h(1−p_h) γ0)`.
pub fn two_class_deflection(p_h: f64, gamma0: f64, alpha: f64, degree: usize) -> Result<f64> {
    check_homophily(p_h, gamma0)?;
    let d = degree as f64;
    let gain = 1.0 + alpha * d * (2.0 * p_h - 1.0);
    let a2d = alpha * alpha * d;
    Ok(gain * gain * gamma0 / (1.0 + a2d + a2d * p_h * (1.0 - p_h) * gamma0))
}

/// Maximizer of [`two_class_deflection`] over `α̃`; the same for every degree.
pub fn optimal_alpha_closed_form(p_h: f64, gamma0: f64) -> Result<f64> {
    check_homophily(p_h, gamma0)?;
    if gamma0 == 0.0 {
        return Err(Error::InvalidArgument("α̃* needs γ0 > 0".into()));
    }
    Ok((2.0 * p_h - 1.0) / (1.0 + p_h * (1.0 - p_h) * gamma0))
}

/// `R̄⁻¹ = (C⁻¹ − ξ C⁻¹ΔμΔμᵀC⁻¹) / (1 + α̃²d)` for the two-class pooled
/// covariance `R̄ = (1 + dα̃²)C + dα̃² p_h(1−p_h) ΔμΔμᵀ`, with
/// `ξ = α̃²d p_h(1−p_h) / (1 + α̃²d + α̃²d p_h(1−p_h) γ0)`.
pub fn two_class_pooled_inverse(
    covariance: &DMatrix<f64>,
    delta_mu: &DVector<f64>,
    p_h: f64,
    alpha: f64,
    degree: usize,
) -> Result<DMatrix<f64>> {
    let factor = SpdFactor::new(covariance, "feature covariance")?;
    if delta_mu.len() != factor.dim() {
        return Err(Error::dim("mean difference length", factor.dim(), delta_mu.len()));
    }
    let gamma0 = factor.quad_form(delta_mu);
    check_homophily(p_h, gamma0)?;
    let a2d = alpha * alpha * degree as f64;
    let spread = a2d * p_h * (1.0 - p_h);
    let xi = spread / (1.0 + a2d + spread * gamma0);
    let c_inv = factor.inverse();
    let u = factor.solve(delta_mu);
    Ok((c_inv - &u * u.transpose() * xi) / (1.0 + a2d))
}

/// Uniform grid `lo, lo + step, …` up to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            lo: -1.0,
            hi: 1.0,
            step: 0.005,
        }
    }
}

impl AlphaGrid {
    pub const MAX_STEP: f64 = 0.01;

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.step <= Self::MAX_STEP) {
            return Err(Error::InvalidArgument(format!(
                "α̃ grid step {} must lie in (0, {}]",
                self.step,
                Self::MAX_STEP
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::InvalidArgument(format!(
                "empty α̃ grid [{}, {}]",
                self.lo, self.hi
            )));
        }
        let ratio = (self.hi - self.lo) / self.step;
        let n = (ratio + 1e-9).floor() as usize;
        // Exact subdivisions put 0 and both endpoints exactly on the grid.
        let exact = (ratio - ratio.round()).abs() < 1e-9;
        Ok((0..=n)
            .map(|k| {
                if exact && n > 0 {
                    self.lo + (self.hi - self.lo) * k as f64 / n as f64
                } else {
                    self.lo + k as f64 * self.step
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct AlphaSearch {
    pub alpha: f64,
    /// Union bound at `alpha`.
    pub objective: f64,
    pub deflection: DeflectionTable,
    /// `(α̃, bound)` per grid point; `+∞` where some pair is indistinguishable.
    pub curve: Vec<(f64, f64)>,
}

/// Minimizes the union bound over the grid. Ties go to the smaller `|α̃|`,
/// then to the smaller `α̃`.
pub fn optimize_alpha_grid(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    degree: usize,
    grid: &AlphaGrid,
    priors: &DegreePriors,
) -> Result<AlphaSearch> {
    let mut best: Option<(f64, f64, DeflectionTable)> = None;
    let mut curve = Vec::new();
    for alpha in grid.points()? {
        let mom = wsa_moments(model, p, alpha, degree, priors)?;
        let table = wsa_deflection(&mom)?;
        let objective = match error_upper_bound(&table, &mom.pooling_priors) {
            Ok(v) => v,
            Err(Error::Indistinguishable { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        curve.push((alpha, objective));
        if !objective.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((a, o, _)) => {
                objective < *o || (objective == *o && (alpha.abs() < a.abs() || (alpha.abs() == a.abs() && alpha < *a)))
            }
        };
        if better {
            best = Some((alpha, objective, table));
        }
    }
    let (alpha, objective, deflection) = best.ok_or_else(|| {
        Error::InvalidArgument(format!("every α̃ on the grid leaves two classes indistinguishable at degree {degree}"))
    })?;
    Ok(AlphaSearch {
        alpha,
        objective,
        deflection,
        curve,
    })
}
