//! The homoscedastic Gaussian class model and the class transition matrix.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;

/// Absolute tolerance for probability normalization.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance of the detailed-balance check `π_m p_{m,ℓ} = π_ℓ p_{ℓ,m}`.
pub const BALANCE_TOL: f64 = 1e-9;

pub(crate) fn check_prob_vector(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Probability {
            name: name.into(),
            reason: "empty".into(),
        });
    }
    if let Some(bad) = p.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(Error::Probability {
            name: name.into(),
            reason: format!("entry {bad} outside [0, 1]"),
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::Probability {
            name: name.into(),
            reason: format!("sums to {sum:.17}, not 1"),
        });
    }
    Ok(())
}

/// Classes share one covariance `C` and differ in their means.
#[derive(Debug, Clone)]
pub struct GaussianClassModel {
    priors: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariance: DMatrix<f64>,
    factor: SpdFactor,
}

impl GaussianClassModel {
    pub fn new(priors: Vec<f64>, means: Vec<DVector<f64>>, covariance: DMatrix<f64>) -> Result<Self> {
        let m = priors.len();
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two classes, got {m}"
            )));
        }
        check_prob_vector("priors", &priors)?;
        if let Some(p) = priors.iter().find(|p| **p <= 0.0) {
            return Err(Error::Probability {
                name: "priors".into(),
                reason: format!("prior {p} is not positive"),
            });
        }
        if means.len() != m {
            return Err(Error::dim("number of class means", m, means.len()));
        }
        let f = covariance.nrows();
        if f == 0 || covariance.ncols() != f {
            return Err(Error::InvalidArgument("covariance must be a nonempty square matrix".into()));
        }
        for mu in &means {
            if mu.len() != f {
                return Err(Error::dim("class mean length", f, mu.len()));
            }
        }
        let factor = SpdFactor::new(&covariance, "C")?;
        Ok(GaussianClassModel {
            priors,
            means,
            covariance,
            factor,
        })
    }

    /// `C = σ² I`.
    pub fn isotropic(priors: Vec<f64>, means: Vec<DVector<f64>>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        let f = means.first().map_or(0, |m| m.len());
        Self::new(priors, means, DMatrix::identity(f, f) * (sigma * sigma))
    }

    pub fn num_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn covariance_factor(&self) -> &SpdFactor {
        &self.factor
    }
}

/// Row-stochastic matrix of neighbor-class probabilities `p_{m,ℓ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument("transition matrix must be nonempty and square".into()));
        }
        for (m, row) in entries.row_iter().enumerate() {
            let row: Vec<f64> = row.iter().cloned().collect();
            check_prob_vector(&format!("P row {}", m + 1), &row)?;
        }
        Ok(TransitionMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::dim("transition matrix row length", n, r.len()));
        }
        let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn identity(order: usize) -> Self {
        TransitionMatrix {
            entries: DMatrix::identity(order, order),
        }
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, m: usize, l: usize) -> f64 {
        self.entries[(m, l)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().cloned().collect())
            .collect()
    }

    /// Average homophily `Σ_m π_m p_{m,m}`.
    pub fn average_homophily(&self, priors: &[f64]) -> f64 {
        priors.iter().enumerate().map(|(m, p)| p * self.get(m, m)).sum()
    }
}

/// k-hop class transitions `P^(k) = P^k`.
pub fn khop_transition(p: &TransitionMatrix, k: usize) -> Result<TransitionMatrix> {
    if k < 1 {
        return Err(Error::InvalidArgument("hop order k must be at least 1".into()));
    }
    let mut acc = p.entries.clone();
    for _ in 1..k {
        acc = &acc * &p.entries;
    }
    // Products of stochastic matrices drift by a few ulps; fold the drift back.
    for mut row in acc.row_iter_mut() {
        for v in row.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }
    TransitionMatrix::new(acc)
}

/// Class priors conditioned on the degree (or k-hop degree profile) of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePriors {
    default: Vec<f64>,
    by_profile: BTreeMap<Vec<usize>, Vec<f64>>,
}

impl DegreePriors {
    pub fn new(default: Vec<f64>) -> Result<Self> {
        check_prob_vector("default degree priors", &default)?;
        Ok(DegreePriors {
            default,
            by_profile: BTreeMap::new(),
        })
    }

    /// Degree-independent priors `π_{m,d} = π_m`.
    pub fn from_model(model: &GaussianClassModel) -> Self {
        DegreePriors {
            default: model.priors().to_vec(),
            by_profile: BTreeMap::new(),
        }
    }

    pub fn with_degree(self, degree: usize, priors: Vec<f64>) -> Result<Self> {
        self.with_profile(vec![degree], priors)
    }

    pub fn with_profile(mut self, profile: Vec<usize>, priors: Vec<f64>) -> Result<Self> {
        if priors.len() != self.default.len() {
            return Err(Error::dim("degree prior length", self.default.len(), priors.len()));
        }
        check_prob_vector(&format!("priors for degree profile {profile:?}"), &priors)?;
        self.by_profile.insert(profile, priors);
        Ok(self)
    }

    pub fn default_priors(&self) -> &[f64] {
        &self.default
    }

    pub fn for_degree(&self, degree: usize) -> &[f64] {
        self.for_profile(&[degree])
    }

    pub fn for_profile(&self, profile: &[usize]) -> &[f64] {
        self.by_profile.get(profile).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelDiagnostics {
    pub checks: Vec<Check>,
    /// `false` flags a directed-only model: the neighborhood sampler accepts it,
    /// the DC-SBM generator does not.
    pub balanced: bool,
    pub max_balance_violation: f64,
}

impl ModelDiagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn validate_model(model: &GaussianClassModel, p: &TransitionMatrix) -> Result<ModelDiagnostics> {
    let m = model.num_classes();
    if p.order() != m {
        return Err(Error::dim("transition matrix order vs number of classes", m, p.order()));
    }
    let mut checks = Vec::new();
    let prior_sum: f64 = model.priors().iter().sum();
    checks.push(Check {
        name: "priors_normalized",
        passed: (prior_sum - 1.0).abs() <= PROB_TOL && model.priors().iter().all(|p| *p > 0.0),
        detail: format!("sum {prior_sum:.17}"),
    });
    checks.push(Check {
        name: "covariance_spd",
        passed: SpdFactor::new(model.covariance(), "C").is_ok(),
        detail: format!("{0}x{0}", model.feature_dim()),
    });
    checks.push(Check {
        name: "means_dimension",
        passed: model.means().iter().all(|mu| mu.len() == model.feature_dim()),
        detail: format!("F = {}", model.feature_dim()),
    });
    let worst_row = p
        .entries()
        .row_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "transition_rows_stochastic",
        passed: worst_row <= PROB_TOL && p.entries().iter().all(|v| (0.0..=1.0).contains(v)),
        detail: format!("max row deviation {worst_row:e}"),
    });

    let pi = model.priors();
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in (a + 1)..m {
            worst = worst.max((pi[a] * p.get(a, b) - pi[b] * p.get(b, a)).abs());
        }
    }
    Ok(ModelDiagnostics {
        checks,
        balanced: worst <= BALANCE_TOL,
        max_balance_violation: worst,
    })
}

/// Vertices of a regular simplex centered at the origin, embedded in the first
/// `M − 1` coordinates, with pairwise distance `σ √γ₀`.
pub fn simplex_means(m: usize, f: usize, gamma0: f64, sigma: f64) -> Result<Vec<DVector<f64>>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least two classes, got {m}")));
    }
    if f + 1 < m {
        return Err(Error::InvalidArgument(format!(
            "feature dimension {f} too small for a {m}-class simplex (need F >= M - 1)"
        )));
    }
    if !(gamma0 > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidArgument("gamma0 and sigma must be positive".into()));
    }
    // Centered unit vectors e_m − 1/M are √2 apart; project them on the Helmert
    // basis of the sum-zero subspace.
    let scale = sigma * gamma0.sqrt() / std::f64::consts::SQRT_2;
    let inv_m = 1.0 / m as f64;
    let means = (0..m)
        .map(|vertex| {
            let mut mu = DVector::zeros(f);
            for k in 1..m {
                let norm = ((k * (k + 1)) as f64).sqrt();
                let coord: f64 = (0..=k)
                    .map(|i| {
                        let centered = if i == vertex { 1.0 - inv_m } else { -inv_m };
                        let h = if i < k { 1.0 } else { -(k as f64) };
                        centered * h / norm
                    })
                    .sum();
                mu[k - 1] = coord * scale;
            }
            mu
        })
        .collect();
    Ok(means)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class(priors: Vec<f64>) -> GaussianClassModel {
        let means = simplex_means(2, 1, 4.0, 1.0).unwrap();
        GaussianClassModel::isotropic(priors, means, 1.0).unwrap()
    }

    #[test]
    fn validate_flags_unbalanced_models_without_failing() {
        let p = TransitionMatrix::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let d = validate_model(&two_class(vec![0.5, 0.5]), &p).unwrap();
        assert!(d.passed() && d.balanced);
        let d = validate_model(&two_class(vec![0.9, 0.1]), &p).unwrap();
        assert!(d.passed());
        assert!(!d.balanced);
        assert!((d.max_balance_violation - 0.16).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_order_mismatch() {
        let p = TransitionMatrix::identity(3);
        assert!(matches!(
            validate_model(&two_class(vec![0.5, 0.5]), &p),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn khop_examples() {
        let id = TransitionMatrix::identity(3);
        assert_eq!(khop_transition(&id, 5).unwrap(), id);
        let p = TransitionMatrix::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let p2 = khop_transition(&p, 2).unwrap();
        let want = [[0.68, 0.32], [0.32, 0.68]];
        for m in 0..2 {
            for l in 0..2 {
                assert!((p2.get(m, l) - want[m][l]).abs() < 1e-15);
            }
        }
        let flip = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(khop_transition(&flip, 2).unwrap(), TransitionMatrix::identity(2));
        assert!(khop_transition(&p, 0).is_err());
    }

    #[test]
    fn probability_drift_is_an_error() {
        assert!(TransitionMatrix::from_rows(&[vec![0.8, 0.2 + 1e-9], vec![0.2, 0.8]]).is_err());
        assert!(GaussianClassModel::isotropic(
            vec![0.5, 0.5 + 1e-10],
            simplex_means(2, 1, 1.0, 1.0).unwrap(),
            1.0
        )
        .is_err());
        assert!(DegreePriors::new(vec![0.3, 0.3]).is_err());
    }

    #[test]
    fn simplex_two_classes_in_one_dimension() {
        let means = simplex_means(2, 1, 4.0, 1.0).unwrap();
        assert!((means[0][0] - 1.0).abs() < 1e-15);
        assert!((means[1][0] + 1.0).abs() < 1e-15);
        assert!(simplex_means(3, 1, 4.0, 1.0).is_err());
    }

    #[test]
    fn simplex_is_centered_and_equidistant() {
        let means = simplex_means(5, 7, 2.5, 0.5).unwrap();
        let centroid: DVector<f64> = means.iter().fold(DVector::zeros(7), |a, b| a + b);
        assert!(centroid.norm() < 1e-14);
        let target = 0.5 * 2.5f64.sqrt();
        for a in 0..5 {
            assert!(means[a].rows(4, 3).norm() == 0.0);
            for b in (a + 1)..5 {
                assert!(((&means[a] - &means[b]).norm() - target).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degree_priors_fall_back_to_default() {
        let dp = DegreePriors::new(vec![0.5, 0.5])
            .unwrap()
            .with_degree(3, vec![0.9, 0.1])
            .unwrap();
        assert_eq!(dp.for_degree(3), &[0.9, 0.1]);
        assert_eq!(dp.for_degree(4), &[0.5, 0.5]);
        assert_eq!(dp.for_profile(&[3, 1]), &[0.5, 0.5]);
    }
}
