//! Gaussian tail probabilities, deflection coefficients, and the pairwise
//! (union) bound on the misclassification probability.

use nalgebra::{DMatrix, DVector};
use libm::erfc;

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;

/// Standard Gaussian tail `Q(a) = P(N(0,1) > a)`.
pub fn q_function(a: f64) -> Result<f64> {
    if a.is_nan() {
        return Err(Error::InvalidArgument("Q-function argument is NaN".into()));
    }
    Ok(0.5 * erfc(a / std::f64::consts::SQRT_2))
}

/// Symmetric table of pairwise deflections `γ_d(m, ℓ)` at one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflectionTable {
    pub degree: usize,
    values: DMatrix<f64>,
}

impl DeflectionTable {
    pub fn new(degree: usize, values: DMatrix<f64>) -> Result<Self> {
        let m = values.nrows();
        if values.ncols() != m {
            return Err(Error::dim("deflection table columns", m, values.ncols()));
        }
        for a in 0..m {
            if values[(a, a)] != 0.0 {
                return Err(Error::InvalidArgument("deflection diagonal must be zero".into()));
            }
            for b in 0..m {
                let v = values[(a, b)];
                if !(v >= 0.0) || v != values[(b, a)] {
                    return Err(Error::InvalidArgument(format!(
                        "deflection table entry ({}, {}) = {v} is negative or asymmetric",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(DeflectionTable { degree, values })
    }

    pub fn num_classes(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, m: usize, l: usize) -> f64 {
        self.values[(m, l)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Smallest off-diagonal entry.
    pub fn min_pair(&self) -> f64 {
        let m = self.num_classes();
        (0..m)
            .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
            .map(|(a, b)| self.get(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }
}

/// `γ(m, ℓ) = (ν̄_m − ν̄_ℓ)ᵀ R̄⁻¹ (ν̄_m − ν̄_ℓ)`.
pub fn pairwise_deflection(means: &[DVector<f64>], pooled_cov: &DMatrix<f64>) -> Result<DeflectionTable> {
    let factor = SpdFactor::new(pooled_cov, "pooled covariance")?;
    deflection_with_factor(means, &factor)
}

pub(crate) fn deflection_with_factor(means: &[DVector<f64>], factor: &SpdFactor) -> Result<DeflectionTable> {
    let n = factor.dim();
    if let Some(bad) = means.iter().find(|mu| mu.len() != n) {
        return Err(Error::dim("mean vs covariance dimension", n, bad.len()));
    }
    let m = means.len();
    let mut values = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in (a + 1)..m {
            let g = factor.quad_form(&(&means[a] - &means[b]));
            values[(a, b)] = g;
            values[(b, a)] = g;
        }
    }
    DeflectionTable::new(0, values)
}

/// `Σ_m π_m Σ_{ℓ≠m} Q(√γ/2 + ln(π_m/π_ℓ)/√γ)`; exact for two classes when the
/// class-conditional scores are Gaussian.
pub fn error_upper_bound(deflections: &DeflectionTable, priors: &[f64]) -> Result<f64> {
    let m = deflections.num_classes();
    if priors.len() != m {
        return Err(Error::dim("priors vs deflection table", m, priors.len()));
    }
    let mut total = 0.0;
    for a in 0..m {
        if priors[a] == 0.0 {
            continue;
        }
        for b in 0..m {
            if a == b || priors[b] == 0.0 {
                continue;
            }
            let g = deflections.get(a, b);
            if g <= 0.0 {
                return Err(Error::Indistinguishable { m: a + 1, l: b + 1 });
            }
            let root = g.sqrt();
            total += priors[a] * q_function(root / 2.0 + (priors[a] / priors[b]).ln() / root)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    // High-precision reference values of Q (40-digit arithmetic).
    const Q_TABLE: &[(f64, f64)] = &[
        (0.0, 0.5),
        (0.5, 0.308_537_538_725_986_9),
        (1.0, 0.158_655_253_931_457_05),
        (1.7, 0.044_565_462_758_543_04),
        (2.0, 0.022_750_131_948_179_207),
        (3.0, 0.001_349_898_031_630_094_5),
        (8.0, 6.220_960_574_271_784e-16),
        (-1.7, 0.955_434_537_241_456_9),
        (-8.0, 0.999_999_999_999_999_4),
    ];

    fn trapezoid_tail(a: f64) -> f64 {
        // ∫_a^{a+40} φ(t) dt on 10⁶ panels; the remainder beyond is < 1e-300.
        let n = 1_000_000usize;
        let upper = a + 40.0;
        let h = (upper - a) / n as f64;
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let inner: f64 = (1..n).map(|i| phi(a + i as f64 * h)).sum();
        h * (inner + 0.5 * (phi(a) + phi(upper)))
    }

    #[test]
    fn q_matches_reference_values() {
        for &(a, want) in Q_TABLE {
            let got = q_function(a).unwrap();
            assert!(((got - want) / want).abs() <= 1e-12, "Q({a}) = {got}, want {want}");
        }
        assert!(q_function(f64::NAN).is_err());
    }

    #[test]
    fn q_matches_trapezoid_integration() {
        for a in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let oracle = trapezoid_tail(a);
            assert!((q_function(a).unwrap() - oracle).abs() < 1e-8, "a = {a}");
        }
    }

    #[test]
    fn q_reflection() {
        let a = 1.7;
        assert!((q_function(-a).unwrap() - (1.0 - q_function(a).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn deflection_of_identical_and_opposite_means() {
        let c = DMatrix::identity(2, 2);
        let same = vec![DVector::from_vec(vec![0.3, 1.0]); 2];
        assert_eq!(pairwise_deflection(&same, &c).unwrap().get(0, 1), 0.0);
        let opposite = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![-1.0, 0.0])];
        assert!((pairwise_deflection(&opposite, &c).unwrap().get(0, 1) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn deflection_matches_explicit_inverse_oracle() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 0.9, 0.4, 0.0, -0.5, 1.2]);
        let c = &a * a.transpose() + DMatrix::identity(3, 3) * 0.1;
        let means = vec![
            DVector::from_vec(vec![1.0, 0.0, 0.5]),
            DVector::from_vec(vec![-0.4, 2.0, 0.0]),
            DVector::from_vec(vec![0.2, -1.0, -1.5]),
        ];
        let inv = c.clone().try_inverse().unwrap();
        let table = pairwise_deflection(&means, &c).unwrap();
        for m in 0..3 {
            for l in 0..3 {
                let diff = &means[m] - &means[l];
                let want = (diff.transpose() * &inv * &diff)[(0, 0)];
                assert!((table.get(m, l) - want).abs() < 1e-10 * want.max(1.0));
            }
        }
    }

    #[test]
    fn singular_covariance_is_named() {
        let c = DMatrix::zeros(2, 2);
        let means = vec![DVector::zeros(2), DVector::from_vec(vec![1.0, 0.0])];
        let err = pairwise_deflection(&means, &c).unwrap_err();
        assert!(err.to_string().contains("pooled covariance"));
    }

    fn constant_table(m: usize, g: f64) -> DeflectionTable {
        let mut v = DMatrix::from_element(m, m, g);
        v.fill_diagonal(0.0);
        DeflectionTable::new(0, v).unwrap()
    }

    #[test]
    fn bound_examples() {
        let q1 = 0.158_655_253_931_457_05;
        let b2 = error_upper_bound(&constant_table(2, 4.0), &[0.5, 0.5]).unwrap();
        assert!((b2 - q1).abs() < 1e-15);
        let b4 = error_upper_bound(&constant_table(4, 4.0), &[0.25; 4]).unwrap();
        assert!((b4 - 0.475_965_761_794_371_15).abs() < 1e-14);
        let far = error_upper_bound(&constant_table(2, 1e4), &[0.5, 0.5]).unwrap();
        assert!(far < 1e-20);
        assert!(matches!(
            error_upper_bound(&constant_table(2, 0.0), &[0.5, 0.5]),
            Err(Error::Indistinguishable { m: 1, l: 2 })
        ));
    }

    #[test]
    fn bound_unequal_priors_two_classes() {
        // Direct evaluation of both one-sided terms.
        let g: f64 = 2.0;
        let (p1, p2): (f64, f64) = (0.7, 0.3);
        let r = g.sqrt();
        let want = p1 * q_function(r / 2.0 + (p1 / p2).ln() / r).unwrap()
            + p2 * q_function(r / 2.0 + (p2 / p1).ln() / r).unwrap();
        let got = error_upper_bound(&constant_table(2, g), &[p1, p2]).unwrap();
        assert!((got - want).abs() < 1e-16);
    }
}
