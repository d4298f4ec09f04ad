//! One-dimensional illustration of how averaging a node with a same-class
//! neighbor reshapes the class densities, and the resulting Bayes error
//! `∫ min(π₁f₁, π₂f₂)`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MASS_TOL: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density1d {
    Gaussian { mean: f64, sd: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

impl Density1d {
    fn components(&self) -> Vec<MixtureComponent> {
        match self {
            Density1d::Gaussian { mean, sd } => vec![MixtureComponent {
                weight: 1.0,
                mean: *mean,
                sd: *sd,
            }],
            Density1d::Mixture { components } => components.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let comps = self.components();
        if comps.is_empty() {
            return Err(Error::InvalidArgument("mixture has no components".into()));
        }
        for c in &comps {
            if !(c.sd > 0.0 && c.sd.is_finite()) {
                return Err(Error::InvalidArgument(format!("standard deviation {} must be positive", c.sd)));
            }
            if !(c.weight > 0.0) || !c.mean.is_finite() {
                return Err(Error::InvalidArgument("mixture weights must be positive and means finite".into()));
            }
        }
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components()
            .iter()
            .map(|c| {
                let u = (x - c.mean) / c.sd;
                c.weight * (-0.5 * u * u).exp() / (c.sd * (2.0 * std::f64::consts::PI).sqrt())
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapAggregation {
    None,
    /// `(x_i + x_j)/2` with `x_j` drawn from the same class.
    PairwiseMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl OverlapGrid {
    /// `[c − 10σ − r, c + 10σ + r]` where `c` is the midpoint of all component
    /// means, `r` their half-range, and `σ` the largest standard deviation.
    pub fn covering(densities: &[&Density1d]) -> Self {
        let comps: Vec<_> = densities.iter().flat_map(|d| d.components()).collect();
        let lo_mean = comps.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
        let hi_mean = comps.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
        let sigma = comps.iter().map(|c| c.sd).fold(0.0, f64::max);
        let (c, r) = ((lo_mean + hi_mean) / 2.0, (hi_mean - lo_mean) / 2.0);
        OverlapGrid {
            lo: c - 10.0 * sigma - r,
            hi: c + 10.0 * sigma + r,
            points: DEFAULT_POINTS,
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.lo + self.step() * k as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct OverlapResult {
    pub grid: Vec<f64>,
    pub class1: Vec<f64>,
    pub class2: Vec<f64>,
    pub overlap: f64,
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

fn check_mass(values: &[f64], h: f64, what: &str) -> Result<()> {
    let mass = trapezoid(values, h);
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidArgument(format!(
            "{what} integrates to {mass} on the grid; widen or refine it"
        )));
    }
    Ok(())
}

/// Density of `(x + x')/2` for i.i.d. `x, x' ~ f`, on the same grid:
/// `g(z) = 2 (f∗f)(2z)`, and `2z_k = 2·lo + 2k·h` is node `2k` of the
/// full linear convolution.
fn pairwise_mean_density(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut buf);
    for c in buf.iter_mut() {
        *c = *c * *c;
    }
    inv.process(&mut buf);
    let scale = 1.0 / size as f64;
    (0..n).map(|k| (2.0 * h * buf[2 * k].re * scale).max(0.0)).collect()
}

pub fn density_overlap_1d(
    class1: &Density1d,
    class2: &Density1d,
    aggregation: OverlapAggregation,
    priors: [f64; 2],
    grid: Option<OverlapGrid>,
) -> Result<OverlapResult> {
    class1.validate()?;
    class2.validate()?;
    if !(priors[0] > 0.0 && priors[1] > 0.0 && ((priors[0] + priors[1]) - 1.0).abs() <= 1e-12) {
        return Err(Error::Probability {
            name: "overlap priors".into(),
            reason: format!("{priors:?} must be positive and sum to 1"),
        });
    }
    let grid = grid.unwrap_or_else(|| OverlapGrid::covering(&[class1, class2]));
    if grid.points < 3 || !(grid.hi > grid.lo) {
        return Err(Error::InvalidArgument("overlap grid needs hi > lo and at least 3 points".into()));
    }
    let h = grid.step();
    let nodes = grid.nodes();
    let mut f1: Vec<f64> = nodes.iter().map(|&x| class1.pdf(x)).collect();
    let mut f2: Vec<f64> = nodes.iter().map(|&x| class2.pdf(x)).collect();
    check_mass(&f1, h, "class 1 density")?;
    check_mass(&f2, h, "class 2 density")?;
    if aggregation == OverlapAggregation::PairwiseMean {
        f1 = pairwise_mean_density(&f1, h);
        f2 = pairwise_mean_density(&f2, h);
        check_mass(&f1, h, "aggregated class 1 density")?;
        check_mass(&f2, h, "aggregated class 2 density")?;
    }
    let overlap_curve: Vec<f64> = f1
        .iter()
        .zip(&f2)
        .map(|(a, b)| (priors[0] * a).min(priors[1] * b))
        .collect();
    Ok(OverlapResult {
        grid: nodes,
        overlap: trapezoid(&overlap_curve, h),
        class1: f1,
        class2: f2,
    })
}

/// Unimodal pair `G(−1, 1)` vs `G(1, 1)`.
pub fn unimodal_demo() -> (Density1d, Density1d) {
    (
        Density1d::Gaussian { mean: -1.0, sd: 1.0 },
        Density1d::Gaussian { mean: 1.0, sd: 1.0 },
    )
}

/// Class 1 `½G(−2, 1) + ½G(2, 1)` vs class 2 `G(0, 1)`.
pub fn mixture_demo() -> (Density1d, Density1d) {
    let comp = |mean| MixtureComponent { weight: 0.5, mean, sd: 1.0 };
    (
        Density1d::Mixture {
            components: vec![comp(-2.0), comp(2.0)],
        },
        Density1d::Gaussian { mean: 0.0, sd: 1.0 },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::q_function;

    const EQUAL: [f64; 2] = [0.5, 0.5];

    #[test]
    fn identical_densities_overlap_one_half() {
        let g = Density1d::Gaussian { mean: 0.3, sd: 2.0 };
        for agg in [OverlapAggregation::None, OverlapAggregation::PairwiseMean] {
            let r = density_overlap_1d(&g, &g, agg, EQUAL, None).unwrap();
            assert!((r.overlap - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_overlap_matches_q_function() {
        let (a, b) = unimodal_demo();
        let before = density_overlap_1d(&a, &b, OverlapAggregation::None, EQUAL, None).unwrap();
        // The kink of min(·) at the crossing limits the trapezoid rule to O(h²).
        assert!((before.overlap - q_function(1.0).unwrap()).abs() < 1e-6);
        // Averaging two same-class samples shrinks the sd by √2.
        let after = density_overlap_1d(&a, &b, OverlapAggregation::PairwiseMean, EQUAL, None).unwrap();
        assert!((after.overlap - q_function(std::f64::consts::SQRT_2).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn pairwise_mean_of_a_mixture() {
        let (mix, _) = mixture_demo();
        let grid = OverlapGrid::covering(&[&mix]);
        let r = density_overlap_1d(&mix, &mix, OverlapAggregation::PairwiseMean, EQUAL, Some(grid)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = Density1d::Mixture {
            components: vec![
                MixtureComponent { weight: 0.25, mean: -2.0, sd: s },
                MixtureComponent { weight: 0.5, mean: 0.0, sd: s },
                MixtureComponent { weight: 0.25, mean: 2.0, sd: s },
            ],
        };
        let err = r
            .grid
            .iter()
            .zip(&r.class1)
            .map(|(&x, &g)| (g - want.pdf(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn aggregation_direction_depends_on_modality() {
        let (a, b) = unimodal_demo();
        let before = density_overlap_1d(&a, &b, OverlapAggregation::None, EQUAL, None).unwrap().overlap;
        let after = density_overlap_1d(&a, &b, OverlapAggregation::PairwiseMean, EQUAL, None).unwrap().overlap;
        assert!(after < before);
        let (a, b) = mixture_demo();
        let before = density_overlap_1d(&a, &b, OverlapAggregation::None, EQUAL, None).unwrap().overlap;
        let after = density_overlap_1d(&a, &b, OverlapAggregation::PairwiseMean, EQUAL, None).unwrap().overlap;
        assert!(after > before, "{after} vs {before}");
    }

    #[test]
    fn invalid_requests() {
        let zero = Density1d::Gaussian { mean: 0.0, sd: 0.0 };
        let ok = Density1d::Gaussian { mean: 0.0, sd: 1.0 };
        assert!(density_overlap_1d(&zero, &ok, OverlapAggregation::None, EQUAL, None).is_err());
        let narrow = OverlapGrid { lo: -1.0, hi: 1.0, points: 1000 };
        assert!(density_overlap_1d(&ok, &ok, OverlapAggregation::None, EQUAL, Some(narrow)).is_err());
        assert!(density_overlap_1d(&ok, &ok, OverlapAggregation::None, [0.3, 0.3], None).is_err());
    }
}
