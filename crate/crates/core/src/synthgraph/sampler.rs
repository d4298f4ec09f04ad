//! Exact sampler of focal nodes and their neighborhoods under the
//! constant-transition-probability model: focal labels are drawn from the
//! priors, hop-k neighbor labels i.i.d. from row `y` of `P^k`, and every
//! feature vector fresh from `N(μ_label, C)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{khop_transition, GaussianClassModel, TransitionMatrix};
use crate::rng::{Categorical, StreamSeed};

#[derive(Debug, Clone)]
enum Noise {
    Isotropic(f64),
    Diagonal(DVector<f64>),
    Full(DMatrix<f64>),
}

/// Draws `x ~ N(μ_m, C)` using the Cholesky factor of `C` (or its diagonal).
#[derive(Debug, Clone)]
pub struct FeatureSampler {
    means: Vec<DVector<f64>>,
    noise: Noise,
}

impl FeatureSampler {
    pub fn new(model: &GaussianClassModel) -> Self {
        let c = model.covariance();
        let f = c.nrows();
        let diagonal = (0..f).all(|i| (0..f).all(|j| i == j || c[(i, j)] == 0.0));
        let noise = if diagonal {
            let sd = c.diagonal().map(f64::sqrt);
            if sd.iter().all(|s| *s == sd[0]) {
                Noise::Isotropic(sd[0])
            } else {
                Noise::Diagonal(sd)
            }
        } else {
            Noise::Full(model.covariance_factor().lower().clone())
        };
        FeatureSampler {
            means: model.means().to_vec(),
            noise,
        }
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn fill<R: Rng + ?Sized>(&self, class: usize, rng: &mut R, out: &mut DVector<f64>) {
        let mu = &self.means[class];
        match &self.noise {
            Noise::Isotropic(s) => {
                for (o, m) in out.iter_mut().zip(mu.iter()) {
                    let e: f64 = rng.sample(StandardNormal);
                    *o = m + s * e;
                }
            }
            Noise::Diagonal(sd) => {
                for ((o, m), s) in out.iter_mut().zip(mu.iter()).zip(sd.iter()) {
                    let e: f64 = rng.sample(StandardNormal);
                    *o = m + s * e;
                }
            }
            Noise::Full(lower) => {
                let eps = DVector::from_fn(mu.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                out.copy_from(mu);
                out.gemv(1.0, lower, &eps, 1.0);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, class: usize, rng: &mut R) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        self.fill(class, rng, &mut x);
        x
    }
}

/// Labels and features of the hop-k neighbors of one sampled node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HopSample {
    pub labels: Vec<usize>,
    pub features: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSample {
    pub focal_label: usize,
    pub focal_feature: DVector<f64>,
    pub neighbor_labels: Vec<usize>,
    /// `n_q`, the number of neighbors in class `q`.
    pub neighbor_class_counts: Vec<usize>,
    pub neighbor_features: Vec<DVector<f64>>,
    /// Hops `2..=K` when sampling k-hop neighborhoods.
    pub outer_hops: Vec<HopSample>,
}

impl NeighborhoodSample {
    fn empty(num_classes: usize, dim: usize) -> Self {
        NeighborhoodSample {
            focal_label: 0,
            focal_feature: DVector::zeros(dim),
            neighbor_labels: Vec::new(),
            neighbor_class_counts: vec![0; num_classes],
            neighbor_features: Vec::new(),
            outer_hops: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.neighbor_labels.len()
    }

    pub fn degree_profile(&self) -> Vec<usize> {
        std::iter::once(self.degree())
            .chain(self.outer_hops.iter().map(|h| h.labels.len()))
            .collect()
    }

    /// Features of the hop-`k` neighbors, `k >= 1`.
    pub fn hop_features(&self, k: usize) -> &[DVector<f64>] {
        if k == 1 {
            &self.neighbor_features
        } else {
            &self.outer_hops[k - 2].features
        }
    }
}

/// Reusable per-trial sampler; trial `t` always yields the same sample.
#[derive(Debug, Clone)]
pub struct NeighborhoodSampler {
    features: FeatureSampler,
    focal: Categorical,
    /// `hop_rows[k-1][m]` samples a hop-k neighbor class of a class-m node.
    hop_rows: Vec<Vec<Categorical>>,
    profile: Vec<usize>,
    num_classes: usize,
    seed: StreamSeed,
}

impl NeighborhoodSampler {
    pub fn new(model: &GaussianClassModel, p: &TransitionMatrix, profile: &[usize], seed: StreamSeed) -> Result<Self> {
        let m = model.num_classes();
        if p.order() != m {
            return Err(Error::dim("transition matrix order", m, p.order()));
        }
        if profile.is_empty() {
            return Err(Error::InvalidArgument("degree profile must name at least one hop".into()));
        }
        let hop_rows = (1..=profile.len())
            .map(|k| {
                let pk = khop_transition(p, k)?;
                Ok(pk.rows().iter().map(|r| Categorical::new(r)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NeighborhoodSampler {
            features: FeatureSampler::new(model),
            focal: Categorical::new(model.priors()),
            hop_rows,
            profile: profile.to_vec(),
            num_classes: m,
            seed,
        })
    }

    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    pub fn sample(&self, trial: u64) -> NeighborhoodSample {
        let mut out = NeighborhoodSample::empty(self.num_classes, self.features.dim());
        self.sample_into(trial, &mut out);
        out
    }

    /// Overwrites `out` with trial `trial`, reusing its buffers.
    pub fn sample_into(&self, trial: u64, out: &mut NeighborhoodSample) {
        let mut rng = self.seed.trial_rng(trial);
        let dim = self.features.dim();
        let y = self.focal.sample(&mut rng);
        out.focal_label = y;
        if out.focal_feature.len() != dim {
            out.focal_feature = DVector::zeros(dim);
        }
        self.features.fill(y, &mut rng, &mut out.focal_feature);

        out.neighbor_class_counts.clear();
        out.neighbor_class_counts.resize(self.num_classes, 0);
        fill_hop(
            &self.features,
            &self.hop_rows[0][y],
            self.profile[0],
            &mut rng,
            &mut out.neighbor_labels,
            &mut out.neighbor_features,
        );
        for &l in &out.neighbor_labels {
            out.neighbor_class_counts[l] += 1;
        }
        out.outer_hops.resize_with(self.profile.len() - 1, HopSample::default);
        for (k, hop) in out.outer_hops.iter_mut().enumerate() {
            fill_hop(
                &self.features,
                &self.hop_rows[k + 1][y],
                self.profile[k + 1],
                &mut rng,
                &mut hop.labels,
                &mut hop.features,
            );
        }
    }
}

fn fill_hop<R: Rng + ?Sized>(
    features: &FeatureSampler,
    row: &Categorical,
    degree: usize,
    rng: &mut R,
    labels: &mut Vec<usize>,
    feats: &mut Vec<DVector<f64>>,
) {
    labels.clear();
    labels.extend((0..degree).map(|_| row.sample(rng)));
    feats.resize_with(degree, || DVector::zeros(features.dim()));
    for (l, x) in labels.iter().zip(feats.iter_mut()) {
        features.fill(*l, rng, x);
    }
}

/// `trials` independent neighborhoods of degree `degree`; deterministic in `seed`.
pub fn sample_neighborhood_batch(
    model: &GaussianClassModel,
    p: &TransitionMatrix,
    degree: usize,
    trials: u64,
    seed: u64,
) -> Result<impl Iterator<Item = NeighborhoodSample>> {
    if trials < 1 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let sampler = NeighborhoodSampler::new(model, p, &[degree], StreamSeed::new(seed).derive_str("neighborhood"))?;
    Ok((0..trials).map(move |t| sampler.sample(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simplex_means;

    fn model2(f: usize) -> GaussianClassModel {
        GaussianClassModel::isotropic(vec![0.5, 0.5], simplex_means(2, f, 4.0, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn pure_homophily_neighbors_share_the_focal_label() {
        let p = TransitionMatrix::identity(2);
        for s in sample_neighborhood_batch(&model2(2), &p, 5, 200, 1).unwrap() {
            assert!(s.neighbor_labels.iter().all(|l| *l == s.focal_label));
            assert_eq!(s.neighbor_class_counts[s.focal_label], 5);
        }
    }

    #[test]
    fn pure_heterophily_neighbors_take_the_other_label() {
        let p = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        for s in sample_neighborhood_batch(&model2(2), &p, 3, 200, 2).unwrap() {
            assert!(s.neighbor_labels.iter().all(|l| *l != s.focal_label));
        }
    }

    #[test]
    fn same_label_fraction_concentrates() {
        let p = TransitionMatrix::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let mut same = 0usize;
        let trials = 1_000_000u64;
        for s in sample_neighborhood_batch(&model2(1), &p, 10, trials, 3).unwrap() {
            same += s.neighbor_class_counts[s.focal_label];
        }
        let frac = same as f64 / (10 * trials) as f64;
        let tol = 3.0 * (0.8f64 * 0.2 / 1e7).sqrt();
        assert!((frac - 0.8).abs() <= tol, "fraction {frac}");
    }

    #[test]
    fn trials_are_independent_of_batch_size_and_order() {
        let p = TransitionMatrix::from_rows(&[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let a: Vec<_> = sample_neighborhood_batch(&model2(3), &p, 4, 50, 9).unwrap().collect();
        let b: Vec<_> = sample_neighborhood_batch(&model2(3), &p, 4, 10, 9).unwrap().collect();
        assert_eq!(&a[..10], &b[..]);
        let sampler = NeighborhoodSampler::new(&model2(3), &p, &[4], StreamSeed::new(9).derive_str("neighborhood")).unwrap();
        assert_eq!(sampler.sample(37), a[37]);
    }

    #[test]
    fn khop_profile_shapes() {
        let p = TransitionMatrix::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let s = NeighborhoodSampler::new(&model2(2), &p, &[3, 5], StreamSeed::new(1)).unwrap().sample(0);
        assert_eq!(s.degree_profile(), vec![3, 5]);
        assert_eq!(s.hop_features(2).len(), 5);
    }

    #[test]
    fn full_covariance_features_have_the_right_moments() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]);
        let means = vec![DVector::from_vec(vec![1.0, -1.0]), DVector::from_vec(vec![0.0, 0.0])];
        let model = GaussianClassModel::new(vec![0.5, 0.5], means, c.clone()).unwrap();
        let fs = FeatureSampler::new(&model);
        let mut rng = StreamSeed::new(4).trial_rng(0);
        let n = 200_000;
        let mut sum = DVector::zeros(2);
        let mut outer = DMatrix::zeros(2, 2);
        for _ in 0..n {
            let x = fs.sample(0, &mut rng);
            sum += &x;
            outer += &x * x.transpose();
        }
        let mean = sum / n as f64;
        let cov = outer / n as f64 - &mean * mean.transpose();
        assert!((mean - DVector::from_vec(vec![1.0, -1.0])).norm() < 0.01);
        assert!((cov - c).norm() < 0.03);
    }
}
