//! Shared fixtures for the criterion benchmarks.

use graphsig::analysis::special_case_transition;
use graphsig::{simplex_means, GaussianClassModel, TransitionMatrix};

/// `M` equiprobable classes with all pairwise separations `gamma0`, `C = I_F`.
pub fn simplex_model(m: usize, f: usize, gamma0: f64) -> GaussianClassModel {
    let means = simplex_means(m, f, gamma0, 1.0).expect("F >= M - 1");
    GaussianClassModel::isotropic(vec![1.0 / m as f64; m], means, 1.0).expect("valid model")
}

pub fn transition(case: u8, p_h: f64) -> TransitionMatrix {
    special_case_transition(case, p_h).expect("valid special case")
}
