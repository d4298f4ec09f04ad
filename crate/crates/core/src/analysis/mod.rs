//! Experiment orchestration: special-case transition matrices, the Monte
//! Carlo harness, homophily audits, and the 1-D density-overlap demo.

pub mod config;
mod homophily;
mod montecarlo;
mod overlap;

pub use config::{
    Aggregator, AlphaPolicy, ExperimentConfig, GraphSpec, MeansSpec, PhSpec, SimplexSpec, SweepPoint, DEFAULT_SEED,
};
pub use homophily::{homophily_stats, DegreeRow, HomophilyReport};
pub use montecarlo::{
    analytic_cell, point_seed, run_monte_carlo, AnalyticCell, select_alpha, CellFailure, CellResult, MonteCarloResult, MIN_RELIABLE_ERRORS,
};
pub use overlap::{
    density_overlap_1d, mixture_demo, unimodal_demo, Density1d, MixtureComponent, OverlapAggregation, OverlapGrid,
    OverlapResult,
};

use crate::error::{Error, Result};
use crate::model::TransitionMatrix;

/// Case 1: two classes, `p_11 = p_22 = p_h`. Case 2: four classes, `p_mm = p_h`,
/// `p_12 = p_21 = p_34 = p_43 = 1 − p_h`. Case 3: four classes,
/// `p_11 = p_22 = p_34 = p_43 = p_h`, `p_12 = p_21 = p_33 = p_44 = 1 − p_h`.
pub fn special_case_transition(case: u8, p_h: f64) -> Result<TransitionMatrix> {
    if !(0.0..=1.0).contains(&p_h) {
        return Err(Error::Probability {
            name: "p_h".into(),
            reason: format!("{p_h} is outside [0, 1]"),
        });
    }
    let q = 1.0 - p_h;
    let rows = match case {
        1 => vec![vec![p_h, q], vec![q, p_h]],
        2 => vec![
            vec![p_h, q, 0.0, 0.0],
            vec![q, p_h, 0.0, 0.0],
            vec![0.0, 0.0, p_h, q],
            vec![0.0, 0.0, q, p_h],
        ],
        3 => vec![
            vec![p_h, q, 0.0, 0.0],
            vec![q, p_h, 0.0, 0.0],
            vec![0.0, 0.0, q, p_h],
            vec![0.0, 0.0, p_h, q],
        ],
        other => return Err(Error::InvalidArgument(format!("unknown special case {other}; expected 1, 2 or 3"))),
    };
    TransitionMatrix::from_rows(&rows)
}
