//! Statistical analysis of neighborhood aggregation for node classification
//! under homoscedastic Gaussian class models.
//!
//! Modules, bottom-up: [`model`] (class and transition models), [`synthgraph`]
//! (graphs and neighborhood sampling), [`aggregate`] (representations),
//! [`classify`] (moments, classifiers, deflection), [`analysis`] (Monte Carlo,
//! homophily, overlap).

pub mod aggregate;
pub mod analysis;
pub mod classify;
pub mod decision;
pub mod error;
pub mod family;
pub mod linalg;
pub mod model;
pub mod numfmt;
pub mod rng;
pub mod synthgraph;

pub use aggregate::{sca_aggregate, sca_khop_aggregate, wsa_aggregate, AggregationWeights, Representation, RepresentationKind};
pub use analysis::{
    density_overlap_1d, homophily_stats, run_monte_carlo, special_case_transition, Aggregator, ExperimentConfig,
    HomophilyReport, MonteCarloResult,
};
pub use classify::{
    bayes_graph_agnostic, build_sca_classifier, build_sca_khop_classifier, build_wsa_classifier,
    optimal_alpha_closed_form, optimize_alpha_grid, sca_deflection, sca_moments, wsa_conditional_moments,
    wsa_deflection, wsa_moments, AlphaGrid, MomentSummary,
};
pub use decision::{error_upper_bound, pairwise_deflection, q_function, DeflectionTable};
pub use error::{Error, Result};
pub use family::{ClassifierAtProfile, LinearClassifierFamily};
pub use model::{
    khop_transition, simplex_means, validate_model, DegreePriors, GaussianClassModel, ModelDiagnostics,
    TransitionMatrix,
};
pub use rng::StreamSeed;
pub use synthgraph::{generate_dcsbm, load_graph, DegreeSpec, LabeledGraph, NeighborhoodSampler};
