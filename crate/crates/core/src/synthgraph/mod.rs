//! Synthetic labeled graphs and neighborhoods, and ingestion of real ones.

mod dcsbm;
mod graph;
mod io;
mod sampler;

pub use dcsbm::{generate_dcsbm, DegreeSpec, GenerationReport, MAX_CLAMPED_FRACTION};
pub use graph::{khop_neighbors, LabeledGraph};
pub use io::{load_graph, LoadReport};
pub use sampler::{sample_neighborhood_batch, FeatureSampler, HopSample, NeighborhoodSample, NeighborhoodSampler};
