//! Hypothesis testing on large attributed graphs by sampling.
//!
//! The crate is organised along the testing pipeline:
//!
//! * [`graph`] holds the typed, attributed multigraph and its file formats.
//! * [`hypothesis`] parses node/edge/path hypotheses and evaluates them on path instances.
//! * [`sampler`] implements the hypothesis-agnostic samplers, [`phase`] the
//!   hypothesis-aware PHASE and PHASE_opt samplers.
//! * [`estimate`] turns a sampled subgraph into a point estimate, [`stats`] into a verdict.
//! * [`bench`] generates synthetic graphs, computes exact ground truth and drives
//!   replicated experiments, in parallel when the `parallel` feature is enabled.

pub mod bench;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod hypothesis;
pub mod par;
pub mod phase;
pub mod sampler;
pub mod stats;
pub mod subgraph;
mod sum;

pub use error::{Error, Result};
pub use estimate::{estimate, Estimate, EstimateOptions, NodeWeighting, Scope};
pub use graph::{AttrKind, AttrValue, AttributedGraph, EdgeId, NodeId};
pub use hypothesis::{parse_hypothesis, BoundHypothesis, Hypothesis};
pub use sampler::{run_sampler, SamplerFamily, SamplerKind, SamplerSpec};
pub use stats::{accuracy, decide, AccuracyReport, TestResult};
pub use subgraph::{induced_subgraph, SampleMeta, SampledSubgraph, Traversal};
