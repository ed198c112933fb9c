//! Synthetic graphs, exact ground truth and replicated experiments.

pub mod fixtures;
mod runner;
pub mod synth;

pub use fixtures::HypothesisCase;
pub use runner::{
    budget_for, convergence_curve, format_summary, ground_truth, run_benchmark, run_replicate,
    split_seed, stable_proportions, write_curve, write_rows, write_summary, BenchCase, BenchConfig,
    BenchPlan, BenchReport, BenchRow, CurvePoint, DatasetConfig, Replicate, SamplerEntry,
    SamplerTemplate, SummaryRow, Truth, CSV_HEADER,
};
pub use synth::{generate_graph, SynthConfig};
