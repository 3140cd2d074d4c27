//! Evaluation: recovery metrics, brute-force oracles, the empirical
//! sample-complexity protocol and spectral analysis of estimates.

pub mod complexity;
pub mod fit;
pub mod metrics;
pub mod oracle;
pub mod spectral;

pub use complexity::{empirical_sample_complexity, ComplexityProtocol, ComplexityResult, SamplerKind, TracePoint};
pub use fit::{linear_fit, LinearFit};
pub use metrics::{exact_recovery, mse, structure_metrics, ConfusionCounts, StructureMetrics};
pub use oracle::exhaustive_best_subset;
pub use spectral::{spectral_bipartition, spectral_layout};
