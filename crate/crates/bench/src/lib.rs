//! Benchmark harness for `rbfpde`: a registry of manufactured-solution
//! problems, error norms, a case runner with convergence sweeps, csv and
//! markdown reports, and the invariant checks behind `rbfpde verify`.

pub mod config;
pub mod expr;
pub mod metrics;
pub mod registry;
pub mod report;
pub mod runner;
pub mod verify;

pub use registry::{Cell, ProblemSpec, Registry};
pub use runner::{convergence_sweep, run_case, BenchmarkResult, Method, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("registry: {0}")]
    Registry(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown method `{0}` (expected bkm, bpm or mkm)")]
    UnknownMethod(String),

    #[error("reference solution is identically zero")]
    ZeroReference,

    #[error("length mismatch: {numeric} numeric values against {exact} exact values")]
    LengthMismatch { numeric: usize, exact: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("count schedule must be strictly increasing")]
    Schedule,

    #[error(transparent)]
    Core(#[from] rbfpde::Error),
}
