//! Gaussian Crunching Search (GCS) and a small benchmark toolkit around it.
//!
//! GCS is a derivative-free (1+1)-style search: it perturbs a single incumbent
//! with Gaussian noise, keeps strict improvements, and widens the noise
//! multiplicatively after each rejection. The widening lets it escape regions
//! where the objective is numerically constant, which stalls simplex,
//! conjugate-direction and finite-difference methods.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64` for the common case.
//!
//! ```
//! use crunch::{gcs_run, GcsConfig, ObjectiveSpec};
//!
//! let well = ObjectiveSpec::<f64>::reference_well();
//! let run = gcs_run(&well, &[600.0, 600.0], &GcsConfig::default()).unwrap();
//! assert!(run.best_value < 0.5);
//! ```

pub mod baselines;
pub mod error;
pub mod gcs;
pub mod harness;
pub mod objective;
pub mod result;
pub mod scalar;

pub use baselines::{
    fd_gradient_descent, nelder_mead, powell, run_baseline, BaselineConfig, BaselineMethod,
};
pub use error::{Error, Result};
pub use gcs::{
    gcs_run, gcs_step, mutate, sd_schedule_check, GcsConfig, GcsRng, GcsState, StepOutcome,
};
pub use harness::{
    classify, derive_seed, run_comparison, run_failprob, ComparisonReport, ComparisonRow,
    FailProbReport, FailProbRow, Method, Verdict, DEFAULT_THRESHOLD,
};
pub use objective::{
    is_on_plateau, plateau_radius, CountingObjective, FnObjective, Objective, ObjectiveKind,
    ObjectiveSpec, PrecisionModel,
};
pub use result::{write_trace_csv, RunResult, TraceEntry};
pub use scalar::Scalar;

pub type ObjectiveSpecF64 = ObjectiveSpec<f64>;
pub type GcsConfigF64 = GcsConfig<f64>;
pub type BaselineConfigF64 = BaselineConfig<f64>;
pub type RunResultF64 = RunResult<f64>;
pub type TraceEntryF64 = TraceEntry<f64>;
pub type ComparisonReportF64 = ComparisonReport<f64>;
pub type FailProbReportF64 = FailProbReport<f64>;

pub type ObjectiveSpecF32 = ObjectiveSpec<f32>;
pub type GcsConfigF32 = GcsConfig<f32>;
pub type RunResultF32 = RunResult<f32>;
