//! Deterministic derivative-free baselines.
//!
//! These stand in for the usual library solvers. All of them only see the
//! objective through function values, so on a numerically flat region they
//! observe identical values everywhere and stop where they started.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::result::RunResult;
use crate::scalar::Scalar;

mod fd_gradient;
mod nelder_mead;
mod powell;

pub use fd_gradient::fd_gradient_descent;
pub use nelder_mead::nelder_mead;
pub use powell::powell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    NelderMead,
    Powell,
    FdGradientDescent,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 3] = [Self::NelderMead, Self::Powell, Self::FdGradientDescent];

    pub fn name(self) -> &'static str {
        match self {
            Self::NelderMead => "nelder_mead",
            Self::Powell => "powell",
            Self::FdGradientDescent => "fd_gradient_descent",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod {
                name: s.to_string(),
                valid: Self::ALL.map(Self::name).join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BaselineConfig<T> {
    pub method: BaselineMethod,
    pub max_evals: u64,
    pub x_tol: T,
    pub f_tol: T,
    /// Relative central-difference step: `h = fd_step · max(1, |xᵢ|)`.
    pub fd_step: T,
    /// Relative perturbation used to build the initial simplex.
    pub initial_simplex_scale: T,
}

impl<T: Scalar> Default for BaselineConfig<T> {
    fn default() -> Self {
        Self::new(BaselineMethod::NelderMead)
    }
}

impl<T: Scalar> BaselineConfig<T> {
    pub fn new(method: BaselineMethod) -> Self {
        // 1e-6 is below the useful range of single precision.
        let fd_step = if T::epsilon() > T::lit(1e-10) {
            T::epsilon().cbrt()
        } else {
            T::lit(1e-6)
        };
        Self {
            method,
            max_evals: 10_000,
            x_tol: T::lit(1e-8),
            f_tol: T::lit(1e-12),
            fd_step,
            initial_simplex_scale: T::lit(0.05),
        }
    }

    pub fn with_method(mut self, method: BaselineMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        for (name, v) in [
            ("x_tol", self.x_tol),
            ("f_tol", self.f_tol),
            ("fd_step", self.fd_step),
            ("initial_simplex_scale", self.initial_simplex_scale),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.max_evals < dimension as u64 + 2 {
            return Err(Error::InvalidConfig(format!(
                "max_evals must be at least dimension + 2 = {}, got {}",
                dimension + 2,
                self.max_evals
            )));
        }
        Ok(())
    }
}

/// Run the baseline selected by `config.method`.
pub fn run_baseline<T, O>(
    objective: &O,
    start: &[T],
    config: &BaselineConfig<T>,
) -> Result<RunResult<T>>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    match config.method {
        BaselineMethod::NelderMead => nelder_mead(objective, start, config),
        BaselineMethod::Powell => powell(objective, start, config),
        BaselineMethod::FdGradientDescent => fd_gradient_descent(objective, start, config),
    }
}

/// Why an algorithm stopped early.
enum Halt {
    Exhausted,
    Failed(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Failed(e)
    }
}

type Step<T> = std::result::Result<T, Halt>;

/// Budgeted evaluator that remembers the best point seen so far.
struct Budget<'a, T, O: ?Sized> {
    objective: &'a O,
    max_evals: u64,
    used: u64,
    improvements: u64,
    best_point: Vec<T>,
    best_value: T,
}

impl<'a, T: Scalar, O: Objective<T> + ?Sized> Budget<'a, T, O> {
    fn new(objective: &'a O, max_evals: u64) -> Self {
        Self {
            objective,
            max_evals,
            used: 0,
            improvements: 0,
            best_point: Vec::new(),
            best_value: T::infinity(),
        }
    }

    fn eval(&mut self, point: &[T]) -> Step<T> {
        if self.used >= self.max_evals {
            return Err(Halt::Exhausted);
        }
        self.used += 1;
        let value = self.objective.evaluate(point)?;
        if self.best_point.is_empty() || value < self.best_value {
            if !self.best_point.is_empty() {
                self.improvements += 1;
            }
            self.best_point = point.to_vec();
            self.best_value = value;
        }
        Ok(value)
    }

    fn remaining(&self) -> u64 {
        self.max_evals - self.used
    }

    fn finish(self, outcome: Step<()>) -> Result<RunResult<T>> {
        match outcome {
            Ok(()) | Err(Halt::Exhausted) => Ok(RunResult {
                best_point: self.best_point,
                best_value: self.best_value,
                evaluations: self.used,
                accepted_count: self.improvements,
                trace: None,
                seed: None,
            }),
            Err(Halt::Failed(e)) => Err(e),
        }
    }
}

fn check_start<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    start: &[T],
    config: &BaselineConfig<T>,
) -> Result<()> {
    if start.len() != objective.dimension() {
        return Err(Error::DimensionMismatch {
            expected: objective.dimension(),
            got: start.len(),
        });
    }
    if start.is_empty() {
        return Err(Error::Empty("start point"));
    }
    if start.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "start point",
        });
    }
    config.validate(start.len())
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

fn axpy<T: Scalar>(x: &[T], t: T, d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(&xi, &di)| xi + t * di).collect()
}
