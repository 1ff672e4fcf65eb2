//! Gaussian Crunching Search.
//!
//! A single incumbent is perturbed by isotropic Gaussian noise each iteration.
//! A candidate replaces the incumbent only when it is strictly better, which
//! also resets the mutation standard deviation. Every rejection multiplies the
//! standard deviation by a growth factor, so a search stuck on a numerically
//! flat region keeps widening its reach until some candidate lands where the
//! objective is visibly lower.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::result::{RunResult, TraceEntry};
use crate::scalar::{ulps_between, Scalar};

/// Random stream driving a GCS run.
pub type GcsRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GcsConfig<T> {
    pub initial_sd: T,
    pub growth_factor: T,
    pub max_iters: u64,
    /// The standard deviation is reset once it exceeds this value.
    pub sd_overflow_limit: T,
    pub seed: u64,
    pub record_trace: bool,
}

impl<T: Scalar> Default for GcsConfig<T> {
    fn default() -> Self {
        Self {
            initial_sd: T::one(),
            growth_factor: T::lit(1.01),
            max_iters: 10_000,
            sd_overflow_limit: T::default_sd_overflow_limit(),
            seed: 42,
            record_trace: false,
        }
    }
}

impl<T: Scalar> GcsConfig<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trace(mut self, record_trace: bool) -> Self {
        self.record_trace = record_trace;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.initial_sd.is_finite() && self.initial_sd > T::zero()) {
            return bad(format!(
                "initial_sd must be positive, got {}",
                self.initial_sd
            ));
        }
        if !(self.growth_factor.is_finite() && self.growth_factor > T::one()) {
            return bad(format!(
                "growth_factor must exceed 1, got {}",
                self.growth_factor
            ));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.sd_overflow_limit.is_finite() && self.sd_overflow_limit > self.initial_sd) {
            return bad(format!(
                "sd_overflow_limit must be finite and exceed initial_sd, got {}",
                self.sd_overflow_limit
            ));
        }
        Ok(())
    }

    pub fn rng(&self) -> GcsRng {
        GcsRng::seed_from_u64(self.seed)
    }
}

/// `point + δ` with every `δᵢ ~ Normal(0, sd²)` drawn independently.
/// Consumes exactly `point.len()` normal draws.
pub fn mutate<T: Scalar, R: Rng + ?Sized>(point: &[T], sd: T, rng: &mut R) -> Result<Vec<T>> {
    if !sd.is_finite() || sd <= T::zero() {
        return Err(Error::InvalidConfig(format!(
            "mutation sd must be positive and finite, got {sd}"
        )));
    }
    Ok(point
        .iter()
        .map(|&x| x + sd * T::sample_standard_normal(rng))
        .collect())
}

/// Incumbent plus the current mutation scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GcsState<T> {
    pub point: Vec<T>,
    pub value: T,
    pub sd: T,
}

impl<T: Scalar> GcsState<T> {
    /// Evaluates `start` once.
    pub fn new<O: Objective<T>>(objective: &O, start: &[T], config: &GcsConfig<T>) -> Result<Self> {
        let value = objective.evaluate(start)?;
        Ok(Self {
            point: start.to_vec(),
            value,
            sd: config.initial_sd,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub candidate: Vec<T>,
    pub candidate_value: T,
    pub sd_before: T,
    pub accepted: bool,
    /// The grown sd crossed the overflow limit and was reset.
    pub overflow_reset: bool,
}

/// One iteration: exactly one objective evaluation.
pub fn gcs_step<T, O, R>(
    state: &mut GcsState<T>,
    config: &GcsConfig<T>,
    objective: &O,
    rng: &mut R,
) -> Result<StepOutcome<T>>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
    R: Rng + ?Sized,
{
    let sd_before = state.sd;
    let candidate = mutate(&state.point, sd_before, rng)?;
    let candidate_value = objective.evaluate(&candidate)?;
    let accepted = candidate_value < state.value;
    let mut overflow_reset = false;
    if accepted {
        state.point.clone_from(&candidate);
        state.value = candidate_value;
        state.sd = config.initial_sd;
    } else {
        state.sd = state.sd * config.growth_factor;
        if !state.sd.is_finite() || state.sd > config.sd_overflow_limit {
            state.sd = config.initial_sd;
            overflow_reset = true;
        }
    }
    Ok(StepOutcome {
        candidate,
        candidate_value,
        sd_before,
        accepted,
        overflow_reset,
    })
}

/// Run GCS from `start` for `config.max_iters` iterations.
pub fn gcs_run<T, O>(objective: &O, start: &[T], config: &GcsConfig<T>) -> Result<RunResult<T>>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    config.validate()?;
    if start.len() != objective.dimension() {
        return Err(Error::DimensionMismatch {
            expected: objective.dimension(),
            got: start.len(),
        });
    }
    if start.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "start point",
        });
    }

    let mut rng = config.rng();
    let mut state = GcsState::new(&objective, start, config)?;
    let mut trace = config
        .record_trace
        .then(|| Vec::with_capacity(config.max_iters.min(1 << 20) as usize));
    let mut accepted_count = 0;

    for iter in 0..config.max_iters {
        let outcome = gcs_step(&mut state, config, objective, &mut rng)?;
        accepted_count += u64::from(outcome.accepted);
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceEntry {
                iter,
                candidate: outcome.candidate,
                candidate_value: outcome.candidate_value,
                sd_before: outcome.sd_before,
                accepted: outcome.accepted,
            });
        }
    }

    Ok(RunResult {
        best_point: state.point,
        best_value: state.value,
        evaluations: config.max_iters + 1,
        accepted_count,
        trace,
        seed: Some(config.seed),
    })
}

/// Check a recorded trace against the mutation schedule: the sd is back at
/// `initial_sd` after every acceptance and after an overflow reset, and after
/// `k` consecutive rejections it equals `initial_sd · growth_factor^k`.
///
/// Each `sd_before` must be within 4 ulps of the multiplicative recurrence and
/// within the rounding drift that `k` chained multiplications can accumulate
/// of the closed form. Iteration numbers must strictly increase.
pub fn sd_schedule_check<T: Scalar>(trace: &[TraceEntry<T>], config: &GcsConfig<T>) -> bool {
    const RECURRENCE_ULPS: u64 = 4;

    let mut expected = config.initial_sd;
    let mut streak: i32 = 0;
    let mut last_iter = None;

    for entry in trace {
        if last_iter.is_some_and(|prev| entry.iter <= prev) {
            return false;
        }
        last_iter = Some(entry.iter);

        if entry.sd_before.is_nan() || entry.sd_before <= T::zero() {
            return false;
        }
        if ulps_between(entry.sd_before, expected) > RECURRENCE_ULPS {
            return false;
        }
        let closed = config.initial_sd * config.growth_factor.powi(streak);
        let drift = T::lit(f64::from(streak) + 4.0) * T::epsilon() * closed;
        if (entry.sd_before - closed).abs() > drift {
            return false;
        }

        if entry.accepted {
            expected = config.initial_sd;
            streak = 0;
        } else {
            expected = expected * config.growth_factor;
            streak += 1;
            if !expected.is_finite() || expected > config.sd_overflow_limit {
                expected = config.initial_sd;
                streak = 0;
            }
        }
    }
    true
}
