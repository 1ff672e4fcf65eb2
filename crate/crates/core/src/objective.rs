//! Benchmark objectives and the floating-point plateau analysis.
//!
//! The exponential well `f(x) = λ - λ·exp(-μ‖x‖)` has its global minimum 0 at the
//! origin and approaches `λ` so quickly that, beyond a finite radius, every
//! evaluation rounds to exactly `λ`. Any optimizer that only ever probes points
//! beyond that radius sees a perfectly flat function.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anything that can be minimized by the optimizers in this crate.
pub trait Objective<T> {
    fn dimension(&self) -> usize;

    fn evaluate(&self, point: &[T]) -> Result<T>;
}

impl<T, O: Objective<T> + ?Sized> Objective<T> for &O {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn evaluate(&self, point: &[T]) -> Result<T> {
        (**self).evaluate(point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    ExpWell,
    Sphere,
    Rosenbrock,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [Self::ExpWell, Self::Sphere, Self::Rosenbrock];

    pub fn name(self) -> &'static str {
        match self {
            Self::ExpWell => "exp_well",
            Self::Sphere => "sphere",
            Self::Rosenbrock => "rosenbrock",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown objective `{s}`; valid objectives: exp_well, sphere, rosenbrock"
                ))
            })
    }
}

fn default_lambda<T: Scalar>() -> T {
    T::lit(15.0)
}

fn default_mu<T: Scalar>() -> T {
    T::lit(0.05)
}

/// A member of the fixed benchmark family.
///
/// Serialized as `{"kind": "exp_well", "lambda": 15.0, "mu": 0.05, "dimension": 2}`;
/// `lambda` and `mu` are ignored by the auxiliary objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ObjectiveSpec<T> {
    pub kind: ObjectiveKind,
    #[serde(default = "default_lambda")]
    pub lambda: T,
    #[serde(default = "default_mu")]
    pub mu: T,
    pub dimension: usize,
}

impl<T: Scalar> ObjectiveSpec<T> {
    pub fn exp_well(lambda: T, mu: T, dimension: usize) -> Result<Self> {
        Self {
            kind: ObjectiveKind::ExpWell,
            lambda,
            mu,
            dimension,
        }
        .validated()
    }

    /// `λ = 15`, `μ = 0.05` in two dimensions.
    pub fn reference_well() -> Self {
        Self::exp_well(T::lit(15.0), T::lit(0.05), 2).expect("reference parameters are valid")
    }

    pub fn sphere(dimension: usize) -> Result<Self> {
        Self {
            kind: ObjectiveKind::Sphere,
            lambda: default_lambda(),
            mu: default_mu(),
            dimension,
        }
        .validated()
    }

    pub fn rosenbrock(dimension: usize) -> Result<Self> {
        Self {
            kind: ObjectiveKind::Rosenbrock,
            lambda: default_lambda(),
            mu: default_mu(),
            dimension,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        match self.kind {
            ObjectiveKind::ExpWell => {
                let ok = |v: T| v.is_finite() && v > T::zero();
                if !ok(self.lambda) {
                    return Err(Error::InvalidConfig(format!(
                        "lambda must be positive and finite, got {}",
                        self.lambda
                    )));
                }
                if !ok(self.mu) {
                    return Err(Error::InvalidConfig(format!(
                        "mu must be positive and finite, got {}",
                        self.mu
                    )));
                }
            }
            ObjectiveKind::Rosenbrock if self.dimension < 2 => {
                return Err(Error::InvalidConfig(
                    "rosenbrock needs at least 2 dimensions".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Convert the parameters to another scalar type (rounding to nearest).
    pub fn cast<U: Scalar>(&self) -> ObjectiveSpec<U> {
        ObjectiveSpec {
            kind: self.kind,
            lambda: U::lit(self.lambda.to_f64_lossy()),
            mu: U::lit(self.mu.to_f64_lossy()),
            dimension: self.dimension,
        }
    }

    /// Radius beyond which this exp_well evaluates to exactly `λ` in `T`.
    pub fn plateau_radius(&self) -> Result<T> {
        plateau_radius(self, PrecisionModel::of::<T>())
    }

    /// Whether `point` evaluates to `λ` bit-exactly in `T`.
    pub fn is_on_plateau(&self, point: &[T]) -> Result<bool> {
        self.require_exp_well()?;
        Ok(self.evaluate(point)? == self.lambda)
    }

    fn require_exp_well(&self) -> Result<()> {
        match self.kind {
            ObjectiveKind::ExpWell => Ok(()),
            other => Err(Error::UnsupportedObjective(other.name())),
        }
    }
}

impl<T: Scalar> Objective<T> for ObjectiveSpec<T> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, point: &[T]) -> Result<T> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: point.len(),
            });
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "objective input",
            });
        }
        Ok(match self.kind {
            ObjectiveKind::ExpWell => exp_well_value(self.lambda, self.mu, point),
            ObjectiveKind::Sphere => point.iter().fold(T::zero(), |acc, &x| acc + x * x),
            ObjectiveKind::Rosenbrock => rosenbrock_value(point),
        })
    }
}

/// `-λ·exp(-μ·‖x‖) + λ`, with the operations performed in exactly this order.
fn exp_well_value<T: Scalar>(lambda: T, mu: T, point: &[T]) -> T {
    let norm = point.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
    let decay = (-(mu * norm)).exp();
    -(lambda * decay) + lambda
}

fn rosenbrock_value<T: Scalar>(point: &[T]) -> T {
    let one = T::one();
    let hundred = T::lit(100.0);
    point.windows(2).fold(T::zero(), |acc, w| {
        let a = w[1] - w[0] * w[0];
        let b = one - w[0];
        acc + hundred * a * a + b * b
    })
}

/// Wraps a plain closure as an [`Objective`].
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
}

impl<F> FnObjective<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<T, F: Fn(&[T]) -> T> Objective<T> for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, point: &[T]) -> Result<T> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: point.len(),
            });
        }
        Ok((self.f)(point))
    }
}

/// Counts every call to `evaluate`, successful or not.
pub struct CountingObjective<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O> CountingObjective<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<T, O: Objective<T>> Objective<T> for CountingObjective<O> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&self, point: &[T]) -> Result<T> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(point)
    }
}

/// Binary floating-point format with round-to-nearest-even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionModel {
    pub significand_bits: u32,
}

impl Default for PrecisionModel {
    fn default() -> Self {
        Self::DOUBLE
    }
}

impl PrecisionModel {
    pub const DOUBLE: Self = Self {
        significand_bits: 53,
    };
    pub const SINGLE: Self = Self {
        significand_bits: 24,
    };

    pub fn new(significand_bits: u32) -> Result<Self> {
        if significand_bits == 0 || significand_bits > 53 {
            return Err(Error::InvalidConfig(format!(
                "significand_bits must be in 1..=53, got {significand_bits}"
            )));
        }
        Ok(Self { significand_bits })
    }

    pub fn of<T: Scalar>() -> Self {
        Self {
            significand_bits: T::SIGNIFICAND_BITS,
        }
    }

    /// `2^(exponent(v) - p + 1)` for a positive normal `v`.
    pub fn ulp(&self, v: f64) -> f64 {
        let exponent = binary_exponent(v);
        pow2(exponent - self.significand_bits as i32 + 1)
    }

    /// Gap between `v` and its predecessor once `v` is rounded to this format.
    pub fn gap_below(&self, v: f64) -> f64 {
        let rounded = self.round(v);
        let ulp = self.ulp(rounded);
        if rounded == pow2(binary_exponent(rounded)) {
            ulp / 2.0
        } else {
            ulp
        }
    }

    /// Round a positive normal `v` to the nearest value with this many significand bits.
    pub fn round(&self, v: f64) -> f64 {
        if self.significand_bits >= f64::MANTISSA_DIGITS {
            return v;
        }
        let drop = f64::MANTISSA_DIGITS - self.significand_bits;
        let bits = v.to_bits();
        let half = 1u64 << (drop - 1);
        let mask = (1u64 << drop) - 1;
        let low = bits & mask;
        let base = bits & !mask;
        let keep_odd = (bits >> drop) & 1 == 1;
        let rounded = if low > half || (low == half && keep_odd) {
            base + (1u64 << drop)
        } else {
            base
        };
        f64::from_bits(rounded)
    }
}

fn binary_exponent(v: f64) -> i32 {
    debug_assert!(v.is_normal() && v > 0.0);
    ((v.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Smallest radius `r*` with `λ·exp(-μ·r*)` equal to half the gap below `λ`.
///
/// Round-to-nearest absorbs any subtraction smaller than that half gap, so every
/// point farther than `r*` from the origin evaluates to exactly `λ`.
pub fn plateau_radius<T: Scalar>(spec: &ObjectiveSpec<T>, prec: PrecisionModel) -> Result<T> {
    spec.require_exp_well()?;
    spec.validate()?;
    let lambda = spec.lambda.to_f64_lossy();
    let mu = spec.mu.to_f64_lossy();
    let half_gap = prec.gap_below(lambda) / 2.0;
    Ok(T::lit((lambda / half_gap).ln() / mu))
}

/// Evaluate the exp_well in the float format described by `prec` and report
/// whether the result is bit-equal to `λ`. Only 24- and 53-bit formats can be
/// evaluated natively.
pub fn is_on_plateau(
    spec: &ObjectiveSpec<f64>,
    point: &[f64],
    prec: PrecisionModel,
) -> Result<bool> {
    spec.require_exp_well()?;
    match prec.significand_bits {
        53 => spec.is_on_plateau(point),
        24 => {
            let narrow: Vec<f32> = point.iter().map(|&x| x as f32).collect();
            if point.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    what: "objective input",
                });
            }
            spec.cast::<f32>().is_on_plateau(&narrow)
        }
        bits => Err(Error::UnsupportedPrecision(bits)),
    }
}
