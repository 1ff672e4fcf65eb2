use crate::error::Result;
use crate::objective::Objective;
use crate::result::RunResult;
use crate::scalar::Scalar;

use super::{axpy, check_start, norm, BaselineConfig, Budget, Step};

const GRAD_TOL: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
const MAX_STEP: f64 = 1e6;

/// Steepest descent on a central-difference gradient.
///
/// Stands in for the gradient-based family (CG, BFGS, ...): they all share the
/// failure mode that matters here, a numerical gradient of exactly zero when
/// every stencil point evaluates to the same value. The line search moves a
/// distance `t` along the unit descent direction, doubling `t` while the value
/// keeps dropping and halving it until the Armijo condition holds.
pub fn fd_gradient_descent<T, O>(
    objective: &O,
    start: &[T],
    config: &BaselineConfig<T>,
) -> Result<RunResult<T>>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    check_start(objective, start, config)?;
    let mut budget = Budget::new(objective, config.max_evals);
    let outcome = search(&mut budget, start, config);
    budget.finish(outcome)
}

fn search<T, O>(budget: &mut Budget<'_, T, O>, start: &[T], config: &BaselineConfig<T>) -> Step<()>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    let two = T::lit(2.0);
    let armijo = T::lit(ARMIJO);
    let max_step = T::lit(MAX_STEP);
    let mut x = start.to_vec();
    let mut fx = budget.eval(&x)?;
    let mut step = T::one();

    loop {
        let grad = central_gradient(budget, &x, config.fd_step)?;
        let gnorm = norm(&grad);
        if !gnorm.is_finite() || gnorm < T::lit(GRAD_TOL) {
            return Ok(());
        }
        let dir: Vec<T> = grad.iter().map(|&g| -g / gnorm).collect();

        let mut t = step;
        let mut ft = budget.eval(&axpy(&x, t, &dir))?;
        if ft <= fx - armijo * t * gnorm {
            while two * t <= max_step {
                let f2 = budget.eval(&axpy(&x, two * t, &dir))?;
                if f2 < ft {
                    t = two * t;
                    ft = f2;
                } else {
                    break;
                }
            }
        } else {
            loop {
                t = t / two;
                if t < config.x_tol {
                    return Ok(());
                }
                ft = budget.eval(&axpy(&x, t, &dir))?;
                if ft <= fx - armijo * t * gnorm {
                    break;
                }
            }
        }

        let previous = fx;
        x = axpy(&x, t, &dir);
        fx = ft;
        step = t;
        if previous - fx <= config.f_tol * (previous.abs() + fx.abs()) + T::min_positive_value() {
            return Ok(());
        }
    }
}

/// `gᵢ = (f(x + hᵢeᵢ) - f(x - hᵢeᵢ)) / (2hᵢ)` with `hᵢ = fd_step · max(1, |xᵢ|)`.
/// The denominator uses the actually representable stencil width.
fn central_gradient<T, O>(budget: &mut Budget<'_, T, O>, x: &[T], fd_step: T) -> Step<Vec<T>>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = fd_step * x[i].abs().max(T::one());
        let (hi, lo) = (x[i] + h, x[i] - h);
        probe[i] = hi;
        let f_hi = budget.eval(&probe)?;
        probe[i] = lo;
        let f_lo = budget.eval(&probe)?;
        probe[i] = x[i];
        grad.push((f_hi - f_lo) / (hi - lo));
    }
    Ok(grad)
}
