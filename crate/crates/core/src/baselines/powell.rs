use crate::error::Result;
use crate::objective::Objective;
use crate::result::RunResult;
use crate::scalar::Scalar;

use super::{axpy, check_start, norm, BaselineConfig, Budget, Step};

/// Longest distance a single line search may move the point.
const MAX_LINE_STEP: f64 = 100.0;
const GOLDEN: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105_1;
const BRENT_MAX_ITERS: usize = 500;

/// Powell's conjugate-direction method.
///
/// Each cycle line-minimizes along every direction of the current set, then
/// possibly swaps the direction of largest decrease for the net displacement
/// of the cycle. Line searches bracket within `MAX_LINE_STEP` of the current
/// point and refine with Brent's method. Stops once a full cycle improves the
/// value by less than `f_tol` (relative) or the budget runs out.
pub fn powell<T, O>(objective: &O, start: &[T], config: &BaselineConfig<T>) -> Result<RunResult<T>>
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
    let n = start.len();
    let two = T::lit(2.0);
    let mut directions: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let mut x = start.to_vec();
    let mut fval = budget.eval(&x)?;
    let mut cycle_start = x.clone();

    loop {
        let fx = fval;
        let mut biggest = 0;
        let mut delta = T::zero();
        for (i, dir) in directions.iter().enumerate() {
            let before = fval;
            let (nx, nf) = line_minimize(budget, &x, fval, dir)?;
            x = nx;
            fval = nf;
            if before - fval > delta {
                delta = before - fval;
                biggest = i;
            }
        }

        let bound = config.f_tol * (fx.abs() + fval.abs()) + T::lit(1e-20);
        if two * (fx - fval) <= bound {
            return Ok(());
        }
        if budget.remaining() == 0 {
            return Ok(());
        }

        let displacement: Vec<T> = x.iter().zip(&cycle_start).map(|(&a, &b)| a - b).collect();
        let extrapolated: Vec<T> = x
            .iter()
            .zip(&cycle_start)
            .map(|(&a, &b)| two * a - b)
            .collect();
        cycle_start.clone_from(&x);
        let fx2 = budget.eval(&extrapolated)?;

        if fx > fx2 {
            let mut t = two * (fx + fx2 - two * fval);
            let temp = fx - fval - delta;
            t = t * temp * temp;
            let temp = fx - fx2;
            t = t - delta * temp * temp;
            if t < T::zero() {
                let (nx, nf) = line_minimize(budget, &x, fval, &displacement)?;
                x = nx;
                fval = nf;
                if displacement.iter().any(|d| !d.is_zero()) {
                    directions[biggest] = directions[n - 1].clone();
                    directions[n - 1] = displacement;
                }
            }
        }
    }
}

/// Minimize `t ↦ f(x + t·d)` over `|t|·‖d‖ ≤ MAX_LINE_STEP`. Returns the
/// original point unless a strictly better one was found.
fn line_minimize<T, O>(budget: &mut Budget<'_, T, O>, x: &[T], fx: T, d: &[T]) -> Step<(Vec<T>, T)>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    let dnorm = norm(d);
    if dnorm.is_zero() || !dnorm.is_finite() {
        return Ok((x.to_vec(), fx));
    }
    let t_max = T::lit(MAX_LINE_STEP) / dnorm;
    let mut phi = |t: T| budget.eval(&axpy(x, t, d));

    let (a, b, c, fb) = bracket(&mut phi, fx, t_max)?;
    let (t, ft) = brent(&mut phi, a, b, c, fb)?;
    if ft < fx {
        Ok((axpy(x, t, d), ft))
    } else {
        Ok((x.to_vec(), fx))
    }
}

/// Golden-ratio expansion from `[0, 1]` (clamped to `±t_max`) until the
/// middle point is no worse than both ends or the bound is hit.
fn bracket<T, F>(phi: &mut F, f0: T, t_max: T) -> Step<(T, T, T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Step<T>,
{
    let clamp = |t: T| t.max(-t_max).min(t_max);
    let gold = T::lit(GOLDEN);
    let (mut a, mut fa) = (T::zero(), f0);
    let mut b = clamp(T::one());
    let mut fb = phi(b)?;
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = clamp(b + gold * (b - a));
    let mut fc = phi(c)?;
    while fc < fb {
        if c.abs() >= t_max {
            // Best value sits on the boundary; collapse the bracket onto it.
            return Ok((b, c, c, fc));
        }
        a = b;
        b = c;
        fb = fc;
        c = clamp(b + gold * (b - a));
        fc = phi(c)?;
    }
    Ok((a, b, c, fb))
}

/// Brent's parabolic/golden-section minimization inside the bracket `(a, c)`
/// with interior point `b`.
fn brent<T, F>(phi: &mut F, a: T, b: T, c: T, fb: T) -> Step<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Step<T>,
{
    let tol = T::epsilon().sqrt();
    let zeps = T::epsilon() * T::lit(1e-3);
    let cgold = T::lit(CGOLD);
    let half = T::lit(0.5);
    let two = T::lit(2.0);

    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    if hi - lo <= zeps {
        return Ok((b, fb));
    }
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let mut d = T::zero();
    let mut e = T::zero();

    for _ in 0..BRENT_MAX_ITERS {
        let xm = half * (lo + hi);
        let tol1 = tol * x.abs() + zeps;
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (half * q * etemp).abs() || p <= q * (lo - x) || p >= q * (hi - x)) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = phi(u)?;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}
