use crate::error::Result;
use crate::objective::Objective;
use crate::result::RunResult;
use crate::scalar::Scalar;

use super::{check_start, BaselineConfig, Budget, Step};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Perturbation for coordinates that start at exactly zero.
const ZERO_COORD_STEP: f64 = 0.00025;

/// Nelder–Mead simplex search.
///
/// The initial simplex perturbs each coordinate of `start` by
/// `initial_simplex_scale` (relative). Stops when both the vertex spread and
/// the value spread fall below `x_tol` / `f_tol`, or the budget runs out.
pub fn nelder_mead<T, O>(
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

struct Vertex<T> {
    x: Vec<T>,
    f: T,
}

fn search<T, O>(budget: &mut Budget<'_, T, O>, start: &[T], config: &BaselineConfig<T>) -> Step<()>
where
    T: Scalar,
    O: Objective<T> + ?Sized,
{
    let n = start.len();
    let (rho, chi, psi, sigma) = (
        T::lit(REFLECT),
        T::lit(EXPAND),
        T::lit(CONTRACT),
        T::lit(SHRINK),
    );

    let mut simplex = Vec::with_capacity(n + 1);
    simplex.push(Vertex {
        x: start.to_vec(),
        f: budget.eval(start)?,
    });
    for k in 0..n {
        let mut y = start.to_vec();
        y[k] = if y[k].is_zero() {
            T::lit(ZERO_COORD_STEP)
        } else {
            y[k] * (T::one() + config.initial_simplex_scale)
        };
        let f = budget.eval(&y)?;
        simplex.push(Vertex { x: y, f });
    }
    sort(&mut simplex);

    loop {
        let best = &simplex[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(&best.x).map(|(&a, &b)| (a - b).abs()))
            .fold(T::zero(), T::max);
        let f_spread = simplex[1..]
            .iter()
            .map(|v| (v.f - best.f).abs())
            .fold(T::zero(), T::max);
        if x_spread < config.x_tol && f_spread < config.f_tol {
            return Ok(());
        }

        let nt = T::from_usize(n).expect("dimension fits scalar");
        let centroid: Vec<T> = (0..n)
            .map(|i| simplex[..n].iter().fold(T::zero(), |acc, v| acc + v.x[i]) / nt)
            .collect();
        let worst = &simplex[n];
        let along = |coef: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&worst.x)
                .map(|(&c, &w)| (T::one() + coef) * c - coef * w)
                .collect()
        };

        let xr = along(rho);
        let fr = budget.eval(&xr)?;
        let mut shrink = false;
        let replacement;

        if fr < simplex[0].f {
            let xe = along(rho * chi);
            let fe = budget.eval(&xe)?;
            replacement = if fe < fr {
                Vertex { x: xe, f: fe }
            } else {
                Vertex { x: xr, f: fr }
            };
        } else if fr < simplex[n - 1].f {
            replacement = Vertex { x: xr, f: fr };
        } else if fr < simplex[n].f {
            let xc = along(psi * rho);
            let fc = budget.eval(&xc)?;
            if fc <= fr {
                replacement = Vertex { x: xc, f: fc };
            } else {
                shrink = true;
                replacement = Vertex { x: xr, f: fr };
            }
        } else {
            let xcc = along(-psi);
            let fcc = budget.eval(&xcc)?;
            if fcc < simplex[n].f {
                replacement = Vertex { x: xcc, f: fcc };
            } else {
                shrink = true;
                replacement = Vertex { x: xr, f: fr };
            }
        }

        if shrink {
            let anchor = simplex[0].x.clone();
            for v in simplex.iter_mut().skip(1) {
                v.x = anchor
                    .iter()
                    .zip(&v.x)
                    .map(|(&a, &x)| a + sigma * (x - a))
                    .collect();
                v.f = budget.eval(&v.x)?;
            }
        } else {
            simplex[n] = replacement;
        }
        sort(&mut simplex);
    }
}

fn sort<T: Scalar>(simplex: &mut [Vertex<T>]) {
    simplex.sort_by(|a, b| a.f.partial_cmp(&b.f).unwrap_or(std::cmp::Ordering::Equal));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{CountingObjective, ObjectiveSpec};

    #[test]
    fn sphere_converges() {
        let spec = ObjectiveSpec::<f64>::sphere(2).unwrap();
        let run = nelder_mead(&spec, &[3.0, 4.0], &BaselineConfig::default()).unwrap();
        let norm = run.best_point.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "{norm}");
        assert_eq!(run.best_value, spec.evaluate(&run.best_point).unwrap());
    }

    #[test]
    fn rosenbrock_converges() {
        let spec = ObjectiveSpec::<f64>::rosenbrock(2).unwrap();
        let run = nelder_mead(&spec, &[-1.2, 1.0], &BaselineConfig::default()).unwrap();
        assert!(run.best_value < 1e-8, "{}", run.best_value);
    }

    #[test]
    fn zero_coordinates_get_absolute_step() {
        let spec = ObjectiveSpec::<f64>::sphere(2).unwrap();
        let run = nelder_mead(&spec, &[0.0, 0.0], &BaselineConfig::default()).unwrap();
        assert_eq!(run.best_value, 0.0);
    }

    #[test]
    fn plateau_start_stalls_at_lambda() {
        let spec = ObjectiveSpec::<f64>::reference_well();
        let run = nelder_mead(&spec, &[600.0, 600.0], &BaselineConfig::default()).unwrap();
        assert_eq!(run.best_value.to_bits(), 15.0f64.to_bits());
        assert_eq!(run.best_point, vec![600.0, 600.0]);
    }

    #[test]
    fn respects_budget() {
        let counted = CountingObjective::new(ObjectiveSpec::<f64>::rosenbrock(2).unwrap());
        let config = BaselineConfig {
            max_evals: 25,
            ..BaselineConfig::default()
        };
        let run = nelder_mead(&counted, &[-1.2, 1.0], &config).unwrap();
        assert_eq!(run.evaluations, 25);
        assert_eq!(counted.calls(), 25);
    }

    #[test]
    fn budget_below_simplex_cost_is_config_error() {
        let spec = ObjectiveSpec::<f64>::sphere(2).unwrap();
        let config = BaselineConfig {
            max_evals: 2,
            ..BaselineConfig::default()
        };
        assert!(nelder_mead(&spec, &[1.0, 1.0], &config).is_err());
    }
}
