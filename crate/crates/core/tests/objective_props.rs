use crunch::{is_on_plateau, plateau_radius, Objective, ObjectiveSpec, PrecisionModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn well() -> ObjectiveSpec<f64> {
    ObjectiveSpec::reference_well()
}

/// Random 2-D point with the given norm.
fn on_circle(rng: &mut ChaCha8Rng, r: f64) -> [f64; 2] {
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    [r * theta.cos(), r * theta.sin()]
}

#[test]
fn beyond_radius_is_bit_exact_lambda() {
    let radius: f64 = plateau_radius(&well(), PrecisionModel::DOUBLE).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let r = rng.random_range(radius + 1.0..radius * 20.0);
        let p = on_circle(&mut rng, r);
        assert_eq!(
            well().evaluate(&p).unwrap().to_bits(),
            15.0f64.to_bits(),
            "{p:?}"
        );
    }
}

#[test]
fn inside_radius_is_visibly_below_lambda() {
    let radius: f64 = plateau_radius(&well(), PrecisionModel::DOUBLE).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let r = rng.random_range(0.0..radius - 1.0);
        let p = on_circle(&mut rng, r);
        assert!(well().evaluate(&p).unwrap() < 15.0, "{p:?}");
    }
}

#[test]
fn single_precision_plateau_matches_radius() {
    let spec = ObjectiveSpec::<f32>::reference_well();
    let radius = spec.plateau_radius().unwrap() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let r_out = rng.random_range(radius + 1.0..radius * 10.0);
        let outside = on_circle(&mut rng, r_out);
        assert!(is_on_plateau(&well(), &outside, PrecisionModel::SINGLE).unwrap());
        let r_in = rng.random_range(0.0..radius - 1.0);
        let inside = on_circle(&mut rng, r_in);
        assert!(!is_on_plateau(&well(), &inside, PrecisionModel::SINGLE).unwrap());
    }
}

#[test]
fn higher_dimensional_well_uses_euclidean_norm() {
    let w4 = ObjectiveSpec::exp_well(15.0, 0.05, 4).unwrap();
    let v4 = w4.evaluate(&[100.0, 100.0, 100.0, 100.0]).unwrap();
    let v2 = well().evaluate(&[0.0, 200.0]).unwrap();
    assert_eq!(v4, v2);
    assert!(w4.is_on_plateau(&[500.0; 4]).unwrap());
}

proptest! {
    #[test]
    fn value_within_bounds(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let v = well().evaluate(&[x, y]).unwrap();
        prop_assert!((0.0..=15.0).contains(&v));
    }

    #[test]
    fn radially_monotone(r1 in 0.0f64..746.0, r2 in 0.0f64..746.0, theta in 0.0f64..std::f64::consts::TAU) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let at = |r: f64| well().evaluate(&[r * theta.cos(), r * theta.sin()]).unwrap();
        prop_assert!(at(lo) <= at(hi) + crunch::scalar::ulp(15.0));
    }

    #[test]
    fn plateau_verdict_agrees_with_evaluation(x in -2000.0f64..2000.0, y in -2000.0f64..2000.0) {
        let on = is_on_plateau(&well(), &[x, y], PrecisionModel::DOUBLE).unwrap();
        prop_assert_eq!(on, well().evaluate(&[x, y]).unwrap() == 15.0);
    }

    #[test]
    fn radius_scales_inversely_with_mu(mu in 0.001f64..10.0) {
        let a: f64 = plateau_radius(&ObjectiveSpec::exp_well(15.0, mu, 2).unwrap(), PrecisionModel::DOUBLE).unwrap();
        let b: f64 = plateau_radius(&ObjectiveSpec::exp_well(15.0, 2.0 * mu, 2).unwrap(), PrecisionModel::DOUBLE).unwrap();
        prop_assert!((a - 2.0 * b).abs() <= 1e-9 * a);
    }
}
