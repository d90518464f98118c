use std::f64::consts::TAU;

use hodge_ladder::chart::{Chart, Coordinate};
use hodge_ladder::forms;
use hodge_ladder::identities::appendix_suite;
use hodge_ladder::numeric::QuadratureGrid;
use hodge_ladder::sampling::{random_chart, random_form, random_point, random_scalar, trial_rng};
use hodge_ladder::weighted::POINT_ORDER;
use proptest::prelude::*;

fn fd_gradient(f: impl Fn(&[f64]) -> f64, p: &[f64], step: f64) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[i] += step;
            b[i] -= step;
            (f(&a) - f(&b)) / (2.0 * step)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jet_derivatives_match_finite_differences(seed in 0u64..1_000_000, n in 1usize..=4) {
        let mut rng = trial_rng(seed, 0);
        let u = random_scalar(&mut rng, n);
        let p = random_point(&mut rng, n);
        let jet = u.jet(&p, 2).unwrap();
        let value = |x: &[f64]| u.value(x).unwrap();
        prop_assert!((jet.value() - value(&p)).abs() < 1e-12 * value(&p).abs().max(1.0));
        let fd = fd_gradient(value, &p, 1e-5);
        for (g, d) in jet.gradient().iter().zip(&fd) {
            prop_assert!((g - d).abs() < 1e-6 * g.abs().max(1.0), "gradient {g} vs {d}");
        }
        // Hessian rows against differences of the jet gradient
        let hess = jet.hessian();
        for i in 0..n {
            let gi = |x: &[f64]| u.jet(x, 1).unwrap().gradient()[i];
            let fd = fd_gradient(gi, &p, 1e-5);
            for j in 0..n {
                prop_assert!((hess[i][j] - fd[j]).abs() < 1e-6 * hess[i][j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn d_squared_vanishes_on_random_charts(seed in 0u64..1_000_000, n in 1usize..=4) {
        let mut rng = trial_rng(seed, 1);
        let chart = random_chart(&mut rng, n);
        let p = random_point(&mut rng, n);
        let degrees: Vec<usize> = (0..=n).collect();
        let w = random_form(&mut rng, n, &degrees).jet(&p, POINT_ORDER).unwrap();
        let dd = forms::exterior_d(&forms::exterior_d(&w).unwrap()).unwrap();
        prop_assert!(dd.max_abs_value() < 1e-10);
        let geo = chart.local(&p, POINT_ORDER).unwrap();
        let deldel = forms::codifferential(&geo, &forms::codifferential(&geo, &w).unwrap()).unwrap();
        prop_assert!(deldel.max_abs_value() < 1e-8, "{}", deldel.max_abs_value());
    }

    #[test]
    fn identity_suite_passes_for_any_seed(seed in 0u64..1_000_000) {
        for o in appendix_suite(seed, 4, 1e-8).unwrap() {
            prop_assert!(o.pass, "{o:?}");
        }
    }

    #[test]
    fn laplacian_integrates_to_zero_on_a_torus(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let coords = vec![Coordinate::periodic("x1", 0.0, TAU), Coordinate::periodic("x2", 0.0, TAU)];
        let chart = Chart::from_strings(
            coords,
            &[vec!["exp(0.3*cos(x1))", "0.1*cos(x2)"], vec!["0.1*cos(x2)", "1 + 0.2*sin(x1 + x2)"]],
        )
        .unwrap();
        let h = chart.scalar(&format!("{a}*sin(x1) + {b}*cos(x2) + {c}*sin(x1)*cos(2*x2)")).unwrap();
        let grid = QuadratureGrid::with_counts(&chart, None, 4, 48, 1.0).unwrap();
        let total = grid.integrate(|p| chart.laplace_beltrami(&h, p)).unwrap();
        prop_assert!(total.abs() < 1e-10, "{total}");
    }
}
