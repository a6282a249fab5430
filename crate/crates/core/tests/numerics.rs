use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qac_meanfield::meanfield_core::{free_energy_uniform, saddle_residual, FerroParams};
use qac_meanfield::numerics::{
    adaptive_gauss_integral, find_root_bracketed, fixed_point, gauss_integrate, golden_section, polyfit, polyval,
    FixedPointConfig, QuadratureRule, DEFAULT_ROOT_TOL,
};
use qac_meanfield::phase_scan::stability_slope;
use qac_meanfield::QacError;

fn rule() -> QuadratureRule<f64> {
    QuadratureRule::gauss_hermite(120).unwrap()
}

#[test]
fn gaussian_moments() {
    let r = rule();
    assert_abs_diff_eq!(gauss_integrate(|_| 1.0, &r).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(gauss_integrate(|z| z * z, &r).unwrap(), 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(gauss_integrate(|z: f64| z.powi(4), &r).unwrap(), 3.0, epsilon = 1e-9);
}

#[test]
fn smooth_integrand_matches_adaptive_oracle() {
    let f = |z: f64| (z * z + 1.0).sqrt();
    let a = gauss_integrate(f, &rule()).unwrap();
    let b = adaptive_gauss_integral(f, 1e-13);
    assert_abs_diff_eq!(a, b, epsilon = 1e-8);
}

#[test]
fn roots() {
    let tol = DEFAULT_ROOT_TOL;
    assert_abs_diff_eq!(
        find_root_bracketed(|x| x - 2.0, 0.0, 5.0, tol).unwrap(),
        2.0,
        epsilon = tol
    );
    assert_abs_diff_eq!(
        find_root_bracketed(|x| x * x - 2.0, 0.0, 2.0, tol).unwrap(),
        2f64.sqrt(),
        epsilon = tol
    );
}

#[test]
fn p2_stability_root_at_two() {
    let g = find_root_bracketed(
        |g| stability_slope(&FerroParams::ground(2, 0.0, g)) - 1.0,
        1.0,
        5.0,
        1e-10,
    )
    .unwrap();
    assert_abs_diff_eq!(g, 2.0, epsilon = 1e-6);
}

#[test]
fn halving_map_goes_to_zero() {
    let out = fixed_point(
        |x: &[f64]| Ok(vec![0.5 * x[0]]),
        vec![1.0],
        &FixedPointConfig::default(),
    )
    .unwrap();
    assert_abs_diff_eq!(out.x[0], 0.0, epsilon = 1e-9);
}

#[test]
fn p2_saddle_matches_dense_grid_minimizer() {
    let pr = FerroParams::ground(2, 0.0, 1.0);
    let out = fixed_point(
        |x: &[f64]| Ok(vec![qac_meanfield::meanfield_core::saddle_map(&pr, x[0])]),
        vec![0.9],
        &FixedPointConfig::default(),
    )
    .unwrap();
    let n = 100_000;
    let (m_grid, _) = (0..=n)
        .map(|i| i as f64 / n as f64)
        .map(|m| (m, free_energy_uniform(&pr, m)))
        .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (m_refined, _) = golden_section(|m| free_energy_uniform(&pr, m), m_grid - 1e-5, m_grid + 1e-5, 1e-12);
    assert_abs_diff_eq!(out.x[0], m_refined, epsilon = 1e-6);
    assert_abs_diff_eq!(out.x[0], 0.75f64.sqrt(), epsilon = 1e-8);
    assert!(saddle_residual(&pr, m_refined).abs() < 1e-6);
}

#[test]
fn polynomial_fits() {
    let f = polyfit(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], 1).unwrap();
    assert_abs_diff_eq!(f.coefficients[0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f.coefficients[1], 1.0, epsilon = 1e-12);
    assert!(f.residual_rms < 1e-12);
    let xs: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x - x * x).collect();
    let f = polyfit(&xs, &ys, 2).unwrap();
    for (c, e) in f.coefficients.iter().zip([1.0, 2.0, -1.0]) {
        assert_abs_diff_eq!(*c, e, epsilon = 1e-10);
    }
    assert!(matches!(polyfit(&[0.3], &[1.0], 1), Err(QacError::InvalidInput(_))));
}

proptest! {
    #[test]
    fn odd_integrands_vanish(a in 0.01f64..3.0, b in -2.0f64..2.0) {
        let r = rule();
        let v = gauss_integrate(|z: f64| (a * z).sin() + b * z.powi(3), &r).unwrap();
        prop_assert!(v.abs() < 1e-12);
    }

    #[test]
    fn root_independent_of_bracket(c in 0.1f64..8.0, lo in 0.0f64..0.4, hi in 2.1f64..6.0) {
        let exact = c.cbrt();
        let f = |x: f64| x * x * x - c;
        let r = find_root_bracketed(f, lo * exact, hi.max(exact * 1.1), 1e-12).unwrap();
        prop_assert!((r - exact).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_independent_of_damping(s in 0.2f64..0.9, damping in 0.05f64..1.0) {
        let cfg = FixedPointConfig { damping, max_iter: 100_000, tol: 1e-13 };
        let reference = fixed_point(|x: &[f64]| Ok(vec![s * x[0].cos()]), vec![0.0], &FixedPointConfig { damping: 1.0, max_iter: 100_000, tol: 1e-14 }).unwrap();
        let out = fixed_point(|x: &[f64]| Ok(vec![s * x[0].cos()]), vec![0.3], &cfg).unwrap();
        prop_assert!((out.x[0] - reference.x[0]).abs() < 1e-10);
    }

    #[test]
    fn polyfit_recovers_random_quadratic(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.25 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c0 + c1 * x + c2 * x * x).collect();
        let f = polyfit(&xs, &ys, 2).unwrap();
        for (got, want) in f.coefficients.iter().zip([c0, c1, c2]) {
            prop_assert!((got - want).abs() < 1e-10);
        }
        prop_assert!((polyval(&f.coefficients, 0.3) - (c0 + 0.3 * c1 + 0.09 * c2)).abs() < 1e-10);
    }
}
