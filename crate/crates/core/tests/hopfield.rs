use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qac_meanfield::hopfield_rs::{
    finite_pattern_free_energy, finite_pattern_minimum, linspace, locate_rs_crossing, rs_consistency_p2,
    rs_consistency_p_ge_3, rs_free_energy, solve_rs, sweep_gamma_axis, HopfieldParams, SweepDirection, JUMP_THRESHOLD,
};
use qac_meanfield::meanfield_core::{free_energy_uniform, saddle_map, solve_saddle, FerroParams};
use qac_meanfield::numerics::{adaptive_gauss_integral, FixedPointConfig, QuadratureRule};
use qac_meanfield::{Branch, QacError};

fn rule() -> QuadratureRule<f64> {
    QuadratureRule::gauss_hermite(120).unwrap()
}

fn cfg() -> FixedPointConfig {
    FixedPointConfig::default()
}

#[test]
fn single_pattern_equals_ferromagnet() {
    for p in [2u32, 3, 4] {
        for gamma in [0.0, 0.5, 1.0] {
            for field in [0.0, 0.7, 1.9] {
                let hp = HopfieldParams::new(p, 3, gamma, field, 0.0).unwrap();
                let fp = FerroParams::new(p, 3, gamma, field, qac_meanfield::Beta::Infinite).unwrap();
                for m in [0.0, 0.25, 0.8, 1.0] {
                    let a = finite_pattern_free_energy(&hp, 1, m).unwrap();
                    assert_abs_diff_eq!(a, free_energy_uniform(&fp, m), epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn zero_overlap_energy_independent_of_pattern_count() {
    let hp = HopfieldParams::new(2, 3, 1.0, 1.2, 0.0).unwrap();
    let f1 = finite_pattern_free_energy(&hp, 1, 0.0).unwrap();
    for l in 2..=5 {
        assert_abs_diff_eq!(finite_pattern_free_energy(&hp, l, 0.0).unwrap(), f1, epsilon = 1e-12);
    }
}

#[test]
fn one_pattern_lowest_on_grid() {
    for field in linspace(0.0, 3.0, 13) {
        let hp = HopfieldParams::new(2, 3, 1.0, field, 0.0).unwrap();
        let f: Vec<f64> = (1..=3)
            .map(|l| finite_pattern_minimum(&hp, l, 2001).unwrap().1)
            .collect();
        assert!(f[0] < f[1] && f[0] < f[2], "Gamma = {field}: {f:?}");
    }
}

#[test]
fn zero_load_map_is_ferromagnet_map() {
    let r = rule();
    for (p, gamma, field, m) in [(3u32, 0.2, 0.9, 0.6), (4, 0.0, 1.3, 0.9), (5, 0.7, 2.0, 0.3)] {
        let hp = HopfieldParams::new(p, 1, gamma, field, 0.0).unwrap();
        let (m1, q1, _) = rs_consistency_p_ge_3(&hp, (m, 0.5), &r).unwrap();
        assert_abs_diff_eq!(
            m1,
            saddle_map(&FerroParams::ground(p, gamma, field), m),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(q1, m1 * m1, epsilon = 1e-12);
    }
    let hp = HopfieldParams::new(2, 1, 0.0, 1.0, 0.0).unwrap();
    let s = solve_rs(&hp, &[0.9, 0.8], &cfg(), &r).unwrap();
    let f = solve_saddle(&FerroParams::ground(2, 0.0, 1.0), 0.9, &cfg()).unwrap();
    assert_abs_diff_eq!(s.m, f.m, epsilon = 1e-8);
}

#[test]
fn classical_limit_saturates() {
    let r = rule();
    let hp = HopfieldParams::new(4, 3, 0.3, 0.0, 0.01).unwrap();
    let (m1, q1, _) = rs_consistency_p_ge_3(&hp, (0.4, 0.2), &r).unwrap();
    assert_abs_diff_eq!(m1, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(q1, 1.0, epsilon = 1e-12);
}

#[test]
fn p4_branches() {
    let r = rule();
    let hp = HopfieldParams::new(4, 3, 0.0, 1.0, 0.01).unwrap();
    let broken = solve_rs(&hp, &[0.9, 0.8], &cfg(), &r).unwrap();
    assert!(broken.m > 0.8 && broken.branch == Branch::Broken);
    let high = solve_rs(&hp.with_field(2.0), &[0.9, 0.8], &cfg(), &r).unwrap();
    assert!(high.m < 1e-6 && high.branch == Branch::Symmetric);
    for field in [0.3, 1.0, 2.5] {
        let s = solve_rs(&hp.with_field(field), &[0.0, 0.0], &cfg(), &r).unwrap();
        assert_eq!(s.m, 0.0);
        assert_eq!(s.branch, Branch::Symmetric);
    }
}

#[test]
fn p4_crossing_lies_inside_coexistence() {
    let r = rule();
    let hp = HopfieldParams::new(4, 3, 0.0, 1.0, 0.01).unwrap();
    let c = locate_rs_crossing(&hp, (1.0, 1.5), &cfg(), &r).unwrap();
    let at = hp.with_field(c.field);
    let fb = rs_free_energy(&at, &c.broken, &r).unwrap();
    let fs = rs_free_energy(&at, &c.symmetric, &r).unwrap();
    assert_abs_diff_eq!(fb, fs, epsilon = 1e-7);
    let up = sweep_gamma_axis(&hp, &linspace(0.0, 3.0, 121), &[1.0, 1.0], JUMP_THRESHOLD, &cfg(), &r).unwrap();
    let spinodal = up.jumps[0].field_before;
    assert!(c.field < spinodal, "crossing {} spinodal {spinodal}", c.field);
}

#[test]
fn p2_symmetric_phase_and_penalty() {
    let r = rule();
    let slow = FixedPointConfig {
        max_iter: 200_000,
        ..cfg()
    };
    let hp = HopfieldParams::new(2, 3, 0.0, 3.0, 0.01).unwrap();
    let s = solve_rs(&hp, &[0.9, 0.8], &slow, &r).unwrap();
    assert!(s.q < 1e-6 && s.m < 1e-6);
    assert_abs_diff_eq!(s.c, 2.0 / 3.0, epsilon = 1e-8);
    // paramagnet: F = a (-1) - integral of sqrt(0 + Gamma^2)
    let f = rs_free_energy(&hp, &s, &r).unwrap();
    let oracle = -0.01 - adaptive_gauss_integral(|_| 3.0, 1e-13);
    assert_abs_diff_eq!(f, oracle, epsilon = 1e-8);

    let below = solve_rs(&hp.with_field(2.1), &[0.9, 0.8], &slow, &r).unwrap();
    assert!(below.q > 1e-6);
    let tilted = HopfieldParams::new(2, 3, 0.5, 10.0, 0.01).unwrap();
    assert!(solve_rs(&tilted, &[1.0, 1.0], &slow, &r).unwrap().q > 0.0);
}

#[test]
fn p2_breakdown_is_reported() {
    let r = rule();
    let hp = HopfieldParams::new(2, 3, 0.0, 1.0, 0.01).unwrap();
    assert!(matches!(
        rs_consistency_p2(&hp, (0.0, 0.0, 1.0), &r),
        Err(QacError::ReplicaBreakdown { .. })
    ));
}

#[test]
fn p4_sweeps() {
    let r = rule();
    let up = linspace(0.0, 3.0, 121);
    let hp = HopfieldParams::new(4, 3, 0.0, 0.0, 0.01).unwrap();
    let t = sweep_gamma_axis(&hp, &up, &[1.0, 1.0], JUMP_THRESHOLD, &cfg(), &r).unwrap();
    assert_eq!(t.direction, SweepDirection::Up);
    assert_eq!(t.jumps.len(), 1);
    assert!((t.jumps[0].field_after - 1.6).abs() < 0.1);
    assert!(t.jumps[0].m_after.abs() < 1e-6);

    let tilted = HopfieldParams::new(4, 3, 0.5, 0.0, 0.01).unwrap();
    let t = sweep_gamma_axis(&tilted, &up, &[1.0, 1.0], JUMP_THRESHOLD, &cfg(), &r).unwrap();
    assert!(!t.jumps.is_empty() && t.jumps.iter().all(|j| j.m_after > 0.05));

    let strong = HopfieldParams::new(4, 3, 2.0, 0.0, 0.01).unwrap();
    let down: Vec<f64> = up.iter().rev().copied().collect();
    for (grid, seed) in [(&up, 1.0), (&down, 0.0)] {
        let t = sweep_gamma_axis(&strong, grid, &[seed, seed], JUMP_THRESHOLD, &cfg(), &r).unwrap();
        assert!(t.jumps.is_empty());
    }
}

#[test]
fn heavy_load_branch_ends_at_spinodal() {
    let r = rule();
    let hp = HopfieldParams::new(4, 3, 0.0, 0.0, 0.25).unwrap();
    let t = sweep_gamma_axis(&hp, &linspace(0.0, 3.0, 121), &[1.0, 1.0], JUMP_THRESHOLD, &cfg(), &r).unwrap();
    assert_eq!(t.jumps.len(), 1);
    assert!(t.jumps[0].m_before > 0.5 && t.jumps[0].m_after < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn overlap_bounds_magnetization(p in 3u32..6, gamma in 0.0f64..1.5, field in 0.05f64..3.0, a in 0.0f64..0.1, m0 in 0.0f64..1.0) {
        let r = rule();
        let hp = HopfieldParams::new(p, 3, gamma, field, a).unwrap();
        if let Ok(s) = solve_rs(&hp, &[m0, m0 * m0 + 0.05], &cfg(), &r) {
            prop_assert!(s.q + 1e-9 >= s.m * s.m);
            prop_assert!(s.q <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn zero_load_matches_ferromagnet(p in 2u32..5, gamma in 0.0f64..1.0, field in 0.3f64..2.5) {
        let r = rule();
        let hp = HopfieldParams::new(p, 1, gamma, field, 0.0).unwrap();
        let h = solve_rs(&hp, &[0.9, 0.81], &cfg(), &r);
        let f = solve_saddle(&FerroParams::ground(p, gamma, field), 0.9, &cfg());
        if let (Ok(h), Ok(f)) = (h, f) {
            prop_assert!((h.m - f.m).abs() <= 1e-8);
            prop_assert!((h.q - f.m * f.m).abs() <= 1e-8);
        }
    }
}
