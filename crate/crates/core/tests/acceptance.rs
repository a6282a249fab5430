//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Exits 0 regardless so the suite reports rather than gates; set `QAC_ACCEPTANCE_STRICT=1`
//! to turn any FAIL into a nonzero exit.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use qac_meanfield::dicke_gap::{build_dicke, fit_gap_coefficient, GapScanConfig, Sector};
use qac_meanfield::hopfield_rs::{
    finite_pattern_minimum, linspace, solve_rs, sweep_gamma_axis, HopfieldParams, SweepTrace, JUMP_THRESHOLD,
};
use qac_meanfield::meanfield_core::{
    free_energy_uniform, saddle_residual, scan_landscape, solve_saddle, uniform_slope, Beta, FerroParams,
};
use qac_meanfield::numerics::{adaptive_gauss_integral, gauss_integrate, polyfit, FixedPointConfig, QuadratureRule};
use qac_meanfield::phase_scan::{
    critical_gamma, first_order_gamma_c_ground, gamma_c_fit, phase_diagram, transitions_at, PhaseScanConfig,
    TransitionOrder,
};

const K: usize = 3;
const LOAD: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, msg: String, notes: &mut Vec<String>) -> bool {
    if !cond {
        notes.push(format!("violated: {msg}"));
    }
    cond
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn c1() -> Outcome {
    let d = phase_diagram(2, K, 0.0, &[0.0], &PhaseScanConfig::default()).expect("phase diagram");
    let rec = d.points.first().expect("one record");
    let pass = rec.order == TransitionOrder::Second && within(rec.gamma_c, 2.0, 1e-3);
    Outcome {
        pass,
        detail: format!("Gamma_c = {:.9} ({})", rec.gamma_c, rec.order),
    }
}

fn c2() -> Outcome {
    let a = first_order_gamma_c_ground::<f64>(4, 0.0).expect("gamma = 0");
    let b = first_order_gamma_c_ground::<f64>(4, 0.5).expect("gamma = 0.5");
    let mut notes = Vec::new();
    let mut pass = check(
        within(a.gamma_c, 1.185, 5e-3),
        format!("Gamma_c(0) = {}", a.gamma_c),
        &mut notes,
    );
    pass &= check(
        within(a.m_left, 0.0, 5e-3) && within(a.m_right, 0.943, 5e-3),
        "minima at gamma = 0".into(),
        &mut notes,
    );
    pass &= check(
        within(b.gamma_c, 1.847, 5e-3),
        format!("Gamma_c(0.5) = {}", b.gamma_c),
        &mut notes,
    );
    pass &= check(
        within(b.m_left, 0.328, 5e-3) && within(b.m_right, 0.844, 5e-3),
        "minima at gamma = 0.5".into(),
        &mut notes,
    );
    Outcome {
        pass,
        detail: format!(
            "gamma=0: Gamma_c={:.6} m=({:.5},{:.5}); gamma=0.5: Gamma_c={:.6} m=({:.5},{:.5}) {}",
            a.gamma_c,
            a.m_left,
            a.m_right,
            b.gamma_c,
            b.m_left,
            b.m_right,
            notes.join("; ")
        ),
    }
}

fn c3() -> Outcome {
    let grid: Vec<f64> = (0..8).map(|i| i as f64 * 0.1).collect();
    let (recs, quad) = gamma_c_fit(4, &grid, 2).expect("quadratic fit");
    let ys: Vec<f64> = recs.iter().map(|r| r.gamma_c).collect();
    let lin = polyfit(&grid, &ys, 1).expect("linear fit");
    let q = &quad.coefficients;
    let l = &lin.coefficients;
    let mut notes = Vec::new();
    let mut pass = check(within(q[0], 1.186, 0.02), format!("c0 = {:.4}", q[0]), &mut notes);
    pass &= check(within(q[1], 1.379, 0.05), format!("c1 = {:.4}", q[1]), &mut notes);
    pass &= check(within(q[2], -0.115, 0.05), format!("c2 = {:.4}", q[2]), &mut notes);
    pass &= check(
        within(l[1], 1.4, 0.1),
        format!("linear slope = {:.4}", l[1]),
        &mut notes,
    );
    pass &= check(
        within(l[0], 1.2, 0.1),
        format!("linear intercept = {:.4}", l[0]),
        &mut notes,
    );
    let monotone = ys.windows(2).all(|w| w[1] > w[0]);
    pass &= check(monotone, "Gamma_c(gamma) strictly increasing".into(), &mut notes);
    Outcome {
        pass,
        detail: format!(
            "quadratic ({:.4}, {:.4}, {:.4}); linear slope {:.4} intercept {:.4} {}",
            q[0],
            q[1],
            q[2],
            l[1],
            l[0],
            notes.join("; ")
        ),
    }
}

fn c4() -> Outcome {
    let ps: Vec<u32> = (3..=8).collect();
    let gcs: Vec<f64> = ps
        .iter()
        .map(|&p| critical_gamma::<f64>(p).expect("critical gamma"))
        .collect();
    let xs: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let fit = polyfit(&xs, &gcs, 1).expect("fit");
    let g4 = gcs[1];
    let mut notes = Vec::new();
    let mut pass = check(within(g4, 0.8, 0.05), format!("gamma_c(4) = {g4:.4}"), &mut notes);
    pass &= check(within(fit.coefficients[1], 0.46, 0.03), "slope".into(), &mut notes);
    pass &= check(within(fit.coefficients[0], -0.99, 0.1), "intercept".into(), &mut notes);
    // just below / above gamma_c: locator succeeds / does not
    pass &= check(
        first_order_gamma_c_ground::<f64>(4, g4 - 0.01).is_ok(),
        "transition just below gamma_c".into(),
        &mut notes,
    );
    pass &= check(
        first_order_gamma_c_ground::<f64>(4, g4 + 0.01).is_err(),
        "no transition just above gamma_c".into(),
        &mut notes,
    );
    Outcome {
        pass,
        detail: format!(
            "gamma_c(p=3..8) = {:?}; fit slope {:.4} intercept {:.4} {}",
            gcs.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>(),
            fit.coefficients[1],
            fit.coefficients[0],
            notes.join("; ")
        ),
    }
}

fn c5() -> Outcome {
    let params = FerroParams::new(4, K, 0.5, 1.0, Beta::Finite(1.0 / 0.025)).unwrap();
    let cfg = PhaseScanConfig {
        field_lo: 1.6,
        field_hi: 2.2,
        n_field: 241,
        ..Default::default()
    };
    let recs = transitions_at(&params, &cfg).expect("transitions");
    let fields: Vec<f64> = recs.iter().map(|r| r.gamma_c).collect();
    let near = |t: f64| fields.iter().any(|&g| within(g, t, 2e-3));
    let pass = recs.len() == 2 && near(1.8698) && near(1.849);
    Outcome {
        pass,
        detail: format!(
            "K={K}, T=0.025: {} records {:?}; expected 1.8698 and 1.849 (+-2e-3)",
            recs.len(),
            recs.iter()
                .map(|r| format!("Gamma_c={:.5} m=({:.4},{:.4})", r.gamma_c, r.m_left, r.m_right))
                .collect::<Vec<_>>()
        ),
    }
}

fn c6() -> Outcome {
    let ns: Vec<usize> = (100..=200).step_by(10).collect();
    let cfg = GapScanConfig::default();
    let gammas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
    let cs: Vec<f64> = gammas
        .iter()
        .map(|&g| fit_gap_coefficient(4, g, &ns, &cfg).expect("gap fit").c)
        .collect();
    let mut notes = Vec::new();
    let mut pass = check(within(cs[0], 0.868, 5e-3), format!("C(0) = {:.4}", cs[0]), &mut notes);
    pass &= check(within(cs[3], 0.949, 5e-3), format!("C(0.3) = {:.4}", cs[3]), &mut notes);
    pass &= check(
        cs.windows(2).all(|w| w[1] > w[0]),
        "C(gamma) increasing".into(),
        &mut notes,
    );
    Outcome {
        pass,
        detail: format!(
            "N=100..200: C(gamma=0..1) = {:?} {}",
            cs.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            notes.join("; ")
        ),
    }
}

/// Full-Hilbert-space `-N (S^z)^p - Gamma sum sigma^x - gamma sum sigma^z` projected on the
/// symmetric states; returns its two lowest eigenvalues.
fn dense_symmetric_two_lowest(n: usize, p: u32, gamma: f64, field: f64) -> (f64, f64) {
    let dim = 1usize << n;
    let nf = n as f64;
    let diag: Vec<f64> = (0..dim)
        .map(|s| {
            let up = (s as u32).count_ones() as f64;
            let sz = (2.0 * up - nf) / nf;
            -nf * sz.powi(p as i32) - gamma * (2.0 * up - nf)
        })
        .collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().zip(&diag).map(|(a, d)| a * d).collect();
        for (s, &vs) in v.iter().enumerate() {
            if vs == 0.0 {
                continue;
            }
            for b in 0..n {
                out[s ^ (1 << b)] -= field * vs;
            }
        }
        out
    };
    let basis: Vec<Vec<f64>> = (0..=n)
        .map(|k| {
            let mut v: Vec<f64> = (0..dim)
                .map(|s| {
                    if (s as u32).count_ones() as usize == k {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    let images: Vec<Vec<f64>> = basis.iter().map(|b| apply(b)).collect();
    let h = DMatrix::<f64>::from_fn(n + 1, n + 1, |i, j| {
        basis[i].iter().zip(&images[j]).map(|(a, b)| a * b).sum::<f64>()
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (ev[0], ev[1])
}

fn c7() -> Outcome {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for n in 1..=12 {
        for p in [2u32, 3, 4] {
            for gamma in [0.0, 0.5] {
                for field in [0.3, 1.0, 1.7] {
                    let h = build_dicke(n, p, gamma, field).unwrap();
                    let (a, b) = h.two_lowest(Sector::Full).unwrap();
                    let (da, db) = dense_symmetric_two_lowest(n, p, gamma, field);
                    worst = worst.max((a - da).abs()).max((b - db).abs());
                    cases += 1;
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("{cases} cases, max eigenvalue deviation {worst:.3e}"),
    }
}

fn rule() -> QuadratureRule<f64> {
    QuadratureRule::gauss_hermite(QuadratureRule::<f64>::DEFAULT_NODES).unwrap()
}

fn c8() -> Outcome {
    let r = rule();
    let cfg = FixedPointConfig {
        max_iter: 200_000,
        ..Default::default()
    };
    let mut notes = Vec::new();
    let mut pass = true;
    for field in [2.3, 2.5, 3.0, 5.0, 10.0] {
        let hp = HopfieldParams::new(2, K, 0.0, field, LOAD).unwrap();
        let s = solve_rs(&hp, &[0.9, 0.8], &cfg, &r).expect("p=2 solve");
        pass &= check(
            s.q.abs() <= 1e-6,
            format!("gamma=0, Gamma={field}: q={:.3e}", s.q),
            &mut notes,
        );
    }
    let mut q21 = 0.0;
    for field in [0.5, 1.0, 1.5, 2.0, 2.1] {
        let hp = HopfieldParams::new(2, K, 0.0, field, LOAD).unwrap();
        let s = solve_rs(&hp, &[0.9, 0.8], &cfg, &r).expect("p=2 solve");
        q21 = s.q;
        pass &= check(s.q > 1e-6, format!("gamma=0, Gamma={field}: q={:.3e}", s.q), &mut notes);
    }
    let hp = HopfieldParams::new(2, K, 0.5, 0.0, LOAD).unwrap();
    let tr = sweep_gamma_axis(&hp, &linspace(0.0, 10.0, 400), &[1.0, 1.0], JUMP_THRESHOLD, &cfg, &r).expect("sweep");
    let qmin = tr.points.iter().map(|(_, s)| s.q).fold(f64::INFINITY, f64::min);
    pass &= check(qmin > 1e-4, format!("gamma=0.5 sweep min q = {qmin:.3e}"), &mut notes);
    Outcome {
        pass,
        detail: format!(
            "q(Gamma=2.1) = {q21:.4e}; gamma=0.5 sweep min q = {qmin:.4e} {}",
            notes.join("; ")
        ),
    }
}

fn sweeps(gamma: f64) -> (SweepTrace<f64>, SweepTrace<f64>) {
    let r = rule();
    let cfg = FixedPointConfig::default();
    let hp = HopfieldParams::new(4, K, gamma, 0.0, LOAD).unwrap();
    let up = linspace(0.0, 3.0, 400);
    let down: Vec<f64> = up.iter().rev().copied().collect();
    let a = sweep_gamma_axis(&hp, &up, &[1.0, 1.0], JUMP_THRESHOLD, &cfg, &r).expect("up sweep");
    let b = sweep_gamma_axis(&hp, &down, &[0.0, 0.0], JUMP_THRESHOLD, &cfg, &r).expect("down sweep");
    (a, b)
}

fn c9() -> Outcome {
    let mut notes = Vec::new();
    let (up0, down0) = sweeps(0.0);
    let mut pass = check(!up0.jumps.is_empty(), "gamma=0 jump recorded".into(), &mut notes);
    let mut summary = String::new();
    if let Some(j) = up0.jumps.first() {
        summary = format!(
            "gamma=0 up-jump at Gamma {:.4}->{:.4}, m {:.4}->{:.4}; down-sweep jumps {}",
            j.field_before,
            j.field_after,
            j.m_before,
            j.m_after,
            down0.jumps.len()
        );
        pass &= check(within(j.field_after, 1.6, 0.1), "jump location".into(), &mut notes);
        pass &= check(
            within(j.m_before, 0.86, 0.02),
            format!("pre-jump m = {:.4}", j.m_before),
            &mut notes,
        );
        pass &= check(j.m_after.abs() < 1e-6, "post-jump m = 0".into(), &mut notes);
    }
    let (up5, down5) = sweeps(0.5);
    let jumps5: Vec<_> = up5.jumps.iter().chain(&down5.jumps).collect();
    pass &= check(
        !jumps5.is_empty() && jumps5.iter().all(|j| j.m_after > 0.05),
        "gamma=0.5 jump to m > 0.05".into(),
        &mut notes,
    );
    summary += &format!(
        "; gamma=0.5 jumps {:?}",
        jumps5
            .iter()
            .map(|j| format!("{:.3}:{:.3}->{:.3}", j.field_after, j.m_before, j.m_after))
            .collect::<Vec<_>>()
    );
    for g in [1.0, 2.0] {
        let (u, d) = sweeps(g);
        pass &= check(
            u.jumps.is_empty() && d.jumps.is_empty(),
            format!("no jump at gamma={g}"),
            &mut notes,
        );
    }
    Outcome {
        pass,
        detail: format!("{summary} {}", notes.join("; ")),
    }
}

fn c10() -> Outcome {
    let grid = linspace(0.0, 3.0, 50);
    let mut notes = Vec::new();
    let mut pass = true;
    let mut l1_lowest = true;
    for &field in &grid {
        let hp = HopfieldParams::new(2, K, 1.0, field, 0.0).unwrap();
        let f: Vec<f64> = (1..=3)
            .map(|l| finite_pattern_minimum(&hp, l, 2001).unwrap().1)
            .collect();
        l1_lowest &= f[0] < f[1] && f[0] < f[2];
        if !(f[0] < f[1] && f[1] < f[2]) && notes.len() < 3 {
            notes.push(format!(
                "Gamma={field:.3}: F(l=1..3) = ({:.6}, {:.6}, {:.6})",
                f[0], f[1], f[2]
            ));
        }
        pass &= f[0] < f[1] && f[1] < f[2];
    }
    Outcome {
        pass,
        detail: format!(
            "l=1 lowest at every Gamma: {l1_lowest}; ordering violations: {}",
            notes.join("; ")
        ),
    }
}

fn c11() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let cfg = FixedPointConfig::default();
    let r = rule();
    let mut worst_slope = 0.0_f64;
    for p in [2u32, 3, 4] {
        for gamma in [0.0, 0.2, 0.5] {
            for field in [0.3, 0.8, 1.2, 1.6, 2.5] {
                let pr = FerroParams::<f64>::ground(p, gamma, field);
                if let Ok(s) = solve_saddle(&pr, 0.9, &cfg) {
                    worst_slope = worst_slope.max(uniform_slope(&pr, s.m, 1e-6).abs());
                }
            }
        }
    }
    pass &= check(
        worst_slope <= 1e-6,
        format!("max |dF/dm| = {worst_slope:.2e}"),
        &mut notes,
    );

    let mut worst_a0 = 0.0_f64;
    for p in [2u32, 3, 4] {
        for gamma in [0.0, 0.3, 1.0] {
            for field in [0.5, 1.0, 1.5, 2.5] {
                let hp = HopfieldParams::new(p, 1, gamma, field, 0.0).unwrap();
                let fp = FerroParams::ground(p, gamma, field);
                let hs = solve_rs(&hp, &[0.9, 0.81], &cfg, &r);
                let fs = solve_saddle(&fp, 0.9, &cfg);
                if let (Ok(h), Ok(f)) = (hs, fs) {
                    worst_a0 = worst_a0.max((h.m - f.m).abs()).max((h.q - f.m * f.m).abs());
                }
            }
        }
    }
    pass &= check(worst_a0 <= 1e-8, format!("a=0 deviation {worst_a0:.2e}"), &mut notes);

    let mut worst_beta = 0.0_f64;
    for p in [2u32, 3, 4] {
        for gamma in [0.0, 0.5] {
            for field in [0.5, 1.5] {
                for m in [0.0, 0.3, 0.9] {
                    let pi = FerroParams::<f64>::new(p, K, gamma, field, Beta::Infinite).unwrap();
                    let pf = pi.with_beta(Beta::Finite(1e4));
                    worst_beta = worst_beta.max((free_energy_uniform(&pf, m) - free_energy_uniform(&pi, m)).abs());
                }
            }
        }
    }
    pass &= check(
        worst_beta <= 1e-3,
        format!("beta=1e4 deviation {worst_beta:.2e}"),
        &mut notes,
    );

    let mut zero_ok = true;
    for gamma in [0.0, 0.1, 1.0, 5.0] {
        for b in [0.1, 10.0, 1e3, 1e6] {
            let pr = FerroParams::new(4, K, gamma, 1.0, Beta::Finite(b)).unwrap();
            zero_ok &= saddle_residual(&pr, 0.0) == 0.0;
        }
    }
    pass &= check(zero_ok, "m=0 stationary".into(), &mut notes);

    let mut worst_q = 0.0_f64;
    // integrands sqrt((c + s z)^2 + Gamma^2) with Gamma / s >= 0.8, the regime of the replica equations
    for c in [-1.5, -0.4, 0.0, 0.7, 2.0] {
        for s in [0.05, 0.2, 0.5, 1.0] {
            for ratio in [0.8, 1.5, 4.0] {
                let f2 = (ratio * s) * (ratio * s);
                let g = |z: f64| ((c + s * z) * (c + s * z) + f2).sqrt();
                let a = gauss_integrate(g, &r).unwrap();
                let b = adaptive_gauss_integral(g, 1e-13);
                worst_q = worst_q.max((a - b).abs());
            }
        }
    }
    pass &= check(
        worst_q <= 1e-8,
        format!("quadrature deviation {worst_q:.2e}"),
        &mut notes,
    );

    let mut grid_ok = true;
    for (p, gamma, field) in [(2u32, 0.0, 1.0), (4, 0.0, 1.0), (4, 0.5, 1.9), (3, 0.2, 1.1)] {
        let pr = FerroParams::ground(p, gamma, field);
        let ls = scan_landscape(&pr, 0.0, 1.0, 2001).unwrap();
        let g = ls.global().unwrap();
        let dense = (0..=20000)
            .map(|i| i as f64 / 20000.0)
            .map(|m| (m, free_energy_uniform(&pr, m)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        grid_ok &= g.f <= dense.1 + 1e-12 && (g.m - dense.0).abs() <= 1e-4;
    }
    pass &= check(grid_ok, "grid-scan global minimum".into(), &mut notes);

    Outcome {
        pass,
        detail: format!(
            "|dF/dm|<={worst_slope:.1e}, a->0 {worst_a0:.1e}, beta=1e4 {worst_beta:.1e}, quadrature {worst_q:.1e} {}",
            notes.join("; ")
        ),
    }
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let criteria: Vec<Criterion> = vec![
        (1, "p=2 second-order point", c1, Duration::from_secs(1)),
        (2, "p=4 degenerate landscapes", c2, Duration::from_secs(5)),
        (3, "Gamma_c(gamma) fits", c3, Duration::from_secs(30)),
        (4, "gamma_c(p)", c4, Duration::from_secs(120)),
        (5, "two-transition regime", c5, Duration::from_secs(10)),
        (6, "gap coefficient", c6, Duration::from_secs(60)),
        (7, "Dicke oracle equivalence", c7, Duration::from_secs(60)),
        (8, "Hopfield p=2", c8, Duration::from_secs(30)),
        (9, "Hopfield p=4 sweeps", c9, Duration::from_secs(60)),
        (10, "finite-pattern ordering", c10, Duration::from_secs(10)),
        (11, "property suites", c11, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (id, name, f, budget) in criteria {
        let t0 = Instant::now();
        let out = f();
        let dt = t0.elapsed();
        let pass = out.pass && dt <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{id:>2}] {name} ({:.2}s / {}s): {}",
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            budget.as_secs(),
            out.detail.trim_end()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 && std::env::var("QAC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
