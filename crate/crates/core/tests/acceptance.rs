//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured residual and its pinned tolerance.

use std::sync::OnceLock;
use std::time::Instant;

use unified_transform::charmat::Half;
use unified_transform::fixtures::{self, FixtureKind, SeedBranch};
use unified_transform::num::{c, C64, I};
use unified_transform::problem::Datum;
use unified_transform::solver;
use unified_transform::transforms::{fhat, LKdVFixture, SpectralFn};
use unified_transform::verify;
use unified_transform::zeros;
use unified_transform::{Averaging, ContourMode, Ibvp};

fn ibvp(kind: FixtureKind) -> &'static Ibvp {
    static HEAT: OnceLock<Ibvp> = OnceLock::new();
    static L1: OnceLock<Ibvp> = OnceLock::new();
    static L2: OnceLock<Ibvp> = OnceLock::new();
    let cell = match kind {
        FixtureKind::HeatDirichlet => &HEAT,
        FixtureKind::Lkdv1 => &L1,
        FixtureKind::Lkdv2 => &L2,
    };
    cell.get_or_init(|| Ibvp::new(kind.spec(), 40.0).expect("fixture setup"))
}

fn report(name: &str, residual: f64, tol: f64) {
    let verdict = if residual < tol { "pass" } else { "FAIL" };
    println!("criterion {name}: residual {residual:.3e} (tol {tol:.1e}) ... {verdict}");
    assert!(residual < tol, "{name}: {residual:.3e} >= {tol:.1e}");
}

/// Deterministic pseudo-random stream for test points.
fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed;
    move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
    }
}

/// Sine-series oracle for the heat/Dirichlet problem: 200 terms, Simpson
/// coefficients, independent of the transform machinery.
fn heat_series_oracle(f: &Datum, x: f64, t: f64) -> f64 {
    let mut total = 0.0;
    for k in 1..=200 {
        let kk = k as f64 * std::f64::consts::PI;
        let m = 600;
        let mut s = 0.0;
        for j in 0..=m {
            let y = j as f64 / m as f64;
            let w = if j == 0 || j == m {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * f.eval(y).re * (kk * y).sin();
        }
        s /= 3.0 * m as f64;
        total += 2.0 * s * (-kk * kk * t).exp() * (kk * x).sin();
    }
    total
}

#[test]
fn criterion_01_heat_dirichlet_oracle() {
    let start = Instant::now();
    let ib = ibvp(FixtureKind::HeatDirichlet);
    let xs: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let ts = [0.01, 0.1, 0.5];
    let mut worst = 0.0_f64;
    for f in [fixtures::heat_sine_datum(), fixtures::heat_poly_datum()] {
        let (rows, _) = solver::solve_grid(ib, &f, &xs, &ts).unwrap();
        for (ti, &t) in ts.iter().enumerate() {
            for (xi, &x) in xs.iter().enumerate() {
                let want = heat_series_oracle(&f, x, t);
                worst = worst.max((rows[ti][xi] - c(want, 0.0)).norm());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion 1 runtime: {elapsed:.2}s (< 10s required)");
    assert!(elapsed < 10.0, "criterion 1 runtime {elapsed:.1}s");
    report("1 (heat/Dirichlet vs sine series)", worst, 1e-8);
}

#[test]
fn criterion_02_transform_validity_reconstruction() {
    let xs: Vec<f64> = (0..19).map(|k| 0.05 + 0.9 * k as f64 / 18.0).collect();
    let mut worst = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
    ] {
        let ib = ibvp(kind);
        let recon = ib.reconstruct(&f, &xs).unwrap();
        for (q, &x) in recon.iter().zip(&xs) {
            worst = worst.max((q - f.eval(x)).norm());
        }
    }
    report("2 (reconstruction f_x(F_λ(f)) = f)", worst, 1e-6);
}

#[test]
fn criterion_03_jump_identity() {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut worst = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
        (FixtureKind::HeatDirichlet, fixtures::heat_poly_datum()),
    ] {
        let ib = ibvp(kind);
        let ft = ib.forward_fn(f.clone());
        let mut rand = lcg(0x1234_0001);
        let mut count = 0;
        while count < 50 {
            let lm = c(7.0 * rand(), 7.0 * rand());
            let plus = match ft.eval(lm, Half::Plus) {
                Ok(v) => v.value(),
                Err(_) => continue, // λ landed in a zero's guard disk
            };
            let minus = ft.eval(lm, Half::Minus).unwrap().value();
            let expect = fhat(&f, lm) / two_pi;
            worst = worst.max((plus - minus - expect).norm());
            count += 1;
        }
    }
    report("3 (jump identity F+ - F- = f̂/2π)", worst, 1e-12);
}

#[test]
fn criterion_04_zeta_identity() {
    let mut worst = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
    ] {
        let fx = LKdVFixture::new(kind);
        let mut rand = lcg(0x1234_0002);
        for _ in 0..50 {
            let lm = c(6.0 * rand(), 6.0 * rand());
            let lhs = fx.zeta_plus(&f, lm) - (-I * lm).exp() * fx.zeta_minus(&f, lm);
            let rhs = fhat(&f, lm) * fx.delta(lm);
            // the identity is exact; scale-relative residual
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }
    report("4 (ζ+ - e^{-iλ}ζ- = f̂Δ)", worst, 1e-12);
}

#[test]
fn criterion_05_zero_asymptotics() {
    let kind = FixtureKind::Lkdv1;
    let mut worst_pos = 0.0_f64;
    let mut worst_dp = 0.0_f64;
    for branch in [SeedBranch::Lambda, SeedBranch::Mu] {
        for k in 3..=10 {
            let seed = fixtures::lkdv1_seed(k, branch);
            let sigma = zeros::newton(&kind, seed, 1e-13, 1.0).expect("newton from seed");
            worst_pos = worst_pos.max((sigma - seed).norm());
            if k >= 4 {
                let dp = kind.delta_deriv(sigma);
                let asym = fixtures::lkdv1_dprime_asymptotic(k, branch);
                worst_dp = worst_dp.max((dp - asym).norm() / asym.norm());
            }
        }
    }
    report("5a (zero seeds, k=3..10)", worst_pos, 1e-5);
    report("5b (Δ' asymptotics, k>=4)", worst_dp, 1e-6);
}

#[test]
fn criterion_06_argument_principle_completeness() {
    let mut worst = 0.0_f64;
    for kind in [
        FixtureKind::HeatDirichlet,
        FixtureKind::Lkdv1,
        FixtureKind::Lkdv2,
    ] {
        let ib = ibvp(kind);
        // the located catalog lives on the (slightly padded) search square;
        // recount on the same box and demand exact integer agreement
        let pad = zeros::Rect {
            re_lo: -40.0 - 0.0131,
            re_hi: 40.0 + 0.0273,
            im_lo: -40.0 - 0.0179,
            im_hi: 40.0 + 0.0317,
        };
        let count = zeros::count_zeros(ib.fixture.as_ref().unwrap(), pad, 3).unwrap();
        let diff = (ib.cat.total_order() as i64 - count as i64).unsigned_abs() as f64;
        worst = worst.max(diff);
    }
    report("6 (Σ orders = winding count, exact)", worst, 0.5);
}

#[test]
fn criterion_07_remainder_structure() {
    let mut worst_fit = 0.0_f64;
    let mut worst_explicit = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
    ] {
        let ib = ibvp(kind);
        let fit = solver::fit_remainder_polynomials(ib, &f).unwrap();
        worst_fit = worst_fit.max(fit.fit_residual);
        let mut rand = lcg(0x1234_0007);
        for _ in 0..10 {
            let lm = c(3.0 * rand(), 3.0 * rand());
            for half in [Half::Plus, Half::Minus] {
                let got = verify::remainder(ib, &f, lm, half).unwrap();
                let mut want = verify::explicit_lkdv_remainder(kind, &f, lm, half);
                if half == Half::Minus {
                    want *= (-I * lm).exp();
                }
                worst_explicit = worst_explicit.max((got - want).norm());
            }
        }
    }
    // Worked values for problem 2, f = x(1-x)²: f'(0)=1, f''(0)=-4 give
    // R⁺ = 2i/π + λ/2π (the λ sign follows from the kernel traces
    // φ⁺(0)=1/2π, ∂ₓφ⁺(0)=-iλ/2π); the flat datum x³(1-x)² gives R⁺ ≡ 0
    // and R⁻ = -i/π · e^{-iλ}.
    let ib2 = ibvp(FixtureKind::Lkdv2);
    let lm = c(1.9, -0.6);
    let r = verify::remainder(ib2, &fixtures::lkdv2_datum(), lm, Half::Plus).unwrap();
    let want = 2.0 * I / std::f64::consts::PI + lm / (2.0 * std::f64::consts::PI);
    worst_explicit = worst_explicit.max((r - want).norm());
    let flat = fixtures::lkdv2_datum_flat();
    let r0 = verify::remainder(ib2, &flat, lm, Half::Plus).unwrap();
    worst_explicit = worst_explicit.max(r0.norm());
    let rm = verify::remainder(ib2, &flat, lm, Half::Minus).unwrap();
    let wantm = -I / std::f64::consts::PI * (-I * lm).exp();
    worst_explicit = worst_explicit.max((rm - wantm).norm());

    report("7a (remainder polynomial fit)", worst_fit, 1e-9);
    report("7b (explicit LKdV remainders + worked values)", worst_explicit, 1e-10);
}

#[test]
fn criterion_08_type1_annihilation() {
    let xs = [0.25, 0.5, 0.75];
    let mut worst = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
        (FixtureKind::HeatDirichlet, fixtures::heat_poly_datum()),
    ] {
        let ib = ibvp(kind);
        for z in &ib.cat.zeros {
            let r = verify::verify_type1_circle(ib, &f, z.sigma, ib.cat.epsilon, &xs).unwrap();
            worst = worst.max(r);
        }
    }
    report("8 (type-I annihilation on every ε-circle)", worst, 1e-10);
}

#[test]
fn criterion_09_diagonalization() {
    let ib2 = ibvp(FixtureKind::Lkdv2);
    let f2 = fixtures::lkdv2_datum();
    let (r1, r2) = verify::verify_diagonalization(ib2, &f2, &[0.3, 0.5, 0.7]).unwrap();
    report("9a (Γ₀ diagonalization, problem 2)", r1, 1e-5);
    report("9b (Γₐ diagonalization, problem 2)", r2, 1e-5);

    // problem 1 through the residue series with 200 averaged terms
    let mut ib1 = Ibvp::new(fixtures::lkdv1_spec(), 40.0).unwrap();
    ib1.ensure_zero_count(200).unwrap();
    let f1 = fixtures::lkdv1_datum();
    let r3 = verify::verify_diagonalization_series(&ib1, &f1, 0.5, 200).unwrap();
    report("9c (series diagonalization, problem 1)", r3, 1e-3);
}

#[test]
fn criterion_10_type2_only_representation() {
    let xs: Vec<f64> = (0..10).map(|k| 0.05 + 0.9 * k as f64 / 9.0).collect();
    let mut worst_circ = 0.0_f64;
    let mut worst_recon = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
    ] {
        let ib = ibvp(kind);
        let (circ, err) = verify::type2_only_representation(ib, &f, &xs).unwrap();
        worst_circ = worst_circ.max(circ);
        worst_recon = worst_recon.max(err);
    }
    report("10a (Γ₀ circle integral vanishes)", worst_circ, 1e-10);
    report("10b (reconstruction without Γ₀)", worst_recon, 1e-6);
}

#[test]
fn criterion_11_classification() {
    let expect = [
        (FixtureKind::Lkdv1, verify::Verdict::TypeI),
        (FixtureKind::Lkdv2, verify::Verdict::TypeII),
        (FixtureKind::HeatDirichlet, verify::Verdict::TypeI),
    ];
    let mut fails = 0.0;
    for (kind, want) in expect {
        let ib = ibvp(kind);
        let a = verify::classify(ib).unwrap().verdict;
        let b = verify::classify(ib).unwrap().verdict; // reproducible
        println!("criterion 11: {kind:?} -> {a:?} (expected {want:?}, repeat {b:?})");
        if a != want || b != want {
            fails += 1.0;
        }
    }
    report("11 (classification verdicts)", fails, 0.5);
}

#[test]
fn criterion_12_inhomogeneous_lkdv2() {
    let ib = ibvp(FixtureKind::Lkdv2);
    let f = fixtures::lkdv2_datum();
    let xs = [0.3, 0.5, 0.7];
    let t = 0.1;
    let hom = solver::solve_grid(ib, &f, &xs, &[t]).unwrap().0[0].clone();
    let red = solver::solve_lkdv2_inhomogeneous(ib, &f, &fixtures::BoundaryData::zero(), &xs, t)
        .unwrap();
    let mut worst = 0.0_f64;
    for (a, b) in hom.iter().zip(&red) {
        worst = worst.max((a - b).norm());
    }
    report("12a (h ≡ 0 reduces to homogeneous)", worst, 1e-6);

    let h = fixtures::BoundaryData {
        h1: unified_transform::num::CPoly::from_real(&[0.0, 1.0]),
        h2: unified_transform::num::CPoly::zero(),
        h3: unified_transform::num::CPoly::zero(),
    };
    let t = 0.25;
    let grid = [0.05, 0.08, 0.11, 0.14, 0.17, 0.2];
    let q = solver::solve_lkdv2_inhomogeneous(ib, &Datum::zero(), &h, &grid, t).unwrap();
    let trace = solver::boundary_trace(&grid, &q, 0.0);
    report(
        "12b (boundary trace q(0,t) = t recovered)",
        (trace - c(t, 0.0)).norm(),
        1e-4,
    );
}

#[test]
fn criterion_13_pde_residual() {
    let mut rand = lcg(0x1234_000d);
    let mut worst = 0.0_f64;
    for (kind, f) in [
        (FixtureKind::Lkdv1, fixtures::lkdv1_datum()),
        (FixtureKind::Lkdv2, fixtures::lkdv2_datum()),
    ] {
        let ib = ibvp(kind);
        for _ in 0..9 {
            let x = 0.2 + 0.6 * (0.5 + 0.5 * rand());
            let t = 0.02 + 0.2 * (0.5 + 0.5 * rand());
            let r = solver::pde_residual(ib, &f, x, t).unwrap();
            worst = worst.max(r);
        }
    }
    report("13 (|q_t + q_xxx| by central differences)", worst, 1e-3);
}

// helper import check: C64 used in signatures above
#[allow(dead_code)]
fn _types(_: C64) {}
