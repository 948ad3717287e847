//! Property tests for the spectral kernels, observables and the
//! splitting integrator.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cqnls::evolution::{build_linear_propagator, evolve, strang_step, EvolutionConfig, WaveField};
use cqnls::groundstate::{cubic_seed, newton_solve, trace_alpha, uniform_alpha_schedule};
use cqnls::library::{read_profile, write_profile};
use cqnls::observables::{self, Diagnostics};
use cqnls::spectral::{build_grid, build_shared_grid, Dimension, RadialGrid};

fn complex_field(grid: &RadialGrid, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut f: Vec<Complex64> = (0..grid.n_nodes())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    f[0] = Complex64::new(0.0, 0.0);
    f
}

#[test]
fn holder_inequality_on_random_fields() {
    // ||u||_4^4 <= ||u||_2 ||u||_6^3 holds for every sampled field (the
    // radial weights are nonnegative, so the discrete measure is a
    // measure); 100 draws per dimension.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in [Dimension::Two, Dimension::Three] {
        let grid = build_grid(d, 48, 200.0).unwrap();
        for _ in 0..100 {
            let u = complex_field(&grid, &mut rng);
            let mass = observables::mass(&grid, &u).unwrap();
            let l4 = observables::lp_norm(&grid, &u, 4).unwrap();
            let l6 = observables::lp_norm(&grid, &u, 6).unwrap();
            assert!(l4 <= mass.sqrt() * l6.sqrt() * (1.0 + 1e-8));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The interpolant reproduces polynomial data exactly anywhere.
    #[test]
    fn interpolation_exact_on_polynomials(
        c0 in -2.0..2.0f64,
        c1 in -1.0..1.0f64,
        c2 in -0.5..0.5f64,
        s_frac in 0.0..1.0f64,
    ) {
        let grid = build_grid(Dimension::Two, 16, 12.0).unwrap();
        let samples: Vec<f64> = grid
            .s_nodes
            .iter()
            .map(|&s| c0 + c1 * s + c2 * s * s / 12.0)
            .collect();
        let s_star = s_frac * grid.s0;
        let exact = c0 + c1 * s_star + c2 * s_star * s_star / 12.0;
        let got = grid.interpolate(&samples, s_star).unwrap();
        prop_assert!((got - exact).abs() < 1e-10);
    }

    /// Differentiating a monomial in ell is exact at the nodes.
    #[test]
    fn differentiation_exact_on_monomials(k in 0usize..24) {
        let n = 24;
        let d = cqnls::spectral::differentiation_matrix(n).unwrap();
        let x: Vec<f64> = (0..=n).map(|j| (j as f64 * std::f64::consts::PI / n as f64).cos()).collect();
        let f = DVector::from_iterator(n + 1, x.iter().map(|&v| v.powi(k as i32)));
        let df = &d * &f;
        for i in 0..=n {
            let exact = if k == 0 { 0.0 } else { k as f64 * x[i].powi(k as i32 - 1) };
            prop_assert!((df[i] - exact).abs() < 1e-10);
        }
    }

    /// The nonlinear phase step never changes |u|.
    #[test]
    fn phase_step_preserves_modulus(tau in -2.0..2.0f64, seed in 0u64..1000) {
        let grid = build_shared_grid(Dimension::Three, 24, 30.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = DVector::from_vec(complex_field(&grid, &mut rng));
        let mut field = WaveField::new(Arc::clone(&grid), values, 0.0).unwrap();
        let before: Vec<f64> = field.values.iter().map(|v| v.norm()).collect();
        cqnls::evolution::nonlinear_phase_step(&mut field, tau);
        for (b, v) in before.iter().zip(field.values.iter()) {
            prop_assert!((b - v.norm()).abs() <= 1e-14);
        }
    }

    /// Profile records survive a save/load round trip bit-identically.
    #[test]
    fn profile_record_roundtrip(seed in 0u64..500) {
        let grid = build_shared_grid(Dimension::Two, 24, 60.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = grid.s_nodes.map(|s| rng.gen_range(0.0..1.0) * (-0.2 * s).exp());
        values[0] = 0.0;
        let profile = cqnls::groundstate::GroundStateProfile {
            d: Dimension::Two,
            omega: rng.gen_range(0.01..0.18),
            alpha: 1.0,
            grid,
            values,
            residual_norm: 1e-13,
            newton_iters: 3,
        };
        let dir = std::env::temp_dir().join(format!("cqnls_prop_{}_{seed}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.txt");
        write_profile(&path, &profile).unwrap();
        let rec = read_profile(&path).unwrap();
        prop_assert_eq!(rec.profile.omega, profile.omega);
        for i in 0..profile.values.len() {
            prop_assert_eq!(rec.profile.values[i], profile.values[i]);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}

#[test]
fn cubic_scaling_oracle_between_frequencies() {
    // alpha = 0 profiles inherit the cubic scaling law
    // Q_{w2}(r) = sqrt(w2/w1) Q_{w1}(r sqrt(w2/w1)); in s-units the
    // argument scales by w2/w1. The domain must both resolve the narrow
    // w2 core and keep the w1 truncation below the tolerance.
    let (w1, w2) = (0.05, 0.1);
    for d in [Dimension::Two, Dimension::Three] {
        let grid = build_shared_grid(d, 500, 3e3).unwrap();
        let p1 = newton_solve(&grid, cubic_seed(&grid, w1).as_slice(), w1, 0.0, 1e-12, 50).unwrap();
        let p2 = newton_solve(&grid, cubic_seed(&grid, w2).as_slice(), w2, 0.0, 1e-12, 50).unwrap();
        let ratio = w2 / w1;
        let mut worst = 0.0f64;
        for &s in p2.grid.s_nodes.iter() {
            if s * ratio > grid.s0 {
                continue;
            }
            let lhs = grid.interpolate(p2.values.as_slice(), s).unwrap();
            let rhs = ratio.sqrt() * grid.interpolate(p1.values.as_slice(), s * ratio).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(
            worst <= 1e-6,
            "d={}: scaling mismatch {worst:.2e}",
            d.value()
        );
    }
}

#[test]
fn soliton_phase_rotation_error_is_locally_cubic_in_dt() {
    // One Strang step against the exact e^{i omega dt} rotation of the
    // discrete profile: halving dt divides the one-step error by ~8.
    let grid = build_shared_grid(Dimension::Three, 200, 1e3).unwrap();
    let q = trace_alpha(&grid, 0.1, &uniform_alpha_schedule(11), 1e-12, 50).unwrap();
    let mut errs = Vec::new();
    for &dt in &[2e-2, 1e-2] {
        let prop = build_linear_propagator(&grid, dt).unwrap();
        let mut f = WaveField::from_real(Arc::clone(&grid), q.values.as_slice(), 0.0).unwrap();
        strang_step(&mut f, dt, &prop).unwrap();
        let phase = Complex64::from_polar(1.0, 0.1 * dt);
        let err = (0..grid.n_nodes())
            .map(|i| (f.values[i] - phase * Complex64::new(q.values[i], 0.0)).norm())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let ratio = errs[0] / errs[1];
    assert!(
        (6.0..10.0).contains(&ratio),
        "one-step error ratio {ratio:.2} (errors {errs:?})"
    );
}

#[test]
fn evolve_is_time_reversible() {
    // Forward then backward over t = 2.5 returns the initial data to 1e-8.
    let grid = build_shared_grid(Dimension::Three, 200, 1e3).unwrap();
    let q = trace_alpha(&grid, 0.1, &uniform_alpha_schedule(11), 1e-12, 50).unwrap();
    let u0 = cqnls::experiments::build_initial(
        &q,
        &cqnls::experiments::PerturbationSpec::AdditiveGaussian {
            positive: true,
            lambda: 0.001,
            center: 0.0,
            width: 1.0,
        },
    )
    .unwrap();

    let dt = 1e-3;
    let steps = 2500;
    let fwd = build_linear_propagator(&grid, dt).unwrap();
    let bwd = build_linear_propagator(&grid, -dt).unwrap();
    let mut f = u0.clone();
    for _ in 0..steps {
        strang_step(&mut f, dt, &fwd).unwrap();
    }
    for _ in 0..steps {
        strang_step(&mut f, -dt, &bwd).unwrap();
    }
    let err = (0..grid.n_nodes())
        .map(|i| (f.values[i] - u0.values[i]).norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-8, "round trip error {err:.3e}");
}

#[test]
fn mass_drift_stays_below_1e6_relative() {
    let grid = build_shared_grid(Dimension::Three, 300, 1e3).unwrap();
    let q = trace_alpha(&grid, 0.1, &uniform_alpha_schedule(11), 1e-12, 50).unwrap();
    let u0 = WaveField::from_real(Arc::clone(&grid), q.values.as_slice(), 0.0).unwrap();
    let mut config = EvolutionConfig::new(2.0, 2000);
    config.record_stride = 20;
    let traj = evolve(&u0, &config).unwrap();
    let m0 = traj.mass_series[0];
    let drift = traj
        .mass_series
        .iter()
        .map(|m| ((m - m0) / m0).abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-6, "mass drift {drift:.3e}");
}

#[test]
fn branch_slope_sign_matches_stability_criterion() {
    // Finite-difference slope of M(omega) along the 3D branch: negative
    // below the mass minimum (unstable side), positive above.
    let grid = build_shared_grid(Dimension::Three, 300, 1e3).unwrap();
    let seed = trace_alpha(&grid, 0.1, &uniform_alpha_schedule(11), 1e-12, 50).unwrap();
    let omegas: Vec<f64> = (0..16).map(|i| 0.008 + 0.006 * i as f64).collect();
    let lib = cqnls::groundstate::continue_branch(&grid, &omegas, &seed, 1e-12, 50).unwrap();
    let omega_crit = cqnls::groundstate::find_critical_omega(&lib.branch).unwrap();
    let points = &lib.branch.points;
    for w in points.windows(2) {
        let slope = (w[1].mass - w[0].mass) / (w[1].omega - w[0].omega);
        let mid = 0.5 * (w[0].omega + w[1].omega);
        if mid < omega_crit - 0.003 {
            assert!(slope < 0.0, "slope {slope:.3} at omega {mid:.3}");
        } else if mid > omega_crit + 0.003 {
            assert!(slope > 0.0, "slope {slope:.3} at omega {mid:.3}");
        }
    }

    // The branch energy peaks where the mass bottoms out, which is what
    // makes the E(M) diagram fold into a cusp there.
    let energies: Vec<f64> = points.iter().map(|p| p.energy).collect();
    let omega_e = cqnls::groundstate::interior_extremum(
        &lib.branch.omegas(),
        &energies,
        cqnls::groundstate::Extremum::Maximum,
    )
    .unwrap();
    assert!(
        (omega_e - omega_crit).abs() < 0.006,
        "energy max at {omega_e:.4} vs mass min at {omega_crit:.4}"
    );
}

#[test]
fn action_of_ground_state_beats_dilations() {
    let grid = build_shared_grid(Dimension::Two, 200, 1e3).unwrap();
    let q = trace_alpha(&grid, 0.1, &uniform_alpha_schedule(11), 1e-12, 50).unwrap();
    let field = observables::to_complex(q.values.as_slice());
    let s_q = observables::action(&grid, &field, 0.1).unwrap();
    let doubled: Vec<Complex64> = field.iter().map(|v| v * 2.0).collect();
    let s_2q = observables::action(&grid, &doubled, 0.1).unwrap();
    assert!(s_q < s_2q, "S(Q) = {s_q} not below S(2Q) = {s_2q}");
}

#[test]
fn linf_2d_exceeds_cubic_counterpart() {
    // At equal omega the cubic-quintic state in 2D peaks slightly above
    // the cubic one.
    let grid = build_shared_grid(Dimension::Two, 300, 1e3).unwrap();
    let cubic = newton_solve(
        &grid,
        cubic_seed(&grid, 0.1).as_slice(),
        0.1,
        0.0,
        1e-12,
        50,
    )
    .unwrap();
    let full = trace_alpha(&grid, 0.1, &uniform_alpha_schedule(11), 1e-12, 50).unwrap();
    assert!(full.linf() > cubic.linf());
}

#[test]
fn diagnostics_are_finite_and_nonnegative_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let grid = build_grid(Dimension::Three, 32, 100.0).unwrap();
    for _ in 0..20 {
        let u = complex_field(&grid, &mut rng);
        let d = Diagnostics::compute(&grid, &u, 0.05).unwrap();
        assert!(d.mass >= 0.0 && d.l4 >= 0.0 && d.l6 >= 0.0 && d.grad_sq >= 0.0);
        assert!(d.energy.is_finite());
        assert!(d.momentum.iter().all(|&p| p == 0.0));
    }
}
