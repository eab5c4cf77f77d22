//! Randomized invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use toda_kdv::actions::renormalized_action_table;
use toda_kdv::asymptotics::fit_rate;
use toda_kdv::hill::{hill_discriminant, hill_spectrum, HillOperator, Sign};
use toda_kdv::kdv::{conserved_quantities, kdv_evolve, KdvState};
use toda_kdv::quasimodes::{norm_formula, quasimode_coefficients_closed, FourierSymbol};
use toda_kdv::toda::{build_jacobi, dense_spectrum, discriminant_roots, product_formula_residual};
use toda_kdv::PeriodicProfile;

fn coeffs(max_len: usize, amp: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-amp..amp, 0..=max_len)
}

fn mean_zero_profile(max_degree: usize, amp: f64) -> impl Strategy<Value = PeriodicProfile> {
    (coeffs(max_degree, amp), coeffs(max_degree, amp))
        .prop_map(|(c, s)| PeriodicProfile::from_fourier(0.0, c, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn profile_periodicity_and_sampling(p in mean_zero_profile(6, 3.0), x in -3.0f64..3.0, n in 13usize..40) {
        prop_assert!((p.evaluate(x + 1.0) - p.evaluate(x)).abs() <= 1e-12);
        let grid = p.sample_grid(n);
        prop_assert!(grid.iter().sum::<f64>().abs() <= 1e-12 * (1.0 + p.sup_bound()) * n as f64);
        for (i, v) in grid.iter().enumerate() {
            prop_assert!((v - p.evaluate(i as f64 / n as f64)).abs() <= 1e-13);
        }
    }

    #[test]
    fn toda_spectral_identities(
        alpha in mean_zero_profile(3, 2.0),
        beta in mean_zero_profile(3, 2.0),
        n in 8usize..40,
        lambdas in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let j = build_jacobi(&alpha, &beta, n).unwrap();
        let dense = dense_spectrum(&j).unwrap();
        let roots = discriminant_roots(&j).unwrap();
        dense.check_interlacing().unwrap();
        for (d, r) in dense.values.iter().zip(&roots.values) {
            prop_assert!((d - r).abs() <= 1e-9, "{} vs {}", d, r);
        }
        let trace = 2.0 * j.b().iter().sum::<f64>();
        prop_assert!((dense.values.iter().sum::<f64>() - trace).abs() <= 1e-10 * (1.0 + trace.abs()) + 1e-12);
        for l in lambdas {
            j.check_determinant(l).unwrap();
            prop_assert!(product_formula_residual(&j, l, &roots).residual <= 1e-8);
        }
    }

    #[test]
    fn fit_recovers_power_laws(c in 0.1f64..10.0, p in 0.5f64..4.0) {
        let s: Vec<(f64, f64)> = [16.0f64, 32.0, 64.0, 128.0].iter().map(|&n| (n, c * n.powf(-p))).collect();
        prop_assert!((fit_rate(&s).unwrap().slope + p).abs() <= 1e-10);
    }

    #[test]
    fn quasimode_norm_formula(
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=9),
        k in 0usize..16,
    ) {
        let pairs: Vec<(i64, Complex64)> =
            raw.iter().enumerate().map(|(i, (re, im))| (i as i64 - 4, Complex64::new(*re, *im))).collect();
        let mu = FourierSymbol::from_pairs(&pairs);
        let mut prev = 0.0;
        for n in [8usize, 16, 32, 64] {
            let c = quasimode_coefficients_closed(k, &mu, n);
            let want = norm_formula(&mu, n);
            prop_assert!((c.norm_sqr() - want).abs() <= 1e-12 * (1.0 + want));
            prop_assert!(want >= prev && want <= mu.l2_norm_sqr() + 1e-15);
            prev = want;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hill_shift_covariance(q in mean_zero_profile(2, 3.0), c in -5.0f64..5.0) {
        let h = HillOperator::from_potential(q.clone(), Sign::Plus);
        let shifted = HillOperator::from_potential(q.combine(1.0, &PeriodicProfile::constant(c), 1.0), Sign::Plus);
        let (a, b) = (hill_spectrum(&h, 7).unwrap(), hill_spectrum(&shifted, 7).unwrap());
        for (x, y) in a.combined.iter().zip(&b.combined) {
            prop_assert!((x + c - y).abs() <= 1e-9 * (1.0 + y.abs()), "{} + {} vs {}", x, c, y);
        }
        // below the spectrum the discriminant exceeds 2
        prop_assert!(hill_discriminant(&h, a.combined[0] - 1.0).unwrap() > 2.0);
    }

    #[test]
    fn kdv_invariants_are_conserved(p in mean_zero_profile(2, 1.0)) {
        let u0 = KdvState::from_profile(&p, 128).unwrap();
        let u1 = kdv_evolve(&u0, 0.02, 2.5e-5).unwrap();
        let (i0, i1) = (conserved_quantities(&u0), conserved_quantities(&u1));
        prop_assert!((i0.m1 - i1.m1).abs() <= 1e-12);
        prop_assert!((i0.m2 - i1.m2).abs() <= 1e-8 * (1.0 + i0.m2));
        prop_assert!((i0.h - i1.h).abs() <= 1e-7 * (1.0 + i0.h.abs()));
    }
}

#[test]
fn hill_bands_and_gaps() {
    let h = HillOperator::from_potential(PeriodicProfile::cos_mode(1, -2.0), Sign::Plus);
    let s = hill_spectrum(&h, 9).unwrap();
    let mu = &s.combined;
    for k in 0..4 {
        // bands [μ_{2k}, μ_{2k+1}] have |Δ| ≤ 2, gaps have |Δ| ≥ 2
        let (lo, hi) = (mu[2 * k], mu[2 * k + 1]);
        for i in 0..100 {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
            assert!(hill_discriminant(&h, x).unwrap().abs() <= 2.0 + 1e-9);
        }
        let (lo, hi) = (mu[2 * k + 1], mu[2 * k + 2]);
        for i in 0..100 {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
            assert!(hill_discriminant(&h, x).unwrap().abs() >= 2.0 - 1e-9);
        }
    }
}

#[test]
fn beta_reflection_swaps_action_targets() {
    let alpha = PeriodicProfile::cos_mode(1, 1.0);
    let beta = PeriodicProfile::sin_mode(1, 1.0);
    let a = renormalized_action_table(&alpha, &beta, 16, 2).unwrap();
    let b = renormalized_action_table(&alpha, &beta.scale(-1.0), 16, 2).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.target_minus, y.target_plus);
        assert_eq!(x.target_plus, y.target_minus);
    }
    let sym = renormalized_action_table(&alpha, &PeriodicProfile::zero(), 16, 2).unwrap();
    for r in &sym {
        assert_eq!(r.target_minus, r.target_plus);
        assert!(r.toda_bottom >= 0.0 && r.toda_top >= 0.0);
    }
}
