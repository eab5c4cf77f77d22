//! Independent reference computations for values the library produces.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toda_kdv::actions::{hill_action, toda_action};
use toda_kdv::hill::{hill_discriminant, hill_spectrum, HillOperator, Sign};
use toda_kdv::kdv::{estimate_time_error, KdvState};
use toda_kdv::quadrature::GaussLegendre;
use toda_kdv::quasimodes::{
    gram_formula, quasimode_coefficients, quasimode_coefficients_closed, theta_gaussian, FourierSymbol, ThetaContext,
};
use toda_kdv::toda::{build_jacobi, discriminant_roots, toda_discriminant};
use toda_kdv::PeriodicProfile;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7–K15 panel: (Kronrod value, |Kronrod − Gauss|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let (f1, f2) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection with a per-unit-length tolerance `density`.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, density: f64, depth: usize) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= density * (b - a) || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, density, depth - 1) + adaptive(f, m, b, density, depth - 1)
}

/// `∫_a^b f` for integrands with square-root behaviour at both ends, via
/// `λ = a + s²` on the left half and `λ = b − s²` on the right half.
fn edge_singular(f: &dyn Fn(f64) -> f64, a: f64, b: f64, density: f64) -> f64 {
    let r = (0.5 * (b - a)).sqrt();
    let left = |s: f64| 2.0 * s * f(a + s * s);
    let right = |s: f64| 2.0 * s * f(b - s * s);
    adaptive(&left, 0.0, r, density, 30) + adaptive(&right, 0.0, r, density, 30)
}

#[test]
fn kronrod_rule_is_exact_for_degree_22() {
    let f = |x: f64| x.powi(22);
    let (v, _) = gk15(&f, 0.0, 1.0);
    assert!((v - 1.0 / 23.0).abs() < 1e-15);
}

#[test]
fn toda_action_matches_adaptive_oracle() {
    let alpha = PeriodicProfile::cos_mode(1, 1.0);
    let j = build_jacobi(&alpha, &PeriodicProfile::zero(), 32).unwrap();
    let s = discriminant_roots(&j).unwrap();
    let gap = s.gap(1).unwrap();
    let sigma = if (32 - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let f = |x: f64| (sigma * toda_discriminant(&j, x).unwrap() / 2.0).max(1.0).acosh() / PI;
    let oracle = edge_singular(&f, gap.left, gap.right, 1e-13);
    let value = toda_action(&j, &s, 1).unwrap();
    assert!(value > 0.0);
    assert!((value - oracle).abs() <= 1e-8 * oracle, "{value} vs {oracle}");
}

#[test]
fn hill_action_matches_adaptive_oracle() {
    let h = HillOperator::from_potential(PeriodicProfile::cos_mode(1, -2.0), Sign::Plus);
    let s = hill_spectrum(&h, 11).unwrap();
    let gap = s.gap(1).unwrap();
    let f = |x: f64| 2.0 / PI * (-hill_discriminant(&h, x).unwrap() / 2.0).max(1.0).acosh();
    let oracle = edge_singular(&f, gap.left, gap.right, 1e-11);
    let value = hill_action(&h, &s, 1).unwrap();
    assert!((value - oracle).abs() <= 1e-8 * oracle, "{value} vs {oracle}");
    // sign pattern at the first five gap midpoints
    for n in 1..=5 {
        let g = s.gap(n).unwrap();
        let d = hill_discriminant(&h, 0.5 * (g.left + g.right)).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!(sign * d >= 2.0 - 1e-9, "gap {n}: {d}");
    }
}

#[test]
fn theta_functions_are_orthonormal() {
    let n = 16;
    let ctx = ThetaContext::new(n).unwrap();
    let nx = 2 * n * (2 * ctx.n_max as usize + 2);
    let rule = GaussLegendre::new(16);
    let panels = 64;
    let idx = [0usize, 7, 31];
    let mut gram = [[Complex64::new(0.0, 0.0); 3]; 3];
    for p in 0..panels {
        let (a, h) = (p as f64 / panels as f64, 1.0 / panels as f64);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let y = a + 0.5 * h * (t + 1.0);
            let wy = 0.5 * h * w;
            for ix in 0..nx {
                let x = ix as f64 / nx as f64;
                let z = Complex64::new(x, y);
                let vals: Vec<Complex64> = idx.iter().map(|&j| theta_gaussian(j, z, &ctx).unwrap()).collect();
                for r in 0..3 {
                    for c in 0..3 {
                        gram[r][c] += vals[r] * vals[c].conj() * (wy / nx as f64);
                    }
                }
            }
        }
    }
    for r in 0..3 {
        for c in 0..3 {
            let want = if r == c { 1.0 } else { 0.0 };
            assert!((gram[r][c] - want).norm() <= 1e-8, "({r},{c}) = {}", gram[r][c]);
        }
    }
}

fn random_symbol(rng: &mut ChaCha8Rng, width: i64) -> FourierSymbol {
    let pairs: Vec<(i64, Complex64)> =
        (-width..=width).map(|l| (l, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    FourierSymbol::from_pairs(&pairs)
}

#[test]
fn gram_formula_matches_quadrature() {
    let n = 32;
    let ctx = ThetaContext::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let (mu, mu2) = (random_symbol(&mut rng, 3), random_symbol(&mut rng, 3));
        let k = rng.gen_range(0..2 * n);
        let k2 = (k + rng.gen_range(0..4)).min(2 * n - 1);
        let a = quasimode_coefficients(k, &mu, &ctx).unwrap();
        let b = quasimode_coefficients(k2, &mu2, &ctx).unwrap();
        let lhs = a.inner(&b);
        let rhs = gram_formula(&mu, &mu2, k as i64, k2 as i64, &ctx);
        assert!((lhs - rhs).norm() <= 1e-8, "k={k}, k'={k2}: {lhs} vs {rhs}");
        // the closed form is the same integral taken over the real line
        assert!(quasimode_coefficients_closed(k, &mu, n).distance(&a) <= 1e-12);
    }
}

#[test]
fn quasimode_linearity() {
    let ctx = ThetaContext::new(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mu, mu2) = (random_symbol(&mut rng, 2), random_symbol(&mut rng, 2));
    let a = quasimode_coefficients(3, &mu, &ctx).unwrap();
    let b = quasimode_coefficients(3, &mu2, &ctx).unwrap();
    let c = quasimode_coefficients(3, &mu.plus(&mu2), &ctx).unwrap();
    for r in 0..32 {
        assert!((a.rows[r] + b.rows[r] - c.rows[r]).norm() <= 1e-13);
    }
}

#[test]
fn hill_gaps_open_linearly() {
    let width = |gamma: f64| {
        let h = HillOperator::from_potential(PeriodicProfile::cos_mode(1, 2.0 * gamma), Sign::Plus);
        let g = hill_spectrum(&h, 3).unwrap().gap(1).unwrap();
        g.right - g.left
    };
    let (w1, w2) = (width(1e-3), width(2e-3));
    assert!((w2 / w1 - 2.0).abs() <= 0.2, "{w1} {w2}");
    // first-order theory: width 2|q̂_1|·2 = 2γ
    assert!((w1 / 2e-3 - 1.0).abs() <= 0.1, "{w1}");
}

#[test]
fn kdv_self_convergence() {
    let u0 = KdvState::from_profile(&PeriodicProfile::cos_mode(1, 1.0), 256).unwrap();
    let err = estimate_time_error(&u0, 0.1, toda_kdv::kdv::DEFAULT_DT).unwrap();
    // at most 1e-9 per unit time
    assert!(err <= 1e-10, "{err}");
}
