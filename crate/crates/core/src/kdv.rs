//! KdV `u_t = 6 u u_x − u_xxx` on the unit circle.
//!
//! Fourier collocation with 2/3-rule dealiasing and fourth-order
//! exponential time differencing (ETDRK4); the φ-functions are evaluated
//! by contour averaging so that small `hL` causes no cancellation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::PeriodicProfile;
use crate::toda::{build_jacobi, dense_spectrum};

pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_DT: f64 = 2.5e-5;
const CONTOUR_POINTS: usize = 32;
const BLOW_UP: f64 = 1e8;

/// Spatial resolution and time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdvParams {
    pub grid: usize,
    pub dt: f64,
}

impl Default for KdvParams {
    fn default() -> Self {
        KdvParams { grid: DEFAULT_GRID, dt: DEFAULT_DT }
    }
}

/// Solution snapshot, stored as Fourier coefficients `û_k` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct KdvState {
    hat: Vec<Complex64>,
    t: f64,
}

fn wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

impl KdvState {
    /// Projects a profile onto an `m`-point grid (`m` a power of two,
    /// `m ≥ 8·degree`).
    pub fn from_profile(p: &PeriodicProfile, m: usize) -> Result<Self> {
        if !m.is_power_of_two() || m < 8 {
            return Err(Error::InvalidArgument(format!("grid size {m} must be a power of two ≥ 8")));
        }
        if m < 8 * p.degree() {
            return Err(Error::InvalidArgument(format!("grid size {m} below 8 × profile degree {}", p.degree())));
        }
        let coeffs = p.complex_coefficients();
        let k = p.degree();
        let mut hat = vec![Complex64::new(0.0, 0.0); m];
        for (idx, c) in coeffs.iter().enumerate() {
            let freq = idx as i64 - k as i64;
            hat[freq.rem_euclid(m as i64) as usize] = *c;
        }
        Ok(KdvState { hat, t: 0.0 })
    }

    pub fn grid_size(&self) -> usize {
        self.hat.len()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.hat
    }

    /// Grid values `u(m/M)`.
    pub fn values(&self) -> Vec<f64> {
        let m = self.hat.len();
        let mut buf = self.hat.clone();
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Truncates at degree `M/3` and returns the real profile.
    pub fn to_profile(&self) -> Result<PeriodicProfile> {
        let m = self.hat.len();
        let kmax = m / 3;
        let mut cos = Vec::with_capacity(kmax);
        let mut sin = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            // symmetrize: average û_k with conj(û_{−k})
            let c = 0.5 * (self.hat[k] + self.hat[m - k].conj());
            cos.push(2.0 * c.re);
            sin.push(-2.0 * c.im);
        }
        PeriodicProfile::from_fourier_capped(self.hat[0].re, cos, sin, kmax)
    }

    /// `x → −x`; composing with the flow runs KdV backwards in time.
    pub fn time_reverse(&self) -> KdvState {
        let m = self.hat.len();
        let hat = (0..m).map(|i| self.hat[(m - i) % m]).collect();
        KdvState { hat, t: self.t }
    }

    pub fn scale(&self, factor: f64) -> KdvState {
        KdvState { hat: self.hat.iter().map(|c| c * factor).collect(), t: self.t }
    }

    /// Max-norm distance between grid values.
    pub fn max_distance(&self, other: &KdvState) -> f64 {
        self.values().iter().zip(other.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `(m1, m2, h) = (∫u, ∫u², ∫ u_x²/2 + u³)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Invariants {
    pub m1: f64,
    pub m2: f64,
    pub h: f64,
}

pub fn conserved_quantities(u: &KdvState) -> Invariants {
    let m = u.hat.len();
    let m1 = u.hat[0].re;
    let m2 = u.hat.iter().map(|c| c.norm_sqr()).sum();
    let kinetic: f64 = (0..m)
        .map(|i| {
            let k = 2.0 * PI * wavenumber(i, m) as f64;
            0.5 * k * k * u.hat[i].norm_sqr()
        })
        .sum();
    let values = u.values();
    let cubic = values.iter().map(|v| v * v * v).sum::<f64>() / m as f64;
    Invariants { m1, m2, h: kinetic + cubic }
}

/// ETDRK4 integrator for a fixed grid and step.
pub struct KdvSolver {
    m: usize,
    h: f64,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    /// `3i·2πk` inside the 2/3 band, zero outside.
    nonlinear: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl KdvSolver {
    pub fn new(m: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 + 0.5) * 2.0 / CONTOUR_POINTS as f64))
            .collect();
        let one = Complex64::new(1.0, 0.0);
        let cut = m as i64 / 3;
        let mut s = KdvSolver {
            m,
            h,
            e: Vec::with_capacity(m),
            e2: Vec::with_capacity(m),
            q: Vec::with_capacity(m),
            f1: Vec::with_capacity(m),
            f2: Vec::with_capacity(m),
            f3: Vec::with_capacity(m),
            nonlinear: Vec::with_capacity(m),
            forward,
            inverse,
        };
        for i in 0..m {
            let k = wavenumber(i, m);
            let kk = 2.0 * PI * k as f64;
            let l = Complex64::new(0.0, kk * kk * kk);
            let hl = l * h;
            s.e.push(hl.exp());
            s.e2.push((hl * 0.5).exp());
            let (mut q, mut f1, mut f2, mut f3) =
                (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for r in &roots {
                let z = hl + r;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((z * 0.5).exp() - one) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let scale = h / CONTOUR_POINTS as f64;
            s.q.push(q * scale);
            s.f1.push(f1 * scale);
            s.f2.push(f2 * scale);
            s.f3.push(f3 * scale);
            s.nonlinear.push(if k.abs() < cut && 2 * k.abs() != m as i64 {
                Complex64::new(0.0, 3.0 * kk)
            } else {
                Complex64::default()
            });
        }
        s
    }

    /// `3 ∂_x (u²)` in Fourier space, dealiased.
    fn rhs(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.to_vec();
        self.inverse.process(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex64::new(c.re * c.re, 0.0);
        }
        self.forward.process(&mut buf);
        let inv_m = 1.0 / self.m as f64;
        buf.iter().zip(&self.nonlinear).map(|(c, d)| c * d * inv_m).collect()
    }

    pub fn step(&self, v: &mut [Complex64]) {
        let m = self.m;
        let nv = self.rhs(v);
        let a: Vec<Complex64> = (0..m).map(|i| self.e2[i] * v[i] + self.q[i] * nv[i]).collect();
        let na = self.rhs(&a);
        let b: Vec<Complex64> = (0..m).map(|i| self.e2[i] * v[i] + self.q[i] * na[i]).collect();
        let nb = self.rhs(&b);
        let c: Vec<Complex64> = (0..m).map(|i| self.e2[i] * a[i] + self.q[i] * (2.0 * nb[i] - nv[i])).collect();
        let nc = self.rhs(&c);
        for i in 0..m {
            v[i] = self.e[i] * v[i] + nv[i] * self.f1[i] + 2.0 * (na[i] + nb[i]) * self.f2[i] + nc[i] * self.f3[i];
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }
}

/// Evolves `u0` by `t_final` with steps no larger than `dt`.
pub fn kdv_evolve(u0: &KdvState, t_final: f64, dt: f64) -> Result<KdvState> {
    if !(t_final >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("need t_final ≥ 0 and dt > 0, got {t_final}, {dt}")));
    }
    if t_final == 0.0 {
        return Ok(u0.clone());
    }
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let solver = KdvSolver::new(u0.grid_size(), h);
    let mut v = u0.hat.clone();
    for s in 0..steps {
        solver.step(&mut v);
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite() || c.norm() > BLOW_UP) {
            return Err(Error::BlowUp { last_valid_time: u0.t + s as f64 * h });
        }
    }
    Ok(KdvState { hat: v, t: u0.t + t_final })
}

/// Max-norm difference between runs with `dt` and `dt/2`.
pub fn estimate_time_error(u0: &KdvState, t_final: f64, dt: f64) -> Result<f64> {
    let (a, b) = rayon::join(|| kdv_evolve(u0, t_final, dt), || kdv_evolve(u0, t_final, 0.5 * dt));
    Ok(a?.max_distance(&b?))
}

/// How the pair `u±` is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairFlow {
    /// `u±` evolve by KdV as given.
    Literal,
    /// `u±/4` evolve by KdV and are scaled back by 4; this is the
    /// isospectral flow of `−4 d²/dx² + u±`, the continuum limit of `L_N`
    /// at the spectral edges.
    EdgeScaled,
}

/// `(α_t, β_t)` from `u± = −2α ∓ β` evolved for time `t`.
pub fn evolve_pair(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    t: f64,
    flow: PairFlow,
    params: KdvParams,
) -> Result<(PeriodicProfile, PeriodicProfile)> {
    let plus = alpha.combine(-2.0, beta, -1.0);
    let minus = alpha.combine(-2.0, beta, 1.0);
    let scale = match flow {
        PairFlow::Literal => 1.0,
        PairFlow::EdgeScaled => 0.25,
    };
    let run = |u: &PeriodicProfile| -> Result<KdvState> {
        let s = KdvState::from_profile(&u.scale(scale), params.grid)?;
        Ok(kdv_evolve(&s, t, params.dt)?.scale(1.0 / scale))
    };
    let (up, um) = rayon::join(|| run(&plus), || run(&minus));
    let (up, um) = (up?.to_profile()?, um?.to_profile()?);
    let alpha_t = um.combine(-0.25, &up, -0.25);
    let beta_t = um.combine(0.5, &up, -0.5);
    Ok((alpha_t, beta_t))
}

/// `max_j |λ_j(L_N^{α_t,β_t}) − λ_j(L_N^{α,β})|`.
pub fn spectral_drift(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    t: f64,
    n: usize,
    flow: PairFlow,
    params: KdvParams,
) -> Result<f64> {
    let (at, bt) = evolve_pair(alpha, beta, t, flow, params)?;
    spectral_distance(alpha, beta, &at, &bt, n)
}

/// Drift for already evolved profiles.
pub fn spectral_distance(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    alpha_t: &PeriodicProfile,
    beta_t: &PeriodicProfile,
    n: usize,
) -> Result<f64> {
    let s0 = dense_spectrum(&build_jacobi(alpha, beta, n)?)?;
    let s1 = dense_spectrum(&build_jacobi(alpha_t, beta_t, n)?)?;
    Ok(s0.values.iter().zip(&s1.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trivial_states() {
        let z = KdvState::from_profile(&PeriodicProfile::zero(), 64).unwrap();
        let out = kdv_evolve(&z, 0.1, 1e-3).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
        let c = KdvState::from_profile(&PeriodicProfile::constant(0.7), 64).unwrap();
        let out = kdv_evolve(&c, 0.1, 1e-3).unwrap();
        for v in out.values() {
            assert_abs_diff_eq!(v, 0.7, epsilon = 1e-13);
        }
    }

    #[test]
    fn invariants_closed_forms() {
        let c = KdvState::from_profile(&PeriodicProfile::constant(1.5), 32).unwrap();
        let inv = conserved_quantities(&c);
        assert_abs_diff_eq!(inv.m1, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(inv.m2, 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(inv.h, 3.375, epsilon = 1e-13);
        let u = KdvState::from_profile(&PeriodicProfile::cos_mode(1, 1.0), 32).unwrap();
        let inv = conserved_quantities(&u);
        assert_abs_diff_eq!(inv.m1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(inv.m2, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(inv.h, PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn linear_wave_is_exact() {
        // tiny amplitude: û_1 rotates by e^{i(2π)³t}
        let p = PeriodicProfile::cos_mode(1, 1e-9);
        let u = KdvState::from_profile(&p, 32).unwrap();
        let out = kdv_evolve(&u, 0.01, 1e-3).unwrap();
        let w = (2.0 * PI).powi(3) * 0.01;
        let want = Complex64::from_polar(0.5e-9, w);
        assert!((out.coefficients()[1] - want).norm() < 1e-20);
    }

    #[test]
    fn profile_round_trip() {
        let p = PeriodicProfile::from_fourier(0.0, vec![1.0, -0.3], vec![0.2]).unwrap();
        let back = KdvState::from_profile(&p, 64).unwrap().to_profile().unwrap();
        for x in [0.0, 0.1, 0.37] {
            assert_abs_diff_eq!(back.evaluate(x), p.evaluate(x), epsilon = 1e-14);
        }
        assert_eq!(back.c0(), 0.0);
    }

    #[test]
    fn reversal_round_trip() {
        let u0 = KdvState::from_profile(&PeriodicProfile::cos_mode(1, 1.0), 128).unwrap();
        let fwd = kdv_evolve(&u0, 0.02, 1e-4).unwrap();
        let back = kdv_evolve(&fwd.time_reverse(), 0.02, 1e-4).unwrap().time_reverse();
        assert!(back.max_distance(&u0) < 1e-7);
    }

    #[test]
    fn pair_identities() {
        let a = PeriodicProfile::cos_mode(1, 1.0);
        let z = PeriodicProfile::zero();
        let params = KdvParams { grid: 64, dt: 1e-3 };
        let (at, bt) = evolve_pair(&a, &z, 0.01, PairFlow::Literal, params).unwrap();
        assert!(bt.is_zero() || bt.sup_bound() < 1e-15);
        assert!(at.sup_bound() > 0.5);
        let (at, bt) = evolve_pair(&a, &PeriodicProfile::sin_mode(1, 1.0), 0.0, PairFlow::EdgeScaled, params).unwrap();
        assert_abs_diff_eq!(at.evaluate(0.2), a.evaluate(0.2), epsilon = 1e-14);
        assert_abs_diff_eq!(bt.evaluate(0.2), (2.0 * PI * 0.2).sin(), epsilon = 1e-14);
    }

    #[test]
    fn rejects_coarse_grid() {
        let p = PeriodicProfile::cos_mode(5, 1.0);
        assert!(KdvState::from_profile(&p, 32).is_err());
        assert!(KdvState::from_profile(&p, 48).is_err());
    }
}
