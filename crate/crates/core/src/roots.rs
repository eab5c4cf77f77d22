//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on `[a, b]`; `f(a)` and `f(b)` must not share a sign.
///
/// Terminates when the bracket is below `xtol + 4 ε |x|` or `f` vanishes.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::InvalidBracket { lo: a, hi: b });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}

/// Finds every sign change of `f` sampled on `grid` (ascending) and refines
/// each with Brent. Exact zeros on grid points are reported once.
pub fn sign_change_roots<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], xtol: f64) -> Result<Vec<f64>> {
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            if i == 0 || values[i - 1] != 0.0 {
                roots.push(grid[i]);
            }
            continue;
        }
        if fb != 0.0 && fa.signum() != fb.signum() {
            roots.push(brent(&mut f, grid[i], grid[i + 1], xtol)?);
        }
    }
    if let (Some(&last), Some(&x)) = (values.last(), grid.last()) {
        if last == 0.0 && values.len() > 1 && values[values.len() - 2] != 0.0 {
            roots.push(x);
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn brent_rejects_bad_bracket() {
        assert!(matches!(brent(|x| x * x + 1.0, -1.0, 1.0, 0.0), Err(Error::InvalidBracket { .. })));
    }

    #[test]
    fn sign_changes_of_sine() {
        let grid: Vec<f64> = (0..=100).map(|i| 0.1 + i as f64 * 0.1).collect();
        let roots = sign_change_roots(f64::sin, &grid, 0.0).unwrap();
        assert_eq!(roots.len(), 3);
        for (k, r) in roots.iter().enumerate() {
            assert_abs_diff_eq!(*r, std::f64::consts::PI * (k + 1) as f64, epsilon = 1e-14);
        }
    }
}
