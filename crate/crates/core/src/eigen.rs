//! Dense symmetric eigenvalues: Householder tridiagonalization followed by
//! the implicit-shift QL iteration.

use crate::error::{Error, Result};

/// Iteration cap per eigenvalue in the QL sweep.
const MAX_QL_ITERATIONS: usize = 60;

/// All eigenvalues of the symmetric `n × n` matrix stored row-major in `a`,
/// sorted ascending. Only the lower triangle is read; `a` is overwritten.
pub fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = householder_tridiagonal(a, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reduces the lower triangle of `a` to a symmetric tridiagonal matrix and
/// returns `(diagonal, subdiagonal)`, where `subdiagonal[i]` couples rows
/// `i` and `i + 1` and the last entry is zero.
pub fn householder_tridiagonal(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l == 0 {
            e[i] = a[i * n];
            continue;
        }
        let scale: f64 = a[i * n..i * n + i].iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            e[i] = a[i * n + l];
            continue;
        }
        let mut h = 0.0;
        for k in 0..=l {
            a[i * n + k] /= scale;
            h += a[i * n + k] * a[i * n + k];
        }
        let f = a[i * n + l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        u[..=l].copy_from_slice(&a[i * n..i * n + i]);

        // p = A u / h using the lower triangle row by row.
        for v in e.iter_mut().take(l + 1) {
            *v = 0.0;
        }
        for j in 0..=l {
            let row = &a[j * n..j * n + j + 1];
            let uj = u[j];
            let mut acc = row[j] * uj;
            for k in 0..j {
                acc += row[k] * u[k];
                e[k] += row[k] * uj;
            }
            e[j] += acc;
        }
        let mut f = 0.0;
        for j in 0..=l {
            e[j] /= h;
            f += e[j] * u[j];
        }
        let hh = f / (h + h);
        for j in 0..=l {
            e[j] -= hh * u[j];
        }
        // A ← A − u qᵀ − q uᵀ on the lower triangle.
        for j in 0..=l {
            let (uj, qj) = (u[j], e[j]);
            let row = &mut a[j * n..j * n + j + 1];
            for k in 0..=j {
                row[k] -= uj * e[k] + qj * u[k];
            }
        }
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    // shift so that e[i] couples i and i+1
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    (d, e)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal
/// matrix; eigenvalues are left (unsorted) in `d`.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    let mut total = 0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenNoConvergence { iterations: total });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_2x2() {
        let mut a = vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        assert_eq!(symmetric_eigenvalues(&mut a, 3).unwrap(), vec![-1.0, 2.0, 3.0]);
        let mut b = vec![2.0, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(&mut b, 2).unwrap();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn free_chain_closed_form() {
        // Path graph: eigenvalues 2 cos(kπ/(n+1)).
        let n = 50;
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[(i + 1) * n + i] = 1.0;
            a[i * n + i + 1] = 1.0;
        }
        let ev = symmetric_eigenvalues(&mut a, n).unwrap();
        let mut want: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in ev.iter().zip(&want) {
            assert_abs_diff_eq!(*g, *w, epsilon = 1e-13);
        }
    }

    #[test]
    fn trace_and_frobenius_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let frob: f64 = a.iter().map(|x| x * x).sum();
        let ev = symmetric_eigenvalues(&mut a.clone(), n).unwrap();
        assert_abs_diff_eq!(ev.iter().sum::<f64>(), trace, epsilon = 1e-12);
        assert_abs_diff_eq!(ev.iter().map(|x| x * x).sum::<f64>(), frob, epsilon = 1e-11);
    }
}
