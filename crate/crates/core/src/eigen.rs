//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by implicit-shift QL.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues of a symmetric tridiagonal matrix, sorted nonincreasing.
///
/// `diag` has length n, `off` has length n - 1 (`off[i]` couples rows i and i+1).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::Dimension {
            expected: n - 1,
            found: off.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = Vec::with_capacity(n);
    e.extend_from_slice(off);
    e.push(0.0);
    implicit_ql(&mut d, &mut e)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Eigenvalues of the symmetric `n x n` matrix stored row-major in `a`,
/// sorted nonincreasing. Only the lower triangle is read.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::Dimension {
            expected: n * n,
            found: a.len(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    for i in 0..n {
        for j in 0..i {
            a[j * n + i] = a[i * n + j];
        }
    }
    let (mut d, mut e) = householder_tridiagonalize(&mut a, n);
    implicit_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Reduces `a` in place and returns (diagonal, subdiagonal padded with a trailing 0).
fn householder_tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = alloc::vec![0.0; n];
    let mut p = alloc::vec![0.0; n];
    let mut off = alloc::vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let mut scale = 0.0;
        for i in lo..n {
            scale += a[i * n + k].abs();
        }
        if scale == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let mut sigma = 0.0;
        for i in lo..n {
            v[i] = a[i * n + k] / scale;
            sigma += v[i] * v[i];
        }
        let alpha = if v[lo] >= 0.0 {
            -libm::sqrt(sigma)
        } else {
            libm::sqrt(sigma)
        };
        off[k] = alpha * scale;
        // H = I - beta v v^T with v[lo] shifted so that H x = alpha e_lo.
        let h = sigma - v[lo] * alpha;
        v[lo] -= alpha;
        let beta = 1.0 / h;

        // p = beta A v on the trailing block.
        for i in lo..n {
            let row = &a[i * n..i * n + n];
            let mut s = 0.0;
            for j in lo..n {
                s += row[j] * v[j];
            }
            p[i] = beta * s;
        }
        let mut vp = 0.0;
        for i in lo..n {
            vp += v[i] * p[i];
        }
        let kk = 0.5 * beta * vp;
        for i in lo..n {
            p[i] -= kk * v[i];
        }
        for i in lo..n {
            let (vi, pi) = (v[i], p[i]);
            let row = &mut a[i * n..i * n + n];
            for j in lo..n {
                row[j] -= vi * p[j] + pi * v[j];
            }
        }
        a[lo * n + k] = off[k];
        a[k * n + lo] = off[k];
        for i in lo + 1..n {
            a[i * n + k] = 0.0;
            a[k * n + i] = 0.0;
        }
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    off[n - 1] = 0.0;
    let d = (0..n).map(|i| a[i * n + i]).collect();
    (d, off)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
/// On return `d` holds the (unsorted) eigenvalues.
fn implicit_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    // off-diagonals below eps ||T|| are dropped even next to tiny diagonals:
    // clusters at roundoff level otherwise stall the shifts
    let floor = f64::EPSILON
        * d.iter()
            .zip(e.iter())
            .fold(0.0f64, |a, (x, y)| a.max(x.abs() + y.abs()));
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Eigensolver(MAX_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
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
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(domain!("eigensolver produced non-finite values"));
    }
    Ok(())
}
