//! Hölder deviations of isotropic kernels under smoothing measures, and
//! power-law fits of their decay in `t`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::kernels::gaussian_eigenvalue_closed;
use crate::multipliers::{least_squares, Multiplier};
use crate::spectra::Spectrum;
use crate::sphere_math::{bessel_i_upper_bound, check_angle, fill_gegenbauer, SphereDim};

pub const DEFAULT_UGRID: usize = 201;
pub const DEFAULT_TGRID: usize = 20;
pub const DEFAULT_T_RANGE: (f64, f64) = (1e-3, 1e-1);

/// `n` Chebyshev extrema `cos(j pi / (n-1))`, from `1` down to `-1`.
pub fn chebyshev_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(domain!("Chebyshev grid needs at least 2 points, got {n}"));
    }
    let h = PI / (n - 1) as f64;
    let mut u: Vec<f64> = (0..n).map(|j| libm::cos(j as f64 * h)).collect();
    u[0] = 1.0;
    u[n - 1] = -1.0;
    if n % 2 == 1 {
        u[n / 2] = 0.0;
    }
    Ok(u)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(domain!("log grid needs 0 < lo < hi, got [{lo}, {hi}]"));
    }
    if n < 2 {
        return Err(domain!("log grid needs at least 2 points, got {n}"));
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    let step = (b - a) / (n - 1) as f64;
    let mut t: Vec<f64> = (0..n).map(|i| libm::exp(a + i as f64 * step)).collect();
    t[0] = lo;
    t[n - 1] = hi;
    Ok(t)
}

/// Coefficients `lambda_k d_k / omega_m (1 - mu_t^k)` of the deviation series.
fn deviation_coefficients<M: Multiplier + ?Sized>(s: &Spectrum, f: &M, t: f64) -> Result<Vec<f64>> {
    let m = s.m();
    if f.m() != m {
        return Err(Error::Dimension {
            expected: m.get(),
            found: f.m().get(),
        });
    }
    check_angle(t)?;
    let kmax = s.kmax().unwrap_or(0);
    let defects = f.defects(t, kmax)?;
    let w = m.volume();
    Ok(s.entries()
        .iter()
        .zip(&defects)
        .map(|(e, d)| e.eigenvalue * e.multiplicity as f64 / w * d)
        .collect())
}

/// `max_u |sum_k lambda_k (d_k / omega_m) (mu_t^k - 1) P_k(u)|`, the
/// deviation `|(K(x, .) * mu_t)(y) - K(x, y)|` maximized over `u = x . y`.
pub fn holder_deviation<M: Multiplier + ?Sized>(
    s: &Spectrum,
    f: &M,
    t: f64,
    ugrid: &[f64],
) -> Result<f64> {
    if ugrid.is_empty() {
        return Err(domain!("u grid must be nonempty"));
    }
    if let Some(u) = ugrid.iter().find(|u| !(-1.0..=1.0).contains(*u)) {
        return Err(domain!("u grid points must lie in [-1, 1], got {u}"));
    }
    let a = deviation_coefficients(s, f, t)?;
    let kmax = a.len() - 1;
    let mut p = Vec::with_capacity(kmax + 1);
    let mut best = 0.0f64;
    for &u in ugrid {
        fill_gegenbauer(s.m().get(), kmax, u, &mut p);
        let v: f64 = a.iter().zip(&p).map(|(x, y)| x * y).sum();
        best = best.max(v.abs());
    }
    if !best.is_finite() {
        return Err(Error::NonFinite("Hölder deviation"));
    }
    Ok(best)
}

/// Deviations at each `t` of `tgrid` on the default Chebyshev `u` grid.
pub fn deviation_table<M: Multiplier + ?Sized>(
    s: &Spectrum,
    f: &M,
    tgrid: &[f64],
) -> Result<Vec<f64>> {
    let ugrid = chebyshev_grid(DEFAULT_UGRID)?;
    tgrid
        .iter()
        .map(|&t| holder_deviation(s, f, t, &ugrid))
        .collect()
}

/// Least-squares fit of `log deviation = log b + rho log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderFit {
    pub rho_hat: f64,
    pub b_hat: f64,
    /// Largest absolute residual of the fit, in natural-log units.
    pub residual: f64,
    pub t_range: (f64, f64),
    /// `t` values dropped because their deviation was zero.
    pub excluded: Vec<f64>,
    /// `(t, deviation)` pairs, excluded points included.
    pub samples: Vec<(f64, f64)>,
}

impl HolderFit {
    pub fn fitted(&self, t: f64) -> f64 {
        self.b_hat * libm::pow(t, self.rho_hat)
    }
}

fn check_tgrid(tgrid: &[f64]) -> Result<(f64, f64)> {
    if tgrid.len() < 5 {
        return Err(domain!(
            "t grid needs at least 5 points, got {}",
            tgrid.len()
        ));
    }
    for &t in tgrid {
        check_angle(t)?;
    }
    let lo = tgrid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tgrid.iter().copied().fold(0.0, f64::max);
    if hi < 10.0 * lo {
        return Err(domain!(
            "t grid must span at least one decade, got [{lo}, {hi}]"
        ));
    }
    Ok((lo, hi))
}

/// Fits precomputed deviations; the grid rules are those of [`estimate_exponent`].
pub fn fit_power_law(tgrid: &[f64], deviations: &[f64]) -> Result<HolderFit> {
    if tgrid.len() != deviations.len() {
        return Err(Error::Dimension {
            expected: tgrid.len(),
            found: deviations.len(),
        });
    }
    let t_range = check_tgrid(tgrid)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut excluded = Vec::new();
    for (&t, &d) in tgrid.iter().zip(deviations) {
        if d > 0.0 {
            x.push(libm::log(t));
            y.push(libm::log(d));
        } else {
            excluded.push(t);
        }
    }
    if x.is_empty() {
        return Err(Error::Degenerate(
            "deviation vanishes on the whole t grid, so the exponent is undefined".into(),
        ));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate(alloc::format!(
            "only {} t value with nonzero deviation",
            x.len()
        )));
    }
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(HolderFit {
        rho_hat: slope,
        b_hat: libm::exp(intercept),
        residual,
        t_range,
        excluded,
        samples: tgrid
            .iter()
            .copied()
            .zip(deviations.iter().copied())
            .collect(),
    })
}

/// Fits `deviation ~ b t^rho` over `tgrid`.
pub fn estimate_exponent<M: Multiplier + ?Sized>(
    s: &Spectrum,
    f: &M,
    tgrid: &[f64],
) -> Result<HolderFit> {
    check_tgrid(tgrid)?;
    let d = deviation_table(s, f, tgrid)?;
    fit_power_law(tgrid, &d)
}

/// Change in the maximized deviation when the `u` grid is refined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRefinement {
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
}

pub fn grid_refinement<M: Multiplier + ?Sized>(
    s: &Spectrum,
    f: &M,
    t: f64,
    coarse: usize,
    fine: usize,
) -> Result<GridRefinement> {
    let c = holder_deviation(s, f, t, &chebyshev_grid(coarse)?)?;
    let d = holder_deviation(s, f, t, &chebyshev_grid(fine)?)?;
    let relative_change = if d > 0.0 { (d - c).abs() / d } else { 0.0 };
    Ok(GridRefinement {
        coarse: c,
        fine: d,
        relative_change,
    })
}

/// `max_t deviation(t) / t^rho` over `tgrid`, with its argmax.
pub fn max_ratio<M: Multiplier + ?Sized>(
    s: &Spectrum,
    f: &M,
    rho: f64,
    tgrid: &[f64],
) -> Result<(f64, f64)> {
    if tgrid.is_empty() {
        return Err(domain!("t grid must be nonempty"));
    }
    let d = deviation_table(s, f, tgrid)?;
    Ok(tgrid
        .iter()
        .zip(&d)
        .map(|(&t, &v)| (t, v / libm::pow(t, rho)))
        .fold(
            (tgrid[0], f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        ))
}

/// `B = (sum_k k^2 lambda_k d_k)^{1/2}` for the Gaussian kernel, with eigenvalues
/// relative to the normalized measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianB {
    pub b: f64,
    /// Partial sum `sum_{k <= kmax} k^2 lambda_k d_k`.
    pub partial: f64,
    /// Upper bound on the omitted terms.
    pub tail: f64,
}

const B_TAIL_TOL: f64 = 1e-14;

/// Partial sum of `B^2` up to `kmax`, with the tail bounded through
/// `I_nu(x) <= (x/2)^nu e^x / Gamma(nu+1)`.
pub fn gaussian_b_bound(m: SphereDim, sigma: f64, kmax: usize) -> Result<GaussianB> {
    let mut partial = 0.0;
    for k in 1..=kmax {
        let kk = (k * k) as f64;
        partial += kk * gaussian_eigenvalue_closed(m, sigma, k)? * m.harmonic_dim(k)? as f64;
    }
    let c = 2.0 / (sigma * sigma);
    let mf = m.get() as f64;
    // lambda_k <= sigma^{m-1} Gamma((m+1)/2) (c/2)^nu / Gamma(nu+1), nu = k + (m-1)/2
    let scale = libm::exp(
        (mf - 1.0) * libm::log(sigma) + crate::sphere_math::ln_gamma(0.5 * (mf + 1.0)) - c,
    );
    let j = kmax + 1;
    let nu = j as f64 + 0.5 * (mf - 1.0);
    let first = (j * j) as f64 * scale * bessel_i_upper_bound(nu, c) * m.harmonic_dim(j)? as f64;
    // consecutive bounded terms shrink by at most this factor from j on
    let jf = j as f64;
    let q = ((jf + 1.0) / jf) * ((jf + 1.0) / jf) * m.harmonic_dim(j + 1)? as f64
        / m.harmonic_dim(j)? as f64
        * (0.5 * c)
        / (nu + 1.0);
    if !(q < 1.0) {
        return Err(domain!(
            "Gaussian B series has not started to converge at kmax={kmax}; increase kmax"
        ));
    }
    let tail = first / (1.0 - q);
    if !(tail <= B_TAIL_TOL * partial) {
        return Err(domain!(
            "Gaussian B tail bound {tail:e} exceeds {B_TAIL_TOL:e} of the partial sum at kmax={kmax}; increase kmax"
        ));
    }
    Ok(GaussianB {
        b: libm::sqrt(partial),
        partial,
        tail,
    })
}
