//! Special functions and spherical geometry on `S^m ⊂ R^{m+1}`.
//!
//! Gegenbauer polynomials are always normalized so that `P_k(1) = 1`, and
//! are indexed by the sphere dimension: `gegenbauer(m, k, u)` is
//! `P_k^{(m-1)/2}(u)`. The shifted index `(m+1)/2` used by the cap and
//! Steklov multipliers is therefore `gegenbauer(m + 2, ..)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::eigen::tridiagonal_eigenvalues;
use crate::error::{domain, Error, Result};
#[cfg(test)]
use crate::integrate::AdaptiveSimpson;

/// Dimension `m` of the sphere `S^m`, with `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SphereDim(usize);

impl SphereDim {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(domain!("sphere dimension must be at least 2, got {m}"));
        }
        Ok(Self(m))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Volume `omega_m` of the sphere.
    pub fn volume(self) -> f64 {
        volume_unchecked(self.0)
    }

    /// Volume `omega_{m-1}` of the equatorial sphere.
    pub fn equator_volume(self) -> f64 {
        volume_unchecked(self.0 - 1)
    }

    pub fn harmonic_dim(self, k: usize) -> Result<u64> {
        harmonic_dim(self.0, k)
    }
}

impl core::fmt::Display for SphereDim {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "S^{}", self.0)
    }
}

fn volume_unchecked(m: usize) -> f64 {
    // omega_m = 2 pi omega_{m-2} / (m - 1), omega_0 = 2, omega_1 = 2 pi
    let mut w = if m % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut j = if m % 2 == 0 { 2 } else { 3 };
    while j <= m {
        w *= 2.0 * PI / (j - 1) as f64;
        j += 2;
    }
    w
}

/// Surface volume `omega_m = 2 pi^{(m+1)/2} / Gamma((m+1)/2)` of `S^m`.
pub fn surface_volume(m: usize) -> Result<f64> {
    if m < 1 {
        return Err(domain!("surface_volume needs m >= 1, got {m}"));
    }
    Ok(volume_unchecked(m))
}

fn binomial(n: u64, k: u64) -> Result<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i + 1) as u128;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial coefficient"))
}

/// Dimension `d_k^m` of the space of spherical harmonics of degree `k` on `S^m`.
///
/// Computed as `binom(k+m, m) - binom(k+m-2, m)` (homogeneous polynomials in
/// `m+1` variables of degree `k`, minus those divisible by `|x|^2`).
pub fn harmonic_dim(m: usize, k: usize) -> Result<u64> {
    if m < 1 {
        return Err(domain!("harmonic_dim needs m >= 1, got {m}"));
    }
    let (m, k) = (m as u64, k as u64);
    let top = binomial(k + m, m)?;
    let lower = if k >= 2 { binomial(k - 2 + m, m)? } else { 0 };
    Ok(top - lower)
}

/// `P_k^{(m-1)/2}(u)` with `P_k(1) = 1`.
pub fn gegenbauer(m: usize, k: usize, u: f64) -> Result<f64> {
    check_gegenbauer_args(m, u)?;
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = u;
    for j in 1..k {
        let next = recurrence_step(m, j, u, cur, prev);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// All degrees `0..=kmax` of `P_k^{(m-1)/2}(u)` in one recurrence pass.
pub fn gegenbauer_all(m: usize, kmax: usize, u: f64) -> Result<Vec<f64>> {
    check_gegenbauer_args(m, u)?;
    let mut out = Vec::with_capacity(kmax + 1);
    fill_gegenbauer(m, kmax, u, &mut out);
    Ok(out)
}

/// Recurrence without argument checks; `out` is cleared first.
pub(crate) fn fill_gegenbauer(m: usize, kmax: usize, u: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if kmax == 0 {
        return;
    }
    out.push(u);
    for j in 1..kmax {
        let next = recurrence_step(m, j, u, out[j], out[j - 1]);
        out.push(next);
    }
}

#[inline]
fn recurrence_step(m: usize, j: usize, u: f64, cur: f64, prev: f64) -> f64 {
    let (j, m) = (j as f64, m as f64);
    ((2.0 * j + m - 1.0) * u * cur - j * prev) / (j + m - 1.0)
}

fn check_gegenbauer_args(m: usize, u: f64) -> Result<()> {
    if m < 1 {
        return Err(domain!("Gegenbauer dimension must be >= 1, got {m}"));
    }
    if !(-1.0..=1.0).contains(&u) {
        return Err(domain!("Gegenbauer argument must lie in [-1, 1], got {u}"));
    }
    Ok(())
}

/// `1 - P_k^{(m-1)/2}(cos t)` for `k = 0..=kmax`, evaluated without the
/// cancellation of forming `P_k` first. Accurate for small `t`.
pub fn gegenbauer_defects(m: usize, kmax: usize, t: f64) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(domain!("Gegenbauer dimension must be >= 1, got {m}"));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    let half = libm::sin(0.5 * t);
    let v = 2.0 * half * half; // 1 - cos t
    let u = 1.0 - v;
    let mut q = Vec::with_capacity(kmax + 1);
    q.push(0.0);
    if kmax == 0 {
        return Ok(q);
    }
    q.push(v);
    let mf = m as f64;
    for j in 1..kmax {
        let jf = j as f64;
        let a = 2.0 * jf + mf - 1.0;
        let next = (a * v + a * u * q[j] - jf * q[j - 1]) / (jf + mf - 1.0);
        q.push(next);
    }
    Ok(q)
}

/// Gauss rule for `∫_{-1}^{1} f(u) (1-u^2)^{(m-2)/2} du`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    m: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }
}

/// `∫_{-1}^{1} (1-u^2)^{(m-2)/2} du = omega_m / omega_{m-1}`.
pub fn weight_mass(m: usize) -> Result<f64> {
    if m < 1 {
        return Err(domain!("weight exponent needs m >= 1, got {m}"));
    }
    if m == 1 {
        return Ok(PI);
    }
    Ok(volume_unchecked(m) / volume_unchecked(m - 1))
}

/// Squared off-diagonal of the Jacobi matrix for the orthonormal polynomials
/// of weight `(1-u^2)^{lambda - 1/2}`, `lambda = (m-1)/2`.
fn jacobi_offdiag_sq(m: usize, k: usize) -> f64 {
    let lam = 0.5 * (m as f64 - 1.0);
    let k = k as f64;
    if m == 1 && k == 1.0 {
        return 0.5;
    }
    k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0))
}

/// N-node Gauss–Gegenbauer rule for the weight `(1-u^2)^{(m-2)/2}`, exact for
/// polynomials of degree `<= 2N - 1`.
///
/// Nodes start from the eigenvalues of the Jacobi matrix and are polished by
/// Newton iteration on the orthonormal three-term recurrence; weights are the
/// Christoffel numbers `1 / sum_k p_k(x_i)^2`.
pub fn gegenbauer_quadrature(m: usize, n: usize) -> Result<QuadratureRule> {
    if n < 1 {
        return Err(domain!("quadrature needs at least one node"));
    }
    let mu0 = weight_mass(m)?;
    let b: Vec<f64> = (1..n)
        .map(|k| libm::sqrt(jacobi_offdiag_sq(m, k)))
        .collect();
    let mut nodes = tridiagonal_eigenvalues(&alloc::vec![0.0; n], &b)?;
    nodes.reverse();

    let p0 = 1.0 / libm::sqrt(mu0);
    let b_last = libm::sqrt(jacobi_offdiag_sq(m, n));
    // (p_n(x), p_n'(x), sum_{k<n} p_k(x)^2)
    let eval = |x: f64| -> (f64, f64, f64) {
        let (mut p_prev, mut p) = (0.0, p0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut sum_sq = 0.0;
        let mut b_prev = 0.0;
        for &bk in b.iter().chain(core::iter::once(&b_last)) {
            sum_sq += p * p;
            let p_next = (x * p - b_prev * p_prev) / bk;
            let d_next = (p + x * d - b_prev * d_prev) / bk;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            b_prev = bk;
        }
        (p, d, sum_sq)
    };

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..50 {
            let (p, d, _) = eval(*x);
            if d == 0.0 {
                break;
            }
            let dx = p / d;
            *x -= dx;
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        let (_, _, s) = eval(*x);
        weights.push(1.0 / s);
    }
    // Enforce the exact symmetry of the rule.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    if nodes.windows(2).any(|w| w[0] >= w[1])
        || nodes.iter().any(|x| !(x.abs() < 1.0))
        || weights.iter().any(|w| !(*w > 0.0))
    {
        return Err(domain!(
            "Gauss–Gegenbauer construction failed for m={m}, N={n}"
        ));
    }
    Ok(QuadratureRule { m, nodes, weights })
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln I_nu(x)` from the ascending series, summed relative to its first term
/// so that neither very large orders nor moderately large arguments overflow.
pub fn ln_modified_bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain!("modified Bessel function needs x > 0, got {x}"));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain!("modified Bessel order must be >= 0, got {nu}"));
    }
    let ln_first = nu * libm::log(0.5 * x) - ln_gamma(nu + 1.0);
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 0.0;
    loop {
        term *= q / ((j + 1.0) * (nu + j + 1.0));
        sum += term;
        j += 1.0;
        let decreasing = q < (j + 1.0) * (nu + j + 1.0);
        if decreasing && term < 1e-18 * sum {
            break;
        }
        if !sum.is_finite() || j > 1e6 {
            return Err(Error::NonFinite("modified Bessel series"));
        }
    }
    Ok(ln_first + libm::log(sum))
}

/// Modified Bessel function of the first kind `I_nu(x)`, `x > 0`, `nu >= 0`.
pub fn modified_bessel_i(nu: f64, x: f64) -> Result<f64> {
    let v = libm::exp(ln_modified_bessel_i(nu, x)?);
    if !v.is_finite() {
        return Err(Error::NonFinite("modified Bessel function"));
    }
    Ok(v)
}

/// Upper bound `(x/2)^nu e^x / Gamma(nu + 1)` for `I_nu(x)`, `x > 0`.
pub fn bessel_i_upper_bound(nu: f64, x: f64) -> f64 {
    libm::exp(nu * libm::log(0.5 * x) + x - ln_gamma(nu + 1.0))
}

/// Rim, cap and Steklov normalizers at angle `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapValues {
    /// `R_m(t) = omega_{m-1} sin^{m-1} t`, volume of the rim.
    pub rim: f64,
    /// `C_m(t)`, volume of the cap of angular radius `t`.
    pub cap: f64,
    /// `D_m(t) = ∫_0^t C_m(s) / R_m(s) ds`.
    pub steklov: f64,
}

pub(crate) fn check_angle(t: f64) -> Result<()> {
    if !(t > 0.0 && t < PI) {
        return Err(domain!("angle must lie in (0, pi), got {t}"));
    }
    Ok(())
}

/// Rim, cap and Steklov volumes for a fixed sphere dimension.
///
/// `C_m(t) = omega_{m-1} ∫_0^t sin^{m-1} s ds` has an entire integrand, so a
/// fixed Gauss–Legendre rule mapped to `[0, t]` reaches full precision for
/// every `t` in `(0, pi]`. `D_m(t) = ∫_0^t C_m(s)/R_m(s) ds` blows up as
/// `t -> pi` and is integrated adaptively.
#[derive(Debug, Clone, PartialEq)]
pub struct CapGeometry {
    m: SphereDim,
    legendre: QuadratureRule,
}

const CAP_NODES: usize = 40;
const STEKLOV_PANEL: f64 = 0.5;
/// `pi - PI` rounded to double.
const PI_LOW: f64 = 1.2246467991473532e-16;

impl CapGeometry {
    pub fn new(m: SphereDim) -> Result<Self> {
        Ok(Self {
            m,
            legendre: gegenbauer_quadrature(2, CAP_NODES)?,
        })
    }

    pub fn m(&self) -> SphereDim {
        self.m
    }

    /// The Gauss–Legendre rule on `[-1, 1]` used for cap integrals.
    pub(crate) fn legendre(&self) -> &QuadratureRule {
        &self.legendre
    }

    pub(crate) fn rim_unchecked(&self, t: f64) -> f64 {
        self.m.equator_volume() * libm::pow(libm::sin(t), (self.m.get() - 1) as f64)
    }

    pub(crate) fn cap_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let e = (self.m.get() - 1) as f64;
        let half = 0.5 * t;
        let s = self
            .legendre
            .integrate(|x| libm::pow(libm::sin(half * (x + 1.0)), e));
        self.m.equator_volume() * half * s
    }

    /// `C_m(s) / R_m(s)`, extended by its limit 0 at `s = 0`.
    pub(crate) fn cap_rim_ratio(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.cap_unchecked(s) / self.rim_unchecked(s)
    }

    fn legendre_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.legendre.integrate(|x| f(mid + half * x))
    }

    pub(crate) fn steklov_unchecked(&self, t: f64) -> Result<f64> {
        let half = core::f64::consts::FRAC_PI_2;
        if !(t > 0.0) {
            return Ok(0.0);
        }
        if t <= half {
            return Ok(self.legendre_on(0.0, t, |s| self.cap_rim_ratio(s)));
        }
        let head = self.legendre_on(0.0, half, |s| self.cap_rim_ratio(s));
        // Past the equator, integrate in y = ln(pi - s); C(pi - u) = omega_m - C(u).
        let total = self.m.volume();
        let tail = |y: f64| {
            let u = libm::exp(y);
            u * (total - self.cap_unchecked(u)) / self.rim_unchecked(u)
        };
        let lo = libm::log((PI - t) + PI_LOW);
        let hi = libm::log(half);
        let panels = libm::ceil((hi - lo) / STEKLOV_PANEL).max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        let sum: f64 = (0..panels)
            .map(|i| self.legendre_on(lo + i as f64 * h, lo + (i + 1) as f64 * h, tail))
            .sum();
        let v = head + sum;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("D_m"))
        }
    }

    /// `R_m(t) = omega_{m-1} sin^{m-1} t`, the volume of the rim at angle `t`.
    pub fn rim(&self, t: f64) -> Result<f64> {
        check_angle(t)?;
        Ok(self.rim_unchecked(t))
    }

    /// `C_m(t)`, the volume of a cap of angular radius `t`.
    pub fn cap(&self, t: f64) -> Result<f64> {
        check_angle(t)?;
        Ok(self.cap_unchecked(t))
    }

    /// `D_m(t)`, the normalizer that makes the Steklov mean preserve constants.
    pub fn steklov(&self, t: f64) -> Result<f64> {
        check_angle(t)?;
        self.steklov_unchecked(t)
    }

    pub fn values(&self, t: f64) -> Result<CapValues> {
        check_angle(t)?;
        Ok(CapValues {
            rim: self.rim_unchecked(t),
            cap: self.cap_unchecked(t),
            steklov: self.steklov_unchecked(t)?,
        })
    }
}

/// `(R_m(t), C_m(t), D_m(t))` for `t` in `(0, pi)`.
///
/// `D_m`'s integrand behaves like `s/m` at 0, so the lower endpoint is regular.
pub fn cap_functions(m: SphereDim, t: f64) -> Result<CapValues> {
    CapGeometry::new(m)?.values(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn surface_volumes() {
        assert!((surface_volume(1).unwrap() - 2.0 * PI).abs() <= 1e-14 * 2.0 * PI);
        assert!((surface_volume(2).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((surface_volume(3).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        for m in 1..12 {
            let closed =
                2.0 * libm::pow(PI, 0.5 * (m as f64 + 1.0)) / gamma(0.5 * (m as f64 + 1.0));
            let v = surface_volume(m).unwrap();
            assert!((v - closed).abs() < 1e-13 * closed, "m={m}");
        }
        assert!(surface_volume(0).is_err());
    }

    /// Pascal recurrence d_k^m = d_k^{m-1} + d_{k-1}^m seeded by d^1.
    fn pascal_dims(m: usize, kmax: usize) -> Vec<u64> {
        let mut row: Vec<u64> = (0..=kmax).map(|k| if k == 0 { 1 } else { 2 }).collect();
        for _ in 2..=m {
            let mut next = vec![0u64; kmax + 1];
            for k in 0..=kmax {
                next[k] = row[k] + if k > 0 { next[k - 1] } else { 0 };
            }
            row = next;
        }
        row
    }

    #[test]
    fn harmonic_dims_match_pascal_and_closed_form() {
        assert_eq!(harmonic_dim(2, 3).unwrap(), 7);
        assert_eq!(harmonic_dim(3, 2).unwrap(), 9);
        for m in 1..=7 {
            assert_eq!(harmonic_dim(m, 0).unwrap(), 1);
            let pascal = pascal_dims(m, 60);
            for k in 0..=60 {
                let d = harmonic_dim(m, k).unwrap();
                assert_eq!(d, pascal[k], "m={m} k={k}");
                if m >= 2 && k >= 1 {
                    // (2k+m-1)(k+m-2)!/(k!(m-1)!)
                    let closed = (2 * k + m - 1) as u128
                        * (1..=(m - 2) as u128).fold(1u128, |acc, i| acc * (k as u128 + i))
                        / (1..=(m - 1) as u128).product::<u128>();
                    assert_eq!(d as u128, closed, "m={m} k={k}");
                }
            }
        }
        assert!(harmonic_dim(0, 3).is_err());
    }

    #[test]
    fn harmonic_dim_overflow_is_detected() {
        assert!(matches!(harmonic_dim(60, 1 << 40), Err(Error::Overflow(_))));
    }

    #[test]
    fn dimension_bound_threshold() {
        // d_k^m <= 2 k^m from some k_0(m) on; find the smallest k_0 that works on [k_0, 200].
        for m in 2..=5 {
            let ok = |k: usize| {
                harmonic_dim(m, k).unwrap() as f64 <= 2.0 * libm::pow(k as f64, m as f64)
            };
            let k0 = (1..=200).find(|&k0| (k0..=200).all(ok)).unwrap();
            assert!(k0 <= 3, "m={m}: k0={k0}");
        }
    }

    #[test]
    fn gegenbauer_basics() {
        for m in 2..5 {
            for u in [-1.0, -0.3, 0.0, 0.7, 1.0] {
                assert_eq!(gegenbauer(m, 0, u).unwrap(), 1.0);
            }
        }
        assert!((gegenbauer(2, 2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        // m = 3: Chebyshev U_k(u)/(k+1)
        let u: f64 = 0.3;
        let th = libm::acos(u);
        let want = libm::sin(5.0 * th) / libm::sin(th) / 5.0;
        assert!((gegenbauer(3, 4, u).unwrap() - want).abs() < 1e-14);
        // m = 1: Chebyshev T_k
        assert!((gegenbauer(1, 7, u).unwrap() - libm::cos(7.0 * th)).abs() < 1e-14);
        assert!(gegenbauer(2, 3, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn gegenbauer_normalization_and_bound() {
        for m in 2..=4 {
            let at_one = gegenbauer_all(m, 200, 1.0).unwrap();
            assert!(at_one.iter().all(|p| (p - 1.0).abs() <= 1e-13));
            for i in 0..=400 {
                let u = -1.0 + i as f64 / 200.0;
                let ps = gegenbauer_all(m, 200, u.clamp(-1.0, 1.0)).unwrap();
                assert!(ps.iter().all(|p| p.abs() <= 1.0 + 1e-12), "m={m} u={u}");
            }
        }
    }

    #[test]
    fn defects_match_direct_evaluation() {
        for m in 2..=4 {
            for t in [0.3, 1.1, 2.9] {
                let q = gegenbauer_defects(m, 40, t).unwrap();
                let p = gegenbauer_all(m, 40, libm::cos(t)).unwrap();
                for k in 0..=40 {
                    assert!((q[k] - (1.0 - p[k])).abs() < 1e-12);
                }
            }
            // small angle: 1 - P_k(cos t) ~ k(k+m-1) t^2 / (2m)
            let t = 1e-6;
            let q = gegenbauer_defects(m, 10, t).unwrap();
            for k in 1..=10 {
                let lead = (k * (k + m - 1)) as f64 * t * t / (2.0 * m as f64);
                assert!((q[k] / lead - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn quadrature_small_cases() {
        let q = gegenbauer_quadrature(2, 1).unwrap();
        assert!((q.integrate(|_| 1.0) - 2.0).abs() < 1e-15);
        let q = gegenbauer_quadrature(2, 2).unwrap();
        assert!((q.integrate(|u| u * u) - 2.0 / 3.0).abs() < 1e-15);
        for m in 1..6 {
            let q = gegenbauer_quadrature(m, 7).unwrap();
            assert!(q.integrate(|u| u).abs() < 1e-15);
        }
        assert!(gegenbauer_quadrature(2, 0).is_err());
    }

    /// Beta-function moments: ∫ u^{2i} (1-u^2)^a du = B(i + 1/2, a + 1).
    fn even_moment(m: usize, j: usize) -> f64 {
        if j % 2 == 1 {
            return 0.0;
        }
        let a = 0.5 * (m as f64 - 2.0);
        let i = (j / 2) as f64;
        libm::exp(ln_gamma(i + 0.5) + ln_gamma(a + 1.0) - ln_gamma(i + a + 1.5))
    }

    #[test]
    fn quadrature_exact_on_monomials() {
        for m in 1..=6 {
            for n in [1, 2, 3, 8, 20, 45] {
                let q = gegenbauer_quadrature(m, n).unwrap();
                let mass: f64 = q.weights().iter().sum();
                let want = weight_mass(m).unwrap();
                assert!((mass - want).abs() <= 1e-12 * want, "m={m} n={n}");
                for j in 0..=(2 * n - 1).min(60) {
                    let got = q.integrate(|u| libm::pow(u, j as f64));
                    let exact = even_moment(m, j);
                    assert!(
                        (got - exact).abs() <= 1e-13 * (1.0 + exact),
                        "m={m} n={n} j={j}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_orthogonality() {
        for m in 2..=4 {
            let n = 30;
            let q = gegenbauer_quadrature(m, n).unwrap();
            let table: Vec<Vec<f64>> = q
                .nodes()
                .iter()
                .map(|&u| gegenbauer_all(m, 2 * n, u).unwrap())
                .collect();
            for j in 0..n {
                for k in 0..n {
                    if j == k || j + k > 2 * n - 1 {
                        continue;
                    }
                    let s: f64 = table
                        .iter()
                        .zip(q.weights())
                        .map(|(p, w)| w * p[j] * p[k])
                        .sum();
                    assert!(s.abs() < 1e-12, "m={m} j={j} k={k}: {s:e}");
                }
            }
        }
    }

    #[test]
    fn large_rules_are_well_formed() {
        for m in [1, 2, 3, 6] {
            let q = gegenbauer_quadrature(m, 400).unwrap();
            let mass: f64 = q.weights().iter().sum();
            assert!((mass / weight_mass(m).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_half_integer_closed_form() {
        let x: f64 = 2.0;
        let want = libm::sqrt(2.0 / (PI * x)) * libm::sinh(x);
        let got = modified_bessel_i(0.5, x).unwrap();
        assert!((got - want).abs() < 1e-14 * want);
        assert!((got - 2.0462).abs() < 1e-4);
        // I_{3/2}(x) = sqrt(2/(pi x)) (cosh x - sinh x / x)
        let x: f64 = 7.5;
        let want = libm::sqrt(2.0 / (PI * x)) * (libm::cosh(x) - libm::sinh(x) / x);
        assert!((modified_bessel_i(1.5, x).unwrap() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_small_argument() {
        let x: f64 = 1e-3;
        let got = modified_bessel_i(0.0, x).unwrap();
        assert!((got - (1.0 + x * x / 4.0)).abs() < 1e-13);
    }

    #[test]
    fn bessel_upper_bound_on_lattice() {
        for nu in [0.5, 1.0, 5.5] {
            for x in [0.1, 2.0, 10.0] {
                assert!(modified_bessel_i(nu, x).unwrap() < bessel_i_upper_bound(nu, x));
            }
        }
    }

    #[test]
    fn bessel_domain() {
        assert!(modified_bessel_i(1.0, 0.0).is_err());
        assert!(modified_bessel_i(1.0, -2.0).is_err());
        assert!(modified_bessel_i(-1.0, 2.0).is_err());
    }

    #[test]
    fn cap_volume_two_sphere() {
        let m = SphereDim::new(2).unwrap();
        for t in [1e-3, 0.4, 1.5, 3.0] {
            let c = CapGeometry::new(m).unwrap().cap(t).unwrap();
            let want = 2.0 * PI * (1.0 - libm::cos(t));
            assert!((c - want).abs() <= 1e-13 * want.max(1e-3), "t={t}");
        }
        let c = CapGeometry::new(m).unwrap().cap_unchecked(PI);
        assert!((c - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn cap_volume_small_angle_and_full() {
        for m in 2..6 {
            let d = SphereDim::new(m).unwrap();
            let t = 1e-4;
            let ratio = CapGeometry::new(d).unwrap().cap(t).unwrap() / libm::pow(t, m as f64);
            let want = d.equator_volume() / m as f64;
            assert!((ratio / want - 1.0).abs() < 1e-6);
            let full = CapGeometry::new(d).unwrap().cap_unchecked(PI);
            assert!((full / d.volume() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_volume_matches_adaptive_simpson() {
        for m in 2..=7 {
            let d = SphereDim::new(m).unwrap();
            let g = CapGeometry::new(d).unwrap();
            for t in [1e-3, 0.2, 1.0, 2.5, 3.1] {
                let oracle = d.equator_volume()
                    * AdaptiveSimpson::with_tolerances(0.0, 1e-14)
                        .integrate(|s| libm::pow(libm::sin(s), (m - 1) as f64), 0.0, t)
                        .unwrap();
                let got = g.cap(t).unwrap();
                assert!((got - oracle).abs() <= 1e-13 * oracle, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn cap_volume_bounds_times_t_pow_m() {
        // (omega_{m-1}/m)(2/pi)^{m-1} t^m <= C_m(t) <= omega_{m-1} t^m.
        // The lower bound uses sin s >= 2s/pi, so it only holds up to pi/2;
        // near pi the cap volume saturates at omega_m while t^m keeps growing.
        for m in 2..=5 {
            let d = SphereDim::new(m).unwrap();
            let g = CapGeometry::new(d).unwrap();
            let w = d.equator_volume();
            let lower = |t: f64| {
                w / m as f64 * libm::pow(2.0 / PI, (m - 1) as f64) * libm::pow(t, m as f64)
            };
            for i in 1..=60 {
                let t = PI * i as f64 / 60.0;
                let c = g.cap(t.min(PI - 1e-12)).unwrap();
                assert!(c <= w * libm::pow(t, m as f64));
                if t <= PI / 2.0 {
                    assert!(c >= lower(t), "m={m} t={t}");
                }
            }
            assert!(g.cap(PI - 1e-12).unwrap() < lower(PI));
        }
    }

    #[test]
    fn cap_functions_are_increasing() {
        for m in 2..=4 {
            let d = SphereDim::new(m).unwrap();
            let mut last = (0.0, 0.0);
            for i in 1..30 {
                let t = 0.1 * i as f64;
                let v = cap_functions(d, t).unwrap();
                assert!(v.cap > last.0 && v.steklov > last.1);
                assert!(
                    (v.rim - d.equator_volume() * libm::pow(libm::sin(t), (m - 1) as f64)).abs()
                        < 1e-14
                );
                last = (v.cap, v.steklov);
            }
        }
        let d = SphereDim::new(2).unwrap();
        assert!(cap_functions(d, 0.0).is_err());
        assert!(cap_functions(d, PI).is_err());
    }

    #[test]
    fn steklov_normalizer_matches_simpson() {
        for m in [3, 4, 6] {
            let g = CapGeometry::new(SphereDim::new(m).unwrap()).unwrap();
            for t in [1e-3, 0.3, 1.2, core::f64::consts::FRAC_PI_2, 2.0, 2.9] {
                let want = AdaptiveSimpson::with_tolerances(0.0, 1e-13)
                    .integrate(|s| g.cap_rim_ratio(s), 0.0, t)
                    .unwrap();
                let got = g.steklov(t).unwrap();
                assert!(
                    (got - want).abs() <= 1e-11 * want,
                    "m={m} t={t}: {got} vs {want}"
                );
            }
            // near pi, D_m grows like (pi - t)^(2-m) / (m - 2) times omega_m / omega_{m-1}
            let e = 1e-8;
            let lead =
                SphereDim::new(m).unwrap().volume() / SphereDim::new(m).unwrap().equator_volume();
            let got =
                g.steklov(PI - e).unwrap() * (m as f64 - 2.0) * libm::pow(e, m as f64 - 2.0) / lead;
            assert!((got - 1.0).abs() < 1e-6, "m={m}: {got}");
        }
    }

    #[test]
    fn steklov_normalizer_two_sphere() {
        // m = 2: C/R = (1 - cos s)/sin s = tan(s/2), so D = -2 ln cos(t/2)
        let d = SphereDim::new(2).unwrap();
        for t in [1e-4, 0.01, 0.5, 2.0, 3.0] {
            let q = libm::sin(0.25 * t);
            let want = -2.0 * libm::log1p(-2.0 * q * q);
            let got = CapGeometry::new(d).unwrap().steklov(t).unwrap();
            assert!((got - want).abs() <= 1e-11 * want, "t={t}: {got} vs {want}");
        }
        for gap in [1e-3, 1e-6, 1e-9, 1e-12, 1e-15] {
            let t = PI - gap;
            let e = (PI - t) + PI_LOW;
            let want = -2.0 * libm::log(libm::sin(0.5 * e));
            let got = CapGeometry::new(d).unwrap().steklov(t).unwrap();
            assert!((got - want).abs() <= 1e-11 * want, "t={t}: {got} vs {want}");
        }
    }
}
