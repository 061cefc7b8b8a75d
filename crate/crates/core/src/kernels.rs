//! Isotropic kernel profiles `K(x, y) = K_i(x · y)` on `S^m`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::sphere_math::{self, fill_gegenbauer, QuadratureRule, SphereDim};

/// Which representation a profile carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    ClosedForm,
    PowerSeries,
    EigenSeries,
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Closed {
        label: String,
        f: ProfileFn,
    },
    Power(Vec<f64>),
    Eigen {
        m: SphereDim,
        eigenvalues: Vec<f64>,
        // lambda_k d_k / omega_m, the addition-formula weights
        scaled: Vec<f64>,
    },
}

/// A kernel profile `K_i` on `[-1, 1]`.
#[derive(Clone)]
pub struct IsotropicProfile {
    repr: Repr,
}

impl core::fmt::Debug for IsotropicProfile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match &self.repr {
            Repr::Closed { label, .. } => {
                f.debug_struct("ClosedForm").field("label", label).finish()
            }
            Repr::Power(c) => f.debug_tuple("PowerSeries").field(c).finish(),
            Repr::Eigen { m, eigenvalues, .. } => f
                .debug_struct("EigenSeries")
                .field("m", m)
                .field("eigenvalues", eigenvalues)
                .finish(),
        }
    }
}

impl IsotropicProfile {
    /// Wraps an evaluator. `f(1)` must be finite.
    pub fn closed_form<F>(label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !f(1.0).is_finite() {
            return Err(Error::NonFinite("profile value at u = 1"));
        }
        Ok(Self {
            repr: Repr::Closed {
                label: label.into(),
                f: Arc::new(f),
            },
        })
    }

    /// `sum_k coeffs[k] u^k`.
    pub fn power_series(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("power-series coefficients"));
        }
        Ok(Self {
            repr: Repr::Power(coeffs),
        })
    }

    /// Mercer form `sum_k lambda_k (d_k / omega_m) P_k(u)`.
    pub fn eigen_series(m: SphereDim, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("eigen-series coefficients"));
        }
        if let Some((k, &v)) = eigenvalues.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NotPositiveDefinite {
                degree: k,
                value: v,
            });
        }
        let w = m.volume();
        let scaled = eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| Ok(l * m.harmonic_dim(k)? as f64 / w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            repr: Repr::Eigen {
                m,
                eigenvalues,
                scaled,
            },
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::power_series(alloc::vec![c])
    }

    pub fn kind(&self) -> ProfileKind {
        match self.repr {
            Repr::Closed { .. } => ProfileKind::ClosedForm,
            Repr::Power(_) => ProfileKind::PowerSeries,
            Repr::Eigen { .. } => ProfileKind::EigenSeries,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match &self.repr {
            Repr::Closed { label, .. } => Some(label),
            _ => None,
        }
    }

    pub fn power_coefficients(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Power(c) => Some(c),
            _ => None,
        }
    }

    pub fn eigen_coefficients(&self) -> Option<(SphereDim, &[f64])> {
        match &self.repr {
            Repr::Eigen { m, eigenvalues, .. } => Some((*m, eigenvalues)),
            _ => None,
        }
    }

    /// `K_i(u)` for `u` in `[-1, 1]`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&u) {
            return Err(domain!("profile argument must lie in [-1, 1], got {u}"));
        }
        Ok(self.eval_unchecked(u))
    }

    pub(crate) fn eval_unchecked(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Closed { f, .. } => f(u),
            Repr::Power(c) => c.iter().rev().fold(0.0, |acc, &b| acc * u + b),
            Repr::Eigen { m, scaled, .. } => {
                if scaled.is_empty() {
                    return 0.0;
                }
                let mut p = Vec::with_capacity(scaled.len());
                fill_gegenbauer(m.get(), scaled.len() - 1, u, &mut p);
                scaled.iter().zip(&p).map(|(a, b)| a * b).sum()
            }
        }
    }

    /// `(omega_{m-1} / omega_m) ∫ |K_i(u)| (1-u^2)^{(m-2)/2} du`.
    pub fn l1_norm(&self, m: SphereDim, rule: &QuadratureRule) -> Result<f64> {
        if rule.m() != m.get() {
            return Err(Error::Dimension {
                expected: m.get(),
                found: rule.m(),
            });
        }
        let v = rule.integrate(|u| self.eval_unchecked(u).abs());
        if !v.is_finite() {
            return Err(Error::NonFinite("profile"));
        }
        Ok(m.equator_volume() / m.volume() * v)
    }
}

/// `K_sigma(x, y) = exp(-2 sigma^{-2} (1 - x · y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    m: SphereDim,
}

impl GaussianKernel {
    pub fn new(m: SphereDim, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(domain!("Gaussian width must be positive, got {sigma}"));
        }
        Ok(Self { sigma, m })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn m(&self) -> SphereDim {
        self.m
    }

    /// `2 / sigma^2`.
    pub fn rate(&self) -> f64 {
        2.0 / (self.sigma * self.sigma)
    }

    pub fn eval(&self, u: f64) -> f64 {
        libm::exp(-self.rate() * (1.0 - u))
    }

    pub fn profile(&self) -> IsotropicProfile {
        let c = self.rate();
        let label = alloc::format!("gaussian(sigma={})", self.sigma);
        IsotropicProfile::closed_form(label, move |u| libm::exp(-c * (1.0 - u)))
            .expect("Gaussian profile is finite")
    }

    /// Taylor coefficients `e^{-c} c^j / j!` in `u`, truncated well past the
    /// point where degrees up to `kmax` stop feeling them.
    pub fn series_profile(&self, kmax: usize) -> IsotropicProfile {
        let c = self.rate();
        let extra = libm::fmax(60.0, libm::ceil(4.0 * c + 40.0)) as usize;
        let len = kmax + extra + 1;
        let ln_c = libm::log(c);
        let coeffs = (0..len)
            .map(|j| {
                let j = j as f64;
                libm::exp(-c + j * ln_c - sphere_math::ln_gamma(j + 1.0))
            })
            .collect();
        IsotropicProfile::power_series(coeffs).expect("finite coefficients")
    }

    /// Closed-form eigenvalue relative to the normalized surface measure.
    pub fn eigenvalue_normalized(&self, k: usize) -> Result<f64> {
        gaussian_eigenvalue_closed(self.m, self.sigma, k)
    }

    /// Eigenvalues `0..=kmax` of the integral operator on `L^2(S^m)`, i.e. the
    /// normalized values times `omega_m`.
    pub fn operator_eigenvalues(&self, kmax: usize) -> Result<Vec<f64>> {
        let w = self.m.volume();
        (0..=kmax)
            .map(|k| Ok(w * self.eigenvalue_normalized(k)?))
            .collect()
    }
}

/// `e^{-2/sigma^2} sigma^{m-1} I_{k+(m-1)/2}(2/sigma^2) Gamma((m+1)/2)`.
///
/// This is the eigenvalue with respect to the normalized measure
/// `sigma_m / omega_m`; the operator on `L^2(S^m)` with unnormalized surface
/// measure has eigenvalue `omega_m` times this.
pub fn gaussian_eigenvalue_closed(m: SphereDim, sigma: f64, k: usize) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(domain!("Gaussian width must be positive, got {sigma}"));
    }
    let c = 2.0 / (sigma * sigma);
    let mf = m.get() as f64;
    let nu = k as f64 + 0.5 * (mf - 1.0);
    let ln = -c
        + (mf - 1.0) * libm::log(sigma)
        + sphere_math::ln_modified_bessel_i(nu, c)?
        + sphere_math::ln_gamma(0.5 * (mf + 1.0));
    Ok(libm::exp(ln))
}

/// `b_k = 2^{k+1} k^{(m-1)/2} / k^{1 + k eps/m}`, `k >= 1`, in log space.
pub fn dotpower_coefficient(m: SphereDim, eps: f64, k: usize) -> Result<f64> {
    Ok(libm::exp(ln_dotpower_coefficient(m, eps, k)?))
}

pub fn ln_dotpower_coefficient(m: SphereDim, eps: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(domain!("dot-power coefficients start at k = 1"));
    }
    if !eps.is_finite() {
        return Err(Error::NonFinite("dot-power exponent"));
    }
    let (kf, mf) = (k as f64, m.get() as f64);
    let lk = libm::log(kf);
    Ok((kf + 1.0) * core::f64::consts::LN_2 + 0.5 * (mf - 1.0) * lk - (1.0 + kf * eps / mf) * lk)
}

/// `K(x, y) = 1 + sum_{k>=1} b_k (x · y)^k` with `eps > m/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DotPowerKernel {
    eps: f64,
    m: SphereDim,
    coeffs: Vec<f64>,
}

const DOTPOWER_MAX_TERMS: usize = 100_000;

impl DotPowerKernel {
    /// Builds the series, stopping once `b_k < 1e-16 (1 + sum_{j<=k} b_j)`.
    pub fn new(m: SphereDim, eps: f64) -> Result<Self> {
        if !(eps > 0.5 * m.get() as f64) || !eps.is_finite() {
            return Err(domain!(
                "dot-power exponent must exceed m/2 = {}, got {eps}",
                0.5 * m.get() as f64
            ));
        }
        let mut coeffs = alloc::vec![1.0];
        let mut sum = 1.0;
        for k in 1..=DOTPOWER_MAX_TERMS {
            let b = dotpower_coefficient(m, eps, k)?;
            coeffs.push(b);
            sum += b;
            // b_k decreases super-geometrically once k^{eps/m} > 2
            if b < 1e-16 * sum && libm::pow(k as f64, eps / m.get() as f64) > 2.0 {
                return Ok(Self { eps, m, coeffs });
            }
        }
        Err(Error::Degenerate(alloc::format!(
            "dot-power series did not reach 1e-16 within {DOTPOWER_MAX_TERMS} terms"
        )))
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m(&self) -> SphereDim {
        self.m
    }

    /// `[1, b_1, ..., b_T]`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Truncation degree `T`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn profile(&self) -> IsotropicProfile {
        IsotropicProfile::power_series(self.coeffs.clone()).expect("finite coefficients")
    }
}

/// Normalized successive ratios of the dot-power coefficients at degree `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotPowerRatio {
    pub k: usize,
    /// `k^{2 eps} b_k / b_{k-1}`.
    pub by_two_eps: f64,
    /// `k^{eps/m} b_k / b_{k-1}`.
    pub by_eps_over_m: f64,
    /// `2 e^{-eps/m}`.
    pub target: f64,
}

/// Ratios at `k >= 2`, computed from log-coefficients so that `k` up to
/// `10^4` and beyond is fine even though `b_k` itself underflows.
pub fn dotpower_ratio(m: SphereDim, eps: f64, k: usize) -> Result<DotPowerRatio> {
    if k < 2 {
        return Err(domain!("ratio needs k >= 2"));
    }
    let d = ln_dotpower_coefficient(m, eps, k)? - ln_dotpower_coefficient(m, eps, k - 1)?;
    let lk = libm::log(k as f64);
    let mf = m.get() as f64;
    Ok(DotPowerRatio {
        k,
        by_two_eps: libm::exp(2.0 * eps * lk + d),
        by_eps_over_m: libm::exp(eps / mf * lk + d),
        target: 2.0 * libm::exp(-eps / mf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_math::gegenbauer_quadrature;
    use core::f64::consts::PI;

    fn dim(m: usize) -> SphereDim {
        SphereDim::new(m).unwrap()
    }

    #[test]
    fn basic_profile_values() {
        let g = GaussianKernel::new(dim(2), 0.7).unwrap();
        assert_eq!(g.profile().eval(1.0).unwrap(), 1.0);
        let c = IsotropicProfile::constant(2.5).unwrap();
        for u in [-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert_eq!(c.eval(u).unwrap(), 2.5);
        }
        assert!(c.eval(1.0 + 1e-12).is_err());
        let e =
            IsotropicProfile::eigen_series(dim(3), alloc::vec![2.0 * PI * PI, 0.0, 0.0]).unwrap();
        for u in [-1.0, 0.2, 1.0] {
            assert!((e.eval(u).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eigen_series_rejects_negative() {
        assert!(matches!(
            IsotropicProfile::eigen_series(dim(2), alloc::vec![1.0, -1e-3]),
            Err(Error::NotPositiveDefinite { degree: 1, .. })
        ));
        assert!(IsotropicProfile::closed_form("bad", |_| f64::INFINITY).is_err());
    }

    #[test]
    fn horner_matches_direct_sum() {
        let p = IsotropicProfile::power_series(alloc::vec![0.5, -1.0, 0.25, 2.0]).unwrap();
        let u: f64 = 0.37;
        let direct = 0.5 - u + 0.25 * u * u + 2.0 * u * u * u;
        assert!((p.eval(u).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn gaussian_closed_form_value() {
        // I_{1/2}(2) = sqrt(1/pi) sinh 2, Gamma(3/2) = sqrt(pi)/2
        let exact = libm::exp(-2.0) * libm::sinh(2.0) / 2.0;
        let got = gaussian_eigenvalue_closed(dim(2), 1.0, 0).unwrap();
        assert!((got - exact).abs() < 1e-15 * exact);
        assert!((got - 0.2454).abs() < 1e-4);
    }

    #[test]
    fn gaussian_ratio_inequality_and_monotonicity() {
        for m in [2, 3] {
            for sigma in [0.5, 1.0, 2.0] {
                let lam: Vec<f64> = (0..=41)
                    .map(|k| gaussian_eigenvalue_closed(dim(m), sigma, k).unwrap())
                    .collect();
                for k in 0..=40 {
                    let rhs = (2 * k + m + 1) as f64 * sigma * sigma * lam[k + 1];
                    assert!(2.0 * lam[k] > rhs, "m={m} sigma={sigma} k={k}");
                    assert!(lam[k + 1] < lam[k] && lam[k + 1] > 0.0);
                }
            }
        }
    }

    #[test]
    fn gaussian_operator_scale_matches_quadrature() {
        // omega_{m-1} ∫ K P_k w against omega_m times the normalized closed form
        for m in [2, 3, 4] {
            let g = GaussianKernel::new(dim(m), 1.3).unwrap();
            let rule = gegenbauer_quadrature(m, 60).unwrap();
            let lam = g.operator_eigenvalues(6).unwrap();
            for (k, l) in lam.iter().enumerate() {
                let q = dim(m).equator_volume()
                    * rule.integrate(|u| g.eval(u) * sphere_math::gegenbauer(m, k, u).unwrap());
                assert!((q - l).abs() < 1e-12 * lam[0], "m={m} k={k}: {q} vs {l}");
            }
        }
    }

    #[test]
    fn mercer_reconstruction_and_trace() {
        let g = GaussianKernel::new(dim(2), 1.0).unwrap();
        let lam = g.operator_eigenvalues(60).unwrap();
        let e = IsotropicProfile::eigen_series(dim(2), lam.clone()).unwrap();
        for i in 0..=100 {
            let u = -1.0 + 2.0 * i as f64 / 100.0;
            assert!((e.eval(u).unwrap() - g.eval(u)).abs() <= 1e-10, "u={u}");
        }
        let trace: f64 = lam
            .iter()
            .enumerate()
            .map(|(k, l)| l * (2 * k + 1) as f64)
            .sum();
        assert!((trace - 4.0 * PI).abs() <= 1e-10 * 4.0 * PI);
    }

    #[test]
    fn series_profile_matches_exponential() {
        for sigma in [0.3, 1.0, 3.0] {
            let g = GaussianKernel::new(dim(2), sigma).unwrap();
            let s = g.series_profile(30);
            for u in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let (a, b) = (s.eval(u).unwrap(), g.eval(u));
                // alternating for u < 0: error scales with sum |a_j u^j|
                let scale = g.eval(u.abs());
                assert!((a - b).abs() < 1e-14 * scale, "sigma={sigma} u={u}");
            }
        }
    }

    #[test]
    fn l1_norms() {
        let rule = gegenbauer_quadrature(3, 20).unwrap();
        let one = IsotropicProfile::constant(1.0).unwrap();
        assert!((one.l1_norm(dim(3), &rule).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(
            IsotropicProfile::constant(0.0)
                .unwrap()
                .l1_norm(dim(3), &rule)
                .unwrap(),
            0.0
        );
        let g = GaussianKernel::new(dim(3), 0.8).unwrap();
        let a = g.profile().l1_norm(dim(3), &rule).unwrap();
        let scaled = IsotropicProfile::closed_form("-3K", move |u| -3.0 * g.eval(u)).unwrap();
        assert!((scaled.l1_norm(dim(3), &rule).unwrap() - 3.0 * a).abs() < 1e-14);
        assert!(matches!(
            one.l1_norm(dim(2), &rule),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn dotpower_coefficients() {
        assert!((dotpower_coefficient(dim(2), 2.0, 1).unwrap() - 4.0).abs() < 1e-14);
        assert!((dotpower_coefficient(dim(2), 2.0, 2).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!(dotpower_coefficient(dim(2), 2.0, 0).is_err());
        for (m, eps) in [(2, 1.01), (2, 2.0), (3, 1.6), (4, 5.0)] {
            let b: Vec<f64> = (1..=200)
                .map(|k| dotpower_coefficient(dim(m), eps, k).unwrap())
                .collect();
            assert!(b.iter().all(|x| *x >= 0.0));
            assert!(b[199] < 1e-100 && b[0] > 0.0);
        }
    }

    #[test]
    fn dotpower_kernel_truncation() {
        assert!(DotPowerKernel::new(dim(2), 1.0).is_err());
        let k = DotPowerKernel::new(dim(2), 2.0).unwrap();
        let c = k.coefficients();
        let total: f64 = c.iter().sum();
        assert!(c[c.len() - 1] < 1e-16 * total);
        assert_eq!(
            k.profile().eval(1.0).unwrap(),
            c.iter().rev().fold(0.0, |a, b| a + b)
        );
    }

    #[test]
    fn dotpower_ratio_limit() {
        // b_k / b_{k-1} ~ 2 k^{-eps/m} e^{-eps/m}
        for (m, eps) in [(2, 2.0), (3, 2.0), (2, 1.5)] {
            let r = dotpower_ratio(dim(m), eps, 10_000).unwrap();
            assert!((r.by_eps_over_m / r.target - 1.0).abs() < 1e-3, "{r:?}");
            assert!(r.by_two_eps > 1e3 * r.target);
        }
    }
}
