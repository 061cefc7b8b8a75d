//! Shifting, cap-average and Steklov-mean convolution families and their
//! multipliers `mu_t^k`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::integrate::AdaptiveSimpson;
use crate::sphere_math::{
    check_angle, fill_gegenbauer, gegenbauer_defects, CapGeometry, SphereDim,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Shifting,
    Caps,
    Steklov,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::Shifting, FamilyKind::Caps, FamilyKind::Steklov];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Shifting => "shifting",
            FamilyKind::Caps => "caps",
            FamilyKind::Steklov => "steklov",
        }
    }
}

impl core::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shifting" => Ok(FamilyKind::Shifting),
            "caps" => Ok(FamilyKind::Caps),
            "steklov" => Ok(FamilyKind::Steklov),
            _ => Err(domain!(
                "unknown family '{s}' (expected shifting, caps or steklov)"
            )),
        }
    }
}

impl core::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape `mu_t^k v_m(t) = c_{k,m} P^{beta}_{alpha(k)}(cos t) sin^gamma t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Structure {
    /// `alpha(k) = k - alpha_shift`.
    pub alpha_shift: usize,
    /// Sphere dimension whose Gegenbauer index is `beta`, i.e. `beta = (beta_dim - 1)/2`.
    pub beta_dim: usize,
    pub gamma: usize,
    /// Exponent `c(m)` in `v_m(t) ≍ t^{c(m)}` near 0.
    pub normalizer_exponent: f64,
    /// Whether the multiplier really has the product shape above.
    pub product_form: bool,
}

impl Structure {
    pub fn beta(&self) -> f64 {
        0.5 * (self.beta_dim as f64 - 1.0)
    }

    /// `2 beta - gamma`.
    pub fn rank_exponent(&self) -> f64 {
        2.0 * self.beta() - self.gamma as f64
    }

    /// Largest degree `k` with `alpha(k) <= degree`.
    pub fn alpha_inverse(&self, degree: usize) -> usize {
        degree + self.alpha_shift
    }
}

/// Anything that supplies the defects `1 - mu_t^k`, `k = 0..=kmax`.
pub trait Multiplier {
    fn m(&self) -> SphereDim;
    fn defects(&self, t: f64, kmax: usize) -> Result<Vec<f64>>;
}

/// One of the three measure families on `S^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFamily {
    kind: FamilyKind,
    geom: CapGeometry,
}

const STEKLOV_TOL: f64 = 1e-11;
/// Above this value of `(k+m) t` the caps defect comes from the closed form.
const CAPS_DEFECT_SWITCH: f64 = 20.0;

impl MultiplierFamily {
    pub fn new(kind: FamilyKind, m: SphereDim) -> Result<Self> {
        Ok(Self {
            kind,
            geom: CapGeometry::new(m)?,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dim(&self) -> SphereDim {
        self.geom.m()
    }

    pub fn geometry(&self) -> &CapGeometry {
        &self.geom
    }

    pub fn structure(&self) -> Structure {
        let m = self.dim().get();
        match self.kind {
            FamilyKind::Shifting => Structure {
                alpha_shift: 0,
                beta_dim: m,
                gamma: 0,
                normalizer_exponent: 0.0,
                product_form: true,
            },
            FamilyKind::Caps => Structure {
                alpha_shift: 1,
                beta_dim: m + 2,
                gamma: m,
                normalizer_exponent: m as f64,
                product_form: true,
            },
            // D_m(t) ~ t^2 / (2m); the multiplier times D_m is
            // (1 - P_k(cos t)) / (k (k+m-1)), not a single Gegenbauer product.
            FamilyKind::Steklov => Structure {
                alpha_shift: 1,
                beta_dim: m + 2,
                gamma: m,
                normalizer_exponent: 2.0,
                product_form: false,
            },
        }
    }

    /// `c_{k,m}` for the product-form families, `k >= 1` for caps.
    pub fn product_coefficient(&self, k: usize) -> Option<f64> {
        match self.kind {
            FamilyKind::Shifting => Some(1.0),
            FamilyKind::Caps if k >= 1 => {
                Some(self.dim().equator_volume() / self.dim().get() as f64)
            }
            _ => None,
        }
    }

    /// Default `r = 2 beta - gamma` for the Jackson operators: `m - 1`, `1`, `m`.
    pub fn auto_r(&self) -> usize {
        let m = self.dim().get();
        match self.kind {
            FamilyKind::Shifting => m - 1,
            FamilyKind::Caps => 1,
            FamilyKind::Steklov => m,
        }
    }

    /// `v_m(t)`: 1, `C_m(t)` or `D_m(t)`.
    pub fn normalizer(&self, t: f64) -> Result<f64> {
        check_angle(t)?;
        self.normalizer_unchecked(t)
    }

    pub(crate) fn normalizer_unchecked(&self, t: f64) -> Result<f64> {
        match self.kind {
            FamilyKind::Shifting => Ok(1.0),
            FamilyKind::Caps => Ok(self.geom.cap_unchecked(t)),
            FamilyKind::Steklov => self.geom.steklov_unchecked(t),
        }
    }

    /// `mu_t^k`.
    pub fn multiplier(&self, t: f64, k: usize) -> Result<f64> {
        check_angle(t)?;
        let m = self.dim().get();
        match self.kind {
            FamilyKind::Shifting => Ok(gegenbauer_at(m, k, libm::cos(t))),
            FamilyKind::Caps => Ok(self.caps_closed(t, k)),
            FamilyKind::Steklov => self.steklov_multiplier(t, k, self.geom.steklov_unchecked(t)?),
        }
    }

    /// `D^{-1} ∫_0^t [C/R](s) mu_{Z_s}^k ds` with `D = D_m(t)` supplied.
    fn steklov_multiplier(&self, t: f64, k: usize, d: f64) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let m = self.dim().get();
        let mf = m as f64;
        // [C/R](s) mu_{Z_s}^k with the cap volume cancelled
        let v = AdaptiveSimpson::with_tolerances(STEKLOV_TOL * d, 0.0).integrate(
            |s| libm::sin(s) * gegenbauer_at(m + 2, k - 1, libm::cos(s)) / mf,
            0.0,
            t,
        )?;
        Ok(v / d)
    }

    /// `D^{-1} ∫_0^t [C/R](s) (1 - mu_{Z_s}^k) ds`; the integrand is
    /// nonnegative, so a relative tolerance is safe.
    fn steklov_defect(&self, t: f64, k: usize, d: f64) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        let v = AdaptiveSimpson::with_tolerances(0.0, STEKLOV_TOL).integrate(
            |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                self.geom.cap_rim_ratio(s) * self.caps_defect(s, k)
            },
            0.0,
            t,
        )?;
        Ok(v / d)
    }

    /// `1 - mu_{Z_t}^k`. For small `(k+m) t` it is the cap average of
    /// `1 - P_k(cos h)` by Gauss–Legendre, which keeps full relative accuracy;
    /// otherwise the defect is of order one and the closed form is used.
    fn caps_defect(&self, t: f64, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let m = self.dim().get();
        if (k + m) as f64 * t > CAPS_DEFECT_SWITCH {
            return 1.0 - self.caps_closed(t, k);
        }
        let rule = self.geom.legendre();
        let half = 0.5 * t;
        let e = (m - 1) as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            let h = half * (x + 1.0);
            let s = w * libm::pow(libm::sin(h), e);
            den += s;
            num += s * gegenbauer_defect_at(m, k, h);
        }
        num / den
    }

    /// `mu_t^k` for `k = 0..=kmax`.
    pub fn multipliers(&self, t: f64, kmax: usize) -> Result<Vec<f64>> {
        check_angle(t)?;
        let m = self.dim().get();
        match self.kind {
            FamilyKind::Shifting => {
                let mut p = Vec::with_capacity(kmax + 1);
                fill_gegenbauer(m, kmax, libm::cos(t), &mut p);
                Ok(p)
            }
            FamilyKind::Caps => {
                let mut out = Vec::with_capacity(kmax + 1);
                out.push(1.0);
                if kmax > 0 {
                    let mut p = Vec::with_capacity(kmax);
                    fill_gegenbauer(m + 2, kmax - 1, libm::cos(t), &mut p);
                    let f = self.caps_prefactor(t);
                    out.extend(p.iter().map(|x| f * x));
                }
                Ok(out)
            }
            FamilyKind::Steklov => {
                let d = self.geom.steklov_unchecked(t)?;
                (0..=kmax)
                    .map(|k| self.steklov_multiplier(t, k, d))
                    .collect()
            }
        }
    }

    /// `1 - mu_t^k`, evaluated without cancellation where it matters.
    pub fn multiplier_defect(&self, t: f64, k: usize) -> Result<f64> {
        check_angle(t)?;
        let m = self.dim().get();
        match self.kind {
            FamilyKind::Shifting => Ok(*gegenbauer_defects(m, k, t)?.last().expect("k+1 entries")),
            FamilyKind::Caps => Ok(self.caps_defect(t, k)),
            FamilyKind::Steklov => self.steklov_defect(t, k, self.geom.steklov_unchecked(t)?),
        }
    }

    /// `mu_t^k v_m(t)` on `[0, pi]`, from the closed forms; the Steklov
    /// value at `k = 0` is `D_m(t)`, infinite at `pi`.
    pub fn weighted_multiplier(&self, t: f64, k: usize) -> Result<f64> {
        if !(0.0..=PI).contains(&t) {
            return Err(domain!("angle must lie in [0, pi], got {t}"));
        }
        let m = self.dim().get();
        let c = libm::cos(t);
        match self.kind {
            FamilyKind::Shifting => Ok(gegenbauer_at(m, k, c)),
            FamilyKind::Caps if k == 0 => Ok(self.geom.cap_unchecked(t)),
            FamilyKind::Caps => Ok(self.product_coefficient(k).unwrap()
                * libm::pow(libm::sin(t), m as f64)
                * gegenbauer_at(m + 2, k - 1, c)),
            FamilyKind::Steklov if k == 0 => {
                if t >= PI {
                    return Ok(f64::INFINITY);
                }
                if t == 0.0 {
                    return Ok(0.0);
                }
                self.geom.steklov_unchecked(t)
            }
            FamilyKind::Steklov => {
                let defect = *gegenbauer_defects(m, k, t)?.last().expect("k+1 entries");
                Ok(defect / (k * (k + m - 1)) as f64)
            }
        }
    }

    /// Closed-form Steklov multiplier `(1 - P_k(cos t)) / (k (k+m-1) D_m(t))`.
    pub fn steklov_closed(&self, t: f64, k: usize) -> Result<f64> {
        check_angle(t)?;
        if k == 0 {
            return Ok(1.0);
        }
        let m = self.dim().get();
        let defect = *gegenbauer_defects(m, k, t)?.last().expect("k+1 entries");
        Ok(defect / ((k * (k + m - 1)) as f64 * self.geom.steklov_unchecked(t)?))
    }

    fn caps_prefactor(&self, t: f64) -> f64 {
        let m = self.dim();
        let s = libm::sin(t);
        m.equator_volume() / m.get() as f64 * libm::pow(s, m.get() as f64)
            / self.geom.cap_unchecked(t)
    }

    fn caps_closed(&self, t: f64, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        self.caps_prefactor(t) * gegenbauer_at(self.dim().get() + 2, k - 1, libm::cos(t))
    }

    /// Least-squares slope of `log v_m(t)` against `log t` on a log grid.
    pub fn fit_normalizer_exponent(&self, t_lo: f64, t_hi: f64, points: usize) -> Result<f64> {
        if !(t_lo > 0.0 && t_hi > t_lo && t_hi < PI) || points < 2 {
            return Err(domain!("need 0 < t_lo < t_hi < pi and at least two points"));
        }
        let mut xs = Vec::with_capacity(points);
        let mut ys = Vec::with_capacity(points);
        for i in 0..points {
            let t = t_lo * libm::pow(t_hi / t_lo, i as f64 / (points - 1) as f64);
            xs.push(libm::log(t));
            ys.push(libm::log(self.normalizer_unchecked(t)?));
        }
        Ok(least_squares(&xs, &ys).0)
    }
}

impl Multiplier for MultiplierFamily {
    fn m(&self) -> SphereDim {
        self.dim()
    }

    fn defects(&self, t: f64, kmax: usize) -> Result<Vec<f64>> {
        check_angle(t)?;
        match self.kind {
            FamilyKind::Shifting => gegenbauer_defects(self.dim().get(), kmax, t),
            FamilyKind::Caps => Ok((0..=kmax).map(|k| self.caps_defect(t, k)).collect()),
            FamilyKind::Steklov => {
                let d = self.geom.steklov_unchecked(t)?;
                (0..=kmax).map(|k| self.steklov_defect(t, k, d)).collect()
            }
        }
    }
}

/// `P_k^{(m-1)/2}(u)` for `u` known to lie in `[-1, 1]`.
fn gegenbauer_at(m: usize, k: usize, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, u);
    if k == 0 {
        return 1.0;
    }
    let mf = m as f64;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + mf - 1.0) * u * cur - jf * prev) / (jf + mf - 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `1 - P_k^{(m-1)/2}(cos t)` by the defect recurrence.
fn gegenbauer_defect_at(m: usize, k: usize, t: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let half = libm::sin(0.5 * t);
    let v = 2.0 * half * half;
    let u = 1.0 - v;
    let mf = m as f64;
    let (mut prev, mut cur) = (0.0, v);
    for j in 1..k {
        let jf = j as f64;
        let a = 2.0 * jf + mf - 1.0;
        let next = (a * v + a * u * cur - jf * prev) / (jf + mf - 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `(slope, intercept, max |residual|)` of the least-squares line through `(x, y)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}

/// `mu_{Z_t}^k` from its defining integral
/// `(omega_{m-1} / C_m(t)) ∫_0^t P_k(cos h) sin^{m-1} h dh`.
pub fn caps_multiplier_integral(m: SphereDim, t: f64, k: usize) -> Result<f64> {
    check_angle(t)?;
    let geom = CapGeometry::new(m)?;
    let c = geom.cap_unchecked(t);
    let w = m.equator_volume();
    let e = (m.get() - 1) as f64;
    let v = AdaptiveSimpson::with_tolerances(1e-13 * c / w, 0.0).integrate(
        |h| gegenbauer_at(m.get(), k, libm::cos(h)) * libm::pow(libm::sin(h), e),
        0.0,
        t,
    )?;
    Ok(w * v / c)
}

/// `lambda_k mu_t^k`, the coefficients of `K(x, ·) * mu_t`.
pub fn convolve_coefficients(lambda: &[f64], f: &MultiplierFamily, t: f64) -> Result<Vec<f64>> {
    if lambda.is_empty() {
        return Ok(Vec::new());
    }
    let mu = f.multipliers(t, lambda.len() - 1)?;
    Ok(lambda.iter().zip(&mu).map(|(l, m)| l * m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_math::gegenbauer;

    fn fam(kind: FamilyKind, m: usize) -> MultiplierFamily {
        MultiplierFamily::new(kind, SphereDim::new(m).unwrap()).unwrap()
    }

    fn t_grid(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 0.01 + (3.1 - 0.01) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn degree_zero_is_one() {
        for kind in FamilyKind::ALL {
            let f = fam(kind, 3);
            for t in [1e-3, 0.5, 3.0] {
                assert_eq!(f.multiplier(t, 0).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn shifting_degree_one() {
        let f = fam(FamilyKind::Shifting, 2);
        for t in [0.1, 1.0, 2.5] {
            assert!((f.multiplier(t, 1).unwrap() - libm::cos(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn caps_closed_form_matches_integral() {
        for m in [2, 3] {
            let f = fam(FamilyKind::Caps, m);
            for t in [0.1, 0.7, 1.5, 2.2, 3.0] {
                for k in [0, 1, 2, 7, 20, 40] {
                    let a = f.multiplier(t, k).unwrap();
                    let b = caps_multiplier_integral(SphereDim::new(m).unwrap(), t, k).unwrap();
                    assert!((a - b).abs() < 1e-10, "m={m} t={t} k={k}: {a} vs {b}");
                }
            }
        }
        // m = 2, k = 1: (1 + cos t) / 2
        let d = SphereDim::new(2).unwrap();
        for t in [0.3, 1.9] {
            let v = caps_multiplier_integral(d, t, 1).unwrap();
            assert!((v - 0.5 * (1.0 + libm::cos(t))).abs() < 1e-12);
        }
    }

    #[test]
    fn steklov_quadrature_matches_closed_form() {
        for m in [2, 3, 4] {
            let f = fam(FamilyKind::Steklov, m);
            for t in [1e-3, 0.2, 1.0, 2.0, 3.0] {
                for k in [1, 2, 5, 15, 40] {
                    let a = f.multiplier(t, k).unwrap();
                    let b = f.steklov_closed(t, k).unwrap();
                    assert!((a - b).abs() < 1e-10, "m={m} t={t} k={k}: {a} vs {b}");
                    let da = f.multiplier_defect(t, k).unwrap();
                    assert!(
                        (da - (1.0 - b)).abs() <= 1e-9 * (1.0 - b) + 1e-15,
                        "defect m={m} t={t} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn product_form_holds_for_shifting_and_caps() {
        for m in [2, 3, 5] {
            for kind in [FamilyKind::Shifting, FamilyKind::Caps] {
                let f = fam(kind, m);
                let s = f.structure();
                assert!(s.product_form);
                for t in [0.2, 1.1, 2.9] {
                    let v = f.normalizer(t).unwrap();
                    for k in s.alpha_shift..25 {
                        let lhs = f.multiplier(t, k).unwrap() * v;
                        let rhs = f.product_coefficient(k).unwrap()
                            * gegenbauer(s.beta_dim, k - s.alpha_shift, libm::cos(t)).unwrap()
                            * libm::pow(libm::sin(t), s.gamma as f64);
                        assert!(
                            (lhs - rhs).abs() < 1e-12 * v.max(1.0),
                            "{kind} m={m} t={t} k={k}"
                        );
                    }
                }
            }
            assert_eq!(fam(FamilyKind::Caps, m).structure().rank_exponent(), 1.0);
            assert_eq!(
                fam(FamilyKind::Shifting, m).structure().rank_exponent(),
                (m - 1) as f64
            );
        }
    }

    #[test]
    fn multipliers_are_contractions() {
        for m in [2, 3] {
            for kind in FamilyKind::ALL {
                let f = fam(kind, m);
                for t in t_grid(40) {
                    let mu = f.multipliers(t, 60).unwrap();
                    assert!(
                        mu.iter().all(|x| x.abs() <= 1.0 + 1e-12),
                        "{kind} m={m} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn small_angle_limit() {
        for kind in FamilyKind::ALL {
            let f = fam(kind, 2);
            let mu = f.multipliers(1e-4, 20).unwrap();
            assert!(mu.iter().all(|x| (1.0 - x).abs() <= 1e-3));
        }
    }

    #[test]
    fn batch_matches_single() {
        for kind in FamilyKind::ALL {
            let f = fam(kind, 3);
            let b = f.multipliers(0.9, 12).unwrap();
            let d = f.defects(0.9, 12).unwrap();
            for k in 0..=12 {
                let s = f.multiplier(0.9, k).unwrap();
                assert!((b[k] - s).abs() < 1e-14);
                assert!((d[k] - (1.0 - s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn steklov_is_between_cap_extremes() {
        let caps = fam(FamilyKind::Caps, 2);
        let stek = fam(FamilyKind::Steklov, 2);
        for t in [0.3, 1.2, 2.6] {
            for k in [1, 3, 8] {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 1..=400 {
                    let v = caps.multiplier(t * i as f64 / 400.0, k).unwrap();
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let w = stek.multiplier(t, k).unwrap();
                assert!(w >= lo - 1e-10 && w <= hi + 1e-10, "t={t} k={k}");
            }
        }
    }

    #[test]
    fn normalizers() {
        assert_eq!(fam(FamilyKind::Shifting, 2).normalizer(1.3).unwrap(), 1.0);
        let c = fam(FamilyKind::Caps, 2).normalizer(1.3).unwrap();
        assert!((c - 2.0 * PI * (1.0 - libm::cos(1.3))).abs() < 1e-13);
        assert!(fam(FamilyKind::Caps, 2).normalizer(PI).is_err());
        for m in [2, 3, 4] {
            let caps = fam(FamilyKind::Caps, m)
                .fit_normalizer_exponent(1e-3, 1e-1, 12)
                .unwrap();
            assert!((caps - m as f64).abs() < 1e-3);
            let stek = fam(FamilyKind::Steklov, m)
                .fit_normalizer_exponent(1e-3, 1e-1, 12)
                .unwrap();
            assert!((stek - 2.0).abs() < 1e-3, "m={m}: {stek}");
        }
    }

    #[test]
    fn convolution_bounds() {
        let lam = [3.0, 1.0, 0.5, 0.25, 0.1];
        for kind in FamilyKind::ALL {
            let f = fam(kind, 2);
            let out = convolve_coefficients(&lam, &f, 0.8).unwrap();
            assert_eq!(out[0], lam[0]);
            assert!(out.iter().zip(&lam).all(|(o, l)| o.abs() <= *l));
            let near = convolve_coefficients(&lam, &f, 1e-6).unwrap();
            assert!(near.iter().zip(&lam).all(|(o, l)| (o - l).abs() < 1e-9));
        }
        assert!(convolve_coefficients(&[], &fam(FamilyKind::Caps, 2), 0.5)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn defects_are_second_order() {
        for kind in FamilyKind::ALL {
            let f = fam(kind, 3);
            for k in [1, 4, 10] {
                let (a, b) = (1e-4, 1e-2);
                let slope = libm::log(
                    f.multiplier_defect(b, k).unwrap() / f.multiplier_defect(a, k).unwrap(),
                ) / libm::log(b / a);
                assert!(slope >= 1.9, "{kind} k={k}: slope {slope}");
            }
        }
    }

    #[test]
    fn caps_defect_quadrature_matches_closed_form() {
        for m in [2, 3, 6] {
            let f = fam(FamilyKind::Caps, m);
            for t in [0.05, 0.4, 1.0] {
                for k in 1..=30 {
                    let closed = 1.0 - f.caps_closed(t, k);
                    assert!(
                        (f.caps_defect(t, k) - closed).abs() < 1e-13,
                        "m={m} t={t} k={k}"
                    );
                }
            }
            // tiny angles: 1 - mu ~ k(k+m-1) t^2 / (2(m+2))
            let t = 1e-6;
            for k in [1, 5, 12] {
                let lead = (k * (k + m - 1)) as f64 * t * t / (2.0 * (m + 2) as f64);
                assert!(
                    (f.caps_defect(t, k) / lead - 1.0).abs() < 1e-9,
                    "m={m} k={k}"
                );
            }
        }
    }

    #[test]
    fn parse_family() {
        assert_eq!("caps".parse::<FamilyKind>().unwrap(), FamilyKind::Caps);
        assert!("disc".parse::<FamilyKind>().is_err());
    }
}
