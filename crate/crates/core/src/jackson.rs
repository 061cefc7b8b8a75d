//! Generalized Jackson kernels and the normalized approximation operators
//! `A_{n,r}` in multiplier form.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::integrate::AdaptiveSimpson;
use crate::multipliers::{FamilyKind, MultiplierFamily};
use crate::spectra::Spectrum;
use crate::sphere_math::{fill_gegenbauer, gegenbauer_quadrature, SphereDim};

/// Relative rank tolerance used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
const OPERATOR_TOL: f64 = 1e-11;

/// `J_{l,n}(t) = [sin((n+1)t/2) / sin(t/2)]^{2l}`, with the value `(n+1)^{2l}` at 0.
pub fn jackson_eval(l: u32, n: u32, t: f64) -> Result<f64> {
    if l == 0 || n == 0 {
        return Err(domain!("Jackson kernel needs l >= 1 and n >= 1"));
    }
    if !(0.0..=PI).contains(&t) {
        return Err(domain!(
            "Jackson kernel argument must lie in [0, pi], got {t}"
        ));
    }
    Ok(jackson_unchecked(l, n, t))
}

fn jackson_unchecked(l: u32, n: u32, t: f64) -> f64 {
    let n1 = (n + 1) as f64;
    let ratio = if t == 0.0 {
        n1
    } else {
        libm::sin(0.5 * n1 * t) / libm::sin(0.5 * t)
    };
    libm::pow(ratio * ratio, l as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JacksonParams {
    pub l: u32,
    pub n: u32,
}

impl JacksonParams {
    pub fn new(l: u32, n: u32) -> Result<Self> {
        if l == 0 || n == 0 {
            return Err(domain!(
                "Jackson parameters need l >= 1 and n >= 1, got l={l}, n={n}"
            ));
        }
        Ok(Self { l, n })
    }

    /// Trigonometric degree `l n` of `J_{l,n}`.
    pub fn degree(&self) -> usize {
        self.l as usize * self.n as usize
    }

    pub fn eval(&self, t: f64) -> f64 {
        jackson_unchecked(self.l, self.n, t)
    }
}

/// `A_{n,r}` as its diagonal coefficients `g^k`, `k = 0..=kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxOperator {
    pub family: FamilyKind,
    pub m: SphereDim,
    pub params: JacksonParams,
    pub r: usize,
    /// `c_{n,r}`.
    pub c: f64,
    pub g: Vec<f64>,
}

impl ApproxOperator {
    pub fn kmax(&self) -> usize {
        self.g.len() - 1
    }

    /// `max_k |g^k|`, the norm of `A_{n,r}` on `L^2(S^m)` restricted to the
    /// computed degrees.
    pub fn operator_norm_bound(&self) -> f64 {
        self.g.iter().fold(0.0, |a, g| a.max(g.abs()))
    }

    /// `sum d_k` over degrees with `|g^k| > tol max_j |g^j|`.
    pub fn numerical_rank(&self, tol: f64) -> Result<u64> {
        if !(tol > 0.0) {
            return Err(domain!("rank tolerance must be positive, got {tol}"));
        }
        let cut = tol * self.operator_norm_bound();
        let mut rank = 0u64;
        for (k, g) in self.g.iter().enumerate() {
            if g.abs() > cut {
                rank = rank
                    .checked_add(self.m.harmonic_dim(k)?)
                    .ok_or(Error::Overflow("numerical rank"))?;
            }
        }
        Ok(rank)
    }

    /// Largest degree with `|g^k| > tol max_j |g^j|`.
    pub fn last_nonzero_degree(&self, tol: f64) -> Option<usize> {
        let cut = tol * self.operator_norm_bound();
        self.g.iter().rposition(|g| g.abs() > cut)
    }

    /// Degrees `k >= 1` where `1 - g^k < 1 - g^{k-1}`, or where `1 - g^k < 0`.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        (1..self.g.len())
            .filter(|&k| self.g[k] > self.g[k - 1] || self.g[k] > 1.0)
            .collect()
    }
}

/// `c_{n,r} = ∫_0^pi J_{l,n}(t) v_m(t) sin^r t dt`.
pub fn normalization_c(f: &MultiplierFamily, p: JacksonParams, r: usize) -> Result<f64> {
    match f.kind() {
        FamilyKind::Shifting => Ok(shifting_coefficients(f, p, r, 0)?.0),
        _ => adaptive_normalization(f, p, r),
    }
}

/// The coefficients `g^k = c^{-1} ∫_0^pi J_{l,n}(t) mu_t^k v_m(t) sin^r t dt`.
///
/// For the shifting family the integral is taken in `u = cos t` with a
/// Gauss–Gegenbauer rule for the weight `(1-u^2)^{(r-1)/2}`, which is exact
/// because `J_{l,n}(arccos u) P_k(u)` is a polynomial of degree `ln + k`. The
/// other families use adaptive Simpson on `(0, pi)`.
pub fn operator_coefficients(
    f: &MultiplierFamily,
    p: JacksonParams,
    r: usize,
    kmax: usize,
) -> Result<ApproxOperator> {
    let (c, g) = match f.kind() {
        FamilyKind::Shifting => shifting_coefficients(f, p, r, kmax)?,
        _ => {
            let c = adaptive_normalization(f, p, r)?;
            let mut g = Vec::with_capacity(kmax + 1);
            g.push(1.0);
            for k in 1..=kmax {
                g.push(adaptive_coefficient(f, p, r, k, c)?);
            }
            (c, g)
        }
    };
    Ok(ApproxOperator {
        family: f.kind(),
        m: f.dim(),
        params: p,
        r,
        c,
        g,
    })
}

fn shifting_coefficients(
    f: &MultiplierFamily,
    p: JacksonParams,
    r: usize,
    kmax: usize,
) -> Result<(f64, Vec<f64>)> {
    let nodes = (p.degree() + kmax) / 2 + 8;
    let rule = gegenbauer_quadrature(r + 1, nodes)?;
    let m = f.dim().get();
    let mut acc = alloc::vec![0.0; kmax + 1];
    let mut pk = Vec::with_capacity(kmax + 1);
    for (&u, &w) in rule.nodes().iter().zip(rule.weights()) {
        let jw = w * p.eval(libm::acos(u));
        fill_gegenbauer(m, kmax, u, &mut pk);
        for (a, b) in acc.iter_mut().zip(&pk) {
            *a += jw * b;
        }
    }
    let c = acc[0];
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonFinite("normalization c_{n,r}"));
    }
    acc.iter_mut().for_each(|a| *a /= c);
    acc[0] = 1.0;
    Ok((c, acc))
}

fn panels_for(p: JacksonParams, k: usize) -> usize {
    (2 * (p.degree() + k) + 16).max(16)
}

fn adaptive_normalization(f: &MultiplierFamily, p: JacksonParams, r: usize) -> Result<f64> {
    let m = f.dim().get();
    if f.kind() == FamilyKind::Steklov && r + 1 < m.max(2) {
        // D_m(t) sin^r t must stay bounded at pi for the endpoint rule
        return Err(domain!(
            "Steklov normalization needs r >= {} on S^{m}, got r={r}",
            m.max(2) - 1
        ));
    }
    let rf = r as f64;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= PI && r > 0 {
            // sin^r t kills C_m, and D_m for the allowed r
            return 0.0;
        }
        let v = f.weighted_multiplier(t.min(PI), 0).unwrap_or(f64::NAN);
        p.eval(t) * v * libm::pow(libm::sin(t), rf)
    };
    let c = AdaptiveSimpson::with_tolerances(0.0, 1e-12)
        .panels(panels_for(p, 0))
        .integrate(integrand, 0.0, PI)?;
    if !(c > 0.0) {
        return Err(Error::NonFinite("normalization c_{n,r}"));
    }
    Ok(c)
}

fn adaptive_coefficient(
    f: &MultiplierFamily,
    p: JacksonParams,
    r: usize,
    k: usize,
    c: f64,
) -> Result<f64> {
    let rf = r as f64;
    let v = AdaptiveSimpson::with_tolerances(OPERATOR_TOL * c, 0.0)
        .panels(panels_for(p, k))
        .integrate(
            |t| {
                let w = f.weighted_multiplier(t, k).unwrap_or(f64::NAN);
                p.eval(t) * w * libm::pow(libm::sin(t), rf)
            },
            0.0,
            PI,
        )?;
    Ok(v / c)
}

/// Hilbert–Schmidt norm of `K^{1/2} - A_{n,r} K^{1/2}` and the checks built on it.
#[derive(Debug, Clone, PartialEq)]
pub struct HsDefect {
    /// `sqrt(sum_k d_k lambda_k (1 - g^k)^2)`.
    pub defect: f64,
    /// Numerical rank `q` of `A_{n,r}`.
    pub rank: u64,
    /// `sqrt(lambda_{q+1})` of the sorted spectrum, when computed.
    pub next_singular: Option<f64>,
    /// `q a_{2q}(K^{1/2})` and `sqrt(q) a_{2q}(K^{1/2})`, when `2q` is in range.
    pub q_a2q: Option<f64>,
    pub sqrt_q_a2q: Option<f64>,
}

impl HsDefect {
    /// `sqrt(lambda_{q+1}) <= defect` (vacuous when `lambda_{q+1}` lies beyond
    /// the computed spectrum).
    pub fn dominates_next_singular(&self) -> bool {
        self.next_singular
            .map_or(true, |s| s <= self.defect * (1.0 + 1e-12))
    }
}

pub fn hs_defect(s: &Spectrum, a: &ApproxOperator) -> Result<HsDefect> {
    hs_defect_with_tol(s, a, DEFAULT_RANK_TOL)
}

pub fn hs_defect_with_tol(s: &Spectrum, a: &ApproxOperator, tol: f64) -> Result<HsDefect> {
    if s.m() != a.m {
        return Err(Error::Dimension {
            expected: a.m.get(),
            found: s.m().get(),
        });
    }
    let kmax = s.kmax().unwrap_or(0);
    if kmax != a.kmax() || s.entries().len() != a.g.len() {
        return Err(Error::Dimension {
            expected: a.kmax(),
            found: kmax,
        });
    }
    let mut sum = 0.0;
    for e in s.entries() {
        let d = 1.0 - a.g[e.degree];
        sum += e.multiplicity as f64 * e.eigenvalue * d * d;
    }
    let defect = libm::sqrt(sum);
    let rank = a.numerical_rank(tol)?;
    let a2q = if rank > 0 {
        s.sorted_value(2 * rank).map(libm::sqrt)
    } else {
        None
    };
    Ok(HsDefect {
        defect,
        rank,
        next_singular: s.sorted_value(rank + 1).map(libm::sqrt),
        q_a2q: a2q.map(|v| rank as f64 * v),
        sqrt_q_a2q: a2q.map(|v| libm::sqrt(rank as f64) * v),
    })
}

/// Smallest `l` with `2l >= rho + c(m) + 2 beta - gamma + 1`.
pub fn minimal_l(f: &MultiplierFamily, rho: f64) -> Result<u32> {
    if !(rho > 0.0 && rho <= 2.0) {
        return Err(domain!("Hölder exponent must lie in (0, 2], got {rho}"));
    }
    let s = f.structure();
    let need = rho + s.normalizer_exponent + s.rank_exponent() + 1.0;
    Ok((libm::ceil(0.5 * need - 1e-12) as u32).max(1))
}

/// One row of the decay pipeline: the defect at degree parameter `n`, and
/// `lambda_{2q} q / defect^2`, whose supremum over `n` is the empirical
/// constant with which `defect^2 / q` majorizes `lambda_{2q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPipelineRow {
    pub n: u32,
    pub rank: u64,
    pub defect: f64,
    pub ratio: Option<f64>,
}

pub fn decay_pipeline(
    s: &Spectrum,
    f: &MultiplierFamily,
    l: u32,
    r: usize,
    ns: &[u32],
) -> Result<Vec<DecayPipelineRow>> {
    let kmax = s.kmax().unwrap_or(0);
    ns.iter()
        .map(|&n| {
            let a = operator_coefficients(f, JacksonParams::new(l, n)?, r, kmax)?;
            let h = hs_defect(s, &a)?;
            let ratio = if h.rank > 0 && h.defect > 0.0 {
                s.sorted_value(2 * h.rank)
                    .map(|v| v * h.rank as f64 / (h.defect * h.defect))
            } else {
                None
            };
            Ok(DecayPipelineRow {
                n,
                rank: h.rank,
                defect: h.defect,
                ratio,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::GaussianKernel;
    use crate::spectra::funk_hecke_spectrum;

    fn fam(kind: FamilyKind, m: usize) -> MultiplierFamily {
        MultiplierFamily::new(kind, SphereDim::new(m).unwrap()).unwrap()
    }

    #[test]
    fn jackson_values() {
        assert_eq!(jackson_eval(2, 3, 0.0).unwrap(), 256.0);
        assert!(jackson_eval(1, 1, PI).unwrap().abs() < 1e-30);
        for t in [1e-9, 0.3, 1.7, 3.0] {
            assert!(jackson_eval(3, 4, t).unwrap() >= 0.0);
        }
        assert!((jackson_eval(1, 4, 1e-7).unwrap() - 25.0).abs() < 1e-9);
        assert!(jackson_eval(0, 4, 1.0).is_err());
        assert!(jackson_eval(1, 4, 3.2).is_err());
    }

    #[test]
    fn fejer_normalization() {
        // ∫_0^pi [sin t / sin(t/2)]^2 dt = 2 pi
        let f = fam(FamilyKind::Shifting, 2);
        let c = normalization_c(&f, JacksonParams::new(1, 1).unwrap(), 0).unwrap();
        assert!((c - 2.0 * PI).abs() < 1e-13);
        let c2 = normalization_c(&f, JacksonParams::new(2, 3).unwrap(), 1).unwrap();
        let direct = AdaptiveSimpson::with_tolerances(0.0, 1e-13)
            .panels(32)
            .integrate(|t| jackson_unchecked(2, 3, t) * libm::sin(t), 0.0, PI)
            .unwrap();
        assert!((c2 / direct - 1.0).abs() < 1e-11);
    }

    #[test]
    fn shifting_gauss_matches_adaptive() {
        let f = fam(FamilyKind::Shifting, 3);
        let p = JacksonParams::new(2, 4).unwrap();
        let a = operator_coefficients(&f, p, 2, 12).unwrap();
        for k in 0..=12 {
            let v = AdaptiveSimpson::with_tolerances(1e-13 * a.c, 0.0)
                .panels(64)
                .integrate(
                    |t| {
                        p.eval(t)
                            * f.weighted_multiplier(t, k).unwrap()
                            * libm::pow(libm::sin(t), 2.0)
                    },
                    0.0,
                    PI,
                )
                .unwrap()
                / a.c;
            assert!((v - a.g[k]).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn shifting_rank_vanishing() {
        for m in [2, 3] {
            let f = fam(FamilyKind::Shifting, m);
            for l in [1, 2] {
                for n in [3, 5, 8] {
                    let p = JacksonParams::new(l, n).unwrap();
                    let ln = p.degree();
                    let a = operator_coefficients(&f, p, m - 1, ln + 10).unwrap();
                    let max = a.operator_norm_bound();
                    assert!(
                        a.g[ln + 1..].iter().all(|g| g.abs() <= 1e-12 * max),
                        "m={m} l={l} n={n}"
                    );
                    assert!(a.g[ln].abs() > 1e-6 * max);
                    assert_eq!(a.last_nonzero_degree(1e-10), Some(ln));
                }
            }
        }
        let a = operator_coefficients(
            &fam(FamilyKind::Shifting, 2),
            JacksonParams::new(2, 5).unwrap(),
            1,
            20,
        )
        .unwrap();
        assert_eq!(a.numerical_rank(1e-10).unwrap(), 121);
        assert_eq!(a.numerical_rank(2.0).unwrap(), 0);
    }

    #[test]
    fn caps_rank_vanishing() {
        for m in [2, 3] {
            let f = fam(FamilyKind::Caps, m);
            let p = JacksonParams::new(2, 3).unwrap();
            let a = operator_coefficients(&f, p, 1, 12).unwrap();
            let max = a.operator_norm_bound();
            assert!(
                a.g[8..].iter().all(|g| g.abs() <= 1e-9 * max),
                "m={m}: {:?}",
                a.g
            );
            assert!(a.g[7].abs() > 1e-6 * max);
        }
    }

    #[test]
    fn steklov_does_not_vanish() {
        let f = fam(FamilyKind::Steklov, 2);
        let a = operator_coefficients(&f, JacksonParams::new(1, 3).unwrap(), 2, 15).unwrap();
        assert!(a.g.iter().all(|g| g.abs() > 1e-6));
        assert!(normalization_c(&f, JacksonParams::new(1, 3).unwrap(), 0).is_err());
    }

    #[test]
    fn uniformly_bounded() {
        for kind in FamilyKind::ALL {
            let f = fam(kind, 2);
            for n in [1, 4, 16] {
                let a =
                    operator_coefficients(&f, JacksonParams::new(2, n).unwrap(), f.auto_r(), 12)
                        .unwrap();
                assert_eq!(a.g[0], 1.0);
                assert!(a.operator_norm_bound() <= 1.0 + 1e-12, "{kind} n={n}");
                assert!(a.c > 0.0);
            }
        }
    }

    #[test]
    fn doubling_jackson_doubles_c() {
        // c is linear in the kernel: integrating 2J gives 2c
        let f = fam(FamilyKind::Caps, 2);
        let p = JacksonParams::new(1, 2).unwrap();
        let c = normalization_c(&f, p, 1).unwrap();
        let two = AdaptiveSimpson::with_tolerances(0.0, 1e-12)
            .panels(32)
            .integrate(
                |t| 2.0 * p.eval(t) * f.weighted_multiplier(t, 0).unwrap() * libm::sin(t),
                0.0,
                PI,
            )
            .unwrap();
        assert!((two / c - 2.0).abs() < 1e-10);
    }

    #[test]
    fn hs_defect_edge_cases() {
        let m = SphereDim::new(2).unwrap();
        let g = GaussianKernel::new(m, 1.0).unwrap();
        let s = funk_hecke_spectrum(&g.series_profile(10), m, 10).unwrap();
        let mut a = operator_coefficients(
            &fam(FamilyKind::Shifting, 2),
            JacksonParams::new(1, 2).unwrap(),
            1,
            10,
        )
        .unwrap();
        let real = hs_defect(&s, &a).unwrap();
        assert!(real.dominates_next_singular());
        a.g.iter_mut().for_each(|x| *x = 0.0);
        a.g[0] = 1e-300;
        let zero = hs_defect(&s, &a).unwrap();
        assert!((zero.defect - libm::sqrt(s.trace())).abs() < 1e-12 * libm::sqrt(s.trace()));
        a.g.iter_mut().for_each(|x| *x = 1.0);
        assert_eq!(hs_defect(&s, &a).unwrap().defect, 0.0);
        let short = funk_hecke_spectrum(&g.series_profile(8), m, 8).unwrap();
        assert!(matches!(
            hs_defect(&short, &a),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn gaussian_defect_decreases() {
        let m = SphereDim::new(2).unwrap();
        let g = GaussianKernel::new(m, 1.0).unwrap();
        let s = funk_hecke_spectrum(&g.series_profile(40), m, 40).unwrap();
        let f = fam(FamilyKind::Shifting, 2);
        let rows = decay_pipeline(&s, &f, 2, 1, &[1, 2, 4, 8, 16]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].defect < w[0].defect));
        for r in &rows {
            if 2 * r.rank <= s.sorted_len() {
                assert!(r.ratio.unwrap() > 0.0, "n={}", r.n);
            } else {
                assert!(r.ratio.is_none());
            }
        }
    }

    #[test]
    fn minimal_l_recipe() {
        // shifting m=2: rho + 0 + (m-1) + 1 = 4 -> l = 2
        assert_eq!(minimal_l(&fam(FamilyKind::Shifting, 2), 2.0).unwrap(), 2);
        // caps m=3: 2 + 3 + 1 + 1 = 7 -> l = 4
        assert_eq!(minimal_l(&fam(FamilyKind::Caps, 3), 2.0).unwrap(), 4);
        // steklov: 1 + 2 + 1 + 1 = 5 -> l = 3
        assert_eq!(minimal_l(&fam(FamilyKind::Steklov, 4), 1.0).unwrap(), 3);
        assert!(minimal_l(&fam(FamilyKind::Caps, 3), 0.0).is_err());
    }
}
