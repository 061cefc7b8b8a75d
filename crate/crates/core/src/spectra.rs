//! Funk–Hecke spectra, sorted eigenvalues with multiplicity, Kolmogorov
//! widths and decay diagnostics.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::kernels::{IsotropicProfile, ProfileKind};
use crate::sphere_math::{
    fill_gegenbauer, gegenbauer_quadrature, weight_mass, QuadratureRule, SphereDim,
};

/// Relative threshold below which negative eigenvalues count as roundoff.
pub const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub degree: usize,
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// Per-degree eigenvalues together with their sorted, multiplicity-expanded view.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    m: SphereDim,
    entries: Vec<SpectrumEntry>,
    /// Entry indices by (value desc, degree asc).
    order: Vec<usize>,
    /// `ends[i]` = number of sorted eigenvalues covered by `order[..=i]`.
    ends: Vec<u64>,
}

impl Spectrum {
    /// Degree `k` gets eigenvalue `values[k]` and multiplicity `d_k^m`.
    /// Negatives above `-CLAMP_TOL * max|lambda|` are set to 0.
    pub fn from_degree_values(m: SphereDim, values: &[f64]) -> Result<Self> {
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let entries = values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                Ok(SpectrumEntry {
                    degree: k,
                    eigenvalue: clamp(k, v, scale)?,
                    multiplicity: m.harmonic_dim(k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(m, entries))
    }

    /// Arbitrary entries with explicit multiplicities (degrees need not be
    /// contiguous). Eigenvalues must be finite and nonnegative.
    pub fn from_entries(m: SphereDim, entries: Vec<SpectrumEntry>) -> Result<Self> {
        for e in &entries {
            if !e.eigenvalue.is_finite() {
                return Err(Error::NonFinite("eigenvalue"));
            }
            if e.eigenvalue < 0.0 {
                return Err(Error::NotPositiveDefinite {
                    degree: e.degree,
                    value: e.eigenvalue,
                });
            }
            if e.multiplicity == 0 {
                return Err(domain!("degree {} has zero multiplicity", e.degree));
            }
        }
        Ok(Self::build(m, entries))
    }

    fn build(m: SphereDim, entries: Vec<SpectrumEntry>) -> Self {
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (&entries[a], &entries[b]);
            eb.eigenvalue
                .total_cmp(&ea.eigenvalue)
                .then(ea.degree.cmp(&eb.degree))
        });
        let mut total = 0u64;
        let ends = order
            .iter()
            .map(|&i| {
                total += entries[i].multiplicity;
                total
            })
            .collect();
        Self {
            m,
            entries,
            order,
            ends,
        }
    }

    pub fn m(&self) -> SphereDim {
        self.m
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Per-degree eigenvalues in entry order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eigenvalue).collect()
    }

    /// Largest degree present, if any.
    pub fn kmax(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.degree).max()
    }

    /// Length of the sorted sequence, `sum d_k`.
    pub fn sorted_len(&self) -> u64 {
        self.ends.last().copied().unwrap_or(0)
    }

    /// `sum_k d_k lambda_k`.
    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.multiplicity as f64 * e.eigenvalue)
            .sum()
    }

    fn locate(&self, n: u64) -> Option<(usize, u64)> {
        if n == 0 || n > self.sorted_len() {
            return None;
        }
        let pos = self.ends.partition_point(|&end| end < n);
        let start = if pos == 0 { 0 } else { self.ends[pos - 1] };
        Some((self.order[pos], n - start))
    }

    /// `lambda_n` of the sorted sequence, 1-indexed.
    pub fn sorted_value(&self, n: u64) -> Option<f64> {
        self.locate(n).map(|(i, _)| self.entries[i].eigenvalue)
    }

    /// `(degree, slot)` of the `n`-th sorted eigenvalue; both `n` and the slot
    /// are 1-indexed.
    pub fn sorted_index(&self, n: u64) -> Option<(usize, u64)> {
        self.locate(n)
            .map(|(i, slot)| (self.entries[i].degree, slot))
    }

    /// The flat sorted sequence `lambda_1 >= lambda_2 >= ...`.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        self.sorted_prefix(self.sorted_len())
    }

    /// The first `min(count, sorted_len)` sorted eigenvalues.
    pub fn sorted_prefix(&self, count: u64) -> Vec<f64> {
        let count = count.min(self.sorted_len());
        let mut out = Vec::with_capacity(count as usize);
        for &i in &self.order {
            let e = &self.entries[i];
            let take = e.multiplicity.min(count - out.len() as u64);
            out.extend(core::iter::repeat(e.eigenvalue).take(take as usize));
            if out.len() as u64 == count {
                break;
            }
        }
        out
    }
}

fn clamp(degree: usize, v: f64, scale: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite("eigenvalue"));
    }
    if v >= 0.0 {
        return Ok(v);
    }
    if v >= -CLAMP_TOL * scale {
        return Ok(0.0);
    }
    Err(Error::NotPositiveDefinite { degree, value: v })
}

/// Default Gauss rule size for degrees up to `kmax`.
pub fn default_quadrature_nodes(kmax: usize) -> usize {
    2 * kmax + 64
}

pub fn default_quadrature(m: SphereDim, kmax: usize) -> Result<QuadratureRule> {
    gegenbauer_quadrature(m.get(), default_quadrature_nodes(kmax))
}

/// Funk–Hecke eigenvalues `lambda_k = omega_{m-1} ∫ K_i(u) P_k(u) (1-u^2)^{(m-2)/2} du`
/// for `k = 0..=kmax`.
///
/// Power-series profiles are integrated exactly term by term through the
/// moments `∫ u^j P_k w`; the other kinds use the Gauss rule `q`.
pub fn funk_hecke_eigenvalues(
    p: &IsotropicProfile,
    m: SphereDim,
    kmax: usize,
    q: &QuadratureRule,
) -> Result<Spectrum> {
    let values = match p.kind() {
        ProfileKind::PowerSeries => {
            power_series_eigenvalues(p.power_coefficients().unwrap_or(&[]), m, kmax)?
        }
        ProfileKind::EigenSeries => {
            let (pm, lam) = p.eigen_coefficients().expect("eigen series");
            if pm != m {
                return Err(Error::Dimension {
                    expected: m.get(),
                    found: pm.get(),
                });
            }
            let needed = kmax + lam.len().saturating_sub(1);
            if q.exact_degree() < needed {
                return Err(domain!(
                    "quadrature with {} nodes is exact to degree {}, eigen series needs {needed}",
                    q.len(),
                    q.exact_degree()
                ));
            }
            funk_hecke_quadrature(p, m, kmax, q)?
        }
        ProfileKind::ClosedForm => funk_hecke_quadrature(p, m, kmax, q)?,
    };
    Spectrum::from_degree_values(m, &values)
}

/// [`funk_hecke_eigenvalues`] with the default Gauss rule.
pub fn funk_hecke_spectrum(p: &IsotropicProfile, m: SphereDim, kmax: usize) -> Result<Spectrum> {
    if p.kind() == ProfileKind::PowerSeries {
        return Spectrum::from_degree_values(
            m,
            &power_series_eigenvalues(p.power_coefficients().unwrap_or(&[]), m, kmax)?,
        );
    }
    let extra = p.eigen_coefficients().map_or(0, |(_, l)| l.len());
    let rule = default_quadrature(m, kmax.max(extra))?;
    funk_hecke_eigenvalues(p, m, kmax, &rule)
}

/// Raw Gauss-rule eigenvalues (no clamping) for any profile kind.
pub fn funk_hecke_quadrature(
    p: &IsotropicProfile,
    m: SphereDim,
    kmax: usize,
    q: &QuadratureRule,
) -> Result<Vec<f64>> {
    if q.m() != m.get() {
        return Err(Error::Dimension {
            expected: m.get(),
            found: q.m(),
        });
    }
    let mut acc = alloc::vec![0.0; kmax + 1];
    let mut pk = Vec::with_capacity(kmax + 1);
    for (&x, &w) in q.nodes().iter().zip(q.weights()) {
        let kw = w * p.eval_unchecked(x);
        fill_gegenbauer(m.get(), kmax, x, &mut pk);
        for (a, b) in acc.iter_mut().zip(&pk) {
            *a += kw * b;
        }
    }
    let scale = m.equator_volume();
    acc.iter_mut().for_each(|a| *a *= scale);
    if acc.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("profile"));
    }
    Ok(acc)
}

/// `omega_{m-1} sum_j a_j M_{j,k}` with `M_{j,k} = ∫ u^j P_k(u) (1-u^2)^{(m-2)/2} du`.
///
/// From `u P_k = alpha_k P_{k+1} + beta_k P_{k-1}` the moments obey
/// `M_{j,k} = alpha_k M_{j-1,k+1} + beta_k M_{j-1,k-1}` with nonnegative
/// coefficients, so nonnegative series are summed without cancellation.
pub fn power_series_eigenvalues(coeffs: &[f64], m: SphereDim, kmax: usize) -> Result<Vec<f64>> {
    let mf = m.get() as f64;
    let t = coeffs.len();
    let width = kmax.max(t) + 2;
    let alpha: Vec<f64> = (0..width)
        .map(|k| {
            let k = k as f64;
            (k + mf - 1.0) / (2.0 * k + mf - 1.0)
        })
        .collect();
    let beta: Vec<f64> = (0..width)
        .map(|k| {
            let k = k as f64;
            k / (2.0 * k + mf - 1.0)
        })
        .collect();

    let mut row = alloc::vec![0.0; width];
    let mut next = alloc::vec![0.0; width];
    row[0] = weight_mass(m.get())?;
    let mut out = alloc::vec![0.0; kmax + 1];
    for (j, &a) in coeffs.iter().enumerate() {
        if j > 0 {
            // M_{j,k} vanishes for k > j or k - j odd
            let hi = j.min(width - 2);
            next[..=hi + 1].iter_mut().for_each(|x| *x = 0.0);
            let mut k = j % 2;
            while k <= hi {
                let up = row[k + 1];
                let down = if k > 0 { row[k - 1] } else { 0.0 };
                next[k] = alpha[k] * up + beta[k] * down;
                k += 2;
            }
            core::mem::swap(&mut row, &mut next);
        }
        if a != 0.0 {
            let mut k = j % 2;
            while k <= kmax.min(j) {
                out[k] += a * row[k];
                k += 2;
            }
        }
    }
    let scale = m.equator_volume();
    out.iter_mut().for_each(|x| *x *= scale);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("power-series eigenvalues"));
    }
    Ok(out)
}

/// `d_n = sqrt(lambda_{n+1})`, `n = 0..=nmax`, with the `(degree, slot)` of
/// the eigenvalue behind each width.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthSequence {
    pub values: Vec<f64>,
    pub labels: Vec<(usize, u64)>,
}

pub fn kolmogorov_widths(s: &Spectrum, nmax: u64) -> Result<WidthSequence> {
    let needed = nmax + 1;
    if s.sorted_len() < needed {
        return Err(Error::Range {
            needed,
            available: s.sorted_len(),
        });
    }
    let mut values = Vec::with_capacity(needed as usize);
    let mut labels = Vec::with_capacity(needed as usize);
    for n in 1..=needed {
        let (i, slot) = s.locate(n).expect("in range");
        values.push(libm::sqrt(s.entries[i].eigenvalue));
        labels.push((s.entries[i].degree, slot));
    }
    Ok(WidthSequence { values, labels })
}

/// Index set of the `n` largest eigenvalues with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalSubspace {
    /// `(degree, slot)`, slot 1-indexed.
    pub indices: Vec<(usize, u64)>,
    /// False when `lambda_n = lambda_{n+1}`, so the truncation splits a tie
    /// and the optimal subspace is not unique.
    pub unique: bool,
}

pub fn optimal_subspace(s: &Spectrum, n: u64) -> Result<OptimalSubspace> {
    if n == 0 {
        return Err(domain!("optimal subspace needs n >= 1"));
    }
    if n > s.sorted_len() {
        return Err(Error::Range {
            needed: n,
            available: s.sorted_len(),
        });
    }
    let mut indices = Vec::with_capacity(n as usize);
    for &i in &s.order {
        let e = &s.entries[i];
        for slot in 1..=e.multiplicity {
            if indices.len() as u64 == n {
                break;
            }
            indices.push((e.degree, slot));
        }
        if indices.len() as u64 == n {
            break;
        }
    }
    let unique = match (s.sorted_value(n), s.sorted_value(n + 1)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    };
    Ok(OptimalSubspace { indices, unique })
}

/// `lambda_n n^{1+rho/m}` over the computed range.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub values: Vec<f64>,
    pub sup: f64,
    /// 1-indexed `n` where the supremum is attained.
    pub argmax: usize,
}

impl DecayReport {
    /// Whether the supremum is attained in the first half of the range.
    pub fn bounded_tail(&self) -> bool {
        2 * self.argmax <= self.values.len()
    }

    /// First 1-indexed `n > skip` with `values[n] > values[n-1]`.
    pub fn first_increase_after(&self, skip: usize) -> Option<usize> {
        (skip.max(1)..self.values.len())
            .find(|&i| self.values[i] > self.values[i - 1])
            .map(|i| i + 1)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 2.0) {
        return Err(domain!("Hölder exponent must lie in (0, 2], got {rho}"));
    }
    Ok(())
}

/// Applies `lambda_n n^{1+rho/m}` to a sorted sequence given as a slice.
pub fn decay_diagnostic_values(sorted: &[f64], rho: f64, m: SphereDim) -> Result<DecayReport> {
    check_rho(rho)?;
    if sorted.is_empty() {
        return Err(domain!("decay diagnostic needs a nonempty spectrum"));
    }
    let e = 1.0 + rho / m.get() as f64;
    let values: Vec<f64> = sorted
        .iter()
        .enumerate()
        .map(|(i, l)| l * libm::pow((i + 1) as f64, e))
        .collect();
    let (mut argmax, mut sup) = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > sup {
            sup = v;
            argmax = i;
        }
    }
    Ok(DecayReport {
        values,
        sup,
        argmax: argmax + 1,
    })
}

pub fn decay_diagnostic(s: &Spectrum, rho: f64) -> Result<DecayReport> {
    decay_diagnostic_values(&s.sorted_eigenvalues(), rho, s.m())
}

/// `d_n (n+1)^{1/2 + rho/(2m)}` for `n = 0..`; same report layout, with
/// `argmax` counting from 1 at `n = 0`.
pub fn width_diagnostic(w: &WidthSequence, rho: f64, m: SphereDim) -> Result<DecayReport> {
    check_rho(rho)?;
    if w.values.is_empty() {
        return Err(domain!("width diagnostic needs at least one width"));
    }
    let e = 0.5 + rho / (2.0 * m.get() as f64);
    let values: Vec<f64> = w
        .values
        .iter()
        .enumerate()
        .map(|(n, d)| d * libm::pow((n + 1) as f64, e))
        .collect();
    let (mut argmax, mut sup) = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > sup {
            sup = v;
            argmax = i;
        }
    }
    Ok(DecayReport {
        values,
        sup,
        argmax: argmax + 1,
    })
}

/// Diagnostic sampled only at the last index of each degree block, where the
/// sorted sequence is about to drop. Returns `(n, lambda_n n^{1+rho/m})`.
pub fn block_envelope(s: &Spectrum, rho: f64) -> Result<Vec<(u64, f64)>> {
    check_rho(rho)?;
    let e = 1.0 + rho / s.m().get() as f64;
    Ok(s.order
        .iter()
        .zip(&s.ends)
        .map(|(&i, &end)| (end, s.entries[i].eigenvalue * libm::pow(end as f64, e)))
        .collect())
}
