//! Brute-force Nyström check on `S^2`: a product quadrature grid, the
//! weighted Gram matrix of an isotropic kernel, and its dense eigenvalues.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::eigen::symmetric_eigenvalues;
use crate::error::{domain, Error, Result};
use crate::kernels::IsotropicProfile;
use crate::sphere_math::gegenbauer_quadrature;

/// Gauss–Legendre nodes in `cos theta` crossed with uniform longitudes.
///
/// Point `(i, j)` (latitude `i`, longitude `j`) is stored at `i * n_phi + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    z: Vec<f64>,
    lat_weights: Vec<f64>,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

pub fn build_grid(n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
    if n_theta < 2 || n_phi < 4 {
        return Err(domain!(
            "grid needs n_theta >= 2 and n_phi >= 4, got {n_theta} x {n_phi}"
        ));
    }
    let rule = gegenbauer_quadrature(2, n_theta)?;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut points = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    let mut lat_weights = Vec::with_capacity(n_theta);
    for (&z, &w) in rule.nodes().iter().zip(rule.weights()) {
        let r = libm::sqrt((1.0 - z) * (1.0 + z));
        lat_weights.push(w * dphi);
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            points.push([r * libm::cos(phi), r * libm::sin(phi), z]);
            weights.push(w * dphi);
        }
    }
    Ok(SphereGrid {
        n_theta,
        n_phi,
        z: rule.nodes().to_vec(),
        lat_weights,
        points,
        weights,
    })
}

impl SphereGrid {
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut([f64; 3]) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0)
}

fn check_count(g: &SphereGrid, count: usize) -> Result<()> {
    if count > g.len() {
        return Err(domain!(
            "requested {count} eigenvalues from a grid of {} points",
            g.len()
        ));
    }
    Ok(())
}

/// Row `i` of `M_{ij} = sqrt(w_i w_j) K(x_i . x_j)`.
pub fn gram_row(p: &IsotropicProfile, g: &SphereGrid, i: usize) -> Vec<f64> {
    let (xi, wi) = (g.points[i], g.weights[i]);
    g.points
        .iter()
        .zip(&g.weights)
        .map(|(&xj, &wj)| libm::sqrt(wi * wj) * p.eval_unchecked(dot(xi, xj)))
        .collect()
}

/// Top `count` eigenvalues of the full dense Gram matrix.
pub fn gram_eigenvalues_dense(
    p: &IsotropicProfile,
    g: &SphereGrid,
    count: usize,
) -> Result<Vec<f64>> {
    check_count(g, count)?;
    let n = g.len();
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        a.extend(gram_row(p, g, i));
    }
    let mut ev = symmetric_eigenvalues(a, n)?;
    ev.truncate(count);
    Ok(ev)
}

/// The `n_theta x n_theta` block of frequency `q` after a real Fourier
/// transform in longitude.
///
/// The Gram matrix is block circulant in longitude, since
/// `x . y = z_i z_j + r_i r_j cos(phi_a - phi_b)`, so it is orthogonally similar
/// to the direct sum of these symmetric blocks (frequencies `q` and `n_phi - q`
/// give the same block).
pub fn frequency_block(p: &IsotropicProfile, g: &SphereGrid, q: usize) -> Vec<f64> {
    let (nt, np) = (g.n_theta, g.n_phi);
    let cos_d: Vec<f64> = (0..np)
        .map(|d| libm::cos(2.0 * PI * d as f64 / np as f64))
        .collect();
    let mut block = vec![0.0; nt * nt];
    for i in 0..nt {
        for j in 0..=i {
            let (zi, zj) = (g.z[i], g.z[j]);
            let rr = libm::sqrt((1.0 - zi * zi).max(0.0) * (1.0 - zj * zj).max(0.0));
            let mut acc = 0.0;
            for d in 0..np {
                let u = (zi * zj + rr * cos_d[d]).clamp(-1.0, 1.0);
                acc += p.eval_unchecked(u) * cos_d[(q * d) % np];
            }
            let v = libm::sqrt(g.lat_weights[i] * g.lat_weights[j]) * acc;
            block[i * nt + j] = v;
            block[j * nt + i] = v;
        }
    }
    block
}

/// Eigenvalues of one frequency block with their multiplicity in the full matrix.
pub fn frequency_eigenvalues(
    p: &IsotropicProfile,
    g: &SphereGrid,
    q: usize,
) -> Result<(Vec<f64>, usize)> {
    let np = g.n_phi;
    if q > np / 2 {
        return Err(domain!("frequency {q} exceeds n_phi / 2 = {}", np / 2));
    }
    let copies = if q == 0 || 2 * q == np { 1 } else { 2 };
    Ok((
        symmetric_eigenvalues(frequency_block(p, g, q), g.n_theta)?,
        copies,
    ))
}

/// Merges per-frequency eigenvalues into the top `count` of the full matrix.
pub fn merge_frequency_eigenvalues(parts: &[(Vec<f64>, usize)], count: usize) -> Vec<f64> {
    let mut all: Vec<f64> = parts
        .iter()
        .flat_map(|(v, c)| v.iter().flat_map(move |&x| core::iter::repeat(x).take(*c)))
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all.truncate(count);
    all
}

/// Top `count` eigenvalues of the Gram matrix, sorted nonincreasing.
pub fn gram_eigenvalues(p: &IsotropicProfile, g: &SphereGrid, count: usize) -> Result<Vec<f64>> {
    check_count(g, count)?;
    let parts = (0..=g.n_phi / 2)
        .map(|q| frequency_eigenvalues(p, g, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_frequency_eigenvalues(&parts, count))
}

fn is_nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

/// Largest positionwise relative error over the prefix where
/// `reference > floor`, and the length of that prefix.
pub fn compare_spectra(oracle: &[f64], reference: &[f64], floor: f64) -> Result<(f64, usize)> {
    if !is_nonincreasing(oracle) || !is_nonincreasing(reference) {
        return Err(domain!("spectra must be sorted nonincreasing"));
    }
    let matched = oracle
        .iter()
        .zip(reference)
        .take_while(|(_, &r)| r > floor)
        .count();
    if matched == 0 {
        return Err(Error::Degenerate(alloc::format!(
            "no reference eigenvalue above the floor {floor:e}"
        )));
    }
    let err = oracle
        .iter()
        .zip(reference)
        .take(matched)
        .map(|(o, r)| (o - r).abs() / r)
        .fold(0.0, f64::max);
    Ok((err, matched))
}

/// Lengths of runs of consecutive values within `rel_gap` of each other.
pub fn plateau_lengths(values: &[f64], rel_gap: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut run = 0;
    for (i, &v) in values.iter().enumerate() {
        run += 1;
        let split = match values.get(i + 1) {
            Some(&next) => (v - next).abs() > rel_gap * v.abs(),
            None => true,
        };
        if split {
            out.push(run);
            run = 0;
        }
    }
    out
}
