//! Adaptive Simpson quadrature on a finite interval.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerances for [`AdaptiveSimpson::integrate`].
///
/// A panel is accepted once the Richardson error estimate drops below
/// `max(abs_tol, rel_tol * |whole-interval estimate|)`, split evenly among
/// the panels of each level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSimpson {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Number of equal panels the interval is cut into before refinement.
    /// Guards against false convergence on oscillatory integrands.
    pub initial_panels: usize,
}

impl Default for AdaptiveSimpson {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_depth: 48,
            initial_panels: 8,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

impl AdaptiveSimpson {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite("integration bounds"));
        }
        if a == b {
            return Ok(0.0);
        }
        let panels = self.initial_panels.max(1);
        let h = (b - a) / panels as f64;

        let mut stack: Vec<Panel> = Vec::with_capacity(64);
        let mut coarse = 0.0;
        let mut f_left = f(a);
        for i in 0..panels {
            let pa = a + h * i as f64;
            let pb = if i + 1 == panels {
                b
            } else {
                a + h * (i + 1) as f64
            };
            let pm = 0.5 * (pa + pb);
            let fm = f(pm);
            let fb = f(pb);
            let whole = (pb - pa) / 6.0 * (f_left + 4.0 * fm + fb);
            coarse += whole;
            stack.push(Panel {
                a: pa,
                b: pb,
                fa: f_left,
                fm,
                fb,
                whole,
                tol: 0.0,
                depth: 0,
            });
            f_left = fb;
        }
        if !coarse.is_finite() {
            return Err(Error::NonFinite("integrand"));
        }
        let tol = self.abs_tol.max(self.rel_tol * coarse.abs());
        for p in stack.iter_mut() {
            p.tol = tol / panels as f64;
        }

        let mut total = 0.0;
        // Kahan compensation keeps summation of many accepted panels exact enough
        // that the tolerance, not roundoff, controls the final error.
        let mut comp = 0.0;
        while let Some(p) = stack.pop() {
            let m = 0.5 * (p.a + p.b);
            let lm = 0.5 * (p.a + m);
            let rm = 0.5 * (m + p.b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
            let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
            let delta = left + right - p.whole;
            if !delta.is_finite() {
                return Err(Error::NonFinite("integrand"));
            }
            if delta.abs() <= 15.0 * p.tol || m <= p.a || m >= p.b {
                let y = left + right + delta / 15.0 - comp;
                let t = total + y;
                comp = (t - total) - y;
                total = t;
                continue;
            }
            if p.depth >= self.max_depth {
                return Err(Error::Quadrature {
                    lo: p.a,
                    hi: p.b,
                    estimate: coarse,
                    depth: self.max_depth,
                });
            }
            let tol = 0.5 * p.tol;
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol,
                depth: p.depth + 1,
            });
        }
        Ok(total)
    }
}
