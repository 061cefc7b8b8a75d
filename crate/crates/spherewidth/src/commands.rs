use rayon::prelude::*;
use serde_json::json;
use spherewidth_core::holder::{
    self, chebyshev_grid, fit_power_law, gaussian_b_bound, holder_deviation, log_grid,
};
use spherewidth_core::jackson::{hs_defect_with_tol, operator_coefficients, JacksonParams};
use spherewidth_core::multipliers::least_squares;
use spherewidth_core::oracle::{self, build_grid, compare_spectra, plateau_lengths};
use spherewidth_core::spectra::{
    block_envelope, decay_diagnostic_values, funk_hecke_spectrum, kolmogorov_widths,
    optimal_subspace, width_diagnostic,
};
use spherewidth_core::{Error, MultiplierFamily, Spectrum};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::output::{Report, Table};

pub fn run(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Spectrum(a) => spectrum(a),
        Command::Widths(a) => widths(a),
        Command::Multiplier(a) => multiplier(a),
        Command::ApproxOp(a) => approx_op(a),
        Command::HsDefect(a) => hs_defect(a),
        Command::HolderFit(a) => holder_fit(a),
        Command::OracleCompare(a) => oracle_compare(a),
        Command::DecayCheck(a) => decay_check(a),
    }
}

fn build_spectrum(k: &KernelArgs) -> CliResult<(Spectrum, Kernel)> {
    let kernel = k.build()?;
    let s = funk_hecke_spectrum(&kernel.spectral, k.dim()?, k.kmax)?;
    Ok((s, kernel))
}

fn family(m: usize, f: Family) -> CliResult<MultiplierFamily> {
    Ok(MultiplierFamily::new(f.into(), sphere_dim(m)?)?)
}

fn t_grid(r: &TRange) -> CliResult<Vec<f64>> {
    if !(r.t_max < std::f64::consts::PI) {
        return Err(CliError::Config(format!(
            "--t-max must be below pi, got {}",
            r.t_max
        )));
    }
    Ok(log_grid(r.t_min, r.t_max, r.t_count)?)
}

fn spectrum(a: &SpectrumArgs) -> CliResult<Report> {
    let (s, kernel) = build_spectrum(&a.kernel)?;
    let mut t = Table::new(&["k", "multiplicity", "lambda"]);
    for e in s.entries() {
        t.push(vec![
            e.degree.into(),
            e.multiplicity.into(),
            e.eigenvalue.into(),
        ]);
    }
    let trace = s.trace();
    let expected = s.m().volume() * kernel.pointwise.eval(1.0)?;
    Ok(Report::new(t)
        .with_float("trace", trace)
        .with_float("trace_expected", expected)
        .with_float("trace_rel_err", (trace - expected).abs() / expected.abs()))
}

fn widths(a: &WidthsArgs) -> CliResult<Report> {
    let (s, _) = build_spectrum(&a.kernel)?;
    let w = kolmogorov_widths(&s, a.nmax)?;
    let mut t = Table::new(&["n", "width", "degree", "slot"]);
    for (n, (d, (k, slot))) in w.values.iter().zip(&w.labels).enumerate() {
        t.push(vec![n.into(), (*d).into(), (*k).into(), (*slot).into()]);
    }
    let unique = optimal_subspace(&s, a.nmax.max(1))?.unique;
    Ok(Report::new(t).with("optimal_subspace_unique_at_nmax", unique))
}

fn multiplier(a: &MultiplierArgs) -> CliResult<Report> {
    let f = family(a.m, a.family)?;
    let ts = match a.t {
        Some(t) => vec![t],
        None => t_grid(&a.range)?,
    };
    let rows = ts
        .par_iter()
        .map(|&t| f.multipliers(t, a.kmax).map(|mu| (t, mu)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut table = Table::new(&["t", "k", "mu"]);
    for (t, mu) in rows {
        for (k, v) in mu.into_iter().enumerate() {
            table.push(vec![t.into(), k.into(), v.into()]);
        }
    }
    let st = f.structure();
    Ok(Report::new(table)
        .with("family", f.kind().name())
        .with("product_form", st.product_form)
        .with_float("normalizer_exponent", st.normalizer_exponent))
}

fn approx_op(a: &ApproxOpArgs) -> CliResult<Report> {
    let f = family(a.m, a.jackson.family)?;
    let p = JacksonParams::new(a.jackson.l, a.n)?;
    let r = a.jackson.r.resolve(f.auto_r());
    let kmax = a.kmax.unwrap_or(p.degree() + 10);
    let op = operator_coefficients(&f, p, r, kmax)?;
    let mut t = Table::new(&["k", "g"]);
    for (k, g) in op.g.iter().enumerate() {
        t.push(vec![k.into(), (*g).into()]);
    }
    Ok(Report::new(t)
        .with("r", r)
        .with("degree_ln", p.degree())
        .with_float("c", op.c)
        .with("numerical_rank", op.numerical_rank(a.jackson.rank_tol)?)
        .with_float("norm_bound", op.operator_norm_bound())
        .with(
            "last_nonzero_degree",
            op.last_nonzero_degree(a.jackson.rank_tol),
        )
        .with("monotonicity_violations", op.monotonicity_violations()))
}

fn hs_defect(a: &HsDefectArgs) -> CliResult<Report> {
    let (s, _) = build_spectrum(&a.kernel)?;
    let f = family(a.kernel.m, a.jackson.family)?;
    let r = a.jackson.r.resolve(f.auto_r());
    let kmax = a.kernel.kmax;
    if a.ns.is_empty() {
        return Err(CliError::Config("--ns must list at least one n".into()));
    }
    let rows =
        a.ns.par_iter()
            .map(|&n| {
                let op = operator_coefficients(&f, JacksonParams::new(a.jackson.l, n)?, r, kmax)?;
                hs_defect_with_tol(&s, &op, a.jackson.rank_tol).map(|h| (n, h))
            })
            .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(&[
        "n",
        "rank",
        "defect",
        "next_singular",
        "q_a2q",
        "sqrt_q_a2q",
    ]);
    for (n, h) in &rows {
        t.push(vec![
            (*n).into(),
            h.rank.into(),
            h.defect.into(),
            h.next_singular.into(),
            h.q_a2q.into(),
            h.sqrt_q_a2q.into(),
        ]);
    }
    let chain = rows.iter().all(|(_, h)| h.dominates_next_singular());
    let decreasing = rows.windows(2).all(|w| w[1].1.defect < w[0].1.defect);
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|(_, h)| h.defect > 0.0)
        .map(|(n, h)| ((*n as f64).ln(), h.defect.ln()))
        .unzip();
    let mut report = Report::new(t)
        .with("r", r)
        .with("chain_holds", chain)
        .with("strictly_decreasing", decreasing);
    if x.len() >= 2 {
        report = report.with_float("loglog_slope", least_squares(&x, &y).0);
    }
    Ok(report)
}

fn holder_fit(a: &HolderFitArgs) -> CliResult<Report> {
    let (s, _) = build_spectrum(&a.kernel)?;
    let f = family(a.kernel.m, a.family)?;
    let ts = t_grid(&a.range)?;
    let ugrid = chebyshev_grid(a.ugrid)?;
    let dev = ts
        .par_iter()
        .map(|&t| holder_deviation(&s, &f, t, &ugrid))
        .collect::<Result<Vec<_>, Error>>()?;
    let fit = fit_power_law(&ts, &dev)?;
    let mut t = Table::new(&["t", "deviation", "fitted_line"]);
    for (&ti, &d) in ts.iter().zip(&dev) {
        t.push(vec![ti.into(), d.into(), fit.fitted(ti).into()]);
    }
    let rho = a.rho.unwrap_or(fit.rho_hat);
    let full = log_grid(a.range.t_min, 3.0, 30)?;
    let full_dev = full
        .par_iter()
        .map(|&t| holder_deviation(&s, &f, t, &ugrid))
        .collect::<Result<Vec<_>, Error>>()?;
    let (t_at, ratio) = full
        .iter()
        .zip(&full_dev)
        .map(|(&t, &d)| (t, d / t.powf(rho)))
        .fold((full[0], f64::NEG_INFINITY), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        });
    let mid = ts[ts.len() / 2];
    let refine = holder::grid_refinement(&s, &f, mid, 101, 401)?;
    let mut report = Report::new(t)
        .with_float("rho_hat", fit.rho_hat)
        .with_float("b_hat", fit.b_hat)
        .with_float("residual", fit.residual)
        .with("t_range", json!([fit.t_range.0, fit.t_range.1]))
        .with("excluded", fit.excluded.clone())
        .with_float("full_range_rho", rho)
        .with_float("full_range_max_ratio", ratio)
        .with_float("full_range_argmax_t", t_at)
        .with_float("ugrid_refinement_rel_change", refine.relative_change);
    if let Some(KernelSpec::Gaussian { sigma }) = a.kernel.kernel {
        match gaussian_b_bound(s.m(), sigma, a.kernel.kmax) {
            Ok(b) => {
                report = report
                    .with_float("gaussian_b", b.b)
                    .with_float("b_hat_over_b", fit.b_hat / b.b);
            }
            Err(e) => report = report.with("gaussian_b", e.to_string()),
        }
    }
    Ok(report)
}

fn oracle_compare(a: &OracleArgs) -> CliResult<Report> {
    let m = sphere_dim(2)?;
    let kernel = a.kernel.build(m, a.kmax)?;
    let s = funk_hecke_spectrum(&kernel.spectral, m, a.kmax)?;
    let g = build_grid(a.n_theta, a.n_phi)?;
    if a.count == 0 || a.count > g.len() {
        return Err(CliError::Config(format!(
            "--count must lie in 1..={}",
            g.len()
        )));
    }
    if (a.count as u64) > s.sorted_len() {
        return Err(Error::Range {
            needed: a.count as u64,
            available: s.sorted_len(),
        }
        .into());
    }
    let parts = (0..=g.n_phi() / 2)
        .into_par_iter()
        .map(|q| oracle::frequency_eigenvalues(&kernel.pointwise, &g, q))
        .collect::<Result<Vec<_>, Error>>()?;
    let all = oracle::merge_frequency_eigenvalues(&parts, g.len());
    let top = &all[..a.count];
    let reference = s.sorted_prefix(a.count as u64);
    let (err, matched) = compare_spectra(top, &reference, a.floor)?;
    let mut t = Table::new(&["n", "oracle", "reference", "rel_err"]);
    for (i, (o, r)) in top.iter().zip(&reference).enumerate() {
        t.push(vec![
            (i + 1).into(),
            (*o).into(),
            (*r).into(),
            ((o - r).abs() / r.abs()).into(),
        ]);
    }
    let min_ratio = all.last().copied().unwrap_or(0.0) / all[0];
    Ok(Report::new(t)
        .with("grid", json!([a.n_theta, a.n_phi]))
        .with("matched", matched)
        .with_float("max_rel_err", err)
        .with("plateaus", plateau_lengths(top, a.plateau_gap))
        .with_float("min_eigenvalue_over_max", min_ratio)
        .with("psd", min_ratio >= -1e-10))
}

fn decay_check(a: &DecayArgs) -> CliResult<Report> {
    let (s, _) = build_spectrum(&a.kernel)?;
    if a.nmax == 0 {
        return Err(CliError::Config("--nmax must be positive".into()));
    }
    let sorted = s.sorted_prefix(a.nmax);
    if (sorted.len() as u64) < a.nmax {
        return Err(Error::Range {
            needed: a.nmax,
            available: s.sorted_len(),
        }
        .into());
    }
    let m = s.m();
    let lam = decay_diagnostic_values(&sorted, a.rho, m)?;
    let w = kolmogorov_widths(&s, a.nmax - 1)?;
    let wd = width_diagnostic(&w, a.rho, m)?;
    let mut t = Table::new(&[
        "n",
        "lambda",
        "lambda_diagnostic",
        "width",
        "width_diagnostic",
    ]);
    for i in 0..sorted.len() {
        t.push(vec![
            (i + 1).into(),
            sorted[i].into(),
            lam.values[i].into(),
            w.values[i].into(),
            wd.values[i].into(),
        ]);
    }
    let env = block_envelope(&s, a.rho)?;
    let env: Vec<(u64, f64)> = env.into_iter().filter(|(n, _)| *n <= a.nmax).collect();
    let env_increase = env
        .windows(2)
        .find(|w| w[1].0 > a.skip as u64 && w[1].1 > w[0].1)
        .map(|w| w[1].0);
    Ok(Report::new(t)
        .with(
            "first_increase_after_skip",
            lam.first_increase_after(a.skip),
        )
        .with_float("lambda_diagnostic_sup", lam.sup)
        .with("lambda_diagnostic_argmax", lam.argmax)
        .with_float("width_diagnostic_sup", wd.sup)
        .with("width_diagnostic_argmax", wd.argmax)
        .with("width_bounded_tail", wd.bounded_tail())
        .with("block_envelope_first_increase", env_increase)
        .with(
            "block_envelope",
            env.iter().map(|(n, v)| json!([n, v])).collect::<Vec<_>>(),
        ))
}
