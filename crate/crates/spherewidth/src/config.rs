//! Command-line configuration and kernel selection.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spherewidth_core::{DotPowerKernel, FamilyKind, GaussianKernel, IsotropicProfile, SphereDim};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "spherewidth",
    version,
    about = "Spectra, widths and Jackson-type operators for isotropic kernels on spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Funk–Hecke eigenvalues per degree, with a trace check.
    Spectrum(SpectrumArgs),
    /// Kolmogorov widths d_n = sqrt(lambda_{n+1}).
    Widths(WidthsArgs),
    /// Multiplier table mu_t^k of a smoothing family.
    Multiplier(MultiplierArgs),
    /// Coefficients g^k of the Jackson-type operator A_{n,r}.
    ApproxOp(ApproxOpArgs),
    /// Hilbert–Schmidt defect of A_{n,r} against K^{1/2}, over n.
    HsDefect(HsDefectArgs),
    /// Deviation table and power-law fit of the Hölder condition.
    HolderFit(HolderFitArgs),
    /// Nyström Gram eigenvalues on S^2 against the Funk–Hecke spectrum.
    OracleCompare(OracleArgs),
    /// Normalized eigenvalue and width sequences.
    DecayCheck(DecayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Power,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Shifting,
    Caps,
    Steklov,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Shifting => FamilyKind::Shifting,
            Family::Caps => FamilyKind::Caps,
            Family::Steklov => FamilyKind::Steklov,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write the summary and config echo as JSON here (useful with CSV output).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    /// Sphere dimension m of S^m.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// `gaussian:sigma=<s>`, `dotpower:eps=<e>` or `constant:c=<c>`.
    #[arg(long, conflicts_with = "kernel_csv")]
    pub kernel: Option<KernelSpec>,
    /// Coefficient table with header `k,coeff`.
    #[arg(long)]
    pub kernel_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KernelKind::Power)]
    pub kernel_kind: KernelKind,
    /// Highest degree of the spectrum.
    #[arg(long, default_value_t = 40)]
    pub kmax: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WidthsArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Widths d_0 .. d_{nmax-1}.
    #[arg(long, default_value_t = 100)]
    pub nmax: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TRange {
    #[arg(long, default_value_t = 1e-3)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub t_max: f64,
    /// Number of log-spaced angles.
    #[arg(long, default_value_t = 20)]
    pub t_count: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MultiplierArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    /// Single angle; overrides the log-spaced range.
    #[arg(long)]
    pub t: Option<f64>,
    #[command(flatten)]
    pub range: TRange,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RArg {
    Auto,
    Value(usize),
}

impl FromStr for RArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(RArg::Auto);
        }
        s.parse()
            .map(RArg::Value)
            .map_err(|_| format!("expected 'auto' or a nonnegative integer, got '{s}'"))
    }
}

impl RArg {
    pub fn resolve(self, auto: usize) -> usize {
        match self {
            RArg::Auto => auto,
            RArg::Value(r) => r,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct JacksonArgs {
    #[arg(long, value_enum, default_value_t = Family::Shifting)]
    pub family: Family,
    #[arg(long, default_value_t = 2)]
    pub l: u32,
    /// Sine exponent r, or `auto` for the family default.
    #[arg(long, default_value = "auto")]
    pub r: RArg,
    /// Relative cutoff for the numerical rank.
    #[arg(long, default_value_t = spherewidth_core::jackson::DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApproxOpArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[command(flatten)]
    pub jackson: JacksonArgs,
    #[arg(long)]
    pub n: u32,
    /// Highest degree; defaults to l n + 10.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HsDefectArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub jackson: JacksonArgs,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub ns: Vec<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HolderFitArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = Family::Shifting)]
    pub family: Family,
    #[command(flatten)]
    pub range: TRange,
    /// Chebyshev points in u = x . y.
    #[arg(long, default_value_t = spherewidth_core::holder::DEFAULT_UGRID)]
    pub ugrid: usize,
    /// Exponent for the full-range ratio deviation / t^rho; the fitted one when absent.
    #[arg(long)]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    /// Kernel on S^2.
    #[arg(long)]
    pub kernel: KernelSpec,
    #[arg(long, default_value_t = 60)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 120)]
    pub n_phi: usize,
    /// Number of leading eigenvalues compared.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 40)]
    pub kmax: usize,
    /// Reference entries at or below this are not compared.
    #[arg(long, default_value_t = 1e-12)]
    pub floor: f64,
    /// Relative gap that separates plateaus.
    #[arg(long, default_value_t = 1e-4)]
    pub plateau_gap: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecayArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 500)]
    pub nmax: u64,
    /// Leading entries ignored by the monotonicity check.
    #[arg(long, default_value_t = 10)]
    pub skip: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Spectrum(a) => &a.output,
            Command::Widths(a) => &a.output,
            Command::Multiplier(a) => &a.output,
            Command::ApproxOp(a) => &a.output,
            Command::HsDefect(a) => &a.output,
            Command::HolderFit(a) => &a.output,
            Command::OracleCompare(a) => &a.output,
            Command::DecayCheck(a) => &a.output,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Widths(_) => "widths",
            Command::Multiplier(_) => "multiplier",
            Command::ApproxOp(_) => "approx-op",
            Command::HsDefect(_) => "hs-defect",
            Command::HolderFit(_) => "holder-fit",
            Command::OracleCompare(_) => "oracle-compare",
            Command::DecayCheck(_) => "decay-check",
        }
    }
}

/// A named kernel with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum KernelSpec {
    Gaussian { sigma: f64 },
    Dotpower { eps: f64 },
    Constant { c: f64 },
}

impl FromStr for KernelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = Vec::new();
        for kv in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("kernel parameter '{kv}' is not of the form key=value"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("kernel parameter {k}: '{v}' is not a number"))?;
            params.push((k.trim(), v));
        }
        let one = |key: &str| -> Result<f64, String> {
            match params.as_slice() {
                [(k, v)] if *k == key => Ok(*v),
                _ => Err(format!(
                    "kernel '{name}' takes exactly one parameter {key}=<value>"
                )),
            }
        };
        match name {
            "gaussian" => Ok(KernelSpec::Gaussian {
                sigma: one("sigma")?,
            }),
            "dotpower" => Ok(KernelSpec::Dotpower { eps: one("eps")? }),
            "constant" => Ok(KernelSpec::Constant { c: one("c")? }),
            _ => Err(format!(
                "unknown kernel '{name}' (expected gaussian, dotpower or constant)"
            )),
        }
    }
}

pub fn sphere_dim(m: usize) -> CliResult<SphereDim> {
    Ok(SphereDim::new(m)?)
}

/// The profile to integrate for the spectrum (Taylor series for the Gaussian)
/// and the one to evaluate pointwise.
pub struct Kernel {
    pub spectral: IsotropicProfile,
    pub pointwise: IsotropicProfile,
}

impl KernelSpec {
    pub fn build(self, m: SphereDim, kmax: usize) -> CliResult<Kernel> {
        match self {
            KernelSpec::Gaussian { sigma } => {
                let g = GaussianKernel::new(m, sigma)?;
                Ok(Kernel {
                    spectral: g.series_profile(kmax),
                    pointwise: g.profile(),
                })
            }
            KernelSpec::Dotpower { eps } => {
                let p = DotPowerKernel::new(m, eps)?.profile();
                Ok(Kernel {
                    spectral: p.clone(),
                    pointwise: p,
                })
            }
            KernelSpec::Constant { c } => {
                let p = IsotropicProfile::constant(c)?;
                Ok(Kernel {
                    spectral: p.clone(),
                    pointwise: p,
                })
            }
        }
    }
}

#[derive(serde::Deserialize)]
struct CoeffRow {
    k: usize,
    coeff: f64,
}

/// Reads a `k,coeff` table into a dense coefficient vector.
pub fn read_coefficients(path: &std::path::Path) -> CliResult<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["k", "coeff"] {
        return Err(CliError::Config(format!(
            "{}: header must be 'k,coeff', got '{}'",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out: Vec<Option<f64>> = Vec::new();
    for row in rdr.deserialize() {
        let CoeffRow { k, coeff } = row?;
        if !coeff.is_finite() {
            return Err(CliError::Config(format!(
                "{}: coefficient of degree {k} is not finite",
                path.display()
            )));
        }
        if out.len() <= k {
            out.resize(k + 1, None);
        }
        if out[k].replace(coeff).is_some() {
            return Err(CliError::Config(format!(
                "{}: degree {k} listed twice",
                path.display()
            )));
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no coefficients",
            path.display()
        )));
    }
    Ok(out.into_iter().map(|c| c.unwrap_or(0.0)).collect())
}

impl KernelArgs {
    pub fn dim(&self) -> CliResult<SphereDim> {
        sphere_dim(self.m)
    }

    pub fn build(&self) -> CliResult<Kernel> {
        let m = self.dim()?;
        match (&self.kernel, &self.kernel_csv) {
            (Some(spec), None) => spec.build(m, self.kmax),
            (None, Some(path)) => {
                let coeffs = read_coefficients(path)?;
                let p = match self.kernel_kind {
                    KernelKind::Power => IsotropicProfile::power_series(coeffs)?,
                    KernelKind::Eigen => IsotropicProfile::eigen_series(m, coeffs)?,
                };
                Ok(Kernel {
                    spectral: p.clone(),
                    pointwise: p,
                })
            }
            _ => Err(CliError::Config(
                "exactly one of --kernel and --kernel-csv is required".into(),
            )),
        }
    }
}
