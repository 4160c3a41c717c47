//! Test problems.
//!
//! The four kernel problems follow the usual Regularization Tools
//! discretizations, all with `n` midpoint nodes:
//!
//! * `shaw`: `s_i = -π/2 + (i - 1/2)π/n`, `A_ij = (π/n)·(cos s_i + cos s_j)²·(sin u / u)²`
//!   with `u = π(sin s_i + sin s_j)`, and exact solution
//!   `x(s) = 2·exp(-6(s - 0.8)²) + exp(-2(s + 0.5)²)`.
//! * `gravity`: `t_i = (i - 1/2)/n`, `A_ij = (1/n)·d·(d² + (t_i - t_j)²)^(-3/2)`,
//!   `x(t) = sin(πt) + 0.5·sin(2πt)`.
//! * `deriv2`: `h = 1/n`, `A_ij = h²(j - 1/2)((i - 1/2)h - 1)` for `j < i`
//!   (symmetric), `A_ii = h²((i² - i + 1/4)h - (i - 2/3))`, `x_i = h^(3/2)(i - 1/2)`.
//! * `heat`: `t_i = (i - 1/2)/n`, `k_i = h/(2κ√π)·t_i^(-3/2)·exp(-1/(4κ²t_i))`,
//!   `A_ij = k_(i-j+1)` for `i ≥ j` and zero above the diagonal; `x` is the
//!   piecewise smooth pulse supported on the first half of the interval.
//!
//! Indices in the formulas are 1-based. In every case `b_true = A x_true`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use log::warn;

use crate::error::{Error, Result};
use crate::numerics::{svd, thin_qr, DenseMatrix, SvdFactorization};
use crate::random::{gaussian_matrix, rng};

/// Singular value decay model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectrumModel {
    /// `σ_j = ζ ρ^{-j}`.
    Severe { rho: f64, zeta: f64, beta: f64 },
    /// `σ_j = ζ j^{-α}`; moderate for `α > 1`, mild for `1/2 < α ≤ 1`.
    Power { alpha: f64, zeta: f64, beta: f64 },
    /// Kernel problems whose decay is only known from the computed spectrum;
    /// the regime is the one the problem is conventionally classed under.
    Empirical { regime: Regime },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Severe,
    ModerateOrMild,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Severe => "severe",
            Regime::ModerateOrMild => "moderate_or_mild",
        }
    }
}

impl SpectrumModel {
    pub fn severe(rho: f64, beta: f64) -> Self {
        SpectrumModel::Severe { rho, zeta: 1.0, beta }
    }

    pub fn power(alpha: f64, beta: f64) -> Self {
        SpectrumModel::Power { alpha, zeta: 1.0, beta }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            SpectrumModel::Severe { rho, zeta, beta } => {
                if !(rho > 1.0) {
                    return bad(format!("rho must exceed 1, got {rho}"));
                }
                check_zeta_beta(zeta, beta)
            }
            SpectrumModel::Power { alpha, zeta, beta } => {
                if !(alpha > 0.5) {
                    return bad(format!("alpha must exceed 1/2, got {alpha}"));
                }
                check_zeta_beta(zeta, beta)
            }
            SpectrumModel::Empirical { .. } => Ok(()),
        }
    }

    /// `σ_j` for 1-based `j`; `None` for empirical spectra.
    pub fn sigma(&self, j: usize) -> Option<f64> {
        match *self {
            SpectrumModel::Severe { rho, zeta, .. } => Some(zeta * rho.powi(-(j as i32))),
            SpectrumModel::Power { alpha, zeta, .. } => Some(zeta * (j as f64).powf(-alpha)),
            SpectrumModel::Empirical { .. } => None,
        }
    }

    pub fn values(&self, n: usize) -> Option<Vec<f64>> {
        (1..=n).map(|j| self.sigma(j)).collect()
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            SpectrumModel::Severe { beta, .. } | SpectrumModel::Power { beta, .. } => Some(beta),
            SpectrumModel::Empirical { .. } => None,
        }
    }

    pub fn regime(&self) -> Regime {
        match *self {
            SpectrumModel::Severe { .. } => Regime::Severe,
            SpectrumModel::Power { .. } => Regime::ModerateOrMild,
            SpectrumModel::Empirical { regime } => regime,
        }
    }
}

fn check_zeta_beta(zeta: f64, beta: f64) -> Result<()> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter(format!("zeta must be positive, got {zeta}")));
    }
    // β = 0 is admitted: it is the noise-free Picard boundary case used by
    // the transition-point examples.
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be non-negative, got {beta}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct IllPosedProblem {
    pub name: String,
    pub a: DenseMatrix,
    pub x_true: Vec<f64>,
    pub b_true: Vec<f64>,
    pub spectrum: SpectrumModel,
    pub svd_cache: Option<SvdFactorization>,
    /// Degeneracy and other non-fatal findings attached at construction.
    pub warnings: Vec<String>,
}

/// Relative gap under which neighbouring singular values count as repeated.
pub const SIMPLE_GAP: f64 = 1e-12;

impl IllPosedProblem {
    fn assemble(name: String, a: DenseMatrix, x_true: Vec<f64>, spectrum: SpectrumModel) -> Self {
        let b_true = a.matvec(&x_true);
        IllPosedProblem {
            name,
            a,
            x_true,
            b_true,
            spectrum,
            svd_cache: None,
            warnings: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Computes and caches the SVD if missing, and records repeated
    /// singular values as warnings.
    pub fn ensure_svd(&mut self) -> Result<&SvdFactorization> {
        if self.svd_cache.is_none() {
            let f = svd(&self.a)?;
            self.attach_svd(f);
        }
        Ok(self.svd_cache.as_ref().expect("just filled"))
    }

    pub fn svd(&self) -> Result<&SvdFactorization> {
        self.svd_cache
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("problem {} has no cached SVD", self.name)))
    }

    fn attach_svd(&mut self, f: SvdFactorization) {
        let mut flagged = 0;
        for (i, w) in f.singular_values.windows(2).enumerate() {
            if w[0] - w[1] <= SIMPLE_GAP * w[0] {
                self.warnings.push(format!(
                    "{}: singular values {} and {} are not simple ({:e}, {:e})",
                    self.name,
                    i + 1,
                    i + 2,
                    w[0],
                    w[1]
                ));
                flagged += 1;
            }
        }
        if flagged > 0 {
            let first = &self.warnings[self.warnings.len() - flagged];
            warn!("{first}; {flagged} such pairs in total");
        }
        self.svd_cache = Some(f);
    }

    /// Writes `A` as `rows cols` followed by one line per row.
    pub fn export_matrix<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_text(&self.a, out)
    }
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

pub fn make_shaw(n: usize) -> Result<IllPosedProblem> {
    require(n >= 4 && n.is_multiple_of(2), format!("shaw needs an even n >= 4, got {n}"))?;
    let h = PI / n as f64;
    let s: Vec<f64> = (0..n).map(|i| -PI / 2.0 + (i as f64 + 0.5) * h).collect();
    let (sin, cos): (Vec<f64>, Vec<f64>) = s.iter().map(|v| v.sin_cos()).unzip();
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let c = cos[i] + cos[j];
        let u = PI * (sin[i] + sin[j]);
        let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
        h * c * c * sinc * sinc
    });
    let x = s
        .iter()
        .map(|&t| 2.0 * (-6.0 * (t - 0.8) * (t - 0.8)).exp() + (-2.0 * (t + 0.5) * (t + 0.5)).exp())
        .collect();
    Ok(IllPosedProblem::assemble(format!("shaw-{n}"), a, x, SpectrumModel::Empirical { regime: Regime::Severe }))
}

pub const GRAVITY_DEFAULT_DEPTH: f64 = 0.25;

pub fn make_gravity(n: usize, depth: f64) -> Result<IllPosedProblem> {
    require(n >= 4, format!("gravity needs n >= 4, got {n}"))?;
    require(depth > 0.0, format!("gravity depth must be positive, got {depth}"))?;
    let h = 1.0 / n as f64;
    let t: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let r = t[i] - t[j];
        h * depth * (depth * depth + r * r).powf(-1.5)
    });
    let x = t.iter().map(|&v| (PI * v).sin() + 0.5 * (2.0 * PI * v).sin()).collect();
    Ok(IllPosedProblem::assemble(format!("gravity-{n}"), a, x, SpectrumModel::Empirical { regime: Regime::Severe }))
}

pub fn make_deriv2(n: usize) -> Result<IllPosedProblem> {
    require(n >= 4, format!("deriv2 needs n >= 4, got {n}"))?;
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let (i, j) = (i.max(j) as f64 + 1.0, i.min(j) as f64 + 1.0);
        if i == j {
            h2 * ((i * i - i + 0.25) * h - (i - 2.0 / 3.0))
        } else {
            h2 * (j - 0.5) * ((i - 0.5) * h - 1.0)
        }
    });
    let h32 = h * h.sqrt();
    let x = (0..n).map(|i| h32 * (i as f64 + 0.5)).collect();
    Ok(IllPosedProblem::assemble(format!("deriv2-{n}"), a, x, SpectrumModel::Empirical { regime: Regime::ModerateOrMild }))
}

pub const HEAT_DEFAULT_KAPPA: f64 = 1.0;

pub fn make_heat(n: usize, kappa: f64) -> Result<IllPosedProblem> {
    require(n >= 4, format!("heat needs n >= 4, got {n}"))?;
    require(kappa > 0.0, format!("heat kappa must be positive, got {kappa}"))?;
    let h = 1.0 / n as f64;
    let c = h / (2.0 * kappa * PI.sqrt());
    let d = 1.0 / (4.0 * kappa * kappa);
    let k: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            c * t.powf(-1.5) * (-d / t).exp()
        })
        .collect();
    let a = DenseMatrix::from_fn(n, n, |i, j| if i >= j { k[i - j] } else { 0.0 });
    let mut x = vec![0.0; n];
    for (i, xi) in x.iter_mut().enumerate().take(n / 2) {
        let ti = (i + 1) as f64 * 20.0 / n as f64;
        *xi = if ti < 2.0 {
            0.75 * ti * ti / 4.0
        } else if ti < 3.0 {
            0.75 + (ti - 2.0) * (3.0 - ti)
        } else {
            0.75 * (-(ti - 3.0) * 2.0).exp()
        };
    }
    Ok(IllPosedProblem::assemble(format!("heat-{n}"), a, x, SpectrumModel::Empirical { regime: Regime::ModerateOrMild }))
}

/// Orthonormal `rows×cols` factor from the QR of a seeded Gaussian matrix,
/// with the sign of each column fixed by a positive `R` diagonal.
pub fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    let g = gaussian_matrix(&mut rng(seed), rows, cols);
    Ok(thin_qr(&g)?.q)
}

fn synthetic_factors(m: usize, n: usize, spectrum: &SpectrumModel, seed: u64) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    spectrum.validate()?;
    let sigma = spectrum
        .values(n)
        .ok_or_else(|| Error::InvalidParameter("synthetic problems need a parametric spectrum".into()))?;
    // Derived seeds keep U and V independent while staying reproducible.
    let u = random_orthonormal(m, n, seed.wrapping_mul(2).wrapping_add(1))?;
    let v = random_orthonormal(n, n, seed.wrapping_mul(2).wrapping_add(2))?;
    Ok((u, sigma, v))
}

fn scale_columns(m: &DenseMatrix, s: &[f64]) -> DenseMatrix {
    let mut out = m.clone();
    for (j, &f) in s.iter().enumerate() {
        for x in out.column_mut(j) {
            *x *= f;
        }
    }
    out
}

/// `A = U diag(σ) V^T` with random orthonormal factors and `x_true = ones`.
///
/// The cached SVD is the constructed factorization itself.
pub fn make_prescribed(m: usize, n: usize, spectrum: SpectrumModel, seed: u64) -> Result<IllPosedProblem> {
    require(n >= 2 && m >= n, format!("prescribed needs m >= n >= 2, got {m}x{n}"))?;
    let (u, sigma, v) = synthetic_factors(m, n, &spectrum, seed)?;
    let a = scale_columns(&u, &sigma).matmul(&v.transpose());
    let mut p = IllPosedProblem::assemble(format!("prescribed-{m}x{n}"), a, vec![1.0; n], spectrum);
    p.attach_svd(SvdFactorization {
        u,
        singular_values: sigma,
        v,
    });
    Ok(p)
}

/// Problem whose right-hand side obeys the Picard model exactly:
/// `u_i^T b_true = σ_i^{1+β}` and `v_i^T x_true = σ_i^β`.
pub fn make_picard_synthetic(n: usize, spectrum: SpectrumModel, seed: u64) -> Result<IllPosedProblem> {
    require(n >= 2, format!("picard_synthetic needs n >= 2, got {n}"))?;
    let (u, sigma, v) = synthetic_factors(n, n, &spectrum, seed)?;
    let beta = spectrum.beta().expect("parametric spectrum");
    let a = scale_columns(&u, &sigma).matmul(&v.transpose());
    let x_coef: Vec<f64> = sigma.iter().map(|s| s.powf(beta)).collect();
    let b_coef: Vec<f64> = sigma.iter().map(|s| s.powf(1.0 + beta)).collect();
    let x_true = v.matvec(&x_coef);
    let b_true = u.matvec(&b_coef);
    let mut p = IllPosedProblem {
        name: format!("picard-{n}"),
        a,
        x_true,
        b_true,
        spectrum,
        svd_cache: None,
        warnings: Vec::new(),
    };
    p.attach_svd(SvdFactorization {
        u,
        singular_values: sigma,
        v,
    });
    Ok(p)
}

/// Slope-based decay fits over 1-based indices `range`, for describing
/// empirical spectra with the parametric models.
pub fn fit_severe_rho(sigma: &[f64], range: std::ops::RangeInclusive<usize>) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = range.map(|j| (j as f64, sigma[j - 1].ln())).unzip();
    (-crate::numerics::stats::linear_fit(&x, &y).0).exp()
}

pub fn fit_power_alpha(sigma: &[f64], range: std::ops::RangeInclusive<usize>) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = range.map(|j| ((j as f64).ln(), sigma[j - 1].ln())).unzip();
    -crate::numerics::stats::linear_fit(&x, &y).0
}

pub fn write_matrix_text<W: Write>(a: &DenseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix_text<R: BufRead>(input: R) -> Result<DenseMatrix> {
    let mut tokens = Vec::new();
    for line in input.lines() {
        tokens.extend(line?.split_whitespace().map(str::to_owned));
    }
    let parse_dim = |t: Option<&String>| -> Result<usize> {
        t.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Shape("missing or malformed matrix header".into()))
    };
    let rows = parse_dim(tokens.first())?;
    let cols = parse_dim(tokens.get(1))?;
    let values: Vec<f64> = tokens[2..]
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Shape(format!("bad number {t:?}"))))
        .collect::<Result<_>>()?;
    if values.len() != rows * cols {
        return Err(Error::Shape(format!("{} values for {rows}x{cols}", values.len())));
    }
    let mut data = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            data[j * rows + i] = values[i * cols + j];
        }
    }
    DenseMatrix::new(rows, cols, data)
}
