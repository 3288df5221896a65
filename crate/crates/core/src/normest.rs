//! Norm estimation for truncated structured matrices.
//!
//! `norm2_power` runs power iteration on `A^T A`; `normp_boyd` runs the
//! nonlinear power iteration for `l^p -> l^p` norms of nonnegative matrices,
//! whose Rayleigh quotient `||Ax||_p / ||x||_p` ascends monotonically. Every
//! reported value is the Rayleigh quotient of an explicit vector and is
//! therefore a lower bound on the truncated norm, which in turn is a lower
//! bound on the norm of the infinite matrix.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::holder_conjugate;
use crate::error::{Error, Result};
use crate::generators::{StructuredMatrix, TruncatedVector, Truncation};
use crate::summation::lp_norm;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Relative drop in the Boyd quotient tolerated as rounding noise.
const ASCENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl PowerOptions {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be >= 1"));
        }
        Ok(Self { tol, max_iter })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub p: f64,
    pub truncation: usize,
    pub iterations: usize,
    /// Change of the estimate in the last iteration.
    pub residual: f64,
    /// `||A x||_p / ||x||_p` of the final iterate.
    pub lower_certificate: f64,
    pub converged: bool,
    #[serde(skip)]
    pub final_iterate: Vec<f64>,
}

fn uniform_start(m: usize, p: f64) -> Vec<f64> {
    vec![(m as f64).powf(-1.0 / p); m]
}

fn normalize(x: &mut [f64], p: f64) -> f64 {
    let n = lp_norm(x, p);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// `||A||_{2->2}` of the leading `m x m` section, from the uniform start.
pub fn norm2_power(mat: &StructuredMatrix, m: usize, opts: PowerOptions) -> Result<NormEstimate> {
    if m == 0 {
        return Err(Error::invalid("M", "truncation size must be >= 1"));
    }
    let start = TruncatedVector::from_trusted(uniform_start(m, 2.0));
    norm2_power_from(mat, &start, opts)
}

/// Power iteration on `A^T A` from a caller-supplied start vector, e.g. a
/// witness vector. The truncation size is `start.len()`.
pub fn norm2_power_from(mat: &StructuredMatrix, start: &TruncatedVector, opts: PowerOptions) -> Result<NormEstimate> {
    let m = start.len();
    let t = mat.truncate(m)?;
    let mut x = start.as_slice().to_vec();
    if normalize(&mut x, 2.0) == 0.0 {
        return Err(Error::invalid("start", "start vector must be nonzero"));
    }
    let mut y = vec![0.0; m];
    let mut z = vec![0.0; m];
    let mut prev = f64::NAN;
    let mut est = 0.0;
    let mut cert = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        t.apply(&x, &mut y);
        cert = lp_norm(&y, 2.0);
        if cert == 0.0 {
            // x is in the kernel; with a nonnegative start this only happens
            // for the zero matrix.
            est = 0.0;
            residual = 0.0;
            converged = true;
            break;
        }
        t.apply_transpose(&y, &mut z);
        let nz = lp_norm(&z, 2.0);
        est = nz / cert;
        residual = (est - prev).abs();
        if residual < opts.tol {
            converged = true;
            break;
        }
        prev = est;
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi = zi / nz);
    }
    Ok(NormEstimate {
        value: est.max(cert),
        p: 2.0,
        truncation: m,
        iterations,
        residual,
        lower_certificate: cert,
        converged,
        final_iterate: x,
    })
}

fn check_nonnegative(mat: &StructuredMatrix, m: usize) -> Result<()> {
    match mat.generator().first_negative(m) {
        Some((index, value)) => Err(Error::NegativeEntry { index, value }),
        None => Ok(()),
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p", format!("must satisfy 1 < p < inf, got {p}")))
    }
}

/// `||A||_{p->p}` of the leading `m x m` section of a nonnegative matrix.
pub fn normp_boyd(mat: &StructuredMatrix, m: usize, p: f64, opts: PowerOptions) -> Result<NormEstimate> {
    check_exponent(p)?;
    if m == 0 {
        return Err(Error::invalid("M", "truncation size must be >= 1"));
    }
    check_nonnegative(mat, m)?;
    let t = mat.truncate(m)?;
    boyd_iterate(&t, uniform_start(m, p), p, opts)
}

fn boyd_iterate(t: &Truncation, mut x: Vec<f64>, p: f64, opts: PowerOptions) -> Result<NormEstimate> {
    let m = t.len();
    normalize(&mut x, p);
    let dual = p - 1.0;
    let mut y = vec![0.0; m];
    let mut z = vec![0.0; m];
    let mut prev = f64::NAN;
    let mut quotient = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        t.apply(&x, &mut y);
        quotient = lp_norm(&y, p);
        if quotient < prev * (1.0 - ASCENT_SLACK) {
            return Err(Error::Consistency(format!(
                "nonlinear power iteration lost ascent at iteration {iterations}: {quotient} < {prev}"
            )));
        }
        if prev.is_finite() {
            residual = (quotient - prev).abs();
            if residual < opts.tol {
                converged = true;
                break;
            }
        }
        if quotient == 0.0 {
            residual = 0.0;
            converged = true;
            break;
        }
        prev = quotient;
        for (zi, yi) in z.iter_mut().zip(&y) {
            *zi = yi.powf(dual);
        }
        // y <- A^T (Ax)^{p-1}
        t.apply_transpose(&z, &mut y);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi.powf(1.0 / dual);
        }
        if normalize(&mut x, p) == 0.0 {
            break;
        }
    }
    Ok(NormEstimate {
        value: quotient,
        p,
        truncation: m,
        iterations,
        residual,
        lower_certificate: quotient,
        converged,
        final_iterate: x,
    })
}

/// `||A x||_p / ||x||_p` with the matrix truncated to `x.len()`.
pub fn rayleigh_p(mat: &StructuredMatrix, x: &TruncatedVector, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid("p", format!("must satisfy 1 <= p < inf, got {p}")));
    }
    let nx = lp_norm(x.as_slice(), p);
    if nx == 0.0 {
        return Err(Error::invalid("x", "Rayleigh quotient of the zero vector"));
    }
    let y = mat.matvec(x)?;
    Ok(lp_norm(y.as_slice(), p) / nx)
}

/// Dispatches to [`norm2_power`] for `p = 2` and [`normp_boyd`] otherwise.
pub fn estimate(mat: &StructuredMatrix, m: usize, p: f64, opts: PowerOptions) -> Result<NormEstimate> {
    if p == 2.0 {
        norm2_power(mat, m, opts)
    } else {
        normp_boyd(mat, m, p, opts)
    }
}

/// One estimate per size, evaluated concurrently, with the principal-section
/// monotonicity checked across the sweep.
pub fn truncation_sweep(
    mat: &StructuredMatrix,
    p: f64,
    sizes: &[usize],
    opts: PowerOptions,
) -> Result<Vec<NormEstimate>> {
    if sizes.is_empty() {
        return Err(Error::invalid("sizes", "at least one truncation size is required"));
    }
    if sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "sizes",
            "sizes must be positive and strictly increasing",
        ));
    }
    let estimates = sizes
        .par_iter()
        .map(|&m| estimate(mat, m, p, opts))
        .collect::<Result<Vec<_>>>()?;
    check_monotone(&estimates, opts.tol)?;
    Ok(estimates)
}

/// Principal sections of a nonnegative matrix have nondecreasing norms. A
/// drop is only reportable as a failure when both estimates converged;
/// unconverged values are honest lower bounds that may lag.
fn check_monotone(estimates: &[NormEstimate], tol: f64) -> Result<()> {
    for w in estimates.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.value < a.value - tol {
            if a.converged && b.converged {
                return Err(Error::Consistency(format!(
                    "truncated norm decreased from {} (M={}) to {} (M={})",
                    a.value, a.truncation, b.value, b.truncation
                )));
            }
            log::warn!(
                "non-monotone sweep between M={} and M={} with unconverged estimates",
                a.truncation,
                b.truncation
            );
        }
    }
    Ok(())
}

/// Heuristic extrapolation `value ≈ limit - c / ln(M)^2`, fitted by least
/// squares. Not a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    pub limit: f64,
    pub slope: f64,
    pub points: usize,
    pub label: &'static str,
}

pub fn log_fit_extrapolation(estimates: &[NormEstimate]) -> Option<LogFit> {
    let pts: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.truncation >= 2)
        .map(|e| ((e.truncation as f64).ln().powi(-2), e.value))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mu).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LogFit {
        limit: mv - slope * mu,
        slope: -slope,
        points: pts.len(),
        label: "heuristic",
    })
}

/// `||A^T||_p` computed directly and as `||A||_q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityCheck {
    pub p: f64,
    pub q: f64,
    pub direct: NormEstimate,
    pub dual: NormEstimate,
    pub gap: f64,
}

pub const DUALITY_TOL: f64 = 1e-6;

/// Cross-checks `||A^T||_{p->p} = ||A||_{q->q}` on the same truncation.
pub fn duality_check(mat: &StructuredMatrix, m: usize, p: f64, opts: PowerOptions) -> Result<DualityCheck> {
    let q = holder_conjugate(p)?;
    let direct = normp_boyd(&mat.transpose(), m, p, opts)?;
    let dual = normp_boyd(mat, m, q, opts)?;
    let gap = (direct.value - dual.value).abs();
    if gap > DUALITY_TOL * direct.value.max(dual.value).max(1.0) {
        return Err(Error::Consistency(format!(
            "duality violated at M={m}, p={p}: ||A^T||_p = {} but ||A||_q = {}",
            direct.value, dual.value
        )));
    }
    Ok(DualityCheck {
        p,
        q,
        direct,
        dual,
        gap,
    })
}
