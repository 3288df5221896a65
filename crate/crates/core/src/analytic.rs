//! Closed-form bounds, constants and auxiliary functions.
//!
//! Everything here is a pure function of its arguments. Quantities that the
//! underlying theory defines as suprema over all `n` are evaluated over an
//! explicit horizon and combined with the closed-form limit where one is
//! known.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{GeneratorKind, GeneratorSequence};
use crate::special::{digamma_diff, ln_gamma_diff, ln_gamma_shift};
use crate::summation::NeumaierSum;

/// Default horizon for finite-horizon suprema.
pub const DEFAULT_N_MAX: u64 = 1_000_000;

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be a positive real, got {v}")))
    }
}

fn exponent(p: f64) -> Result<f64> {
    if p.is_finite() && p > 1.0 {
        Ok(p)
    } else {
        Err(Error::invalid("p", format!("must satisfy 1 < p < inf, got {p}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    DeltaUpper,
    SandwichP,
    LacunaryUpper,
    LacunaryLower,
    CriticalConstants,
}

/// An evaluated bound together with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub params: BTreeMap<String, f64>,
    /// Evaluated terms `(index, value)` when the bound is a supremum or a
    /// table.
    pub detail: Vec<(u64, f64)>,
    pub warnings: Vec<String>,
}

impl BoundReport {
    fn new(kind: BoundKind, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Consistency(format!("{kind:?} bound is not finite")));
        }
        Ok(Self {
            kind,
            value,
            params: BTreeMap::new(),
            detail: Vec::new(),
            warnings: Vec::new(),
        })
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_owned(), v);
        self
    }
}

// ---------------------------------------------------------------------------
// delta-sequence upper bound

/// `δ_n = alpha / (n + beta)` and the search horizon for the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaBoundParams {
    pub alpha_delta: f64,
    pub beta_delta: f64,
    pub n_max: u64,
}

impl DeltaBoundParams {
    pub fn new(alpha_delta: f64, beta_delta: f64, n_max: u64) -> Result<Self> {
        positive("alpha_delta", alpha_delta)?;
        // beta <= 0 makes δ non-positive or non-monotone at small n.
        positive("beta_delta", beta_delta)?;
        if n_max == 0 {
            return Err(Error::invalid("n_max", "must be >= 1"));
        }
        Ok(Self {
            alpha_delta,
            beta_delta,
            n_max,
        })
    }

    /// `δ_n = 1/(n + s + 1/2)`, the sequence that proves `||A_s|| <= 4`.
    pub fn standard(s: f64) -> Result<Self> {
        positive("s", s)?;
        Self::new(1.0, s + 0.5, DEFAULT_N_MAX)
    }

    pub fn delta(&self, n: u64) -> f64 {
        self.alpha_delta / (n as f64 + self.beta_delta)
    }

    /// `δ_{n-1} - δ_n` without subtractive cancellation.
    pub fn delta_gap(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        let nf = n as f64;
        self.alpha_delta / ((nf - 1.0 + self.beta_delta) * (nf + self.beta_delta))
    }

    /// `(|a_n| + δ_{n-1})(|a_n| + δ_n) / (δ_{n-1} - δ_n)` for `n >= 1`.
    pub fn term(&self, a_n: f64, n: u64) -> f64 {
        let a = a_n.abs();
        (a + self.delta(n - 1)) * (a + self.delta(n)) / self.delta_gap(n)
    }
}

/// Limit of the delta-method terms as `n -> inf`, when it exists.
fn delta_term_limit(params: &DeltaBoundParams, gen: &GeneratorSequence) -> Option<f64> {
    let al = params.alpha_delta;
    match gen.kind() {
        // a_n ~ 1/n, δ_n ~ α/n, gap ~ α/n^2
        GeneratorKind::As { .. } | GeneratorKind::Cesaro { .. } => Some((1.0 + al).powi(2) / al),
        // beyond the support a_n = 0 and the term is δ_{n-1}δ_n/gap = α
        GeneratorKind::Custom { .. } => Some(al),
        // a_{N^j} = N^{-j/2} makes the terms grow like n/α
        GeneratorKind::Lacunary { .. } => None,
    }
}

/// `max{δ_0 + |a_0|, sup_{n>=1} term_n}` evaluated over `1..=n_max`, plus
/// the closed-form tail limit when the generator admits one.
pub fn delta_upper_bound(params: &DeltaBoundParams, gen: &GeneratorSequence) -> Result<BoundReport> {
    let limit = delta_term_limit(params, gen)
        .ok_or_else(|| Error::invalid("generator", "delta-method terms are unbounded for lacunary generators"))?;
    let head = params.delta(0) + gen.eval(0).abs();
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = 1;
    let mut last = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for n in 1..=params.n_max {
        let t = params.term(gen.eval(n), n);
        last = t;
        if t > sup {
            sup = t;
            argmax = n;
        }
        if n <= 16 || n == params.n_max || n.is_power_of_two() {
            detail.push((n, t));
        }
    }
    let value = head.max(sup).max(limit);
    let mut report = BoundReport::new(BoundKind::DeltaUpper, value)?
        .with("alpha_delta", params.alpha_delta)
        .with("beta_delta", params.beta_delta)
        .with("n_max", params.n_max as f64)
        .with("head", head)
        .with("finite_sup", sup)
        .with("argmax", argmax as f64)
        .with("tail_limit", limit);
    if let Some(s) = gen.shift() {
        report = report.with("s", s);
    }
    // rounding can put the argmax a little before the horizon
    if last >= sup - 1e-12 * sup.abs() {
        report.warnings.push(format!(
            "finite-horizon supremum attained at the boundary n_max = {}; tail limit {limit} used",
            params.n_max
        ));
    }
    report.detail = detail;
    Ok(report)
}

/// Result of the numerical search over `δ_n = α/(n+β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaSearch {
    pub alpha_delta: f64,
    pub beta_delta: f64,
    pub bound: f64,
    pub evaluations: usize,
}

/// Grid-plus-refine minimization of the delta-method bound over the
/// two-parameter family `α/(n+β)`. A numerical exploration only.
pub fn optimize_delta_form(gen: &GeneratorSequence, n_max: u64) -> Result<DeltaSearch> {
    let mut evaluations = 0usize;
    let mut eval = |a: f64, b: f64| -> f64 {
        evaluations += 1;
        DeltaBoundParams::new(a, b, n_max)
            .and_then(|p| delta_upper_bound(&p, gen))
            .map(|r| r.value)
            .unwrap_or(f64::INFINITY)
    };
    let mut best = (1.0, 1.0, f64::INFINITY);
    for i in 0..=24 {
        let a = 0.25 * 16f64.powf(i as f64 / 24.0);
        for j in 0..=24 {
            let b = 0.05 * 200f64.powf(j as f64 / 24.0);
            let v = eval(a, b);
            if v < best.2 {
                best = (a, b, v);
            }
        }
    }
    let (mut da, mut db) = (best.0 * 0.15, best.1 * 0.3);
    for _ in 0..60 {
        let mut improved = false;
        for (sa, sb) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let (a, b) = (best.0 + sa * da, best.1 + sb * db);
            if a <= 0.0 || b <= 0.0 {
                continue;
            }
            let v = eval(a, b);
            if v < best.2 {
                best = (a, b, v);
                improved = true;
            }
        }
        if !improved {
            da *= 0.5;
            db *= 0.5;
        }
    }
    if !best.2.is_finite() {
        return Err(Error::invalid("generator", "no finite delta-method bound found"));
    }
    Ok(DeltaSearch {
        alpha_delta: best.0,
        beta_delta: best.1,
        bound: best.2,
        evaluations,
    })
}

// ---------------------------------------------------------------------------
// critical-point constants

/// `f(s) = 1/(s + 1/2) + 1/s`.
pub fn f_of_s(s: f64) -> Result<f64> {
    positive("s", s)?;
    Ok(1.0 / (s + 0.5) + 1.0 / s)
}

/// `(sqrt(6(8 + 3 sqrt 3)) - sqrt 3 - 3) / 12 ≈ 0.347174`.
pub fn s_star() -> f64 {
    let r3 = 3f64.sqrt();
    ((6.0 * (8.0 + 3.0 * r3)).sqrt() - r3 - 3.0) / 12.0
}

/// `1/(2 sqrt 2)`, where `f(s) = 4`.
pub fn s_upper() -> f64 {
    0.25 * std::f64::consts::SQRT_2
}

/// `-24 s^4 - 24 s^3 + 8 s^2 + 4 s - 1`.
pub fn quartic_numerator(s: f64) -> f64 {
    (((-24.0 * s - 24.0) * s + 8.0) * s + 4.0) * s - 1.0
}

/// `(-24 s^4 - 24 s^3 + 8 s^2 + 4 s - 1) / (2 (4s - 1)^2)`; this is
/// `h_{0,s}(1)`, the witness condition at `ε = 0`.
pub fn f0_quartic(s: f64) -> Result<f64> {
    let d = 4.0 * s - 1.0;
    if !s.is_finite() || d == 0.0 {
        return Err(Error::invalid("s", "f(0) has a pole at s = 1/4"));
    }
    Ok(quartic_numerator(s) / (2.0 * d * d))
}

/// The witness parameters. `alpha` and `beta` are always derived from
/// `(s, eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessParams {
    s: f64,
    eps: f64,
    alpha: f64,
    beta: f64,
}

impl WitnessParams {
    pub fn new(s: f64, eps: f64) -> Result<Self> {
        positive("s", s)?;
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::invalid("eps", format!("must be a nonnegative real, got {eps}")));
        }
        let four = 4.0 + eps;
        let alpha = 2.0 / (four - (four * eps).sqrt());
        let denom = four * s - 1.0;
        if denom <= 0.0 {
            return Err(Error::invalid("s", "requires (4 + eps) s > 1"));
        }
        let beta = s * s / (alpha * denom);
        Ok(Self { s, eps, alpha, beta })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `g = 2(β - s) - α` and `h = g n + β(β - α) - s^2`.
pub fn g_and_h(params: &WitnessParams, n: u64) -> (f64, f64) {
    let (s, a, b) = (params.s, params.alpha, params.beta);
    let g = 2.0 * (b - s) - a;
    let h = g * n as f64 + (b * (b - a) - s * s);
    (g, h)
}

/// `g(0) = (1 - 8 s^2) / (2 (4 s - 1))`.
pub fn g_at_zero(s: f64) -> Result<f64> {
    let d = 4.0 * s - 1.0;
    if !s.is_finite() || d == 0.0 {
        return Err(Error::invalid("s", "g(0) has a pole at s = 1/4"));
    }
    Ok((1.0 - 8.0 * s * s) / (2.0 * d))
}

// ---------------------------------------------------------------------------
// Gamma-ratio sums

/// `sum_{j=1}^n Γ(j+b)/Γ(j+c)` through its closed form
/// `[Γ(n+b+1)/Γ(n+c) - Γ(b+1)/Γ(c)] / (1+b-c)`.
///
/// The closed form is evaluated from log-Gamma differences; at `1+b-c = 0`
/// it is replaced by its limit `ψ(n+b+1) - ψ(b+1)`.
pub fn gamma_ratio_sum(b: f64, c: f64, n: u64) -> Result<f64> {
    if !(b.is_finite() && b > -1.0) {
        return Err(Error::invalid("b", format!("requires b > -1, got {b}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid("c", format!("requires c > 0, got {c}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let d = 1.0 + b - c;
    if d.abs() < 1e-12 {
        return Ok(digamma_diff(nf + b + 1.0, b + 1.0));
    }
    let upper = ln_gamma_shift(nf + c, d);
    let lower = ln_gamma_diff(b + 1.0, c);
    Ok(lower.exp() * (upper - lower).exp_m1() / d)
}

// ---------------------------------------------------------------------------
// lacunary C-matrix constants

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LacunaryConstants {
    pub base: u64,
    pub t: f64,
    pub index: u32,
    /// `B_n` at `n = index`.
    pub b_n: f64,
    pub eta0: f64,
    /// `η_k` at `k = index` (equals `eta0` when `index = 0`).
    pub eta_k: f64,
    /// `(N-1)/(sqrt N - 1)^2 - η_k`, evaluated without cancellation.
    pub eta_k_gap: f64,
    pub t_opt: f64,
    /// `sqrt(N-1) / (sqrt N - 1)`.
    pub norm: f64,
}

/// `t = 1 - log_{N+1} sqrt(N-1)`.
pub fn lacunary_optimal_t(base: u64) -> Result<f64> {
    if base < 2 {
        return Err(Error::invalid("N", format!("must be >= 2, got {base}")));
    }
    let n = base as f64;
    Ok(1.0 - (n - 1.0).sqrt().ln() / (n + 1.0).ln())
}

/// `sqrt(N-1) / (sqrt N - 1)`.
pub fn lacunary_norm(base: u64) -> Result<f64> {
    if base < 2 {
        return Err(Error::invalid("N", format!("must be >= 2, got {base}")));
    }
    let n = base as f64;
    Ok((n - 1.0).sqrt() / (n.sqrt() - 1.0))
}

/// `B_n`, `η_0`, `η_k` and the optimal `t` for the lacunary C-matrix with
/// base `N`, for a given `t ∈ [0, 1]`.
pub fn lacunary_constants(base: u64, t: f64, index: u32) -> Result<LacunaryConstants> {
    let t_opt = lacunary_optimal_t(base)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("must lie in [0, 1], got {t}")));
    }
    let n = base as f64;
    let rn = n.sqrt();
    let rm = (n - 1.0).sqrt();
    let np1_t = (n + 1.0).powf(t);
    let limit = (n - 1.0) / ((rn - 1.0) * (rn - 1.0));

    let b_n = np1_t + rm * (rn.powi(index as i32) - rn) / (rn - 1.0);
    let eta0 = (n + 1.0).powf(1.0 - t) * (np1_t * (rn - 1.0) + rm) / ((rn - 1.0) * (n - 1.0));
    let (eta_k, eta_k_gap) = if index == 0 {
        (eta0, limit - eta0)
    } else {
        let coef = np1_t / rm - rn / (rn - 1.0);
        let gap = -coef * rn.powi(-(index as i32));
        (limit - gap, gap)
    };
    Ok(LacunaryConstants {
        base,
        t,
        index,
        b_n,
        eta0,
        eta_k,
        eta_k_gap,
        t_opt,
        norm: rm / (rn - 1.0),
    })
}

// ---------------------------------------------------------------------------
// p-norm constants

/// Hölder conjugate `q = p/(p-1)`.
pub fn holder_conjugate(p: f64) -> Result<f64> {
    exponent(p)?;
    Ok(p / (p - 1.0))
}

/// `p^2/(p-1) = p + q = p q`.
pub fn pq_constant(p: f64) -> Result<f64> {
    exponent(p)?;
    let q = p / (p - 1.0);
    let v = p * p / (p - 1.0);
    for alt in [p + q, p * q] {
        if (alt - v).abs() > 1e-14 * v {
            return Err(Error::Consistency(format!(
                "p^2/(p-1) = {v} disagrees with p+q / pq = {alt} at p = {p}"
            )));
        }
    }
    Ok(v)
}

/// `γ_m = (pq)^p sum_{n=0}^m (1/(n+s)) [ (s/(n+s))^{1/q} + (p/q) ((m+s+1)/(n+s))^{-1/p} ]`.
pub fn gamma_m(s: f64, p: f64, m: u64) -> Result<f64> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::invalid("s", format!("requires s >= 1, got {s}")));
    }
    let q = holder_conjugate(p)?;
    let pq = pq_constant(p)?;
    let top = m as f64 + s + 1.0;
    let mut acc = NeumaierSum::new();
    for n in 0..=m {
        let u = n as f64 + s;
        acc.add(((s / u).powf(1.0 / q) + (p / q) * (top / u).powf(-1.0 / p)) / u);
    }
    Ok(pq.powf(p) * acc.value())
}

/// The `p`-norm sandwich `||A_s||_p <= ||C_s||_p + ||C_s^T||_p = q + p`.
pub fn sandwich_bound(s: f64, p: f64) -> Result<BoundReport> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::invalid("s", "the sandwich bound is proven for s >= 1 only"));
    }
    let q = holder_conjugate(p)?;
    Ok(BoundReport::new(BoundKind::SandwichP, pq_constant(p)?)?
        .with("s", s)
        .with("p", p)
        .with("q", q))
}

/// Upper and lower bounds for the lacunary C-matrix norm. The lower bound
/// is the extremal-vector estimate `sqrt(((sqrt N + 1)^2 L + c) / (2 + (N-1) L))`.
pub fn lacunary_bounds(base: u64, levels: u32) -> Result<(BoundReport, BoundReport)> {
    let norm = lacunary_norm(base)?;
    if levels == 0 {
        return Err(Error::invalid("levels", "must be >= 1"));
    }
    let n = base as f64;
    let a = n.sqrt() + 1.0;
    let c = -2.0 * a;
    let l = levels as f64;
    let lower_sq = (a * a * l + c) / (2.0 + (n - 1.0) * l);
    let upper = BoundReport::new(BoundKind::LacunaryUpper, norm)?.with("N", n);
    let lower = BoundReport::new(BoundKind::LacunaryLower, lower_sq.max(0.0).sqrt())?
        .with("N", n)
        .with("levels", l)
        .with("c", c);
    Ok((upper, lower))
}

/// `s*`, `1/(2 sqrt 2)` and the quartic residual at `s*`.
pub fn critical_constants() -> Result<BoundReport> {
    let ss = s_star();
    Ok(BoundReport::new(BoundKind::CriticalConstants, ss)?
        .with("s_star", ss)
        .with("s_upper", s_upper())
        .with("quartic_at_s_star", quartic_numerator(ss))
        .with("f_at_s_upper", f_of_s(s_upper())?))
}
