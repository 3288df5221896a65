//! Explicit lower-bound vectors and their certified Rayleigh quotients.
//!
//! Three families:
//!
//! * [`AsWitness`]: the Gamma-quotient vector for `A_s`, `1/4 < s < s*`,
//!   whose image satisfies `y_n >= (4 + ε) x_n` entrywise;
//! * [`PnormWitness`]: `x_m = ((k+s)^{-1/p})_{k<=m}` for the `l^p` norm of
//!   `A_s`, `s >= 1`;
//! * [`LacunaryWitness`]: the piecewise-constant extremal vector for the
//!   lacunary C-matrix.

use serde::Serialize;

use crate::analytic::{self, g_and_h, gamma_m, holder_conjugate, pq_constant, s_star, WitnessParams};
use crate::error::{Error, Result};
use crate::generators::{GeneratorSequence, Shape, StructuredMatrix, TruncatedVector};
use crate::normest::rayleigh_p;
use crate::special::{ln_gamma_diff, ln_gamma_shift};
use crate::summation::{self, lp_norm, NeumaierSum};

/// Number of bisection steps used to pick `ε` automatically.
pub const EPS_BISECTION_STEPS: usize = 60;

/// Relative tolerance between the closed-form image and matvec-plus-tail.
pub const AS_IMAGE_TOL: f64 = 1e-8;

/// Numerical slack in the self-validating `l^p` inequality.
pub const PNORM_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    /// Largest `ε ∈ (0, 1]` satisfying the validity conditions.
    Auto,
    Fixed(f64),
}

/// Why a given `(s, ε)` cannot produce a witness, if it cannot.
fn epsilon_defect(s: f64, eps: f64) -> Option<String> {
    let params = match WitnessParams::new(s, eps) {
        Ok(p) => p,
        Err(e) => return Some(e.to_string()),
    };
    let (g, h1) = g_and_h(&params, 1);
    if !(g > 0.0) {
        return Some(format!("leading coefficient g = {g} is not positive"));
    }
    if !(h1 >= 0.0) {
        return Some(format!("h(1) = {h1} is negative"));
    }
    if !(params.beta() - params.alpha() + 1.0 > 0.0) {
        return Some("Gamma argument beta - alpha + 1 is not positive".into());
    }
    None
}

/// The witness for `||A_s||_2 > 4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsWitness {
    pub params: WitnessParams,
    pub truncation: usize,
    #[serde(skip)]
    pub x: TruncatedVector,
    /// `k[n] = K_n` for `1 <= n < M`; `k[0]` is unused and zero.
    #[serde(skip)]
    pub k: Vec<f64>,
    /// `K_M`, the first coefficient beyond the truncation.
    pub k_next: f64,
}

/// Builds the `A_s` witness. `s` must lie in `(1/4, s*)`.
pub fn build_as_witness(s: f64, truncation: usize, eps: Epsilon) -> Result<AsWitness> {
    if truncation < 2 {
        return Err(Error::invalid("M", "witness truncation must be >= 2"));
    }
    let ss = s_star();
    if !(s > 0.25 && s < ss) {
        return Err(Error::NoValidEpsilon {
            s,
            reason: format!("s must lie in (1/4, s*) = (0.25, {ss:.9})"),
        });
    }
    let eps = match eps {
        Epsilon::Fixed(e) => {
            if !(e > 0.0) {
                return Err(Error::invalid("eps", format!("must be positive, got {e}")));
            }
            if let Some(reason) = epsilon_defect(s, e) {
                return Err(Error::NoValidEpsilon { s, reason });
            }
            e
        }
        Epsilon::Auto => auto_epsilon(s)?,
    };
    let params = WitnessParams::new(s, eps)?;
    let (k, k_next) = k_recurrence(&params, truncation);
    let mut x = Vec::with_capacity(truncation);
    x.push(1.0);
    x.extend((1..truncation).map(|n| s * (n as f64 + s) * k[n]));
    Ok(AsWitness {
        params,
        truncation,
        x: TruncatedVector::new(x)?,
        k,
        k_next,
    })
}

fn auto_epsilon(s: f64) -> Result<f64> {
    if epsilon_defect(s, 1.0).is_none() {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..EPS_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if epsilon_defect(s, mid).is_none() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 && epsilon_defect(s, lo).is_none() {
        Ok(lo)
    } else {
        Err(Error::NoValidEpsilon {
            s,
            reason: "bisection found no admissible epsilon in (0, 1]".into(),
        })
    }
}

/// `K_n` from `K_1 = 1/(β(β+1))` and `K_{n+1}/K_n = (n+β-α)/(n+β+1)`,
/// accumulated in log space.
fn k_recurrence(params: &WitnessParams, m: usize) -> (Vec<f64>, f64) {
    let (a, b) = (params.alpha(), params.beta());
    let mut log_k = NeumaierSum::new();
    log_k.add(-b.ln() - (b + 1.0).ln());
    let mut k = vec![0.0; m];
    for (n, slot) in k.iter_mut().enumerate().skip(1) {
        *slot = log_k.value().exp();
        log_k.add((-(1.0 + a) / (n as f64 + b + 1.0)).ln_1p());
    }
    (k, log_k.value().exp())
}

impl AsWitness {
    /// `K_n = Γ(β)Γ(n+β-α) / (Γ(n+β+1)Γ(β-α+1))` via log-Gamma differences.
    pub fn k_gamma_form(&self, n: usize) -> f64 {
        let (a, b) = (self.params.alpha(), self.params.beta());
        let nf = n as f64;
        (ln_gamma_diff(b, b - a + 1.0) + ln_gamma_shift(nf + b + 1.0, -(1.0 + a))).exp()
    }

    /// Largest relative disagreement between the recurrence and the Gamma
    /// form over `1 <= n < M`.
    pub fn k_agreement(&self) -> f64 {
        (1..self.truncation)
            .map(|n| {
                let g = self.k_gamma_form(n);
                (self.k[n] - g).abs() / g
            })
            .fold(0.0, f64::max)
    }

    /// `x_n n^α` over `[M/2, M)`, divided by its limit `s Γ(β)/Γ(β-α+1)`.
    /// Returns (min, max). The band edges asserted in tests are empirical.
    pub fn decay_band(&self) -> (f64, f64) {
        let (a, b, s) = (self.params.alpha(), self.params.beta(), self.params.s());
        let c = s * ln_gamma_diff(b, b - a + 1.0).exp();
        let xs = self.x.as_slice();
        (self.truncation / 2..self.truncation)
            .filter(|n| *n >= 1)
            .map(|n| xs[n] * (n as f64).powf(a) / c)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// `sum_{j>=M} a_j x_j = s (M+β) K_M / α`, from the telescoped
    /// Gamma-ratio identity.
    pub fn tail(&self) -> f64 {
        let (a, b, s) = (self.params.alpha(), self.params.beta(), self.params.s());
        s * (self.truncation as f64 + b) * self.k_next / a
    }

    /// `s Γ(β)/Γ(β-α+1) M^{-α} / α`, the integral envelope of the tail from
    /// `a_j x_j = s K_j ~ s Γ(β)/Γ(β-α+1) j^{-1-α}`. Reported next to the
    /// exact tail as a sanity band.
    pub fn tail_envelope(&self) -> f64 {
        let (a, b, s) = (self.params.alpha(), self.params.beta(), self.params.s());
        s * ln_gamma_diff(b, b - a + 1.0).exp() * (self.truncation as f64).powf(-a) / a
    }

    /// Closed-form image `y = A_s x` of the infinite witness, rows `< M`.
    pub fn image_closed_form(&self) -> Vec<f64> {
        let (s, eps) = (self.params.s(), self.params.eps());
        let xs = self.x.as_slice();
        let mut y = Vec::with_capacity(self.truncation);
        y.push(4.0 + eps);
        for (n, xn) in xs.iter().enumerate().skip(1) {
            let (_, h) = g_and_h(&self.params, n as u64);
            let u = n as f64 + s;
            // (n+β-α)(n+β) = (n+s)^2 + h(n)
            y.push((4.0 + eps) * xn * (1.0 + h / (u * u)));
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsCertificate {
    pub s: f64,
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub truncation: usize,
    /// `||y||_2 / ||x||_2` over rows `< M` with `y` the closed-form image.
    pub ratio: f64,
    /// `||A_M x||_2 / ||x||_2`; a lower bound on the truncated norm.
    pub truncated_ratio: f64,
    pub pointwise_ok: bool,
    /// Exact tail `sum_{j>=M} a_j x_j` dropped by the truncated product.
    pub tail: f64,
    pub tail_envelope: f64,
    /// Largest relative gap between closed form and matvec plus tail.
    pub image_discrepancy: f64,
}

pub fn certify_as_witness(w: &AsWitness) -> Result<AsCertificate> {
    let s = w.params.s();
    let eps = w.params.eps();
    let mat = StructuredMatrix::new(Shape::L, GeneratorSequence::as_sequence(s)?);
    let closed = w.image_closed_form();
    let truncated = mat.matvec(&w.x)?;
    let tail = w.tail();
    let image_discrepancy = closed
        .iter()
        .zip(truncated.as_slice())
        .map(|(c, t)| (c - (t + tail)).abs() / c.abs())
        .fold(0.0, f64::max);
    if !(image_discrepancy <= AS_IMAGE_TOL) {
        return Err(Error::Consistency(format!(
            "closed-form image and truncated product plus tail disagree by {image_discrepancy:e}"
        )));
    }
    let xs = w.x.as_slice();
    let pointwise_ok = closed.iter().zip(xs).all(|(y, x)| *y >= (4.0 + eps) * x);
    let nx = lp_norm(xs, 2.0);
    Ok(AsCertificate {
        s,
        eps,
        alpha: w.params.alpha(),
        beta: w.params.beta(),
        truncation: w.truncation,
        ratio: lp_norm(&closed, 2.0) / nx,
        truncated_ratio: lp_norm(truncated.as_slice(), 2.0) / nx,
        pointwise_ok,
        tail,
        tail_envelope: w.tail_envelope(),
        image_discrepancy,
    })
}

/// `x_m = (s^{-1/p}, (1+s)^{-1/p}, ..., (m+s)^{-1/p})`, zero afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnormWitness {
    pub s: f64,
    pub p: f64,
    pub m: usize,
    #[serde(skip)]
    pub x: TruncatedVector,
}

pub fn build_pnorm_witness(s: f64, p: f64, m: usize) -> Result<PnormWitness> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::invalid("s", format!("requires s >= 1, got {s}")));
    }
    holder_conjugate(p)?;
    let x = (0..=m).map(|k| (k as f64 + s).powf(-1.0 / p)).collect();
    Ok(PnormWitness {
        s,
        p,
        m,
        x: TruncatedVector::new(x)?,
    })
}

impl PnormWitness {
    /// Rows and columns kept when applying `A_s`.
    pub fn truncation(&self) -> usize {
        4 * (self.m + 1)
    }

    /// `||x_m||_p^p = sum_{n<=m} 1/(n+s)`.
    pub fn norm_p_pow(&self) -> f64 {
        summation::sum((0..=self.m).map(|n| 1.0 / (n as f64 + self.s)))
    }

    pub fn padded(&self) -> Result<TruncatedVector> {
        self.x.resized(self.truncation())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnormCertificate {
    pub s: f64,
    pub p: f64,
    pub m: usize,
    pub ratio: f64,
    pub gamma_m: f64,
    pub norm_p_pow: f64,
    /// `(pq)^p - γ_m / ||x_m||_p^p`.
    pub lower_bound_pow: f64,
    /// `ratio^p - lower_bound_pow`.
    pub slack: f64,
    pub self_bound_ok: bool,
    pub upper_ok: bool,
}

pub fn certify_pnorm_witness(w: &PnormWitness) -> Result<PnormCertificate> {
    let mat = StructuredMatrix::new(Shape::L, GeneratorSequence::as_sequence(w.s)?);
    let x = w.padded()?;
    let ratio = rayleigh_p(&mat, &x, w.p)?;
    let pq = pq_constant(w.p)?;
    let gamma = gamma_m(w.s, w.p, w.m as u64)?;
    let norm_p_pow = w.norm_p_pow();
    let lower_bound_pow = pq.powf(w.p) - gamma / norm_p_pow;
    let slack = ratio.powf(w.p) - lower_bound_pow;
    Ok(PnormCertificate {
        s: w.s,
        p: w.p,
        m: w.m,
        ratio,
        gamma_m: gamma,
        norm_p_pow,
        lower_bound_pow,
        slack,
        self_bound_ok: slack >= -PNORM_SLACK,
        upper_ok: ratio <= pq * (1.0 + 1e-9),
    })
}

/// The extremal vector for the lacunary C-matrix: `1` on `[0, N]` and
/// `N^{-n/2}` on `(N^n, N^{n+1}]` for `1 <= n < levels`. Its support ends at
/// `N^levels`, which may be far too long to materialize, so the vector is
/// kept in block form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LacunaryWitness {
    pub base: u64,
    pub levels: u32,
    /// `N^levels`, the last index of the support.
    pub support_end: u128,
    /// `2 + (N-1) levels`.
    pub norm_sq_closed: f64,
}

pub fn build_lacunary_witness(base: u64, levels: u32) -> Result<LacunaryWitness> {
    if base < 2 {
        return Err(Error::invalid("N", format!("must be >= 2, got {base}")));
    }
    if levels == 0 {
        return Err(Error::invalid("levels", "must be >= 1"));
    }
    let support_end = (base as u128)
        .checked_pow(levels)
        .filter(|v| v.checked_add(1).is_some())
        .ok_or(Error::Overflow {
            what: "N^levels for the lacunary witness",
        })?;
    Ok(LacunaryWitness {
        base,
        levels,
        support_end,
        norm_sq_closed: 2.0 + (base as f64 - 1.0) * levels as f64,
    })
}

impl LacunaryWitness {
    /// `(first, last, value)` for each constant block, in index order.
    pub fn blocks(&self) -> Vec<(u128, u128, f64)> {
        let n = self.base as u128;
        let mut out = vec![(0, n, 1.0)];
        let mut lo = n;
        for level in 1..self.levels {
            let hi = lo * n;
            out.push((lo + 1, hi, (self.base as f64).sqrt().powi(-(level as i32))));
            lo = hi;
        }
        out
    }

    /// `||x||_2^2` by summing block lengths times squared values.
    pub fn norm_sq_blockwise(&self) -> f64 {
        summation::sum(self.blocks().into_iter().map(|(a, b, v)| (b - a + 1) as f64 * v * v))
    }

    /// `y_{N^n} = (sqrt N + 1) - (sqrt N - 1)/sqrt N^n` for `1 <= n <= levels`.
    pub fn image_at_level(&self, level: u32) -> f64 {
        let r = (self.base as f64).sqrt();
        (r + 1.0) - (r - 1.0) * r.powi(-(level as i32))
    }

    /// The vector itself, length `N^levels + 1`, when that is at most `cap`.
    pub fn materialize(&self, cap: usize) -> Result<TruncatedVector> {
        let len = self.support_end + 1;
        if len > cap as u128 {
            return Err(Error::DenseCapExceeded {
                size: usize::try_from(len).unwrap_or(usize::MAX),
                cap,
            });
        }
        let mut x = vec![0.0; len as usize];
        for (a, b, v) in self.blocks() {
            x[a as usize..=b as usize].fill(v);
        }
        TruncatedVector::new(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LacunaryCertificate {
    pub base: u64,
    pub levels: u32,
    pub norm_sq: f64,
    /// `||Cx||_2^2 / ||x||_2^2` over rows `<= N^levels`.
    pub ratio_sq: f64,
    pub ratio: f64,
    /// `(N-1)/(sqrt N - 1)^2`.
    pub limit_sq: f64,
    /// `((sqrt N + 1)^2 levels + c) / (2 + (N-1) levels)` with `c = -2(sqrt N + 1)`.
    pub lower_bound_sq: f64,
    pub bound_ok: bool,
    pub norm_sq_ok: bool,
}

pub fn certify_lacunary_witness(w: &LacunaryWitness) -> Result<LacunaryCertificate> {
    let n = w.base as f64;
    let r = n.sqrt();
    let image_sq = summation::sum((1..=w.levels).map(|l| w.image_at_level(l).powi(2)));
    let norm_sq = w.norm_sq_closed;
    let blockwise = w.norm_sq_blockwise();
    let norm_sq_ok = (blockwise - norm_sq).abs() <= 1e-12 * norm_sq;
    let ratio_sq = image_sq / norm_sq;
    let l = w.levels as f64;
    let lower_bound_sq = ((r + 1.0).powi(2) * l - 2.0 * (r + 1.0)) / (2.0 + (n - 1.0) * l);
    let limit_sq = analytic::lacunary_norm(w.base)?.powi(2);
    Ok(LacunaryCertificate {
        base: w.base,
        levels: w.levels,
        norm_sq,
        ratio_sq,
        ratio: ratio_sq.sqrt(),
        limit_sq,
        lower_bound_sq,
        bound_ok: lower_bound_sq <= ratio_sq * (1.0 + 1e-12),
        norm_sq_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_epsilon_found_below_s_star() {
        let w = build_as_witness(0.3, 1000, Epsilon::Auto).unwrap();
        let eps = w.params.eps();
        assert!(eps > 0.0 && eps <= 1.0);
        let (g, h1) = g_and_h(&w.params, 1);
        assert!(g > 0.0 && h1 >= 0.0);
        // slightly larger epsilon is no longer admissible
        if eps < 1.0 {
            assert!(epsilon_defect(0.3, eps * (1.0 + 1e-9) + 1e-15).is_some());
        }
    }

    #[test]
    fn no_epsilon_beyond_s_star() {
        for s in [0.36, 0.25, 0.2, s_star()] {
            assert!(matches!(
                build_as_witness(s, 100, Epsilon::Auto),
                Err(Error::NoValidEpsilon { .. })
            ));
        }
        assert!(matches!(
            build_as_witness(0.36, 100, Epsilon::Fixed(1e-6)),
            Err(Error::NoValidEpsilon { .. })
        ));
    }

    #[test]
    fn tiny_fixed_epsilon_is_valid() {
        let w = build_as_witness(0.3, 100, Epsilon::Fixed(1e-6)).unwrap();
        let (g, h1) = g_and_h(&w.params, 1);
        assert!(g > 0.0 && h1 >= 0.0);
        assert!(build_as_witness(0.3, 100, Epsilon::Fixed(0.0)).is_err());
        assert!(build_as_witness(0.3, 1, Epsilon::Auto).is_err());
    }

    #[test]
    fn first_image_entry_is_four_plus_eps() {
        let w = build_as_witness(0.3, 5000, Epsilon::Auto).unwrap();
        let c = certify_as_witness(&w).unwrap();
        let y = w.image_closed_form();
        assert_eq!(y[0], 4.0 + c.eps);
        assert_eq!(w.x.as_slice()[0], 1.0);
        assert!(c.pointwise_ok);
        assert!(c.ratio >= 4.0 + c.eps);
        // the envelope is asymptotic; it must agree with the exact tail to leading order
        assert!(
            (c.tail / c.tail_envelope - 1.0).abs() < 1e-3,
            "{} vs {}",
            c.tail,
            c.tail_envelope
        );
    }

    #[test]
    fn k_matches_gamma_form() {
        for s in [0.26, 0.3, 0.34] {
            let w = build_as_witness(s, 20_000, Epsilon::Auto).unwrap();
            assert!(w.k_agreement() <= 1e-10, "s={s}: {}", w.k_agreement());
        }
    }

    #[test]
    fn decay_band_is_tight() {
        let w = build_as_witness(0.3, 100_000, Epsilon::Auto).unwrap();
        let (lo, hi) = w.decay_band();
        // empirical band edges
        assert!(lo > 0.95 && hi < 1.05, "({lo}, {hi})");
    }

    #[test]
    fn pnorm_witness_shape() {
        let w = build_pnorm_witness(1.0, 2.0, 2).unwrap();
        let want = [1.0, 2f64.sqrt().recip(), 3f64.sqrt().recip()];
        for (a, b) in w.x.as_slice().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let w0 = build_pnorm_witness(2.0, 3.0, 0).unwrap();
        assert_eq!(w0.x.len(), 1);
        assert!((w0.x.as_slice()[0] - 2f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!(build_pnorm_witness(0.5, 2.0, 3).is_err());
        assert!(build_pnorm_witness(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn pnorm_norm_is_harmonic_type_sum() {
        let w = build_pnorm_witness(1.5, 3.0, 1000).unwrap();
        let direct = lp_norm(w.x.as_slice(), 3.0).powi(3);
        assert!((direct - w.norm_p_pow()).abs() < 1e-12 * direct);
        let small = build_pnorm_witness(1.5, 3.0, 10).unwrap().norm_p_pow();
        assert!(w.norm_p_pow() > small);
    }

    #[test]
    fn pnorm_certificate_small() {
        let c = certify_pnorm_witness(&build_pnorm_witness(1.0, 2.0, 1000).unwrap()).unwrap();
        assert!(c.self_bound_ok && c.upper_ok);
        assert!(c.ratio < 4.0);
    }

    #[test]
    fn lacunary_norm_closed_form() {
        let w = build_lacunary_witness(2, 3).unwrap();
        assert_eq!(w.norm_sq_closed, 5.0);
        let x = w.materialize(1 << 20).unwrap();
        assert_eq!(x.len(), 9);
        assert!((summation::sum(x.as_slice().iter().map(|v| v * v)) - 5.0).abs() < 1e-14);
        assert!((w.norm_sq_blockwise() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn lacunary_bounds_and_overflow() {
        for base in 2..=6 {
            let c = certify_lacunary_witness(&build_lacunary_witness(base, 20).unwrap()).unwrap();
            assert!(c.bound_ok && c.norm_sq_ok);
            assert!(c.ratio_sq < c.limit_sq);
        }
        assert!(matches!(build_lacunary_witness(2, 128), Err(Error::Overflow { .. })));
        assert!(build_lacunary_witness(5, 32).is_ok());
        assert!(build_lacunary_witness(1, 3).is_err());
        assert!(build_lacunary_witness(3, 0).is_err());
        assert!(build_lacunary_witness(3, 30).unwrap().materialize(1000).is_err());
    }
}
