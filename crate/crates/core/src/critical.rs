//! Verdict tables for the critical shift where `||A_s||_p` reaches `p^2/(p-1)`.
//!
//! A row is `CertifiedAbove` when a rigorous lower bound (witness Rayleigh
//! quotient, or any truncated norm) exceeds the target. `BelowEvidence` needs
//! both a truncation sweep that stays clearly under the target and an
//! analytic upper bound equal to the target; it is evidence, not proof, that
//! the threshold has been reached. Everything else is `Inconclusive`.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{f_of_s, pq_constant, s_star, s_upper};
use crate::error::{Error, Result};
use crate::generators::{GeneratorSequence, Shape, StructuredMatrix};
use crate::normest::{truncation_sweep, PowerOptions};
use crate::witness::{build_as_witness, certify_as_witness, Epsilon};

/// A sweep maximum must stay this far under the target for `BelowEvidence`.
pub const BELOW_MARGIN: f64 = 1e-3;

/// Smallest truncation in a sweep; sizes grow by 4x up to `M_max`.
pub const SWEEP_START: usize = 256;

/// Grid points are rounded to `1/GRID_SCALE` so that `0.25 + k*0.005`
/// prints and compares cleanly.
const GRID_SCALE: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedAbove,
    BelowEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedAbove => "CERTIFIED_ABOVE",
            Verdict::BelowEvidence => "BELOW_EVIDENCE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalRow {
    pub s: f64,
    pub verdict: Verdict,
    pub witness_ratio: Option<f64>,
    pub witness_eps: Option<f64>,
    pub sweep_max: f64,
    pub sweep_max_truncation: usize,
    pub sweep_converged: bool,
    pub upper_bound: Option<f64>,
    /// Set when the row lost its verdict because it contradicted a row on
    /// the other side of the boundary.
    pub monotonicity_violation: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalScan {
    pub p: f64,
    pub target: f64,
    pub m_max: usize,
    pub grid: Vec<f64>,
    pub rows: Vec<CriticalRow>,
    /// Largest certified-above `s` (else the grid start) and smallest
    /// below-evidence `s` (else the grid end).
    pub bracket: (f64, f64),
    /// Whether sweep maxima are nonincreasing in `s`. Recorded, not assumed.
    pub sweep_monotone_in_s: bool,
}

/// The best proven upper bound on `||A_s||_p`: `max(f(s), 4)` for `p = 2`,
/// `p + q` for `s >= 1`, nothing otherwise.
pub fn upper_bound_of_record(p: f64, s: f64) -> Option<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return None;
    }
    if p == 2.0 {
        return f_of_s(s).ok().map(|f| f.max(4.0));
    }
    if s >= 1.0 {
        return pq_constant(p).ok();
    }
    None
}

/// `lo, lo+step, ..., <= hi`, each rounded to 1e-12.
pub fn parse_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || !(step > 0.0) || hi < lo {
        return Err(Error::invalid(
            "grid",
            format!("need lo <= hi and step > 0, got {lo}:{hi}:{step}"),
        ));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::invalid("grid", "more than 100000 points"));
    }
    Ok((0..count).map(|k| round_grid(lo + k as f64 * step)).collect())
}

fn round_grid(s: f64) -> f64 {
    (s * GRID_SCALE).round() / GRID_SCALE
}

/// `0.25..=0.40` step `0.005` plus `s*` and `1/(2 sqrt 2)`, sorted.
pub fn default_grid() -> Vec<f64> {
    let mut g = parse_grid(0.25, 0.40, 0.005).expect("static grid");
    g.push(s_star());
    g.push(s_upper());
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// `256, 1024, ...` below `m_max`, then `m_max` itself.
pub fn sweep_sizes(m_max: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut m = SWEEP_START;
    while m < m_max {
        sizes.push(m);
        m *= 4;
    }
    sizes.push(m_max);
    sizes
}

pub fn scan_critical(p: f64, grid: &[f64], m_max: usize, opts: PowerOptions) -> Result<CriticalScan> {
    let target = pq_constant(p)?;
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must contain at least one point"));
    }
    if grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("grid", "all points must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    if m_max < 2 {
        return Err(Error::invalid("Mmax", "must be >= 2"));
    }
    let sizes = sweep_sizes(m_max);
    let mut rows = grid
        .par_iter()
        .map(|&s| scan_point(p, s, target, &sizes, m_max, opts))
        .collect::<Result<Vec<_>>>()?;

    enforce_verdict_order(&mut rows);

    let bracket = (
        rows.iter()
            .filter(|r| r.verdict == Verdict::CertifiedAbove)
            .map(|r| r.s)
            .fold(grid[0], f64::max),
        rows.iter()
            .filter(|r| r.verdict == Verdict::BelowEvidence)
            .map(|r| r.s)
            .fold(grid[grid.len() - 1], f64::min),
    );
    let sweep_monotone_in_s = rows.windows(2).all(|w| w[1].sweep_max <= w[0].sweep_max + opts.tol);
    if !sweep_monotone_in_s {
        log::info!("sweep maxima are not monotone in s on this grid");
    }
    Ok(CriticalScan {
        p,
        target,
        m_max,
        grid: grid.to_vec(),
        rows,
        bracket,
        sweep_monotone_in_s,
    })
}

fn scan_point(p: f64, s: f64, target: f64, sizes: &[usize], m_max: usize, opts: PowerOptions) -> Result<CriticalRow> {
    let mut witness_ratio = None;
    let mut witness_eps = None;
    let mut notes = Vec::new();
    if p == 2.0 && s < s_star() {
        match build_as_witness(s, m_max, Epsilon::Auto).and_then(|w| certify_as_witness(&w)) {
            Ok(c) if c.pointwise_ok => {
                witness_ratio = Some(c.ratio);
                witness_eps = Some(c.eps);
            }
            Ok(_) => notes.push("witness failed pointwise check".to_string()),
            Err(e) if e.is_consistency_failure() => return Err(e),
            Err(e) => notes.push(format!("no witness: {e}")),
        }
    }
    let mat = StructuredMatrix::new(Shape::L, GeneratorSequence::as_sequence(s)?);
    let sweep = truncation_sweep(&mat, p, sizes, opts)?;
    let best = sweep
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("sweep is nonempty");
    let sweep_converged = sweep.iter().all(|e| e.converged);
    let upper_bound = upper_bound_of_record(p, s);

    let verdict = if witness_ratio.is_some_and(|r| r > target) {
        notes.push("witness ratio exceeds target".into());
        Verdict::CertifiedAbove
    } else if best.lower_certificate > target {
        notes.push("truncated Rayleigh quotient exceeds target".into());
        Verdict::CertifiedAbove
    } else if best.value < target - BELOW_MARGIN && upper_bound.is_some_and(|u| (u - target).abs() <= 1e-12 * target) {
        notes.push("evidence only: sweep below target and upper bound equals target".into());
        Verdict::BelowEvidence
    } else {
        if upper_bound.is_none() {
            notes.push("no proven upper bound here".into());
        } else if upper_bound.is_some_and(|u| u > target) {
            notes.push("upper bound exceeds target".into());
        } else {
            notes.push("sweep within margin of target".into());
        }
        Verdict::Inconclusive
    };
    Ok(CriticalRow {
        s,
        verdict,
        witness_ratio,
        witness_eps,
        sweep_max: best.value,
        sweep_max_truncation: best.truncation,
        sweep_converged,
        upper_bound,
        monotonicity_violation: false,
        note: notes.join("; "),
    })
}

/// Any certified-above row at or after a below-evidence row contradicts the
/// boundary; both sides are demoted to `Inconclusive`.
fn enforce_verdict_order(rows: &mut [CriticalRow]) {
    let first_below = rows.iter().position(|r| r.verdict == Verdict::BelowEvidence);
    let last_above = rows.iter().rposition(|r| r.verdict == Verdict::CertifiedAbove);
    let (Some(b), Some(a)) = (first_below, last_above) else {
        return;
    };
    if a < b {
        return;
    }
    for r in &mut rows[b..=a] {
        if r.verdict != Verdict::Inconclusive {
            r.verdict = Verdict::Inconclusive;
            r.monotonicity_violation = true;
            r.note.push_str("; demoted: verdict order violated");
        }
    }
}
