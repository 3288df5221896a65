//! Generator sequences, the L/C/C-transpose matrices they define, and
//! linear-time truncated matrix–vector products.
//!
//! An L-matrix has entries `a_{max(i,j)}`; a C-matrix ("terraced" matrix) has
//! `a_i` on and below the diagonal and zero above it. Both are products of a
//! diagonal with a triangular matrix of ones, so a truncated product needs
//! one prefix-sum pass and one suffix-sum pass instead of `O(M^2)` work.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Default upper bound on `M` for [`StructuredMatrix::materialize_dense`].
pub const DEFAULT_DENSE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `a_n = 1/(n+s)`, the generator of `A_s`.
    As { s: f64 },
    /// Same rule as [`GeneratorKind::As`]; tagged separately because it is
    /// used with C-shape (generalized Cesàro) matrices.
    Cesaro { s: f64 },
    /// `a_{N^j} = N^{-j/2}` for `j >= 1`, zero elsewhere.
    Lacunary { base: u64 },
    /// Finite list, padded with zeros.
    Custom { values: Vec<f64> },
}

/// A rule `n -> a_n`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSequence {
    #[serde(flatten)]
    kind: GeneratorKind,
}

fn check_shift(s: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::invalid("s", format!("must be a positive real, got {s}")));
    }
    Ok(())
}

impl GeneratorSequence {
    pub fn as_sequence(s: f64) -> Result<Self> {
        check_shift(s)?;
        Ok(Self {
            kind: GeneratorKind::As { s },
        })
    }

    pub fn cesaro(s: f64) -> Result<Self> {
        check_shift(s)?;
        Ok(Self {
            kind: GeneratorKind::Cesaro { s },
        })
    }

    pub fn lacunary(base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::invalid("N", format!("must be an integer >= 2, got {base}")));
        }
        Ok(Self {
            kind: GeneratorKind::Lacunary { base },
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            kind: GeneratorKind::Custom { values },
        })
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    /// The shift `s` for the `1/(n+s)` families.
    pub fn shift(&self) -> Option<f64> {
        match self.kind {
            GeneratorKind::As { s } | GeneratorKind::Cesaro { s } => Some(s),
            _ => None,
        }
    }

    /// `a_n`.
    pub fn eval(&self, n: u64) -> f64 {
        match &self.kind {
            GeneratorKind::As { s } | GeneratorKind::Cesaro { s } => 1.0 / (n as f64 + s),
            GeneratorKind::Lacunary { base } => match lacunary_level(*base, n) {
                Some(j) => lacunary_value(*base, j),
                None => 0.0,
            },
            GeneratorKind::Custom { values } => usize::try_from(n)
                .ok()
                .and_then(|i| values.get(i).copied())
                .unwrap_or(0.0),
        }
    }

    /// `a_0, ..., a_{m-1}`.
    pub fn coefficients(&self, m: usize) -> Vec<f64> {
        match &self.kind {
            GeneratorKind::As { s } | GeneratorKind::Cesaro { s } => (0..m).map(|n| 1.0 / (n as f64 + s)).collect(),
            GeneratorKind::Lacunary { base } => {
                let mut out = vec![0.0; m];
                for (j, idx) in lacunary_support(*base, m as u128) {
                    out[idx as usize] = lacunary_value(*base, j);
                }
                out
            }
            GeneratorKind::Custom { values } => {
                let mut out = vec![0.0; m];
                let k = values.len().min(m);
                out[..k].copy_from_slice(&values[..k]);
                out
            }
        }
    }

    /// True when every `a_n` is known to be nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            GeneratorKind::Custom { values } => values.iter().all(|v| *v >= 0.0),
            _ => true,
        }
    }

    /// First index `< m` holding a negative coefficient.
    pub fn first_negative(&self, m: usize) -> Option<(usize, f64)> {
        match &self.kind {
            GeneratorKind::Custom { values } => values.iter().take(m).copied().enumerate().find(|(_, v)| *v < 0.0),
            _ => None,
        }
    }
}

/// `N^{-j/2}`.
pub(crate) fn lacunary_value(base: u64, j: u32) -> f64 {
    (base as f64).sqrt().powi(-(j as i32))
}

/// `Some(j)` when `n = N^j` with `j >= 1`.
fn lacunary_level(base: u64, mut n: u64) -> Option<u32> {
    if n < base {
        return None;
    }
    let mut j = 0;
    while n.is_multiple_of(base) {
        n /= base;
        j += 1;
    }
    (n == 1).then_some(j)
}

/// Pairs `(j, N^j)` for `j >= 1` and `N^j < limit`; stops before overflow.
pub(crate) fn lacunary_support(base: u64, limit: u128) -> impl Iterator<Item = (u32, u128)> {
    let base = base as u128;
    let mut j = 0u32;
    let mut power: Option<u128> = Some(1);
    std::iter::from_fn(move || {
        let next = power?.checked_mul(base)?;
        if next >= limit {
            power = None;
            return None;
        }
        j += 1;
        power = Some(next);
        Some((j, next))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// `entry(i,j) = a_{max(i,j)}`; symmetric.
    L,
    /// `entry(i,j) = a_i` for `j <= i`, zero above the diagonal.
    C,
    /// Transpose of [`Shape::C`].
    Ctr,
}

impl Shape {
    pub fn transpose(self) -> Self {
        match self {
            Shape::L => Shape::L,
            Shape::C => Shape::Ctr,
            Shape::Ctr => Shape::C,
        }
    }
}

/// A finite nonempty vector of finite reals; always indexed from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedVector(Vec<f64>);

impl TruncatedVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("x", "truncated vector must have length >= 1"));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    pub(crate) fn from_trusted(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Copy padded with zeros (or cut) to `len`.
    pub fn resized(&self, len: usize) -> Result<Self> {
        let mut v = self.0.clone();
        v.resize(len, 0.0);
        Self::new(v)
    }
}

/// A shape tag plus a generator. Never materialized unless asked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuredMatrix {
    shape: Shape,
    generator: GeneratorSequence,
}

impl StructuredMatrix {
    pub fn new(shape: Shape, generator: GeneratorSequence) -> Self {
        Self { shape, generator }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn generator(&self) -> &GeneratorSequence {
        &self.generator
    }

    pub fn transpose(&self) -> Self {
        Self {
            shape: self.shape.transpose(),
            generator: self.generator.clone(),
        }
    }

    pub fn entry(&self, i: u64, j: u64) -> f64 {
        match self.shape {
            Shape::L => self.generator.eval(i.max(j)),
            Shape::C if j <= i => self.generator.eval(i),
            Shape::Ctr if i <= j => self.generator.eval(j),
            _ => 0.0,
        }
    }

    /// Leading `m x m` section with precomputed coefficients, for repeated
    /// products.
    pub fn truncate(&self, m: usize) -> Result<Truncation> {
        if m == 0 {
            return Err(Error::invalid("M", "truncation size must be >= 1"));
        }
        let coeffs = self.generator.coefficients(m);
        if let Some(index) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Truncation {
            shape: self.shape,
            coeffs,
        })
    }

    /// `y = A_M x` where `M = x.len()`, in `O(M)`.
    pub fn matvec(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        let t = self.truncate(x.len())?;
        let mut y = vec![0.0; x.len()];
        t.apply(x.as_slice(), &mut y);
        Ok(TruncatedVector::from_trusted(y))
    }

    /// Leading `m x m` section as a dense row-major matrix. Test oracle only.
    pub fn materialize_dense(&self, m: usize) -> Result<DenseMatrix> {
        self.materialize_dense_capped(m, DEFAULT_DENSE_CAP)
    }

    pub fn materialize_dense_capped(&self, m: usize, cap: usize) -> Result<DenseMatrix> {
        if m == 0 {
            return Err(Error::invalid("M", "dense size must be >= 1"));
        }
        if m > cap {
            return Err(Error::DenseCapExceeded { size: m, cap });
        }
        let a = self.generator.coefficients(m);
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            let row = &mut data[i * m..(i + 1) * m];
            for (j, v) in row.iter_mut().enumerate() {
                *v = match self.shape {
                    Shape::L => a[i.max(j)],
                    Shape::C if j <= i => a[i],
                    Shape::Ctr if i <= j => a[j],
                    _ => 0.0,
                };
            }
        }
        Ok(DenseMatrix { n: m, data })
    }
}

/// Precomputed leading section of a [`StructuredMatrix`].
#[derive(Debug, Clone)]
pub struct Truncation {
    shape: Shape,
    coeffs: Vec<f64>,
}

impl Truncation {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `out = A x`. Both slices must have length [`Truncation::len`].
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        apply_shape(self.shape, &self.coeffs, x, out);
    }

    /// `out = A^T x`.
    pub fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        apply_shape(self.shape.transpose(), &self.coeffs, x, out);
    }
}

fn apply_shape(shape: Shape, a: &[f64], x: &[f64], out: &mut [f64]) {
    let m = a.len();
    assert_eq!(x.len(), m, "operand length");
    assert_eq!(out.len(), m, "output length");
    match shape {
        Shape::C => {
            let mut prefix = NeumaierSum::new();
            for i in 0..m {
                prefix.add(x[i]);
                out[i] = a[i] * prefix.value();
            }
        }
        Shape::Ctr => {
            let mut suffix = NeumaierSum::new();
            for i in (0..m).rev() {
                suffix.add(a[i] * x[i]);
                out[i] = suffix.value();
            }
        }
        Shape::L => {
            // out[i] <- sum_{j>i} a_j x_j, then add a_i * sum_{j<=i} x_j.
            let mut suffix = NeumaierSum::new();
            for i in (0..m).rev() {
                out[i] = suffix.value();
                suffix.add(a[i] * x[i]);
            }
            let mut prefix = NeumaierSum::new();
            for i in 0..m {
                prefix.add(x[i]);
                out[i] += a[i] * prefix.value();
            }
        }
    }
}

/// Row-major square matrix used as an `O(M^2)` oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn transpose_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }
}
