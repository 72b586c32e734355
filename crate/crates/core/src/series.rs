//! Truncated complex Taylor series.
//!
//! A [`TruncSeries`] stores the coefficients `c_0..c_N` of an analytic function
//! together with a [`Precision`] tag recording how much of the function those
//! coefficients capture. Every operation is a pure function of its inputs.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-coefficient tolerance used when asserting that two series agree exactly.
pub const EXACT_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("a series needs at least one coefficient")]
    Empty,
    #[error("coefficient {index} is not finite ({value})")]
    NonFinite { index: usize, value: Complex64 },
}

/// How faithfully the stored coefficients describe the underlying function.
///
/// The variants are ordered from most to least faithful, so combining two
/// tags is a `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// The function is a polynomial and every nonzero coefficient is stored.
    Exact,
    /// Coefficients through `trunc_order` are correct; higher ones were dropped.
    Truncated,
    /// Some stored coefficients depend on data that was never available.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncSeries {
    coeffs: Vec<Complex64>,
    precision: Precision,
}

impl TruncSeries {
    /// Builds an exact polynomial from its coefficients.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, SeriesError> {
        Self::with_precision(coeffs, Precision::Exact)
    }

    pub fn with_precision(coeffs: Vec<Complex64>, precision: Precision) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        if let Some((index, &value)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(SeriesError::NonFinite { index, value });
        }
        Ok(Self { coeffs, precision })
    }

    /// Exact polynomial with real coefficients.
    pub fn from_real(coeffs: &[f64]) -> Result<Self, SeriesError> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// The identity function `z`.
    pub fn z() -> Self {
        Self::monomial(1, Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c]).expect("constant coefficient must be finite")
    }

    /// `c·zⁿ`.
    pub fn monomial(n: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = c;
        Self::new(coeffs).expect("monomial coefficient must be finite")
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `zⁿ`, zero beyond the stored range.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision == Precision::Exact
    }

    pub fn is_approximate(&self) -> bool {
        self.precision == Precision::Approximate
    }

    /// Index of the highest nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != Complex64::default()).unwrap_or(0)
    }

    /// Index of the lowest nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != Complex64::default())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Copy with coefficients of modulus `<= tol` set to zero.
    pub fn trimmed(&self, tol: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if c.norm() <= tol { Complex64::default() } else { c })
            .collect();
        Self { coeffs, precision: self.precision }
    }

    /// Re-truncates (or zero-pads) to order `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        let precision = if n < self.degree() {
            self.precision.max(Precision::Truncated)
        } else if n > self.trunc_order() && self.precision != Precision::Exact {
            // Padding a truncated series invents zeros where the tail lived.
            Precision::Approximate
        } else {
            self.precision
        };
        coeffs.resize(n + 1, Complex64::default());
        Self { coeffs, precision }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect(), precision: self.precision }
    }

    /// Largest coefficientwise distance, comparing over the longer range.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|i| (self.coeff(i) - other.coeff(i)).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn combine_exactness(f: &TruncSeries, g: &TruncSeries, n: usize, product_degree: usize) -> Precision {
    let inputs = f.precision.max(g.precision);
    if inputs == Precision::Exact {
        if product_degree > n {
            Precision::Truncated
        } else {
            Precision::Exact
        }
    } else if n > f.trunc_order().min(g.trunc_order()) && inputs == Precision::Truncated {
        // Output coefficients above the shorter input's order miss tail products.
        Precision::Approximate
    } else {
        inputs
    }
}

/// Coefficientwise sum; the shorter operand is zero-padded.
pub fn add(f: &TruncSeries, g: &TruncSeries) -> TruncSeries {
    let n = f.trunc_order().max(g.trunc_order());
    let coeffs = (0..=n).map(|i| f.coeff(i) + g.coeff(i)).collect();
    let padded_inexact = (f.trunc_order() < n && !f.is_exact()) || (g.trunc_order() < n && !g.is_exact());
    let precision = if padded_inexact {
        Precision::Approximate
    } else {
        f.precision.max(g.precision)
    };
    TruncSeries { coeffs, precision }
}

pub fn sub(f: &TruncSeries, g: &TruncSeries) -> TruncSeries {
    add(f, &g.scale(Complex64::new(-1.0, 0.0)))
}

/// Cauchy product through degree `n`.
pub fn mul(f: &TruncSeries, g: &TruncSeries, n: usize) -> TruncSeries {
    let mut coeffs = vec![Complex64::default(); n + 1];
    let fd = f.degree().min(n);
    let gd = g.degree();
    for i in 0..=fd {
        let a = f.coeffs[i];
        if a == Complex64::default() {
            continue;
        }
        for j in 0..=gd.min(n - i) {
            coeffs[i + j] += a * g.coeffs[j];
        }
    }
    let precision = combine_exactness(f, g, n, f.degree() + g.degree());
    TruncSeries { coeffs, precision }
}

/// `f^k` through degree `n` by repeated multiplication.
pub fn pow(f: &TruncSeries, k: usize, n: usize) -> TruncSeries {
    let mut acc = TruncSeries::one().resized(n);
    for _ in 0..k {
        acc = mul(&acc, f, n);
    }
    acc
}

/// `f∘g` through degree `n`, by Horner's scheme in truncated arithmetic.
///
/// When `f` is not an exact polynomial and `g(0) != 0`, every output
/// coefficient depends on the missing tail of `f`; the result is then tagged
/// [`Precision::Approximate`].
pub fn compose(f: &TruncSeries, g: &TruncSeries, n: usize) -> TruncSeries {
    let mut acc = TruncSeries::constant(f.coeff(f.degree())).resized(n);
    for i in (0..f.degree()).rev() {
        acc = mul(&acc, g, n);
        acc.coeffs[0] += f.coeffs[i];
    }
    let shifted_inner = g.coeff(0) != Complex64::default();
    let precision = if !f.is_exact() && shifted_inner {
        Precision::Approximate
    } else if f.is_exact() && g.is_exact() {
        if f.degree() * g.degree() > n {
            Precision::Truncated
        } else {
            Precision::Exact
        }
    } else {
        let base = f.precision.max(g.precision);
        let known = if f.is_exact() { usize::MAX } else { f.trunc_order() };
        let known = known.min(if g.is_exact() { usize::MAX } else { g.trunc_order() });
        if n > known {
            Precision::Approximate
        } else {
            base
        }
    };
    acc.precision = precision;
    acc
}

/// Horner evaluation of the stored coefficients at `z`.
pub fn eval(f: &TruncSeries, z: Complex64) -> Complex64 {
    f.coeffs.iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c)
}

pub fn derivative(f: &TruncSeries) -> TruncSeries {
    if f.coeffs.len() == 1 {
        return TruncSeries { coeffs: vec![Complex64::default()], precision: f.precision };
    }
    let coeffs = f.coeffs.iter().enumerate().skip(1).map(|(n, &c)| c * n as f64).collect();
    TruncSeries { coeffs, precision: f.precision }
}
