//! The three Hilbert spaces of analytic functions on the unit disk.
//!
//! Each space is diagonal in the monomial basis, so it is completely described
//! by its weight sequence `beta_sq(n) = ‖zⁿ‖²`:
//!
//! | space            | `beta_sq(n)`                 |
//! |------------------|------------------------------|
//! | Hardy `H²`       | `1`                          |
//! | Bergman `A²_α`   | `n! Γ(2+α) / Γ(n+2+α)`       |
//! | derivative `S²`  | `1` for `n = 0`, else `n²`   |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{self, TruncSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("weighted Bergman parameter must satisfy alpha > -1, got {0}")]
    InvalidAlpha(f64),
    #[error("kernel point must lie in the open unit disk, got |w| = {0}")]
    OutsideDisk(f64),
    #[error("unknown space `{0}` (expected hardy, s2 or bergman:<alpha>)")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpaceSpec {
    Hardy,
    WeightedBergman { alpha: f64 },
    DerivativeHardy,
}

impl SpaceSpec {
    pub fn bergman(alpha: f64) -> Result<Self, SpaceError> {
        if alpha.is_finite() && alpha > -1.0 {
            Ok(Self::WeightedBergman { alpha })
        } else {
            Err(SpaceError::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::WeightedBergman { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// `‖zⁿ‖²` in this space.
    ///
    /// The Bergman weight is accumulated as `∏_{k=1}^{n} k/(k+1+α)`, which is
    /// the Gamma ratio without ever forming a Gamma value.
    pub fn beta_sq(&self, n: usize) -> f64 {
        match *self {
            Self::Hardy => 1.0,
            Self::DerivativeHardy => {
                if n == 0 {
                    1.0
                } else {
                    (n * n) as f64
                }
            }
            Self::WeightedBergman { alpha } => {
                (1..=n).fold(1.0, |acc, k| acc * (k as f64 / (k as f64 + 1.0 + alpha)))
            }
        }
    }

    /// `beta_sq(0..=n)` in one pass.
    pub fn weights(&self, n: usize) -> Vec<f64> {
        match *self {
            Self::WeightedBergman { alpha } => {
                let mut out = Vec::with_capacity(n + 1);
                let mut acc = 1.0;
                out.push(acc);
                for k in 1..=n {
                    acc *= k as f64 / (k as f64 + 1.0 + alpha);
                    out.push(acc);
                }
                out
            }
            _ => (0..=n).map(|k| self.beta_sq(k)).collect(),
        }
    }

    /// Factor turning `zⁿ` into the unit vector `e_n`.
    pub fn basis_scale(&self, n: usize) -> f64 {
        1.0 / self.beta_sq(n).sqrt()
    }

    pub fn inner_product(&self, f: &TruncSeries, g: &TruncSeries) -> Complex64 {
        let n = f.trunc_order().min(g.trunc_order());
        self.weights(n)
            .iter()
            .enumerate()
            .map(|(k, w)| f.coeff(k) * g.coeff(k).conj() * *w)
            .sum()
    }

    pub fn norm(&self, f: &TruncSeries) -> f64 {
        self.inner_product(f, f).re.max(0.0).sqrt()
    }

    /// Truncated reproducing kernel `K_w = Σ conj(w)ⁿ zⁿ / beta_sq(n)`.
    pub fn kernel(&self, w: Complex64, n: usize) -> Result<KernelVector, SpaceError> {
        check_in_disk(w)?;
        let wc = w.conj();
        let mut power = Complex64::new(1.0, 0.0);
        let coeffs = self
            .weights(n)
            .into_iter()
            .map(|beta| {
                let c = power / beta;
                power *= wc;
                c
            })
            .collect();
        let series = TruncSeries::with_precision(coeffs, crate::series::Precision::Truncated)
            .expect("kernel coefficients are finite for |w| < 1");
        Ok(KernelVector { series, w, space: *self })
    }

    /// Partial sum `Σ_{n≤N} |w|^{2n} / beta_sq(n)` of `‖K_w‖²`.
    pub fn kernel_norm_sq(&self, w: Complex64, n: usize) -> Result<f64, SpaceError> {
        check_in_disk(w)?;
        let r2 = w.norm_sqr();
        let mut power = 1.0;
        Ok(self
            .weights(n)
            .into_iter()
            .map(|beta| {
                let t = power / beta;
                power *= r2;
                t
            })
            .sum())
    }

    /// Closed form `(1 − conj(w) z)^{−(α+2)}` of the Bergman kernel.
    pub fn kernel_closed_form(&self, w: Complex64, z: Complex64) -> Option<Complex64> {
        let alpha = self.alpha()?;
        Some((Complex64::new(1.0, 0.0) - w.conj() * z).powf(-(alpha + 2.0)))
    }

    /// Closed form `(1 − |w|²)^{−(α+2)}` of the Bergman kernel norm.
    pub fn kernel_norm_sq_closed_form(&self, w: Complex64) -> Option<f64> {
        let alpha = self.alpha()?;
        Some((1.0 - w.norm_sqr()).powf(-(alpha + 2.0)))
    }

    /// Bound on `Σ_{n>N} |w|^{2n} / beta_sq(n)`, the part of `‖K_w‖²` a
    /// degree-`N` truncation leaves out.
    ///
    /// Bergman uses the exact closed-form remainder; for the other spaces
    /// `1/beta_sq(n) ≤ 1` when `n ≥ 1`, which gives a geometric bound.
    pub fn kernel_tail_bound(&self, w: Complex64, n: usize) -> Result<f64, SpaceError> {
        check_in_disk(w)?;
        let r2 = w.norm_sqr();
        Ok(match self.kernel_norm_sq_closed_form(w) {
            Some(closed) => (closed - self.kernel_norm_sq(w, n)?).max(0.0),
            None => r2.powi(n as i32 + 1) / (1.0 - r2),
        })
    }
}

fn check_in_disk(w: Complex64) -> Result<(), SpaceError> {
    let r = w.norm();
    if r < 1.0 && r.is_finite() {
        Ok(())
    } else {
        Err(SpaceError::OutsideDisk(r))
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hardy => write!(f, "hardy"),
            Self::DerivativeHardy => write!(f, "s2"),
            Self::WeightedBergman { alpha } => write!(f, "bergman:{alpha}"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "hardy" | "h2" => Ok(Self::Hardy),
            "s2" | "derivative-hardy" => Ok(Self::DerivativeHardy),
            "bergman" | "a2" => Self::bergman(0.0),
            _ => {
                let alpha = s
                    .strip_prefix("bergman:")
                    .or_else(|| s.strip_prefix("a2:"))
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| SpaceError::Unknown(s.clone()))?;
                Self::bergman(alpha)
            }
        }
    }
}

impl TryFrom<String> for SpaceSpec {
    type Error = SpaceError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SpaceSpec> for String {
    fn from(s: SpaceSpec) -> Self {
        s.to_string()
    }
}

/// A truncated reproducing kernel together with the point and space it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    pub series: TruncSeries,
    pub w: Complex64,
    pub space: SpaceSpec,
}

impl KernelVector {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        series::eval(&self.series, z)
    }
}
