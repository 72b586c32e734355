//! Integral realisations of the three inner products.
//!
//! These routines never look at the weight sequences in [`crate::spaces`];
//! they sample the functions and integrate, so agreement between the two is a
//! genuine cross-check.
//!
//! Bergman integrals use the normalised area measure. With `r² = 1 − s²` the
//! weighted radial integral becomes
//!
//! ```text
//! ∫₀¹ (α+1)(1−r²)^α φ(r²) 2r dr = ∫₀¹ 2(α+1) s^{2α+1} φ(1−s²) ds
//! ```
//!
//! which is a polynomial in `s` whenever `2α+1` is a nonnegative integer, so
//! Gauss–Legendre in `s` integrates it exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::series::{self, TruncSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("radial rule needs at least 16 nodes, got {0}")]
    TooFewRadial(usize),
    #[error("angular rule needs an even number of at least 64 nodes, got {0}")]
    BadAngular(usize),
    #[error("weighted Bergman parameter must satisfy alpha > -1, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { radial_nodes: 64, angular_nodes: 256 }
    }
}

/// Node tables for one [`QuadSpec`], built once.
#[derive(Debug, Clone)]
pub struct Quadrature {
    spec: QuadSpec,
    /// Gauss–Legendre nodes and weights on `[0, 1]`.
    radial: Vec<(f64, f64)>,
    /// Points `e^{iθ_k}` on the unit circle.
    circle: Vec<Complex64>,
}

impl Quadrature {
    pub fn new(spec: QuadSpec) -> Result<Self, QuadratureError> {
        if spec.radial_nodes < 16 {
            return Err(QuadratureError::TooFewRadial(spec.radial_nodes));
        }
        if spec.angular_nodes < 64 || !spec.angular_nodes.is_multiple_of(2) {
            return Err(QuadratureError::BadAngular(spec.angular_nodes));
        }
        let radial = gauss_legendre(spec.radial_nodes)
            .into_iter()
            .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        let m = spec.angular_nodes;
        let circle = (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect();
        Ok(Self { spec, radial, circle })
    }

    pub fn spec(&self) -> QuadSpec {
        self.spec
    }

    fn circle_mean(&self, radius: f64, f: &TruncSeries, g: &TruncSeries) -> Complex64 {
        let sum: Complex64 = self
            .circle
            .iter()
            .map(|&u| {
                let z = u * radius;
                series::eval(f, z) * series::eval(g, z).conj()
            })
            .sum();
        sum / self.circle.len() as f64
    }

    /// `∫_𝔻 f conj(g) dA_α`.
    pub fn bergman_inner(&self, f: &TruncSeries, g: &TruncSeries, alpha: f64) -> Result<Complex64, QuadratureError> {
        if alpha.is_nan() || alpha <= -1.0 {
            return Err(QuadratureError::InvalidAlpha(alpha));
        }
        let exponent = 2.0 * alpha + 1.0;
        Ok(self
            .radial
            .iter()
            .map(|&(s, w)| {
                let r = (1.0 - s * s).max(0.0).sqrt();
                self.circle_mean(r, f, g) * (w * 2.0 * (alpha + 1.0) * s.powf(exponent))
            })
            .sum())
    }

    /// `(1/2π) ∫ f(e^{iθ}) conj(g(e^{iθ})) dθ`.
    pub fn hardy_inner(&self, f: &TruncSeries, g: &TruncSeries) -> Complex64 {
        self.circle_mean(1.0, f, g)
    }

    /// `f(0) conj(g(0)) + ⟨f′, g′⟩_{H²}`.
    pub fn s2_inner(&self, f: &TruncSeries, g: &TruncSeries) -> Complex64 {
        f.coeff(0) * g.coeff(0).conj() + self.hardy_inner(&series::derivative(f), &series::derivative(g))
    }

    /// Dispatches on the space.
    pub fn inner(&self, space: crate::spaces::SpaceSpec, f: &TruncSeries, g: &TruncSeries) -> Complex64 {
        use crate::spaces::SpaceSpec;
        match space {
            SpaceSpec::Hardy => self.hardy_inner(f, g),
            SpaceSpec::DerivativeHardy => self.s2_inner(f, g),
            SpaceSpec::WeightedBergman { alpha } => {
                self.bergman_inner(f, g, alpha).expect("SpaceSpec guarantees alpha > -1")
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quad() -> Quadrature {
        Quadrature::new(QuadSpec::default()).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(16);
        assert!((rule.iter().map(|p| p.1).sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..32 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(k)).sum();
            assert!((approx - exact).abs() < 1e-14, "x^{k}");
        }
    }

    #[test]
    fn spec_validation() {
        assert_eq!(Quadrature::new(QuadSpec { radial_nodes: 8, angular_nodes: 256 }).unwrap_err(), QuadratureError::TooFewRadial(8));
        assert!(Quadrature::new(QuadSpec { radial_nodes: 64, angular_nodes: 65 }).is_err());
        assert!(Quadrature::new(QuadSpec { radial_nodes: 64, angular_nodes: 32 }).is_err());
        assert_eq!(quad().bergman_inner(&TruncSeries::one(), &TruncSeries::one(), -1.0), Err(QuadratureError::InvalidAlpha(-1.0)));
    }

    #[test]
    fn bergman_examples() {
        let q = quad();
        for alpha in [-0.5, 0.0, 0.5, 1.5, 2.0, 3.7] {
            let mass = q.bergman_inner(&TruncSeries::one(), &TruncSeries::one(), alpha).unwrap();
            assert!((mass - c(1.0, 0.0)).norm() < 1e-12, "alpha = {alpha}: {mass}");
        }
        let z = TruncSeries::z();
        assert!((q.bergman_inner(&z, &z, 0.0).unwrap() - c(0.5, 0.0)).norm() < 1e-14);
        let z2 = TruncSeries::monomial(2, c(1.0, 0.0));
        assert!(q.bergman_inner(&z, &z2, 0.5).unwrap().norm() < 1e-15);
    }

    #[test]
    fn hardy_examples() {
        let q = quad();
        let z5 = TruncSeries::monomial(5, c(1.0, 0.0));
        assert!((q.hardy_inner(&z5, &z5) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(q.hardy_inner(&z5, &TruncSeries::z()).norm() < 1e-14);
        let f = TruncSeries::from_real(&[1.0, 2.0]).unwrap();
        assert!((q.hardy_inner(&f, &f) - c(5.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn s2_examples() {
        let q = quad();
        let z3 = TruncSeries::monomial(3, c(1.0, 0.0));
        assert!((q.s2_inner(&z3, &z3) - c(9.0, 0.0)).norm() < 1e-13);
        assert!((q.s2_inner(&TruncSeries::one(), &TruncSeries::one()) - c(1.0, 0.0)).norm() < 1e-15);
        let f = TruncSeries::from_real(&[1.0, 1.0]).unwrap();
        assert!((q.s2_inner(&f, &TruncSeries::z()) - c(1.0, 0.0)).norm() < 1e-14);
    }
}
