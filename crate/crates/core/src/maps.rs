//! Analytic self-maps of the unit disk.
//!
//! Three families are supported: polynomials (certified by sampling the
//! boundary circle), rotations `λz`, and disk automorphisms
//! `γ(b − z)/(1 − conj(b) z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{self, Precision, TruncSeries};

/// Polynomials are accepted only when `max |Φ(e^{iθ})| ≤ 1 − SELF_MAP_MARGIN`.
pub const SELF_MAP_MARGIN: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 4096;
pub const MIN_GRID: usize = 360;
/// Tolerance on `|λ| = 1` and `|γ| = 1` at construction.
pub const UNIT_TOL: f64 = 1e-12;
pub const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("rotation factor must have modulus 1, got {0}")]
    NotUnimodular(f64),
    #[error("automorphism centre must satisfy |b| < 1, got {0}")]
    CentreOutsideDisk(f64),
    #[error("polynomial is not certified as a self-map: boundary maximum {boundary_max} exceeds {limit}")]
    NotSelfMap { boundary_max: f64, limit: f64 },
    #[error("polynomial self-maps must be exact polynomials")]
    NotPolynomial,
    #[error("boundary grid needs at least {MIN_GRID} points, got {0}")]
    GridTooCoarse(usize),
    #[error("map has not been validated")]
    Unvalidated,
    #[error("evaluation point must lie in the open unit disk, got |z| = {0}")]
    OutsideDisk(f64),
    #[error("invalid map description: {0}")]
    Description(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Polynomial(TruncSeries),
    Rotation(Complex64),
    /// `γ(b − z)/(1 − conj(b) z)`.
    Moebius { gamma: Complex64, b: Complex64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    kind: MapKind,
    validated: bool,
}

impl SelfMap {
    pub fn rotation(lambda: Complex64) -> Result<Self, MapError> {
        check_unimodular(lambda)?;
        Ok(Self { kind: MapKind::Rotation(lambda), validated: true })
    }

    pub fn moebius(gamma: Complex64, b: Complex64) -> Result<Self, MapError> {
        check_unimodular(gamma)?;
        if b.norm().is_nan() || b.norm() >= 1.0 {
            return Err(MapError::CentreOutsideDisk(b.norm()));
        }
        Ok(Self { kind: MapKind::Moebius { gamma, b }, validated: true })
    }

    /// An unvalidated polynomial symbol; call [`SelfMap::validated`] before use.
    pub fn polynomial(coeffs: TruncSeries) -> Result<Self, MapError> {
        if !coeffs.is_exact() {
            return Err(MapError::NotPolynomial);
        }
        let coeffs = coeffs.resized(coeffs.degree());
        Ok(Self { kind: MapKind::Polynomial(coeffs), validated: false })
    }

    /// Convenience for real-coefficient polynomials, validated on the default grid.
    pub fn real_polynomial(coeffs: &[f64]) -> Result<Self, MapError> {
        let series = TruncSeries::from_real(coeffs).map_err(|e| MapError::Description(e.to_string()))?;
        Self::polynomial(series)?.validated(DEFAULT_GRID)
    }

    /// `zᵏ`, validated.
    pub fn monomial(k: usize) -> Self {
        Self::polynomial(TruncSeries::monomial(k, Complex64::new(1.0, 0.0)))
            .and_then(|m| m.validated(DEFAULT_GRID))
            .expect("monomials are self-maps")
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Certifies the self-map property and returns the validated map.
    pub fn validated(mut self, grid_size: usize) -> Result<Self, MapError> {
        if grid_size < MIN_GRID {
            return Err(MapError::GridTooCoarse(grid_size));
        }
        if let MapKind::Polynomial(p) = &self.kind {
            if single_term_contraction(p) {
                self.validated = true;
                return Ok(self);
            }
            let boundary_max = boundary_max(p, grid_size);
            let limit = 1.0 - SELF_MAP_MARGIN;
            if boundary_max.is_nan() || boundary_max > limit {
                return Err(MapError::NotSelfMap { boundary_max, limit });
            }
        }
        self.validated = true;
        Ok(self)
    }

    /// Classifies a series as a rotation when it is one within
    /// [`CLASSIFY_TOL`], and otherwise as a polynomial checked on the grid.
    pub fn from_series(s: &TruncSeries, grid_size: usize) -> Result<Self, MapError> {
        let s = s.trimmed(crate::series::EXACT_TOL);
        let s = TruncSeries::new(s.coeffs()[..=s.degree()].to_vec()).map_err(|e| MapError::Description(e.to_string()))?;
        if rotation_shaped(&s, CLASSIFY_TOL) {
            let l = s.coeff(1);
            return Self::rotation(l / l.norm());
        }
        Self::polynomial(s)?.validated(grid_size)
    }

    fn require_validated(&self) -> Result<(), MapError> {
        if self.validated {
            Ok(())
        } else {
            Err(MapError::Unvalidated)
        }
    }

    /// `Φ(0)`.
    pub fn value_at_origin(&self) -> Complex64 {
        match &self.kind {
            MapKind::Polynomial(p) => p.coeff(0),
            MapKind::Rotation(_) => Complex64::default(),
            MapKind::Moebius { gamma, b } => gamma * b,
        }
    }

    /// Taylor coefficients through degree `n`.
    pub fn taylor(&self, n: usize) -> Result<TruncSeries, MapError> {
        self.require_validated()?;
        Ok(match &self.kind {
            MapKind::Polynomial(p) => p.resized(n),
            MapKind::Rotation(l) => TruncSeries::monomial(1, *l).resized(n),
            MapKind::Moebius { gamma, b } => {
                if *b == Complex64::default() {
                    return Ok(TruncSeries::monomial(1, -gamma).resized(n));
                }
                // c₀ = γb, cₙ = γ conj(b)^{n−1} (|b|² − 1)
                let bc = b.conj();
                let lead = gamma * (b.norm_sqr() - 1.0);
                let mut coeffs = Vec::with_capacity(n + 1);
                coeffs.push(gamma * b);
                let mut power = Complex64::new(1.0, 0.0);
                for _ in 1..=n {
                    coeffs.push(lead * power);
                    power *= bc;
                }
                TruncSeries::with_precision(coeffs, Precision::Truncated).expect("finite Taylor coefficients")
            }
        })
    }

    /// Upper bound on the sup-norm of the Taylor remainder beyond degree `n` on
    /// the closed disk of radius `r < 1`.
    pub fn taylor_tail(&self, n: usize, r: f64) -> f64 {
        match &self.kind {
            MapKind::Moebius { b, .. } => {
                let q = b.norm() * r;
                (1.0 - b.norm_sqr()) * r * q.powi(n as i32) / (1.0 - q)
            }
            MapKind::Polynomial(p) if p.degree() > n => {
                p.coeffs()[n + 1..].iter().enumerate().map(|(i, c)| c.norm() * r.powi((n + 1 + i) as i32)).sum()
            }
            _ => 0.0,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, MapError> {
        self.require_validated()?;
        if z.norm().is_nan() || z.norm() >= 1.0 {
            return Err(MapError::OutsideDisk(z.norm()));
        }
        Ok(match &self.kind {
            MapKind::Polynomial(p) => series::eval(p, z),
            MapKind::Rotation(l) => l * z,
            MapKind::Moebius { gamma, b } => gamma * (b - z) / (Complex64::new(1.0, 0.0) - b.conj() * z),
        })
    }

    pub fn is_rotation(&self, tol: f64) -> bool {
        match &self.kind {
            MapKind::Rotation(_) => true,
            MapKind::Moebius { b, .. } => b.norm() <= tol,
            MapKind::Polynomial(p) => rotation_shaped(p, tol),
        }
    }

    pub fn fixes_origin(&self, tol: f64) -> bool {
        self.value_at_origin().norm() <= tol
    }

    /// Polynomial automorphisms are exactly the rotations.
    pub fn is_automorphism(&self) -> bool {
        match &self.kind {
            MapKind::Rotation(_) | MapKind::Moebius { .. } => true,
            MapKind::Polynomial(p) => rotation_shaped(p, CLASSIFY_TOL),
        }
    }

    /// Constant symbols cannot be recovered from an operator.
    pub fn is_constant(&self) -> bool {
        matches!(&self.kind, MapKind::Polynomial(p) if p.degree() == 0)
    }

    /// Degree of the symbol when it is a polynomial (rotations count as 1).
    pub fn polynomial_degree(&self) -> Option<usize> {
        match &self.kind {
            MapKind::Polynomial(p) => Some(p.degree()),
            MapKind::Rotation(_) => Some(1),
            MapKind::Moebius { gamma: _, b } if *b == Complex64::default() => Some(1),
            MapKind::Moebius { .. } => None,
        }
    }

    pub fn descriptor(&self) -> MapDescriptor {
        let pair = |c: Complex64| [c.re, c.im];
        match &self.kind {
            MapKind::Polynomial(p) => MapDescriptor::Poly { coeffs: p.coeffs().iter().map(|&c| pair(c)).collect() },
            MapKind::Rotation(l) => MapDescriptor::Rotation { lambda: pair(*l) },
            MapKind::Moebius { gamma, b } => MapDescriptor::Moebius { gamma: pair(*gamma), b: pair(*b) },
        }
    }
}

fn check_unimodular(c: Complex64) -> Result<(), MapError> {
    if (c.norm() - 1.0).abs() <= UNIT_TOL {
        Ok(())
    } else {
        Err(MapError::NotUnimodular(c.norm()))
    }
}

/// `c zᵏ` with `k ≥ 1` and `|c| ≤ 1` maps 𝔻 into 𝔻 even though it reaches the
/// circle in modulus, which the boundary margin cannot certify.
fn single_term_contraction(p: &TruncSeries) -> bool {
    let mut terms = p.coeffs().iter().enumerate().filter(|(_, c)| **c != Complex64::new(0.0, 0.0));
    match (terms.next(), terms.next()) {
        (Some((k, c)), None) => k >= 1 && c.norm() <= 1.0,
        _ => false,
    }
}

fn rotation_shaped(p: &TruncSeries, tol: f64) -> bool {
    p.coeffs().iter().enumerate().all(|(n, c)| {
        if n == 1 {
            (c.norm() - 1.0).abs() <= tol
        } else {
            c.norm() <= tol
        }
    }) && p.trunc_order() >= 1
}

/// `max |p(e^{iθ})|` over `grid_size` equally spaced angles.
pub fn boundary_max(p: &TruncSeries, grid_size: usize) -> f64 {
    (0..grid_size)
        .map(|k| series::eval(p, Complex64::from_polar(1.0, 2.0 * PI * k as f64 / grid_size as f64)).norm())
        .fold(0.0, f64::max)
}

/// Whether `m` is certified as a self-map of the disk on a grid of the given size.
pub fn validate_self_map(m: &SelfMap, grid_size: usize) -> bool {
    m.clone().validated(grid_size).is_ok()
}

/// Serialized form of a self-map, as used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapDescriptor {
    Poly { coeffs: Vec<[f64; 2]> },
    Rotation { lambda: [f64; 2] },
    Moebius { gamma: [f64; 2], b: [f64; 2] },
}

impl MapDescriptor {
    /// Builds and validates the described map.
    pub fn to_self_map(&self, grid_size: usize) -> Result<SelfMap, MapError> {
        let c = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
        match self {
            Self::Poly { coeffs } => {
                let series = TruncSeries::new(coeffs.iter().map(c).collect())
                    .map_err(|e| MapError::Description(e.to_string()))?;
                SelfMap::polynomial(series)?.validated(grid_size)
            }
            Self::Rotation { lambda } => SelfMap::rotation(c(lambda)),
            Self::Moebius { gamma, b } => SelfMap::moebius(c(gamma), c(b)),
        }
    }
}
