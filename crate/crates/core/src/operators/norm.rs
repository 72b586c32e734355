use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{OpMatrix, OperatorError};
use crate::maps::SelfMap;
use crate::spaces::SpaceSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub max_iters: usize,
    /// Stop once successive Rayleigh quotients of `M*M` differ by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-12, seed: 0x5eed_c0de }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Largest singular value of the truncated matrix; a lower bound for the
    /// operator norm.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `M*M` from a seeded random complex start vector.
pub fn op_norm_est(m: &OpMatrix, opts: &NormOptions) -> Result<NormEstimate, OperatorError> {
    if opts.max_iters == 0 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(OperatorError::BadNormOptions);
    }
    let a = m.entries();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v = DVector::from_fn(m.dim(), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    v /= Complex64::new(v.norm(), 0.0);

    let mut prev = f64::NAN;
    for it in 1..=opts.max_iters {
        let w = a * &v;
        let rayleigh = w.norm_squared();
        let u = a.ad_mul(&w);
        let un = u.norm();
        if un == 0.0 {
            return Ok(NormEstimate { value: 0.0, iterations: it, converged: true });
        }
        v = u / Complex64::new(un, 0.0);
        if (rayleigh - prev).abs() < opts.tol {
            return Ok(NormEstimate { value: rayleigh.sqrt(), iterations: it, converged: true });
        }
        prev = rayleigh;
    }
    let w = a * &v;
    Ok(NormEstimate { value: w.norm(), iterations: opts.max_iters, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Closed-form bracket for `‖C_Φ‖` on `A²_α`, with `p = |Φ(0)|`:
/// the kernel quotient `‖K_{Φ(0)}‖/‖K₀‖ = (1−p²)^{−(α+2)/2}` below and
/// `((1+p)/(1−p))^{(α+2)/2}` above.
pub fn norm_bounds(m: &SelfMap, space: SpaceSpec) -> Result<NormBounds, OperatorError> {
    let alpha = space.alpha().ok_or(OperatorError::BoundsUnavailable(space))?;
    if !m.is_validated() {
        return Err(OperatorError::Unvalidated);
    }
    let p = m.value_at_origin().norm();
    let e = (alpha + 2.0) / 2.0;
    Ok(NormBounds { lower: (1.0 / (1.0 - p * p)).powf(e), upper: ((1.0 + p) / (1.0 - p)).powf(e) })
}
