//! Truncated matrices of composition operators and the checks built on them.

mod checks;
mod matrix;
mod norm;
mod report;

pub use checks::{
    almost_mult_defect, check_product_isometry, gram_block, isometry_defect, kernel_adjoint_check, monomial_pairs,
    product_matrix, recover_symbol, unitary_defect, verify_composition_structure, Defect, KernelCheck,
    ProductOptions, ProductVariant, Recovery, MIN_EXACT_COLS,
};
pub use matrix::{adjoint, apply, build_matrix, compose_ops, MatrixFile, MatrixKind, OpMatrix};
pub use norm::{norm_bounds, op_norm_est, NormBounds, NormEstimate, NormOptions};
pub use report::{Bound, Metric, Report, Verdict};

use thiserror::Error;

use crate::maps::MapError;
use crate::spaces::{SpaceError, SpaceSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("symbol has not been validated as a self-map")]
    Unvalidated,
    #[error("truncation order {n} is below the minimum {min}")]
    TruncationTooSmall { n: usize, min: usize },
    #[error("exact block too small: exact_cols = {exact_cols}, need at least {needed}")]
    TruncationTooCoarse { exact_cols: usize, needed: usize },
    #[error("synthetic matrices are only accepted by structure and multiplicativity checks")]
    SyntheticRefused,
    #[error("operand mismatch: {left} vs {right}")]
    Mismatch { left: String, right: String },
    #[error("matrix must be square with at least two rows, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("input of degree {degree} does not fit truncation order {n}")]
    DegreeTooHigh { degree: usize, n: usize },
    #[error("product degree {degree} with symbol degree {symbol_degree} exceeds the exact budget at N = {n}")]
    BudgetExceeded { degree: usize, symbol_degree: usize, n: usize },
    #[error("closed-form norm bounds are only available on weighted Bergman spaces, not {0}")]
    BoundsUnavailable(SpaceSpec),
    #[error("norm estimation needs max_iters >= 1 and tol > 0")]
    BadNormOptions,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}
