//! Defect measurements and verification routines built on [`OpMatrix`].
//!
//! Gram-matrix defects are evaluated only on the exact block, where every
//! column carries its whole image and the truncated Gram entries equal those
//! of the full operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::matrix::{adjoint, apply, build_matrix, compose_ops, MatrixKind, OpMatrix};
use super::norm::{norm_bounds, op_norm_est, NormOptions};
use super::report::{Bound, Report};
use super::OperatorError;
use crate::maps::{SelfMap, CLASSIFY_TOL, DEFAULT_GRID};
use crate::series::{self, TruncSeries, EXACT_TOL};
use crate::spaces::SpaceSpec;

/// Smallest `exact_cols` at which Gram defects are evaluated.
pub const MIN_EXACT_COLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Defect {
    /// `max |(M*M − I)[j][k]|` over the block.
    pub value: f64,
    /// Where the maximum sits.
    pub worst: (usize, usize),
    /// Side length of the block used.
    pub block: usize,
}

fn usable_block(m: &OpMatrix) -> Result<usize, OperatorError> {
    if m.kind() == MatrixKind::Synthetic {
        return Err(OperatorError::SyntheticRefused);
    }
    let block = m.exact_block();
    if block < MIN_EXACT_COLS + 1 {
        return Err(OperatorError::TruncationTooCoarse { exact_cols: m.exact_cols(), needed: MIN_EXACT_COLS });
    }
    Ok(block)
}

/// `(M*M)[j][k]` for `j, k < block`.
pub fn gram_block(m: &OpMatrix, block: usize) -> DMatrix<Complex64> {
    let cols = m.entries().columns(0, block);
    cols.adjoint() * cols
}

fn defect_on(m: &OpMatrix, block: usize) -> Defect {
    let g = gram_block(m, block);
    let mut best = Defect { value: 0.0, worst: (0, 0), block };
    for j in 0..block {
        for k in 0..block {
            let target = if j == k { 1.0 } else { 0.0 };
            let d = (g[(j, k)] - Complex64::new(target, 0.0)).norm();
            if d > best.value {
                best.value = d;
                best.worst = (j, k);
            }
        }
    }
    best
}

/// Distance of `M*M` from the identity on the exact block.
pub fn isometry_defect(m: &OpMatrix) -> Result<Defect, OperatorError> {
    let block = usable_block(m)?;
    Ok(defect_on(m, block))
}

/// Larger of the isometry defects of `M` and `M*`, on their common exact block.
pub fn unitary_defect(m: &OpMatrix) -> Result<Defect, OperatorError> {
    let adj = adjoint(m);
    let block = usable_block(m)?.min(usable_block(&adj)?);
    let a = defect_on(m, block);
    let b = defect_on(&adj, block);
    Ok(if b.value > a.value { b } else { a })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelCheck {
    /// `‖C_Φ* K_w − K_{Φ(w)}‖` over degrees `0..=N`.
    pub residual: f64,
    /// `Φ(w)`.
    pub image: [f64; 2],
    /// `√(Σ_{n>N} |w|^{2n}/‖zⁿ‖²)`: kernel mass the adjoint never sees.
    pub tail_w: f64,
    /// Same for `Φ(w)`: kernel mass left out of the comparison.
    pub tail_image: f64,
}

/// Checks `C_Φ* K_w = K_{Φ(w)}` with truncated matrices.
pub fn kernel_adjoint_check(m: &SelfMap, space: SpaceSpec, w: Complex64, n: usize) -> Result<KernelCheck, OperatorError> {
    let image = m.eval(w)?;
    let mat = build_matrix(m, space, n)?;
    let kw = space.kernel(w, n)?;
    let lhs = apply(&adjoint(&mat), &kw.series)?;
    let rhs = space.kernel(image, n)?;
    let residual = space.norm(&series::sub(&lhs, &rhs.series));
    Ok(KernelCheck {
        residual,
        image: [image.re, image.im],
        tail_w: space.kernel_tail_bound(w, n)?.sqrt(),
        tail_image: space.kernel_tail_bound(image, n)?.sqrt(),
    })
}

/// Degree that products must be budgeted against: the symbol degree when the
/// matrix knows it, otherwise the degree of `T z`.
fn effective_degree(m: &OpMatrix) -> Result<usize, OperatorError> {
    if m.symbol_degree() > 0 {
        return Ok(m.symbol_degree());
    }
    Ok(apply(m, &TruncSeries::z())?.trimmed(EXACT_TOL).degree().max(1))
}

/// `‖T(fg) − Tf·Tg‖`, restricted to products that expand without truncation.
pub fn almost_mult_defect(m: &OpMatrix, f: &TruncSeries, g: &TruncSeries) -> Result<f64, OperatorError> {
    let n = m.trunc_order();
    let d = effective_degree(m)?;
    let total = f.degree() + g.degree();
    if total > n || d * total > n {
        return Err(OperatorError::BudgetExceeded { degree: total, symbol_degree: d, n });
    }
    let lhs = apply(m, &series::mul(f, g, n))?;
    let rhs = series::mul(&apply(m, f)?, &apply(m, g)?, n);
    Ok(m.space().norm(&series::sub(&lhs, &rhs)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    /// `T z`, with coefficients below the exactness tolerance cleared.
    pub symbol: TruncSeries,
    /// `‖T 1 − 1‖`.
    pub te0_residual: f64,
    pub constant: bool,
    /// The recovered symbol as a certified self-map, or why it is not one.
    pub map: Result<SelfMap, String>,
}

/// Reads the symbol off as `Φ = T z`.
pub fn recover_symbol(m: &OpMatrix) -> Result<Recovery, OperatorError> {
    if m.trunc_order() < 2 {
        return Err(OperatorError::TruncationTooSmall { n: m.trunc_order(), min: 2 });
    }
    let symbol = apply(m, &TruncSeries::z())?.trimmed(EXACT_TOL);
    let te0 = apply(m, &TruncSeries::one())?;
    let te0_residual = m.space().norm(&series::sub(&te0, &TruncSeries::one()));
    let constant = symbol.degree() == 0;
    let map = if constant {
        Err("recovered symbol is constant".to_string())
    } else {
        SelfMap::from_series(&symbol, DEFAULT_GRID).map_err(|e| e.to_string())
    };
    Ok(Recovery { symbol, te0_residual, constant, map })
}

/// Monomial pairs `(a, b)`, `a ≤ b`, whose product stays inside the budget.
pub fn monomial_pairs(n: usize, degree: usize) -> Vec<(usize, usize)> {
    let d = degree.max(1);
    let max_total = n / d;
    (0..=max_total).flat_map(|a| (a..=max_total - a).map(move |b| (a, b))).collect()
}

fn max_almost_mult(m: &OpMatrix, degree: usize) -> Result<(f64, (usize, usize)), OperatorError> {
    let one = Complex64::new(1.0, 0.0);
    let mut worst = (0.0, (0, 0));
    for (a, b) in monomial_pairs(m.trunc_order(), degree) {
        let d = almost_mult_defect(m, &TruncSeries::monomial(a, one), &TruncSeries::monomial(b, one))?;
        if d > worst.0 {
            worst = (d, (a, b));
        }
    }
    Ok(worst)
}

/// Decides whether `M` is (the truncation of) a composition operator.
///
/// Conditions, in the order they are checked: `T1 = 1`, a non-constant
/// recovered symbol, the self-map property of that symbol, multiplicativity
/// on every monomial pair inside the budget, and agreement with the matrix
/// rebuilt from the recovered symbol on its exact block.
pub fn verify_composition_structure(m: &OpMatrix, tol: f64) -> Result<Report, OperatorError> {
    if m.trunc_order() < 4 {
        return Err(OperatorError::TruncationTooSmall { n: m.trunc_order(), min: 4 });
    }
    let mut report = Report::new("composition-structure", tol)
        .input("space", m.space())
        .input("trunc_order", m.trunc_order())
        .input("matrix_kind", format!("{:?}", m.kind()).to_lowercase());

    let rec = recover_symbol(m)?;
    report.push_input("recovered_symbol", &rec.symbol);
    report.metric("te0_residual", rec.te0_residual, Bound::AtMost { limit: tol });
    report.flag("symbol_nonconstant", !rec.constant);
    let map = match &rec.map {
        Ok(map) => {
            report.flag("recovered_self_map", true);
            Some(map)
        }
        Err(why) => {
            report.fail("recovered_self_map", why.clone());
            None
        }
    };

    let degree = rec.symbol.degree().max(1);
    let (am, pair) = max_almost_mult(m, degree)?;
    report.metric("almost_mult_defect", am, Bound::AtMost { limit: tol });
    report.info("almost_mult_pairs", monomial_pairs(m.trunc_order(), degree).len() as f64);
    if am > tol {
        report.note(format!("largest multiplicativity defect at (z^{}, z^{})", pair.0, pair.1));
    }

    if let Some(map) = map {
        let rebuilt = build_matrix(map, m.space(), m.trunc_order())?;
        let block = rebuilt.exact_block();
        let diff = (0..block)
            .flat_map(|j| (0..m.dim()).map(move |i| (i, j)))
            .map(|(i, j)| (m.entry(i, j) - rebuilt.entry(i, j)).norm())
            .fold(0.0, f64::max);
        report.metric("rebuild_max_diff", diff, Bound::AtMost { limit: tol });
        report.info("rebuild_exact_cols", rebuilt.exact_cols() as f64);
    }
    if let Some(first) = report.first_failure().map(str::to_string) {
        report.note(format!("first violated condition: {first}"));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductVariant {
    /// `C_Φ C_Ψ*`
    PhiPsiStar,
    /// `C_Φ* C_Ψ`
    PhiStarPsi,
}

impl ProductVariant {
    pub fn label(&self) -> &'static str {
        match self {
            Self::PhiPsiStar => "phi-psi-star",
            Self::PhiStarPsi => "phi-star-psi",
        }
    }
}

impl std::str::FromStr for ProductVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phi-psi-star" | "PhiPsiStar" => Ok(Self::PhiPsiStar),
            "phi-star-psi" | "PhiStarPsi" => Ok(Self::PhiStarPsi),
            other => Err(format!("unknown product variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductOptions {
    /// A defect below this counts as zero.
    pub zero_tol: f64,
    /// Norm estimates above `1 + norm_tol` rule out an isometry.
    pub norm_tol: f64,
    pub norm: NormOptions,
}

impl Default for ProductOptions {
    fn default() -> Self {
        Self { zero_tol: 1e-10, norm_tol: 1e-6, norm: NormOptions::default() }
    }
}

/// Builds the product matrix for a variant.
pub fn product_matrix(
    phi: &SelfMap,
    psi: &SelfMap,
    space: SpaceSpec,
    n: usize,
    variant: ProductVariant,
) -> Result<OpMatrix, OperatorError> {
    let a = build_matrix(phi, space, n)?;
    let b = build_matrix(psi, space, n)?;
    match variant {
        ProductVariant::PhiPsiStar => compose_ops(&a, &adjoint(&b)),
        ProductVariant::PhiStarPsi => compose_ops(&adjoint(&a), &b),
    }
}

/// Tests "the product is an isometry iff both symbols are rotations" on one pair.
///
/// The verdict is pass when the numerical isometry decision agrees with the
/// rotation classification of the two symbols. When the exact block is too
/// small for a Gram defect, a norm estimate above one still certifies that
/// the product is not an isometry.
pub fn check_product_isometry(
    phi: &SelfMap,
    psi: &SelfMap,
    space: SpaceSpec,
    n: usize,
    variant: ProductVariant,
    opts: &ProductOptions,
) -> Result<Report, OperatorError> {
    let prod = product_matrix(phi, psi, space, n, variant)?;
    let mut report = Report::new("product-isometry", opts.zero_tol)
        .input("variant", variant.label())
        .input("space", space)
        .input("trunc_order", n)
        .input("phi", serde_json::to_string(&phi.descriptor()).unwrap_or_default())
        .input("psi", serde_json::to_string(&psi.descriptor()).unwrap_or_default());

    let phi_rot = phi.is_rotation(CLASSIFY_TOL);
    let psi_rot = psi.is_rotation(CLASSIFY_TOL);
    report.info("phi_is_rotation", f64::from(u8::from(phi_rot)));
    report.info("psi_is_rotation", f64::from(u8::from(psi_rot)));
    report.info("product_exact_cols", prod.exact_cols() as f64);

    let norm = op_norm_est(&prod, &opts.norm)?;
    report.info("norm_estimate", norm.value);
    if space.alpha().is_some() {
        // Upper bound on ‖C_Φ‖‖C_Ψ‖ brackets the product.
        let upper = norm_bounds(phi, space)?.upper * norm_bounds(psi, space)?.upper;
        report.info("norm_upper_bound", upper);
    }

    let isometric = match (isometry_defect(&prod), unitary_defect(&prod)) {
        (Ok(iso), Ok(uni)) => {
            report.info("isometry_defect", iso.value);
            report.info("unitary_defect", uni.value);
            report.info("defect_block", iso.block as f64);
            Some(iso.value < opts.zero_tol)
        }
        (Ok(iso), Err(e)) => {
            report.info("isometry_defect", iso.value);
            report.note(format!("unitary defect unavailable: {e}"));
            Some(iso.value < opts.zero_tol)
        }
        (Err(e), _) => {
            report.note(format!("Gram defect refused: {e}"));
            if norm.value > 1.0 + opts.norm_tol {
                report.note("norm estimate exceeds 1, so the product is not an isometry");
                Some(false)
            } else {
                None
            }
        }
    };
    match isometric {
        Some(iso) => {
            report.info("isometric", f64::from(u8::from(iso)));
            report.flag("iff_consistent", iso == (phi_rot && psi_rot));
        }
        None => report.fail("iff_consistent", "truncation too coarse to decide isometry"),
    }
    Ok(report)
}
