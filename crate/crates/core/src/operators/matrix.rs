use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::OperatorError;
use crate::maps::SelfMap;
use crate::series::{self, Precision, TruncSeries};
use crate::spaces::SpaceSpec;

/// Where a matrix came from; decides which checks accept it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// Compression of a composition operator `C_Φ`.
    Composition,
    /// Adjoints and products of composition operators.
    Derived,
    /// Arbitrary entries with no operator behind them.
    Synthetic,
}

/// Truncated matrix `entry[i][j] = ⟨T e_j, e_i⟩`, `0 ≤ i, j ≤ N`, in the
/// orthonormal basis of the space.
///
/// `col_support[j] = Some(r)` records that the image `T e_j` of the full
/// (untruncated) operator lies in `span(e_0..=e_r)` with `r ≤ N`, so the
/// stored column is the whole image. `row_support[i] = Some(c)` says the
/// same about row `i` of the full operator. Columns with `None` have an
/// unrepresented tail below row `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    entries: DMatrix<Complex64>,
    space: SpaceSpec,
    kind: MatrixKind,
    symbol_degree: usize,
    col_support: Vec<Option<usize>>,
    row_support: Vec<Option<usize>>,
}

impl OpMatrix {
    /// Wraps arbitrary entries as a synthetic operator.
    pub fn synthetic(space: SpaceSpec, entries: DMatrix<Complex64>) -> Result<Self, OperatorError> {
        if entries.nrows() != entries.ncols() || entries.nrows() < 2 {
            return Err(OperatorError::NotSquare { rows: entries.nrows(), cols: entries.ncols() });
        }
        let dim = entries.nrows();
        Ok(Self {
            entries,
            space,
            kind: MatrixKind::Synthetic,
            symbol_degree: 0,
            col_support: vec![None; dim],
            row_support: vec![None; dim],
        })
    }

    /// Diagonal synthetic matrix.
    pub fn synthetic_diagonal(space: SpaceSpec, diag: &[Complex64]) -> Result<Self, OperatorError> {
        Self::synthetic(space, DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Copy with `entry[i][j]` shifted by `delta`; the result is synthetic.
    pub fn perturbed(&self, i: usize, j: usize, delta: Complex64) -> Self {
        let mut entries = self.entries.clone();
        entries[(i, j)] += delta;
        Self::synthetic(self.space, entries).expect("perturbation keeps the shape")
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn trunc_order(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn symbol_degree(&self) -> usize {
        self.symbol_degree
    }

    pub fn col_support(&self) -> &[Option<usize>] {
        &self.col_support
    }

    pub fn row_support(&self) -> &[Option<usize>] {
        &self.row_support
    }

    /// Number of leading columns that carry their full image.
    pub fn exact_block(&self) -> usize {
        self.col_support.iter().take_while(|s| s.is_some()).count()
    }

    /// Index of the last column in the exact block (0 when there is none).
    pub fn exact_cols(&self) -> usize {
        self.exact_block().saturating_sub(1)
    }

    pub fn column_is_exact(&self, j: usize) -> bool {
        self.col_support.get(j).is_some_and(|s| s.is_some())
    }

    fn sqrt_weights(&self) -> Vec<f64> {
        self.space.weights(self.trunc_order()).into_iter().map(f64::sqrt).collect()
    }

    /// Monomial coefficients → orthonormal-basis coordinates.
    pub fn to_basis(&self, f: &TruncSeries) -> DVector<Complex64> {
        let sq = self.sqrt_weights();
        DVector::from_iterator(self.dim(), (0..self.dim()).map(|i| f.coeff(i) * sq[i]))
    }

    /// Orthonormal-basis coordinates → monomial coefficients.
    pub fn from_basis(&self, v: &DVector<Complex64>, precision: Precision) -> TruncSeries {
        let sq = self.sqrt_weights();
        let coeffs = v.iter().zip(sq).map(|(c, s)| c / s).collect();
        TruncSeries::with_precision(coeffs, precision).expect("finite matrix image")
    }

    pub fn to_serializable(&self) -> MatrixFile {
        MatrixFile {
            space: self.space.to_string(),
            kind: self.kind,
            trunc_order: self.trunc_order(),
            symbol_degree: self.symbol_degree,
            exact_cols: self.exact_cols(),
            exact_block: self.exact_block(),
            col_support: self.col_support.clone(),
            entries: (0..self.dim())
                .map(|i| (0..self.dim()).map(|j| [self.entries[(i, j)].re, self.entries[(i, j)].im]).collect())
                .collect(),
        }
    }
}

/// On-disk form of an [`OpMatrix`]: row-major `[re, im]` pairs plus exactness metadata.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixFile {
    pub space: String,
    pub kind: MatrixKind,
    pub trunc_order: usize,
    pub symbol_degree: usize,
    pub exact_cols: usize,
    pub exact_block: usize,
    pub col_support: Vec<Option<usize>>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// Matrix of `C_Φ` on the first `N + 1` basis vectors.
///
/// Column `j` holds `e_j∘Φ`, which is `Φʲ` times the basis scale of `zʲ`;
/// the powers come from `pow(Φ, j, N)`.
pub fn build_matrix(m: &SelfMap, space: SpaceSpec, n: usize) -> Result<OpMatrix, OperatorError> {
    if !m.is_validated() {
        return Err(OperatorError::Unvalidated);
    }
    if n < 4 {
        return Err(OperatorError::TruncationTooSmall { n, min: 4 });
    }
    let phi = m.taylor(n)?;
    let sq: Vec<f64> = space.weights(n).into_iter().map(f64::sqrt).collect();
    let dim = n + 1;
    let mut entries = DMatrix::<Complex64>::zeros(dim, dim);
    let mut power = TruncSeries::one().resized(n);
    for j in 0..dim {
        for i in 0..dim {
            entries[(i, j)] = power.coeff(i) * (sq[i] / sq[j]);
        }
        if j < n {
            power = series::mul(&power, &phi, n);
        }
    }

    let col_support = (0..dim)
        .map(|j| {
            if phi.is_exact() {
                let d = phi.degree();
                (d * j <= n).then_some(d * j)
            } else {
                (j == 0).then_some(0)
            }
        })
        .collect();
    // Φ(0) = 0 makes Φʲ vanish to order j, so row i only meets columns j ≤ i.
    let graded = phi.coeff(0) == Complex64::default();
    let row_support = (0..dim).map(|i| graded.then_some(i)).collect();

    Ok(OpMatrix {
        entries,
        space,
        kind: MatrixKind::Composition,
        symbol_degree: m.polynomial_degree().unwrap_or(0),
        col_support,
        row_support,
    })
}

/// Conjugate transpose; column and row supports trade places.
pub fn adjoint(m: &OpMatrix) -> OpMatrix {
    OpMatrix {
        entries: m.entries.adjoint(),
        space: m.space,
        kind: match m.kind {
            MatrixKind::Synthetic => MatrixKind::Synthetic,
            _ => MatrixKind::Derived,
        },
        symbol_degree: 0,
        col_support: m.row_support.clone(),
        row_support: m.col_support.clone(),
    }
}

/// Product `A·B`, i.e. the operator "apply `B`, then `A`".
pub fn compose_ops(a: &OpMatrix, b: &OpMatrix) -> Result<OpMatrix, OperatorError> {
    if a.space != b.space || a.dim() != b.dim() {
        return Err(OperatorError::Mismatch {
            left: format!("{} N={}", a.space, a.trunc_order()),
            right: format!("{} N={}", b.space, b.trunc_order()),
        });
    }
    let entries = &a.entries * &b.entries;
    let dim = a.dim();

    // Column j of AB is complete when B e_j is complete with support r and
    // A is complete on every column it touches below r.
    let col_support = (0..dim)
        .map(|j| {
            let r = b.col_support[j]?;
            (0..=r)
                .filter(|&i| b.entries[(i, j)] != Complex64::default())
                .try_fold(0usize, |acc, i| a.col_support[i].map(|s| acc.max(s)))
        })
        .collect();
    let row_support = (0..dim)
        .map(|i| {
            let c = a.row_support[i]?;
            (0..=c)
                .filter(|&k| a.entries[(i, k)] != Complex64::default())
                .try_fold(0usize, |acc, k| b.row_support[k].map(|s| acc.max(s)))
        })
        .collect();

    let kind = match (a.kind, b.kind) {
        (MatrixKind::Synthetic, _) | (_, MatrixKind::Synthetic) => MatrixKind::Synthetic,
        (MatrixKind::Composition, MatrixKind::Composition) => MatrixKind::Composition,
        _ => MatrixKind::Derived,
    };
    let symbol_degree = if kind == MatrixKind::Composition { a.symbol_degree * b.symbol_degree } else { 0 };
    Ok(OpMatrix { entries, space: a.space, kind, symbol_degree, col_support, row_support })
}

/// Image of `f` under the matrix, returned in monomial coefficients.
pub fn apply(m: &OpMatrix, f: &TruncSeries) -> Result<TruncSeries, OperatorError> {
    let n = m.trunc_order();
    if f.degree() > n {
        return Err(OperatorError::DegreeTooHigh { degree: f.degree(), n });
    }
    let x = m.to_basis(f);
    let y = &m.entries * &x;
    let complete = (0..=f.degree()).all(|j| f.coeff(j) == Complex64::default() || m.column_is_exact(j));
    let precision = if complete && f.is_exact() { Precision::Exact } else { Precision::Truncated };
    Ok(m.from_basis(&y, precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn a2() -> SpaceSpec {
        SpaceSpec::bergman(0.0).unwrap()
    }

    fn spaces() -> Vec<SpaceSpec> {
        vec![SpaceSpec::Hardy, a2(), SpaceSpec::bergman(1.5).unwrap(), SpaceSpec::DerivativeHardy]
    }

    #[test]
    fn rotation_matrix_is_diagonal_power_table() {
        let rot = SelfMap::rotation(c(0.0, 1.0)).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)];
        for space in spaces() {
            let m = build_matrix(&rot, space, 4).unwrap();
            for i in 0..5 {
                for (j, &e) in expected.iter().enumerate() {
                    let want = if i == j { e } else { c(0.0, 0.0) };
                    assert!((m.entry(i, j) - want).norm() < 1e-15);
                }
            }
            assert_eq!(m.exact_cols(), 4);
        }
    }

    #[test]
    fn z_squared_on_bergman_column_one() {
        let m = build_matrix(&SelfMap::monomial(2), a2(), 4).unwrap();
        let want = (2.0f64 / 3.0).sqrt();
        assert!((m.entry(2, 1) - c(want, 0.0)).norm() < 1e-15);
        let nonzero: usize = m.entries().iter().filter(|e| e.norm() > 0.0).count();
        assert_eq!(nonzero, 3);
        assert_eq!(m.exact_cols(), 2);
    }

    #[test]
    fn z_cubed_on_s2_has_threes() {
        let m = build_matrix(&SelfMap::monomial(3), SpaceSpec::DerivativeHardy, 9).unwrap();
        assert_eq!(m.entry(0, 0), c(1.0, 0.0));
        for j in 1..=3 {
            for i in 0..=9 {
                let want = if i == 3 * j { 3.0 } else { 0.0 };
                assert!((m.entry(i, j) - c(want, 0.0)).norm() < 1e-14);
            }
        }
        assert_eq!(m.exact_cols(), 3);
    }

    #[test]
    fn build_refuses_bad_input() {
        assert_eq!(build_matrix(&SelfMap::monomial(2), a2(), 3), Err(OperatorError::TruncationTooSmall { n: 3, min: 4 }));
        let raw = SelfMap::polynomial(TruncSeries::z()).unwrap();
        assert_eq!(build_matrix(&raw, a2(), 8), Err(OperatorError::Unvalidated));
    }

    #[test]
    fn moebius_has_only_column_zero_exact() {
        let m = SelfMap::moebius(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        let mat = build_matrix(&m, a2(), 16).unwrap();
        assert_eq!(mat.exact_block(), 1);
        assert_eq!(mat.exact_cols(), 0);
        assert_eq!(mat.symbol_degree(), 0);
    }

    #[test]
    fn adjoint_examples() {
        let lambda = Complex64::from_polar(1.0, 0.3);
        for space in spaces() {
            let m = build_matrix(&SelfMap::rotation(lambda).unwrap(), space, 12).unwrap();
            let conj = build_matrix(&SelfMap::rotation(lambda.conj()).unwrap(), space, 12).unwrap();
            assert!((adjoint(&m).entries() - conj.entries()).iter().all(|d| d.norm() < 1e-14));
            assert_eq!(adjoint(&adjoint(&m)).entries(), m.entries());
        }
        let d = OpMatrix::synthetic_diagonal(a2(), &[c(2.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(adjoint(&d).entries(), d.entries());
    }

    #[test]
    fn compose_ops_examples() {
        let m = build_matrix(&SelfMap::monomial(2), a2(), 10).unwrap();
        let id = build_matrix(&SelfMap::rotation(c(1.0, 0.0)).unwrap(), a2(), 10).unwrap();
        assert_eq!(compose_ops(&m, &id).unwrap().entries(), m.entries());

        let l = Complex64::from_polar(1.0, 0.4);
        let mu = Complex64::from_polar(1.0, -1.1);
        let a = build_matrix(&SelfMap::rotation(l).unwrap(), a2(), 10).unwrap();
        let b = build_matrix(&SelfMap::rotation(mu).unwrap(), a2(), 10).unwrap();
        let ab = compose_ops(&a, &b).unwrap();
        let lm = build_matrix(&SelfMap::rotation(l * mu).unwrap(), a2(), 10).unwrap();
        assert!((ab.entries() - lm.entries()).iter().all(|d| d.norm() < 1e-14));

        let gram = compose_ops(&adjoint(&a), &a).unwrap();
        assert!((gram.entries() - DMatrix::<Complex64>::identity(11, 11)).iter().all(|d| d.norm() < 1e-14));
    }

    #[test]
    fn compose_ops_rejects_mismatch() {
        let a = build_matrix(&SelfMap::monomial(2), a2(), 10).unwrap();
        let b = build_matrix(&SelfMap::monomial(2), SpaceSpec::Hardy, 10).unwrap();
        let c8 = build_matrix(&SelfMap::monomial(2), a2(), 8).unwrap();
        assert!(matches!(compose_ops(&a, &b), Err(OperatorError::Mismatch { .. })));
        assert!(matches!(compose_ops(&a, &c8), Err(OperatorError::Mismatch { .. })));
    }

    #[test]
    fn apply_examples() {
        let m = build_matrix(&SelfMap::monomial(2), a2(), 8).unwrap();
        let out = apply(&m, &TruncSeries::z()).unwrap();
        assert!(out.approx_eq(&TruncSeries::monomial(2, c(1.0, 0.0)), 1e-15));
        assert!(out.is_exact());
        assert!(apply(&m, &TruncSeries::zero()).unwrap().is_zero());

        let s = build_matrix(&SelfMap::monomial(3), SpaceSpec::DerivativeHardy, 9).unwrap();
        let out = apply(&s, &TruncSeries::monomial(2, c(1.0, 0.0))).unwrap();
        assert!(out.approx_eq(&TruncSeries::monomial(6, c(1.0, 0.0)), 1e-14));
        assert!(matches!(apply(&s, &TruncSeries::monomial(10, c(1.0, 0.0))), Err(OperatorError::DegreeTooHigh { .. })));
    }

    #[test]
    fn origin_fixing_symbols_give_lower_triangular_matrices() {
        let maps = [
            SelfMap::monomial(2),
            SelfMap::real_polynomial(&[0.0, 0.45, 0.45]).unwrap(),
            SelfMap::rotation(Complex64::from_polar(1.0, PI / 3.0)).unwrap(),
        ];
        for m in &maps {
            for space in spaces() {
                let mat = build_matrix(m, space, 24).unwrap();
                for j in 0..25 {
                    for i in 0..j {
                        assert_eq!(mat.entry(i, j), c(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn product_exactness_tracks_supports() {
        let z2 = build_matrix(&SelfMap::monomial(2), a2(), 20).unwrap();
        let z3 = build_matrix(&SelfMap::monomial(3), a2(), 20).unwrap();
        // C_{z²} C_{z³} = C_{z⁶}: columns j with 6j ≤ 20.
        assert_eq!(compose_ops(&z2, &z3).unwrap().exact_cols(), 3);
        assert_eq!(compose_ops(&z2, &z3).unwrap().symbol_degree(), 6);
        // Adjoints of origin-fixing symbols are complete on every column.
        assert_eq!(adjoint(&z3).exact_cols(), 20);
        assert_eq!(compose_ops(&adjoint(&z2), &z3).unwrap().exact_cols(), 6);
        // C_{z³}* sends e_j to a multiple of e_{j/3}, so every column stays exact.
        assert_eq!(compose_ops(&z2, &adjoint(&z3)).unwrap().exact_cols(), 20);
        let moeb = build_matrix(&SelfMap::moebius(c(1.0, 0.0), c(0.5, 0.0)).unwrap(), a2(), 20).unwrap();
        assert_eq!(compose_ops(&adjoint(&moeb), &z2).unwrap().exact_block(), 0);
    }
}
