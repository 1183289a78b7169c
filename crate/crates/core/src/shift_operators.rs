//! Finite sections of module operators.
//!
//! A [`TruncatedOperator`] is a sparse matrix on a [`Layout`] (one or more
//! graded blocks) together with its *exact window*: per block, the largest
//! degree `W_c` such that every column of degree ≤ `W_c` agrees with the
//! corresponding column of the infinite operator, and likewise `W_r` for
//! rows. An entry whose row or column is inside the window is exact. The
//! *interior degree* is `min(W_c, W_r)`; norms and traces offered to
//! experiments are taken over coordinates of degree ≤ interior degree.
//!
//! A coordinate shift truncated at `N` has `W_c = N − 1` (the degree-`N`
//! columns lose their image) and `W_r = N`. Products propagate windows using
//! the operators' homogeneous degree displacement.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use nalgebra_sparse::{CooMatrix, CscMatrix};
use thiserror::Error;

use crate::graded_basis::GradedBasis;
use nalgebra::{ComplexField, RealField};
use num_traits::Zero;

use crate::scalar::{Real, Scalar};
use crate::submodule_builder::SubmoduleBasis;
use crate::weight_models::WeightSet;

/// Invariance tolerance, relative to the operator norm.
pub const INVARIANCE_TOLERANCE: f64 = 1e-10;
/// Tolerance on `P² = P` and `P* = P`.
pub const PROJECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("variable index {var} out of range for {num_vars} variables")]
    VariableOutOfRange { var: usize, num_vars: usize },
    #[error("operators live on different layouts")]
    LayoutMismatch,
    #[error("matrix is {rows}x{cols}, layout has dimension {dim}")]
    ShapeMismatch { rows: usize, cols: usize, dim: usize },
    #[error("not an orthogonal projection: idempotency residual {idempotency:e}, symmetry residual {symmetry:e}")]
    NotAProjection { idempotency: f64, symmetry: f64 },
    #[error("basis vectors are not orthonormal (residual {0:e})")]
    NotOrthonormal(f64),
    #[error("subspace is not invariant: relative residual {residual:e} exceeds {tolerance:e}")]
    NotInvariant { residual: f64, tolerance: f64 },
    #[error("direct sum of an empty list")]
    EmptyDirectSum,
}

/// Coordinate metadata shared by every operator on the same space.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    degrees: Vec<usize>,
    block_of: Vec<usize>,
    block_starts: Vec<usize>,
    block_max_degree: Vec<usize>,
    graded: Vec<bool>,
    basis: Option<Arc<GradedBasis>>,
}

impl Layout {
    /// The coordinates of a graded basis, as a single block.
    pub fn graded(basis: Arc<GradedBasis>) -> Arc<Layout> {
        let dim = basis.dimension();
        let degrees = (0..dim).map(|i| basis.degree_at(i)).collect();
        Arc::new(Layout {
            degrees,
            block_of: vec![0; dim],
            block_starts: vec![0, dim],
            block_max_degree: vec![basis.max_degree()],
            graded: vec![true],
            basis: Some(basis),
        })
    }

    /// A single block whose coordinates carry the given degrees. Pass
    /// `None` for an ungraded subspace: every coordinate then sits at the
    /// truncation degree and no window is ever exact.
    pub fn subspace(degrees: Option<Vec<usize>>, len: usize, max_degree: usize) -> Arc<Layout> {
        let graded = degrees.is_some();
        let degrees = degrees.unwrap_or_else(|| vec![max_degree; len]);
        assert_eq!(degrees.len(), len);
        Arc::new(Layout {
            block_of: vec![0; len],
            block_starts: vec![0, len],
            block_max_degree: vec![max_degree],
            graded: vec![graded],
            degrees,
            basis: None,
        })
    }

    pub fn direct_sum(parts: &[&Layout]) -> Arc<Layout> {
        let mut out = Layout {
            degrees: vec![],
            block_of: vec![],
            block_starts: vec![0],
            block_max_degree: vec![],
            graded: vec![],
            basis: None,
        };
        for part in parts {
            let offset_block = out.block_max_degree.len();
            let offset = out.degrees.len();
            out.degrees.extend_from_slice(&part.degrees);
            out.block_of.extend(part.block_of.iter().map(|b| b + offset_block));
            out.block_starts
                .extend(part.block_starts[1..].iter().map(|s| s + offset));
            out.block_max_degree.extend_from_slice(&part.block_max_degree);
            out.graded.extend_from_slice(&part.graded);
        }
        if parts.len() == 1 {
            out.basis = parts[0].basis.clone();
        }
        Arc::new(out)
    }

    pub fn dimension(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn block(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn num_blocks(&self) -> usize {
        self.block_max_degree.len()
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.block_starts[b]..self.block_starts[b + 1]
    }

    pub fn block_max_degree(&self, b: usize) -> usize {
        self.block_max_degree[b]
    }

    pub fn is_graded(&self) -> bool {
        self.graded.iter().all(|&g| g)
    }

    pub fn basis(&self) -> Option<&Arc<GradedBasis>> {
        self.basis.as_ref()
    }
}

/// Exact window of one block, see the module docs. Negative means empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactWindow {
    pub col: i64,
    pub row: i64,
}

impl ExactWindow {
    pub fn interior(&self) -> i64 {
        self.col.min(self.row)
    }

    fn min(self, other: ExactWindow) -> ExactWindow {
        ExactWindow {
            col: self.col.min(other.col),
            row: self.row.min(other.row),
        }
    }

    fn transpose(self) -> ExactWindow {
        ExactWindow {
            col: self.row,
            row: self.col,
        }
    }
}

/// Sparse finite section of a module operator.
#[derive(Clone, Debug)]
pub struct TruncatedOperator<S: Scalar> {
    layout: Arc<Layout>,
    matrix: CscMatrix<S>,
    windows: Vec<ExactWindow>,
    // exact degree displacement when the operator is homogeneous
    raise: Option<i64>,
}

fn prune<S: Scalar>(m: CscMatrix<S>) -> CscMatrix<S> {
    m.filter(|_, _, v| *v != S::zero())
}

fn conj_transpose<S: Scalar>(m: &CscMatrix<S>) -> CscMatrix<S> {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conjugate();
    }
    t
}

fn scaled<S: Scalar>(m: &CscMatrix<S>, factor: S) -> CscMatrix<S> {
    let mut out = m.clone();
    for v in out.values_mut() {
        *v *= factor;
    }
    out
}

/// Largest entry modulus.
pub(crate) fn max_abs<S: Scalar>(m: &CscMatrix<S>) -> S::RealField {
    m.values()
        .iter()
        .fold(S::RealField::zero(), |acc, v| acc.max(v.modulus()))
}

/// Largest column 2-norm: a cheap lower bound for the operator norm.
pub(crate) fn max_column_norm<S: Scalar>(m: &CscMatrix<S>) -> S::RealField {
    (0..m.ncols())
        .map(|j| {
            m.col(j)
                .values()
                .iter()
                .fold(S::RealField::zero(), |acc, v| acc + v.modulus_squared())
                .sqrt()
        })
        .fold(S::RealField::zero(), |a, b| a.max(b))
}

impl<S: Scalar> TruncatedOperator<S> {
    /// Wrap a matrix. Windows are given per block.
    pub fn new(
        layout: Arc<Layout>,
        matrix: CscMatrix<S>,
        windows: Vec<ExactWindow>,
        raise: Option<i64>,
    ) -> Result<Self, OperatorError> {
        let dim = layout.dimension();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(OperatorError::ShapeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim,
            });
        }
        assert_eq!(windows.len(), layout.num_blocks());
        Ok(TruncatedOperator {
            layout,
            matrix: prune(matrix),
            windows,
            raise,
        })
    }

    /// Dense matrix with no claim of exactness anywhere.
    pub fn from_dense(layout: Arc<Layout>, dense: &DMatrix<S>) -> Result<Self, OperatorError> {
        let blocks = layout.num_blocks();
        let coo = dense_to_coo(dense);
        Self::new(layout, CscMatrix::from(&coo), vec![ExactWindow { col: -1, row: -1 }; blocks], None)
    }

    pub fn identity(layout: Arc<Layout>) -> Self {
        let dim = layout.dimension();
        let windows = (0..layout.num_blocks())
            .map(|b| {
                let n = layout.block_max_degree(b) as i64;
                ExactWindow { col: n, row: n }
            })
            .collect();
        TruncatedOperator {
            matrix: CscMatrix::identity(dim),
            layout,
            windows,
            raise: Some(0),
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn matrix(&self) -> &CscMatrix<S> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    pub fn windows(&self) -> &[ExactWindow] {
        &self.windows
    }

    /// Interior degree of the first block; the value for single-block
    /// operators.
    pub fn interior_degree(&self) -> i64 {
        self.windows[0].interior()
    }

    pub fn degree_displacement(&self) -> Option<i64> {
        self.raise
    }

    /// Coordinates whose degree is within their block's interior degree.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.dimension())
            .filter(|&i| (self.layout.degree(i) as i64) <= self.windows[self.layout.block(i)].interior())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<S> {
        DMatrix::from(&self.matrix)
    }

    fn check_layout(&self, other: &Self) -> Result<(), OperatorError> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            Ok(())
        } else {
            Err(OperatorError::LayoutMismatch)
        }
    }

    pub fn adjoint(&self) -> Self {
        TruncatedOperator {
            layout: self.layout.clone(),
            matrix: conj_transpose(&self.matrix),
            windows: self.windows.iter().map(|w| w.transpose()).collect(),
            raise: self.raise.map(|r| -r),
        }
    }

    /// `self · rhs`.
    pub fn multiply(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_layout(rhs)?;
        let windows = self
            .windows
            .iter()
            .zip(&rhs.windows)
            .enumerate()
            .map(|(b, (a, r))| product_window(*a, self.raise, *r, rhs.raise, self.layout.block_max_degree(b)))
            .collect();
        Ok(TruncatedOperator {
            layout: self.layout.clone(),
            matrix: prune(&self.matrix * &rhs.matrix),
            windows,
            raise: self.raise.zip(rhs.raise).map(|(a, b)| a + b),
        })
    }

    fn combine(&self, rhs: &Self, matrix: CscMatrix<S>) -> Self {
        TruncatedOperator {
            layout: self.layout.clone(),
            matrix: prune(matrix),
            windows: self.windows.iter().zip(&rhs.windows).map(|(a, b)| a.min(*b)).collect(),
            raise: if self.raise == rhs.raise { self.raise } else { None },
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_layout(rhs)?;
        Ok(self.combine(rhs, &self.matrix + &rhs.matrix))
    }

    pub fn subtract(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_layout(rhs)?;
        Ok(self.combine(rhs, &self.matrix - &rhs.matrix))
    }

    pub fn scale(&self, factor: S) -> Self {
        TruncatedOperator {
            layout: self.layout.clone(),
            matrix: prune(scaled(&self.matrix, factor)),
            windows: self.windows.clone(),
            raise: self.raise,
        }
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.multiply(rhs)?.subtract(&rhs.multiply(self)?)
    }

    /// `[T*, T] = T*T − TT*`.
    pub fn self_commutator(&self) -> Self {
        self.adjoint()
            .commutator(self)
            .expect("an operator shares its own layout")
    }

    /// `P T P` on the full layout.
    pub fn compress(&self, projection: &Projection<S>) -> Result<Self, OperatorError> {
        let p = projection.as_operator();
        p.multiply(self)?.multiply(&p)
    }

    /// `V* T V` where the columns of `V` are the projection's orthonormal
    /// basis: the compression expressed in the subspace's own coordinates.
    /// No invariance is assumed or checked.
    pub fn compress_to_range(&self, projection: &Projection<S>) -> Result<Self, OperatorError> {
        if *projection.layout != *self.layout {
            return Err(OperatorError::LayoutMismatch);
        }
        let v = &projection.vectors;
        let matrix = &conj_transpose(v) * &(&self.matrix * v);
        let sub_layout = projection.subspace_layout();
        let windows = if projection.is_graded() {
            // V is exact everywhere and preserves degree
            let n = self.layout.block_max_degree(0);
            let v = ExactWindow {
                col: n as i64,
                row: n as i64,
            };
            let tv = product_window(self.windows[0], self.raise, v, Some(0), n);
            vec![product_window(v, Some(0), tv, self.raise, n)]
        } else {
            vec![ExactWindow { col: -1, row: -1 }]
        };
        let raise = if projection.is_graded() { self.raise } else { None };
        TruncatedOperator::new(sub_layout, matrix, windows, raise)
    }

    /// Relative residual `‖(I − Q) T V‖ / ‖T‖` over basis vectors whose image
    /// is exact (degree ≤ the column window; all vectors when ungraded).
    pub fn invariance_residual(&self, projection: &Projection<S>) -> Result<S::RealField, OperatorError> {
        if *projection.layout != *self.layout {
            return Err(OperatorError::LayoutMismatch);
        }
        let v = &projection.vectors;
        let tv = &self.matrix * v;
        let coeffs = &conj_transpose(v) * &tv;
        let residual = &tv - &(v * &coeffs);
        let keep: Vec<bool> = match &projection.vector_degrees {
            Some(degrees) => degrees
                .iter()
                .map(|&d| (d as i64) <= self.windows[0].col)
                .collect(),
            None => vec![true; v.ncols()],
        };
        let windowed = residual.filter(|_, j, _| keep[j]);
        let scale = max_column_norm(&self.matrix);
        let r = max_column_norm(&windowed);
        Ok(if scale > S::RealField::zero() { r / scale } else { r })
    }

    /// `T|_V` for an invariant subspace `V`, in the subspace's orthonormal
    /// coordinates, together with the invariance residual.
    pub fn restrict_to_invariant(&self, projection: &Projection<S>) -> Result<Restriction<S>, OperatorError> {
        let residual = self.invariance_residual(projection)?;
        let tol = <S::RealField as Real>::of(INVARIANCE_TOLERANCE);
        if !(residual <= tol) {
            return Err(OperatorError::NotInvariant {
                residual: residual.to_f64_lossy(),
                tolerance: INVARIANCE_TOLERANCE,
            });
        }
        Ok(Restriction {
            operator: self.compress_to_range(projection)?,
            residual,
        })
    }

    /// Restriction to a submodule.
    pub fn restrict_to_submodule(&self, submodule: &SubmoduleBasis<S>) -> Result<Restriction<S>, OperatorError> {
        self.restrict_to_invariant(&submodule.projection(crate::submodule_builder::Side::Submodule))
    }

    /// Split the self-commutator of `T|_V` as
    /// `Q[T*,T]Q + Q T Q⊥ T* Q` and check the identity.
    pub fn lemma1_decomposition(&self, projection: &Projection<S>) -> Result<BlockDecomposition<S>, OperatorError> {
        let invariance = self.invariance_residual(projection)?;
        let tol = <S::RealField as Real>::of(INVARIANCE_TOLERANCE);
        if !(invariance <= tol) {
            return Err(OperatorError::NotInvariant {
                residual: invariance.to_f64_lossy(),
                tolerance: INVARIANCE_TOLERANCE,
            });
        }
        let q = projection.as_operator();
        let q_perp = TruncatedOperator::identity(self.layout.clone()).subtract(&q)?;
        let t_star = self.adjoint();

        let diagonal_part = q.multiply(&self.self_commutator())?.multiply(&q)?;
        let corner_part = q
            .multiply(self)?
            .multiply(&q_perp)?
            .multiply(&t_star)?
            .multiply(&q)?;

        let restricted = self.compress_to_range(projection)?.self_commutator();
        let sum = diagonal_part.add(&corner_part)?.compress_to_range(projection)?;
        let diff = sum.subtract(&restricted)?;
        let interior = diff.interior_indices();
        let in_window: Vec<bool> = {
            let mut mask = vec![false; diff.dimension()];
            for i in interior {
                mask[i] = true;
            }
            mask
        };
        let windowed = diff.matrix.filter(|i, j, _| in_window[i] && in_window[j]);
        let scale = max_column_norm(&self.matrix).powi(2);
        let raw = max_abs(&windowed);
        let identity_residual = if scale > S::RealField::zero() { raw / scale } else { raw };

        Ok(BlockDecomposition {
            diagonal_part,
            corner_part,
            projection: projection.clone(),
            restricted_commutator: restricted,
            identity_residual,
            invariance_residual: invariance,
        })
    }

    /// Coordinate-list text: one `row col value` line per stored entry,
    /// column-major.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {}", self.dimension(), self.dimension(), self.matrix.nnz());
        for (j, col) in (0..self.matrix.ncols()).map(|j| (j, self.matrix.col(j))) {
            for (i, v) in col.row_indices().iter().zip(col.values()) {
                let _ = writeln!(out, "{i} {j} {v}");
            }
        }
        out
    }
}

impl<R: Real> TruncatedOperator<R> {
    /// The same operator with complex entries.
    pub fn to_complex(&self) -> TruncatedOperator<Complex<R>> {
        let (offsets, indices, values) = self.matrix.csc_data();
        let values: Vec<Complex<R>> = values.iter().map(|&v| Complex::new(v, R::zero())).collect();
        let matrix = CscMatrix::try_from_csc_data(
            self.matrix.nrows(),
            self.matrix.ncols(),
            offsets.to_vec(),
            indices.to_vec(),
            values,
        )
        .expect("same sparsity pattern");
        TruncatedOperator {
            layout: self.layout.clone(),
            matrix,
            windows: self.windows.clone(),
            raise: self.raise,
        }
    }
}

fn product_window(
    a: ExactWindow,
    a_raise: Option<i64>,
    b: ExactWindow,
    b_raise: Option<i64>,
    max_degree: usize,
) -> ExactWindow {
    let full = max_degree as i64;
    // Column j of AB is exact when column j of B is exact and B e_j lands in
    // degrees where A's columns are exact; rows dually.
    let col = match b_raise {
        Some(r) => b.col.min(a.col - r),
        None if a.col >= full => b.col,
        None => -1,
    };
    let row = match a_raise {
        Some(r) => a.row.min(b.row + r),
        None if b.row >= full => a.row,
        None => -1,
    };
    ExactWindow {
        col: col.min(full),
        row: row.min(full),
    }
}

fn dense_to_coo<S: Scalar>(dense: &DMatrix<S>) -> CooMatrix<S> {
    let mut coo = CooMatrix::new(dense.nrows(), dense.ncols());
    for j in 0..dense.ncols() {
        for i in 0..dense.nrows() {
            let v = dense[(i, j)];
            if v != S::zero() {
                coo.push(i, j, v);
            }
        }
    }
    coo
}

/// Truncated coordinate multiplier `Z_var` (0-based) on the weight set's basis.
pub fn coordinate_shift<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    var: usize,
) -> Result<TruncatedOperator<S>, OperatorError> {
    let basis = weights.basis();
    let m = basis.num_vars();
    if var >= m {
        return Err(OperatorError::VariableOutOfRange { var, num_vars: m });
    }
    let k = basis.multiplicity();
    let dim = basis.dimension();
    let mut coo = CooMatrix::new(dim, dim);
    for (pos, alpha) in basis.monomials().iter().enumerate() {
        let target = alpha.raised(var);
        let Some(to) = basis.monomial_position(&target) else {
            continue;
        };
        let w = weights.ln_lambda_at(to) - weights.ln_lambda_at(pos);
        let w = S::from_real(w.exp());
        for c in 0..k {
            coo.push(to * k + c, pos * k + c, w);
        }
    }
    let n = basis.max_degree() as i64;
    TruncatedOperator::new(
        Layout::graded(basis.clone()),
        CscMatrix::from(&coo),
        vec![ExactWindow { col: n - 1, row: n }],
        Some(1),
    )
}

/// `[Z_i*, Z_j]`.
pub fn cross_commutator<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    i: usize,
    j: usize,
) -> Result<TruncatedOperator<S>, OperatorError> {
    let zi = coordinate_shift::<S>(weights, i)?;
    let zj = if i == j { zi.clone() } else { coordinate_shift::<S>(weights, j)? };
    zi.adjoint().commutator(&zj)
}

/// Block-diagonal sum on the concatenated layout.
pub fn direct_sum<S: Scalar>(operators: &[TruncatedOperator<S>]) -> Result<TruncatedOperator<S>, OperatorError> {
    let first = operators.first().ok_or(OperatorError::EmptyDirectSum)?;
    if operators.len() == 1 {
        return Ok(first.clone());
    }
    let layouts: Vec<&Layout> = operators.iter().map(|o| o.layout.as_ref()).collect();
    let layout = Layout::direct_sum(&layouts);
    let dim = layout.dimension();
    let mut coo = CooMatrix::new(dim, dim);
    let mut offset = 0;
    for op in operators {
        for j in 0..op.matrix.ncols() {
            let col = op.matrix.col(j);
            for (i, v) in col.row_indices().iter().zip(col.values()) {
                coo.push(offset + i, offset + j, *v);
            }
        }
        offset += op.dimension();
    }
    let windows = operators.iter().flat_map(|o| o.windows.iter().copied()).collect();
    let raise = operators
        .iter()
        .map(|o| o.raise)
        .reduce(|a, b| if a == b { a } else { None })
        .flatten();
    TruncatedOperator::new(layout, CscMatrix::from(&coo), windows, raise)
}

/// Orthogonal projection, stored through an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct Projection<S: Scalar> {
    layout: Arc<Layout>,
    vectors: CscMatrix<S>,
    vector_degrees: Option<Vec<usize>>,
}

impl<S: Scalar> Projection<S> {
    /// From orthonormal columns (`dim × r`). `degrees` gives the degree of
    /// each homogeneous basis vector; `None` for an ungraded range.
    pub fn from_orthonormal(
        layout: Arc<Layout>,
        vectors: CscMatrix<S>,
        degrees: Option<Vec<usize>>,
    ) -> Result<Self, OperatorError> {
        if vectors.nrows() != layout.dimension() {
            return Err(OperatorError::ShapeMismatch {
                rows: vectors.nrows(),
                cols: vectors.ncols(),
                dim: layout.dimension(),
            });
        }
        let gram = &conj_transpose(&vectors) * &vectors;
        let residual = max_abs(&(&gram - &CscMatrix::identity(vectors.ncols())));
        if residual.to_f64_lossy() > PROJECTION_TOLERANCE {
            return Err(OperatorError::NotOrthonormal(residual.to_f64_lossy()));
        }
        Ok(Projection {
            layout,
            vectors: prune(vectors),
            vector_degrees: degrees,
        })
    }

    /// From a projection matrix, validated to be idempotent and self-adjoint
    /// to [`PROJECTION_TOLERANCE`].
    pub fn from_matrix(layout: Arc<Layout>, p: &CscMatrix<S>) -> Result<Self, OperatorError> {
        let idempotency = max_abs(&(&(p * p) - p)).to_f64_lossy();
        let symmetry = max_abs(&(p - &conj_transpose(p))).to_f64_lossy();
        if idempotency > PROJECTION_TOLERANCE || symmetry > PROJECTION_TOLERANCE {
            return Err(OperatorError::NotAProjection { idempotency, symmetry });
        }
        let dense = DMatrix::from(p);
        let n = dense.nrows();
        let eig = dense.symmetric_eigen();
        let half = <S::RealField as Real>::of(0.5);
        let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > half).collect();
        let cols: Vec<_> = keep.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        let v = if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        Self::from_orthonormal(layout, CscMatrix::from(&dense_to_coo(&v)), None)
    }

    pub fn identity(layout: Arc<Layout>) -> Self {
        let dim = layout.dimension();
        let degrees = layout.is_graded().then(|| layout.degrees().to_vec());
        Projection {
            vectors: CscMatrix::identity(dim),
            layout,
            vector_degrees: degrees,
        }
    }

    pub fn zero(layout: Arc<Layout>) -> Self {
        let dim = layout.dimension();
        let degrees = layout.is_graded().then(Vec::new);
        Projection {
            vectors: CscMatrix::zeros(dim, 0),
            layout,
            vector_degrees: degrees,
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &CscMatrix<S> {
        &self.vectors
    }

    pub fn vector_degrees(&self) -> Option<&[usize]> {
        self.vector_degrees.as_deref()
    }

    pub fn is_graded(&self) -> bool {
        self.vector_degrees.is_some() && self.layout.is_graded()
    }

    /// `P = V V*`.
    pub fn matrix(&self) -> CscMatrix<S> {
        prune(&self.vectors * &conj_transpose(&self.vectors))
    }

    /// `P` as an operator. A graded projection commutes with the degree
    /// grading and is exact everywhere.
    pub fn as_operator(&self) -> TruncatedOperator<S> {
        let windows = (0..self.layout.num_blocks())
            .map(|b| {
                if self.is_graded() {
                    let n = self.layout.block_max_degree(b) as i64;
                    ExactWindow { col: n, row: n }
                } else {
                    ExactWindow { col: -1, row: -1 }
                }
            })
            .collect();
        TruncatedOperator {
            layout: self.layout.clone(),
            matrix: self.matrix(),
            windows,
            raise: if self.is_graded() { Some(0) } else { None },
        }
    }

    fn subspace_layout(&self) -> Arc<Layout> {
        let max_degree = self.layout.block_max_degree(0);
        let degrees = if self.is_graded() { self.vector_degrees.clone() } else { None };
        Layout::subspace(degrees, self.rank(), max_degree)
    }
}

#[derive(Clone, Debug)]
pub struct Restriction<S: Scalar> {
    pub operator: TruncatedOperator<S>,
    pub residual: S::RealField,
}

/// The two summands of the self-commutator of a restriction.
#[derive(Clone, Debug)]
pub struct BlockDecomposition<S: Scalar> {
    /// `Q[T*,T]Q`.
    pub diagonal_part: TruncatedOperator<S>,
    /// `Q T Q⊥ T* Q`, positive semidefinite.
    pub corner_part: TruncatedOperator<S>,
    pub projection: Projection<S>,
    /// `[(T|_V)*, T|_V]` in the subspace coordinates.
    pub restricted_commutator: TruncatedOperator<S>,
    /// Max entry of `V*(diagonal + corner)V − restricted`, interior window,
    /// relative to `‖T‖²`.
    pub identity_residual: S::RealField,
    pub invariance_residual: S::RealField,
}
