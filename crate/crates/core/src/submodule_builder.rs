//! Submodules of `M_Λ ⊗ C^k` and their orthocomplements.
//!
//! Homogeneous and monomial generators give graded submodules, built degree
//! by degree as `S ∩ P_n`. Point evaluations and non-homogeneous generators
//! give an ungraded block over the whole truncation.
//!
//! All vectors are stored in the orthonormal coordinates `e_β = z^β / λ_β`,
//! so the polynomial `Σ c_β z^β` has coordinates `c_β λ_β`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix};
use thiserror::Error;

use crate::graded_basis::{BasisError, GradedBasis, MultiIndex};
use nalgebra::{ComplexField, RealField};
use num_traits::Zero;

use crate::scalar::{Real, Scalar};
use crate::shift_operators::{coordinate_shift, Layout, OperatorError, Projection};
use crate::weight_models::WeightSet;

/// Relative rank cut-off used when orthonormalizing spanning sets.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SubmoduleError {
    #[error("no generators given")]
    NoGenerators,
    #[error("generator {index} is not homogeneous")]
    NonHomogeneous { index: usize },
    #[error("generator has no nonzero coefficient")]
    ZeroGenerator,
    #[error("generator repeats the term {index} (component {component})")]
    DuplicateTerm { index: MultiIndex, component: usize },
    #[error("generator {index}: {source}")]
    OutsideBasis {
        index: usize,
        #[source]
        source: BasisError,
    },
    #[error("point {index} has {got} coordinates, expected {expected}")]
    PointArity { index: usize, got: usize, expected: usize },
    #[error("point {index} lies outside the open unit ball (|z|² = {norm_sq})")]
    PointOutsideBall { index: usize, norm_sq: f64 },
    #[error("kernel vectors are numerically dependent (condition number {condition:e})")]
    NearlyDependent { condition: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// One term `coefficient · z^index ⊗ e_component`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<S> {
    pub index: MultiIndex,
    pub component: usize,
    pub coefficient: S,
}

/// A vector-valued polynomial `Σ c · z^α ⊗ e_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialGenerator<S> {
    terms: Vec<Term<S>>,
}

impl<S: Scalar> PolynomialGenerator<S> {
    pub fn new(terms: Vec<Term<S>>) -> Result<Self, SubmoduleError> {
        for (i, t) in terms.iter().enumerate() {
            if terms[..i]
                .iter()
                .any(|u| u.index == t.index && u.component == t.component)
            {
                return Err(SubmoduleError::DuplicateTerm {
                    index: t.index.clone(),
                    component: t.component,
                });
            }
        }
        if terms.iter().all(|t| t.coefficient == S::zero()) {
            return Err(SubmoduleError::ZeroGenerator);
        }
        Ok(PolynomialGenerator { terms })
    }

    /// The monomial `z^index ⊗ e_component`.
    pub fn monomial(index: MultiIndex, component: usize) -> Self {
        PolynomialGenerator {
            terms: vec![Term {
                index,
                component,
                coefficient: S::one(),
            }],
        }
    }

    pub fn terms(&self) -> &[Term<S>] {
        &self.terms
    }

    fn nonzero_terms(&self) -> impl Iterator<Item = &Term<S>> {
        self.terms.iter().filter(|t| t.coefficient != S::zero())
    }

    /// Common degree of all nonzero terms, or `None` if they differ.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degrees = self.nonzero_terms().map(|t| t.index.degree());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn max_degree(&self) -> usize {
        self.nonzero_terms().map(|t| t.index.degree()).max().unwrap_or(0)
    }

    /// Single-term generators.
    pub fn as_monomial(&self) -> Option<(&MultiIndex, usize)> {
        let mut it = self.nonzero_terms();
        let t = it.next()?;
        it.next().is_none().then_some((&t.index, t.component))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Submodule,
    Complement,
}

#[derive(Clone, Debug)]
enum Blocks<S: Scalar> {
    /// Per degree `n`, orthonormal columns in the coordinates of the slice
    /// `P_n ⊗ C^k`.
    Graded {
        submodule: Vec<DMatrix<S>>,
        complement: Vec<DMatrix<S>>,
    },
    /// Orthonormal columns over the whole truncation.
    Ungraded {
        submodule: DMatrix<S>,
        complement: DMatrix<S>,
    },
}

/// Orthonormal bases of `S` and `S⊥` inside the truncation.
#[derive(Clone, Debug)]
pub struct SubmoduleBasis<S: Scalar> {
    basis: Arc<GradedBasis>,
    blocks: Blocks<S>,
    rank_tolerance: f64,
}

impl<S: Scalar> SubmoduleBasis<S> {
    pub fn basis(&self) -> &Arc<GradedBasis> {
        &self.basis
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn is_graded(&self) -> bool {
        matches!(self.blocks, Blocks::Graded { .. })
    }

    /// `(dim S ∩ P_n, dim S⊥ ∩ P_n)`; `None` when ungraded.
    pub fn dimensions_in_degree(&self, n: usize) -> Option<(usize, usize)> {
        match &self.blocks {
            Blocks::Graded { submodule, complement } => Some((submodule.get(n)?.ncols(), complement.get(n)?.ncols())),
            Blocks::Ungraded { .. } => None,
        }
    }

    pub fn dimension(&self, side: Side) -> usize {
        match (&self.blocks, side) {
            (Blocks::Graded { submodule, .. }, Side::Submodule) => submodule.iter().map(|b| b.ncols()).sum(),
            (Blocks::Graded { complement, .. }, Side::Complement) => complement.iter().map(|b| b.ncols()).sum(),
            (Blocks::Ungraded { submodule, .. }, Side::Submodule) => submodule.ncols(),
            (Blocks::Ungraded { complement, .. }, Side::Complement) => complement.ncols(),
        }
    }

    /// Orthogonal projection onto `S` or `S⊥`.
    pub fn projection(&self, side: Side) -> Projection<S> {
        let layout = Layout::graded(self.basis.clone());
        let dim = self.basis.dimension();
        match &self.blocks {
            Blocks::Graded { submodule, complement } => {
                let blocks = if side == Side::Submodule { submodule } else { complement };
                let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
                let mut coo = CooMatrix::new(dim, cols);
                let mut degrees = Vec::with_capacity(cols);
                let mut col = 0;
                for (n, block) in blocks.iter().enumerate() {
                    let start = self.basis.degree_slice(n).expect("degree within basis").start;
                    for j in 0..block.ncols() {
                        for i in 0..block.nrows() {
                            let v = block[(i, j)];
                            if v != S::zero() {
                                coo.push(start + i, col, v);
                            }
                        }
                        degrees.push(n);
                        col += 1;
                    }
                }
                Projection::from_orthonormal(layout, CscMatrix::from(&coo), Some(degrees))
                    .expect("blocks are orthonormal by construction")
            }
            Blocks::Ungraded { submodule, complement } => {
                let block = if side == Side::Submodule { submodule } else { complement };
                let mut coo = CooMatrix::new(dim, block.ncols());
                for j in 0..block.ncols() {
                    for i in 0..block.nrows() {
                        let v = block[(i, j)];
                        if v != S::zero() {
                            coo.push(i, j, v);
                        }
                    }
                }
                Projection::from_orthonormal(layout, CscMatrix::from(&coo), None)
                    .expect("blocks are orthonormal by construction")
            }
        }
    }

    /// Largest relative residual of `Z_i(S) ⊆ S` over all variables, on each
    /// shift's exact window.
    pub fn module_residual(&self, weights: &WeightSet<S::RealField>) -> Result<S::RealField, SubmoduleError> {
        let p = self.projection(Side::Submodule);
        let mut worst = S::RealField::zero();
        for var in 0..self.basis.num_vars() {
            let z = coordinate_shift::<S>(weights, var)?;
            worst = worst.max(z.invariance_residual(&p)?);
        }
        Ok(worst)
    }
}

/// Orthonormal basis of the column span, by thin SVD with relative rank
/// cut-off. Returns the basis and the ratio of extreme kept singular values.
fn orthonormal_range<S: Scalar>(a: &DMatrix<S>, rel_tol: f64) -> (DMatrix<S>, f64) {
    if a.ncols() == 0 || a.nrows() == 0 {
        return (DMatrix::zeros(a.nrows(), 0), 1.0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().fold(S::RealField::zero(), |m, &s| m.max(s));
    if smax == S::RealField::zero() {
        return (DMatrix::zeros(a.nrows(), 0), 1.0);
    }
    let cut = smax * <S::RealField as Real>::of(rel_tol);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cut).collect();
    let smin = keep.iter().map(|&i| sigma[i]).fold(smax, |m, s| m.min(s));
    let cols: Vec<DVector<S>> = keep.iter().map(|&i| u.column(i).into_owned()).collect();
    (DMatrix::from_columns(&cols), (smax / smin).to_f64_lossy())
}

/// Orthonormal basis of the orthocomplement of orthonormal columns `q`.
fn orthonormal_complement<S: Scalar>(q: &DMatrix<S>) -> DMatrix<S> {
    let n = q.nrows();
    if q.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    if q.ncols() >= n {
        return DMatrix::zeros(n, 0);
    }
    let residual = DMatrix::<S>::identity(n, n) - q * q.adjoint();
    let eig = residual.symmetric_eigen();
    let half = <S::RealField as Real>::of(0.5);
    let cols: Vec<DVector<S>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > half)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn empty_or<S: Scalar>(cols: Vec<DVector<S>>, rows: usize) -> DMatrix<S> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Submodule generated by monomials `z^α ⊗ e_c`: spanned by every
/// `z^β ⊗ e_c` with `β ≥ α` componentwise.
pub fn monomial_submodule<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    generators: &[(MultiIndex, usize)],
) -> Result<SubmoduleBasis<S>, SubmoduleError> {
    if generators.is_empty() {
        return Err(SubmoduleError::NoGenerators);
    }
    let basis = weights.basis().clone();
    for (i, (alpha, c)) in generators.iter().enumerate() {
        basis
            .index_of(alpha, *c)
            .map_err(|source| SubmoduleError::OutsideBasis { index: i, source })?;
    }
    let mut submodule = Vec::with_capacity(basis.max_degree() + 1);
    let mut complement = Vec::with_capacity(basis.max_degree() + 1);
    for n in 0..=basis.max_degree() {
        let slice = basis.degree_slice(n).expect("in range");
        let len = slice.len();
        let (mut inside, mut outside) = (Vec::new(), Vec::new());
        for (local, ordinal) in slice.enumerate() {
            let (beta, c) = basis.element_at(ordinal).expect("in range");
            let hit = generators.iter().any(|(a, gc)| *gc == c && beta.dominates(a));
            let mut e = DVector::zeros(len);
            e[local] = S::one();
            if hit {
                inside.push(e);
            } else {
                outside.push(e);
            }
        }
        submodule.push(empty_or(inside, len));
        complement.push(empty_or(outside, len));
    }
    Ok(SubmoduleBasis {
        basis,
        blocks: Blocks::Graded { submodule, complement },
        rank_tolerance: DEFAULT_RANK_TOLERANCE,
    })
}

// Orthonormal coordinates of z^shift · g, scaled so the largest-weight term
// has magnitude |coefficient|.
fn shifted_generator_vector<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    generator: &PolynomialGenerator<S>,
    shift: &MultiIndex,
    offset: usize,
    len: usize,
) -> DVector<S> {
    let basis = weights.basis();
    let placed: Vec<(usize, S, S::RealField)> = generator
        .nonzero_terms()
        .filter_map(|t| {
            let target = t.index.plus(shift);
            let ln = weights.ln_lambda(&target)?;
            let ordinal = basis.index_of(&target, t.component).ok()?;
            Some((ordinal - offset, t.coefficient, ln))
        })
        .collect();
    let reference = placed
        .iter()
        .map(|p| p.2)
        .fold(None, |m: Option<S::RealField>, l| Some(m.map_or(l, |m| m.max(l))))
        .unwrap_or_else(S::RealField::zero);
    let mut v = DVector::zeros(len);
    for (i, c, ln) in placed {
        v[i] += c * S::from_real((ln - reference).exp());
    }
    v
}

/// Graded submodule generated by homogeneous vector polynomials.
pub fn homogeneous_submodule<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    generators: &[PolynomialGenerator<S>],
) -> Result<SubmoduleBasis<S>, SubmoduleError> {
    homogeneous_submodule_with_tolerance(weights, generators, DEFAULT_RANK_TOLERANCE)
}

pub fn homogeneous_submodule_with_tolerance<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    generators: &[PolynomialGenerator<S>],
    rank_tolerance: f64,
) -> Result<SubmoduleBasis<S>, SubmoduleError> {
    if generators.is_empty() {
        return Err(SubmoduleError::NoGenerators);
    }
    let basis = weights.basis().clone();
    let mut degrees = Vec::with_capacity(generators.len());
    for (i, g) in generators.iter().enumerate() {
        let d = g.homogeneous_degree().ok_or(SubmoduleError::NonHomogeneous { index: i })?;
        check_terms(&basis, g, i)?;
        degrees.push(d);
    }

    let mut submodule = Vec::with_capacity(basis.max_degree() + 1);
    let mut complement = Vec::with_capacity(basis.max_degree() + 1);
    for n in 0..=basis.max_degree() {
        let slice = basis.degree_slice(n).expect("in range");
        let mut spanning = Vec::new();
        for (g, &d) in generators.iter().zip(&degrees) {
            if d > n {
                continue;
            }
            let shifts = basis.degree_slice(n - d).expect("in range");
            for q in basis.monomials()[shifts.start / basis.multiplicity()..shifts.end / basis.multiplicity()].iter() {
                spanning.push(shifted_generator_vector(weights, g, q, slice.start, slice.len()));
            }
        }
        let a = empty_or(spanning, slice.len());
        let (q, _) = orthonormal_range(&a, rank_tolerance);
        complement.push(orthonormal_complement(&q));
        submodule.push(q);
    }
    Ok(SubmoduleBasis {
        basis,
        blocks: Blocks::Graded { submodule, complement },
        rank_tolerance,
    })
}

fn check_terms<S: Scalar>(basis: &GradedBasis, g: &PolynomialGenerator<S>, index: usize) -> Result<(), SubmoduleError> {
    for t in g.nonzero_terms() {
        basis
            .index_of(&t.index, t.component)
            .map_err(|source| SubmoduleError::OutsideBasis { index, source })?;
    }
    Ok(())
}

/// Submodule generated by arbitrary polynomials. Homogeneous generators go
/// through [`homogeneous_submodule`]; otherwise the truncation of the
/// submodule is taken to be the span of `z^q · g` with `|q| + deg g ≤ N`,
/// with no grading.
pub fn polynomial_submodule<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    generators: &[PolynomialGenerator<S>],
) -> Result<SubmoduleBasis<S>, SubmoduleError> {
    if generators.is_empty() {
        return Err(SubmoduleError::NoGenerators);
    }
    if generators.iter().all(|g| g.homogeneous_degree().is_some()) {
        return homogeneous_submodule(weights, generators);
    }
    let basis = weights.basis().clone();
    let dim = basis.dimension();
    let mut spanning = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        check_terms(&basis, g, i)?;
        let d = g.max_degree();
        for q in basis.monomials().iter().take_while(|q| q.degree() + d <= basis.max_degree()) {
            spanning.push(shifted_generator_vector(weights, g, q, 0, dim));
        }
    }
    let (sub, _) = orthonormal_range(&empty_or(spanning, dim), DEFAULT_RANK_TOLERANCE);
    let complement = orthonormal_complement(&sub);
    Ok(SubmoduleBasis {
        basis,
        blocks: Blocks::Ungraded {
            submodule: sub,
            complement,
        },
        rank_tolerance: DEFAULT_RANK_TOLERANCE,
    })
}

/// Ungraded submodule whose complement is the span of the given vectors
/// (orthonormal coordinates, one column each).
pub fn from_complement_vectors<S: Scalar>(
    basis: Arc<GradedBasis>,
    vectors: &DMatrix<S>,
) -> Result<SubmoduleBasis<S>, SubmoduleError> {
    let (complement, condition) = orthonormal_range(vectors, DEFAULT_RANK_TOLERANCE);
    if complement.ncols() < vectors.ncols() {
        return Err(SubmoduleError::NearlyDependent {
            condition: f64::INFINITY,
        });
    }
    if condition > 1.0 / DEFAULT_RANK_TOLERANCE {
        return Err(SubmoduleError::NearlyDependent { condition });
    }
    let submodule = orthonormal_complement(&complement);
    Ok(SubmoduleBasis {
        basis,
        blocks: Blocks::Ungraded { submodule, complement },
        rank_tolerance: DEFAULT_RANK_TOLERANCE,
    })
}

/// Orthonormal coordinates of a generator, scaled so the largest-weight
/// term has magnitude equal to its coefficient.
pub fn generator_coordinates<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    generator: &PolynomialGenerator<S>,
) -> Result<DVector<S>, SubmoduleError> {
    let basis = weights.basis();
    check_terms(basis, generator, 0)?;
    let zero = MultiIndex::zero(basis.num_vars());
    Ok(shifted_generator_vector(weights, generator, &zero, 0, basis.dimension()))
}

/// Projection onto the span of linearly independent columns.
pub fn orthonormal_span<S: Scalar>(basis: Arc<GradedBasis>, vectors: &DMatrix<S>) -> Result<Projection<S>, SubmoduleError> {
    let (q, condition) = orthonormal_range(vectors, DEFAULT_RANK_TOLERANCE);
    if q.ncols() < vectors.ncols() {
        return Err(SubmoduleError::NearlyDependent {
            condition: f64::INFINITY,
        });
    }
    if condition > 1.0 / DEFAULT_RANK_TOLERANCE {
        return Err(SubmoduleError::NearlyDependent { condition });
    }
    let mut coo = CooMatrix::new(q.nrows(), q.ncols());
    for j in 0..q.ncols() {
        for i in 0..q.nrows() {
            if q[(i, j)] != S::zero() {
                coo.push(i, j, q[(i, j)]);
            }
        }
    }
    Ok(Projection::from_orthonormal(Layout::graded(basis), CscMatrix::from(&coo), None)?)
}

/// Truncated reproducing-kernel vector `k_z` (coordinates
/// `conj(z)^β / λ_β` on `e_β`), normalized, for component `component`.
pub fn kernel_vector<S: Scalar>(weights: &WeightSet<S::RealField>, point: &[S], component: usize) -> DVector<S> {
    let basis = weights.basis();
    let dim = basis.dimension();
    let k = basis.multiplicity();
    let zero = S::RealField::zero();
    // log-magnitude and unit phase for each monomial
    let entries: Vec<Option<(S::RealField, S)>> = basis
        .monomials()
        .iter()
        .enumerate()
        .map(|(pos, beta)| {
            let mut ln_mag = -weights.ln_lambda_at(pos);
            let mut phase = S::one();
            for (&e, &z) in beta.exponents().iter().zip(point) {
                if e == 0 {
                    continue;
                }
                let r = z.modulus();
                if r == zero {
                    return None;
                }
                ln_mag += r.ln() * <S::RealField as Real>::of(e as f64);
                phase *= (z.conjugate() * S::from_real(r.recip())).powi(e as i32);
            }
            Some((ln_mag, phase))
        })
        .collect();
    let reference = entries
        .iter()
        .flatten()
        .map(|e| e.0)
        .fold(None, |m: Option<S::RealField>, l| Some(m.map_or(l, |m| m.max(l))))
        .unwrap_or(zero);
    let mut v = DVector::zeros(dim);
    for (pos, e) in entries.into_iter().enumerate() {
        if let Some((ln_mag, phase)) = e {
            v[pos * k + component] = phase * S::from_real((ln_mag - reference).exp());
        }
    }
    let norm = v.norm();
    v.unscale(norm)
}

/// Submodule of functions vanishing at the given points: `S⊥` is the span of
/// the truncated kernel vectors (all components), `S` its orthocomplement.
pub fn span_of_point_evaluations<S: Scalar>(
    weights: &WeightSet<S::RealField>,
    points: &[Vec<S>],
) -> Result<SubmoduleBasis<S>, SubmoduleError> {
    if points.is_empty() {
        return Err(SubmoduleError::NoGenerators);
    }
    let basis = weights.basis().clone();
    let m = basis.num_vars();
    let mut cols = Vec::with_capacity(points.len() * basis.multiplicity());
    for (index, z) in points.iter().enumerate() {
        if z.len() != m {
            return Err(SubmoduleError::PointArity {
                index,
                got: z.len(),
                expected: m,
            });
        }
        let norm_sq = z.iter().map(|c| c.modulus_squared().to_f64_lossy()).sum::<f64>();
        if !(norm_sq < 1.0) {
            return Err(SubmoduleError::PointOutsideBall { index, norm_sq });
        }
        for c in 0..basis.multiplicity() {
            cols.push(kernel_vector(weights, z, c));
        }
    }
    from_complement_vectors(basis.clone(), &DMatrix::from_columns(&cols))
}
