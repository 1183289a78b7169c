//! Monomial bases of `C[z_1..z_m] ⊗ C^k` truncated at total degree `N`.
//!
//! Elements are ordered degree-major, lexicographically (descending exponent
//! vectors, so `z_1` comes first) within a degree, and component-minor. With
//! this ordering every homogeneous slice `P_n ⊗ C^k` is a contiguous range.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use thiserror::Error;

/// Default ceiling on `k · C(N+m, m)`.
pub const DEFAULT_DIMENSION_CAP: usize = 50_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BasisError {
    #[error("number of variables must be at least 1, got {0}")]
    NoVariables(usize),
    #[error("multiplicity must be at least 1, got {0}")]
    NoMultiplicity(usize),
    #[error("basis dimension {dimension} exceeds the cap {cap}")]
    TooLarge { dimension: usize, cap: usize },
    #[error("multi-index {index} has {got} variables, basis has {expected}")]
    ArityMismatch {
        index: MultiIndex,
        got: usize,
        expected: usize,
    },
    #[error("multi-index {index} has degree {degree} above the truncation degree {max}")]
    DegreeTooHigh {
        index: MultiIndex,
        degree: usize,
        max: usize,
    },
    #[error("component {component} out of range for multiplicity {multiplicity}")]
    ComponentOutOfRange {
        component: usize,
        multiplicity: usize,
    },
    #[error("ordinal {index} out of range for dimension {dimension}")]
    OrdinalOutOfRange { index: usize, dimension: usize },
    #[error("degree {degree} out of range 0..={max}")]
    SliceOutOfRange { degree: usize, max: usize },
}

/// Exponent vector `α = (α_1, .., α_m)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(num_vars: usize) -> Self {
        MultiIndex(vec![0; num_vars])
    }

    pub fn unit(num_vars: usize, var: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// `α + e_var`.
    pub fn raised(&self, var: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[var] += 1;
        MultiIndex(e)
    }

    /// `α − e_var`, if it exists.
    pub fn lowered(&self, var: usize) -> Option<MultiIndex> {
        if self.0[var] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[var] -= 1;
        Some(MultiIndex(e))
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self ≥ other`, i.e. `z^other` divides `z^self`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// `α! = Π α_i!`, as a natural logarithm.
    pub fn ln_factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| statrs::function::factorial::ln_factorial(a as u64))
            .sum()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// `C(n, r)` by the multiplicative formula; exact for everything this crate
/// can allocate.
pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of monomials of degree exactly `n` in `m` variables.
pub fn homogeneous_count(m: usize, n: usize) -> usize {
    binomial(n + m - 1, m - 1)
}

/// Immutable graded basis. Cheap to share behind an `Arc`.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    num_vars: usize,
    max_degree: usize,
    multiplicity: usize,
    monomials: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    // monomial offset of each degree, plus a final sentinel
    slice_starts: Vec<usize>,
}

impl PartialEq for GradedBasis {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars
            && self.max_degree == other.max_degree
            && self.multiplicity == other.multiplicity
    }
}

impl GradedBasis {
    pub fn enumerate(num_vars: usize, max_degree: usize, multiplicity: usize) -> Result<Self, BasisError> {
        Self::enumerate_with_cap(num_vars, max_degree, multiplicity, DEFAULT_DIMENSION_CAP)
    }

    pub fn enumerate_with_cap(
        num_vars: usize,
        max_degree: usize,
        multiplicity: usize,
        cap: usize,
    ) -> Result<Self, BasisError> {
        if num_vars == 0 {
            return Err(BasisError::NoVariables(num_vars));
        }
        if multiplicity == 0 {
            return Err(BasisError::NoMultiplicity(multiplicity));
        }
        let dimension = binomial(max_degree + num_vars, num_vars).saturating_mul(multiplicity);
        if dimension > cap {
            return Err(BasisError::TooLarge { dimension, cap });
        }

        let mut monomials = Vec::with_capacity(dimension / multiplicity);
        let mut slice_starts = Vec::with_capacity(max_degree + 2);
        let mut scratch = vec![0u32; num_vars];
        for n in 0..=max_degree {
            slice_starts.push(monomials.len());
            push_compositions(n as u32, 0, &mut scratch, &mut monomials);
        }
        slice_starts.push(monomials.len());

        let lookup = monomials.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Ok(GradedBasis {
            num_vars,
            max_degree,
            multiplicity,
            monomials,
            lookup,
            slice_starts,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn dimension(&self) -> usize {
        self.monomials.len() * self.multiplicity
    }

    /// Distinct monomials, in basis order (without the `C^k` factor).
    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    /// Position of `z^α` among [`monomials`](Self::monomials), if present.
    pub fn monomial_position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn index_of(&self, alpha: &MultiIndex, component: usize) -> Result<usize, BasisError> {
        if alpha.num_vars() != self.num_vars {
            return Err(BasisError::ArityMismatch {
                index: alpha.clone(),
                got: alpha.num_vars(),
                expected: self.num_vars,
            });
        }
        if component >= self.multiplicity {
            return Err(BasisError::ComponentOutOfRange {
                component,
                multiplicity: self.multiplicity,
            });
        }
        match self.lookup.get(alpha) {
            Some(&pos) => Ok(pos * self.multiplicity + component),
            None => Err(BasisError::DegreeTooHigh {
                index: alpha.clone(),
                degree: alpha.degree(),
                max: self.max_degree,
            }),
        }
    }

    pub fn element_at(&self, index: usize) -> Result<(&MultiIndex, usize), BasisError> {
        if index >= self.dimension() {
            return Err(BasisError::OrdinalOutOfRange {
                index,
                dimension: self.dimension(),
            });
        }
        Ok((&self.monomials[index / self.multiplicity], index % self.multiplicity))
    }

    /// Degree of the element at `index`. Panics when out of range.
    pub fn degree_at(&self, index: usize) -> usize {
        self.monomials[index / self.multiplicity].degree()
    }

    /// Half-open ordinal range of the elements of degree exactly `n`.
    pub fn degree_slice(&self, n: usize) -> Result<Range<usize>, BasisError> {
        if n > self.max_degree {
            return Err(BasisError::SliceOutOfRange {
                degree: n,
                max: self.max_degree,
            });
        }
        let k = self.multiplicity;
        Ok(self.slice_starts[n] * k..self.slice_starts[n + 1] * k)
    }

    /// Ordinals of all elements with degree ≤ `n` (a prefix).
    pub fn prefix_through(&self, n: usize) -> Range<usize> {
        let n = n.min(self.max_degree);
        0..self.slice_starts[n + 1] * self.multiplicity
    }

    /// Iterate `(ordinal, α, component)` in basis order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &MultiIndex, usize)> + '_ {
        let k = self.multiplicity;
        self.monomials
            .iter()
            .enumerate()
            .flat_map(move |(p, a)| (0..k).map(move |c| (p * k + c, a, c)))
    }
}

// Compositions of `remaining` into the tail `scratch[var..]`, in descending
// lexicographic order.
fn push_compositions(remaining: u32, var: usize, scratch: &mut [u32], out: &mut Vec<MultiIndex>) {
    if var + 1 == scratch.len() {
        scratch[var] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        scratch[var] = a;
        push_compositions(remaining - a, var + 1, scratch, out);
    }
    scratch[var] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent enumeration: every exponent vector in the box [0, N]^m with
    // total degree ≤ N.
    fn brute_force_count(m: usize, n: usize) -> usize {
        let mut count = 0;
        let mut e = vec![0usize; m];
        loop {
            if e.iter().sum::<usize>() <= n {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == m {
                    return count;
                }
                e[i] += 1;
                if e[i] <= n {
                    break;
                }
                e[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn single_variable_ordering() {
        let b = GradedBasis::enumerate(1, 3, 1).unwrap();
        assert_eq!(b.dimension(), 4);
        let order: Vec<_> = b.monomials().iter().map(|a| a.exponents()[0]).collect();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_variables_degree_two() {
        let b = GradedBasis::enumerate(2, 2, 1).unwrap();
        assert_eq!(b.dimension(), 6);
        assert_eq!(b.index_of(&MultiIndex::zero(2), 0).unwrap(), 0);
        // degree-2 slice is (2,0), (1,1), (0,2)
        assert_eq!(b.degree_slice(2).unwrap(), 3..6);
        assert_eq!(b.index_of(&vec![2, 0].into(), 0).unwrap(), 3);
        assert_eq!(b.index_of(&vec![0, 2].into(), 0).unwrap(), 5);
        assert_eq!(b.degree_slice(1).unwrap().len(), 2);
    }

    #[test]
    fn dimension_matches_brute_force() {
        assert_eq!(brute_force_count(3, 10), 286);
        let b = GradedBasis::enumerate(3, 10, 2).unwrap();
        assert_eq!(b.dimension(), 2 * brute_force_count(3, 10));
        assert_eq!(b.dimension(), 572);
        for (m, n) in [(1, 7), (2, 9), (4, 5), (5, 3)] {
            let b = GradedBasis::enumerate(m, n, 1).unwrap();
            assert_eq!(b.dimension(), brute_force_count(m, n), "m={m} N={n}");
        }
    }

    #[test]
    fn slice_lengths() {
        let b = GradedBasis::enumerate(3, 5, 1).unwrap();
        assert_eq!(b.degree_slice(4).unwrap().len(), 15);
        let total: usize = (0..=5).map(|n| b.degree_slice(n).unwrap().len()).sum();
        assert_eq!(total, b.dimension());
    }

    #[test]
    fn graded_lex_within_degree() {
        let b = GradedBasis::enumerate(3, 6, 1).unwrap();
        for n in 0..=6 {
            let r = b.degree_slice(n).unwrap();
            let slice = &b.monomials()[r];
            assert!(slice.windows(2).all(|w| w[0] > w[1]));
            assert!(slice.iter().all(|a| a.degree() == n));
        }
    }

    #[test]
    fn component_is_minor() {
        let b = GradedBasis::enumerate(2, 1, 3).unwrap();
        let (a, c) = b.element_at(4).unwrap();
        assert_eq!((a.clone(), c), (MultiIndex::new(vec![1, 0]), 1));
        assert_eq!(b.degree_slice(1).unwrap(), 3..9);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(GradedBasis::enumerate(0, 3, 1).unwrap_err(), BasisError::NoVariables(0));
        assert_eq!(GradedBasis::enumerate(2, 3, 0).unwrap_err(), BasisError::NoMultiplicity(0));
        assert!(matches!(
            GradedBasis::enumerate(3, 100, 1),
            Err(BasisError::TooLarge { dimension: 176_851, .. })
        ));
        assert!(GradedBasis::enumerate_with_cap(2, 2, 1, 5).is_err());

        let b = GradedBasis::enumerate(2, 2, 1).unwrap();
        assert!(matches!(
            b.index_of(&vec![2, 1].into(), 0),
            Err(BasisError::DegreeTooHigh { degree: 3, .. })
        ));
        assert!(b.index_of(&vec![1].into(), 0).is_err());
        assert!(b.index_of(&vec![1, 0].into(), 1).is_err());
        assert!(b.element_at(6).is_err());
        assert!(b.degree_slice(3).is_err());
    }

    #[test]
    fn multi_index_helpers() {
        let a = MultiIndex::new(vec![2, 0, 1]);
        assert_eq!(a.degree(), 3);
        assert_eq!(a.raised(1), MultiIndex::new(vec![2, 1, 1]));
        assert_eq!(a.lowered(1), None);
        assert!(a.dominates(&MultiIndex::new(vec![1, 0, 1])));
        assert!(!a.dominates(&MultiIndex::new(vec![0, 1, 0])));
        assert!((a.ln_factorial() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(a.to_string(), "(2,0,1)");
    }
}
