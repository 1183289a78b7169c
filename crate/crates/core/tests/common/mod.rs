//! Randomized property checks shared by the `properties` and `acceptance`
//! targets.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use shiftlab::graded_basis::homogeneous_count;
use shiftlab::schatten_analysis::{schatten_norm, trace};
use shiftlab::submodule_builder::{monomial_submodule, orthonormal_span};
use shiftlab::{Complex, GradedBasis, Layout, MultiIndex, Side, TruncatedOperator, WeightSet, Window};

pub const CASES: u32 = 128;
const P_VALUES: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

pub type Property = fn(u32) -> Result<(), String>;

pub const PROPERTIES: [(&str, Property); 9] = [
    ("schatten norm decreases in p", norm_decreases_in_p),
    ("schatten triangle inequality", triangle_inequality),
    ("signed permutations preserve norms", unitary_invariance),
    ("complex phases preserve norms", phase_invariance),
    ("diagonal norm is the sequence norm", diagonal_specialization),
    ("finite commutators have zero trace", commutator_trace),
    ("graded basis counts", basis_counts),
    ("spans are orthogonal projections", span_projections),
    ("submodule projections are idempotent", submodule_projections),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn op(a: &DMatrix<f64>) -> TruncatedOperator<f64> {
    TruncatedOperator::from_dense(Layout::subspace(None, a.nrows(), 0), a).unwrap()
}

fn norm(a: &DMatrix<f64>, p: f64) -> f64 {
    schatten_norm(&op(a), p, Window::Full).unwrap()
}

fn square(max: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max).prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v)))
}

fn pair(max: usize) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n * n),
        )
            .prop_map(move |(a, b)| (DMatrix::from_vec(n, n, a), DMatrix::from_vec(n, n, b)))
    })
}

fn signed_permutation(order: &[usize], signs: &[bool]) -> DMatrix<f64> {
    let n = order.len();
    let mut u = DMatrix::zeros(n, n);
    for (i, &j) in order.iter().enumerate() {
        u[(i, j)] = if signs[i] { -1.0 } else { 1.0 };
    }
    u
}

fn permutation_and_signs(n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<bool>)> {
    (
        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        prop::collection::vec(any::<bool>(), n),
    )
}

/// Points of `[0, N]^m` with coordinate sum at most `N`, counted by brute force.
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

fn norm_decreases_in_p(cases: u32) -> Result<(), String> {
    run(cases, square(7), |a| {
        let norms: Vec<f64> = P_VALUES.iter().map(|&p| norm(&a, p)).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-14, "{norms:?}");
        }
        Ok(())
    })
}

fn triangle_inequality(cases: u32) -> Result<(), String> {
    run(cases, (pair(7), 0usize..5), |((a, b), k)| {
        let p = P_VALUES[k];
        let sum = norm(&(&a + &b), p);
        prop_assert!(sum <= (norm(&a, p) + norm(&b, p)) * (1.0 + 1e-12) + 1e-14);
        Ok(())
    })
}

fn unitary_invariance(cases: u32) -> Result<(), String> {
    let strategy = square(7).prop_flat_map(|a| {
        let n = a.nrows();
        (Just(a), permutation_and_signs(n), permutation_and_signs(n))
    });
    run(cases, strategy, |(a, u, v)| {
        let b = signed_permutation(&u.0, &u.1) * &a * signed_permutation(&v.0, &v.1);
        for p in P_VALUES {
            let (x, y) = (norm(&a, p), norm(&b, p));
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0), "p={p}: {x} vs {y}");
        }
        Ok(())
    })
}

fn phase_invariance(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(0.0f64..std::f64::consts::TAU, n),
        )
    });
    run(cases, strategy, |(re, im, phases)| {
        let n = phases.len();
        let a = DMatrix::from_fn(n, n, |i, j| Complex::new(re[i * n + j], im[i * n + j]));
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            phases.iter().map(|&t| Complex::from_polar(1.0, t)),
        ));
        let layout = Layout::subspace(None, n, 0);
        let before = TruncatedOperator::from_dense(layout.clone(), &a).unwrap();
        let after = TruncatedOperator::from_dense(layout, &(&d * &a)).unwrap();
        for p in P_VALUES {
            let x = schatten_norm(&before, p, Window::Full).unwrap();
            let y = schatten_norm(&after, p, Window::Full).unwrap();
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
        Ok(())
    })
}

fn diagonal_specialization(cases: u32) -> Result<(), String> {
    run(
        cases,
        (prop::collection::vec(-10.0f64..10.0, 1..12), 0usize..5),
        |(d, k)| {
            let p = P_VALUES[k];
            let expected = if p.is_infinite() {
                d.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            } else {
                d.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
            };
            let got = norm(&DMatrix::from_diagonal(&DVector::from_vec(d)), p);
            prop_assert!((got - expected).abs() <= 1e-12 * expected.max(1.0), "{got} vs {expected}");
            Ok(())
        },
    )
}

fn commutator_trace(cases: u32) -> Result<(), String> {
    run(cases, pair(8), |(a, b)| {
        let c = op(&a).commutator(&op(&b)).unwrap();
        let scale = a.norm() * b.norm();
        prop_assert!(trace(&c, Window::Full).abs() <= 1e-12 * scale.max(1.0));
        Ok(())
    })
}

fn basis_counts(cases: u32) -> Result<(), String> {
    run(cases, (1usize..=4, 0usize..=9, 1usize..=3), |(m, n, k)| {
        let basis = GradedBasis::enumerate(m, n, k).unwrap();
        prop_assert_eq!(basis.dimension(), brute_force_count(m, n) * k);
        for d in 0..=n {
            let layer = brute_force_count(m, d) - if d == 0 { 0 } else { brute_force_count(m, d - 1) };
            prop_assert_eq!(basis.degree_slice(d).unwrap().len(), layer * k);
            prop_assert_eq!(homogeneous_count(m, d), layer);
        }
        Ok(())
    })
}

fn span_projections(cases: u32) -> Result<(), String> {
    let strategy = (2usize..=9).prop_flat_map(|dim| {
        (1..dim).prop_flat_map(move |cols| prop::collection::vec(-1.0f64..1.0, dim * cols).prop_map(move |v| DMatrix::from_vec(dim, cols, v)))
    });
    run(cases, strategy, |vectors| {
        let (dim, cols) = vectors.shape();
        // random columns are independent almost surely; skip the rare bad draw
        prop_assume!(vectors.clone().svd(false, false).singular_values.min() > 1e-3);
        let basis = Arc::new(GradedBasis::enumerate(1, dim - 1, 1).unwrap());
        let p = orthonormal_span::<f64>(basis, &vectors).unwrap();
        let m = DMatrix::from(&p.matrix());
        prop_assert_eq!(p.rank(), cols);
        prop_assert!((&m * &m - &m).abs().max() < 1e-10);
        prop_assert!((&m - m.transpose()).abs().max() < 1e-10);
        prop_assert!((m.trace() - cols as f64).abs() < 1e-10);
        Ok(())
    })
}

fn submodule_projections(cases: u32) -> Result<(), String> {
    let strategy = (
        1usize..=3,
        6usize..=9,
        prop::collection::vec(prop::collection::vec(0u32..3, 3), 1..=3),
    );
    run(cases, strategy, |(m, n, gens)| {
        let basis = Arc::new(GradedBasis::enumerate(m, n, 1).unwrap());
        let w = WeightSet::<f64>::drury_arveson(basis).unwrap();
        let gens: Vec<(MultiIndex, usize)> = gens.into_iter().map(|e| (MultiIndex::new(e[..m].to_vec()), 0)).collect();
        let sub = monomial_submodule::<f64>(&w, &gens).unwrap();
        for side in [Side::Submodule, Side::Complement] {
            let p = DMatrix::from(&sub.projection(side).matrix());
            prop_assert!((&p * &p - &p).abs().max() < 1e-12);
        }
        prop_assert_eq!(
            sub.dimension(Side::Submodule) + sub.dimension(Side::Complement),
            w.basis().dimension()
        );
        Ok(())
    })
}
