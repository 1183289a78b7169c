mod common;

use common::{CASES, PROPERTIES};

fn check(name: &str) {
    let (_, property) = PROPERTIES.iter().find(|(n, _)| *n == name).expect("known property");
    if let Err(e) = property(CASES) {
        panic!("{name}: {e}");
    }
}

#[test]
fn norm_decreases_in_p() {
    check("schatten norm decreases in p");
}

#[test]
fn triangle_inequality() {
    check("schatten triangle inequality");
}

#[test]
fn unitary_invariance() {
    check("signed permutations preserve norms");
}

#[test]
fn phase_invariance() {
    check("complex phases preserve norms");
}

#[test]
fn diagonal_specialization() {
    check("diagonal norm is the sequence norm");
}

#[test]
fn commutator_trace() {
    check("finite commutators have zero trace");
}

#[test]
fn basis_counts() {
    check("graded basis counts");
}

#[test]
fn span_projections() {
    check("spans are orthogonal projections");
}

#[test]
fn submodule_projections() {
    check("submodule projections are idempotent");
}
