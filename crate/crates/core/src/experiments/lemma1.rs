use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{num, ExperimentReport, Table};
use super::{precondition, Result};
use crate::graded_basis::{GradedBasis, MultiIndex};
use crate::shift_operators::coordinate_shift;
use crate::submodule_builder::{monomial_submodule, Side};
use crate::weight_models::WeightSet;

pub const LEMMA1_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Params {
    pub trials: usize,
    pub seed: u64,
}

impl Default for Lemma1Params {
    fn default() -> Self {
        Lemma1Params { trials: 200, seed: 0 }
    }
}

struct Trial {
    basis: Arc<GradedBasis>,
    ln_lambda: Vec<f64>,
    generators: Vec<(MultiIndex, usize)>,
    var: usize,
}

fn random_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let m = rng.random_range(1..=3);
    let n = rng.random_range(2..=16);
    let k = if m < 3 { rng.random_range(1..=2) } else { 1 };
    let basis = Arc::new(GradedBasis::enumerate(m, n, k)?);
    let slope = rng.random_range(-0.5..0.5);
    let ln_lambda = basis
        .monomials()
        .iter()
        .map(|a| slope * a.degree() as f64 + rng.random_range(-0.5..0.5))
        .collect();
    let count = rng.random_range(1..=3);
    let generators = (0..count)
        .map(|_| {
            let d = rng.random_range(0..=n / 2);
            let mut e = vec![0u32; m];
            for _ in 0..d {
                e[rng.random_range(0..m)] += 1;
            }
            (MultiIndex::new(e), rng.random_range(0..k))
        })
        .collect();
    Ok(Trial {
        basis,
        ln_lambda,
        generators,
        var: rng.random_range(0..m),
    })
}

/// Check `Q[T*,T]Q + Q T Q⊥ T* Q = [(T|_V)*, T|_V]` for random weights and
/// monomial submodules.
pub fn run_lemma1_check(params: &Lemma1Params) -> Result<ExperimentReport> {
    precondition(params.trials >= 1, || "trials must be >= 1".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let trials: Vec<Trial> = (0..params.trials).map(|_| random_trial(&mut rng)).collect::<Result<_>>()?;

    let outcomes: Vec<(usize, f64, f64)> = trials
        .par_iter()
        .map(|t| {
            let w = WeightSet::<f64>::from_ln_weights(t.basis.clone(), t.ln_lambda.clone(), "random")?;
            let sub = monomial_submodule::<f64>(&w, &t.generators)?;
            let z = coordinate_shift::<f64>(&w, t.var)?;
            let d = z.lemma1_decomposition(&sub.projection(Side::Submodule))?;
            Ok((sub.dimension(Side::Submodule), d.identity_residual, d.invariance_residual))
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new("lemma1-check");
    report.seed = Some(params.seed);
    report.param("trials", params.trials.to_string());
    report.param("tolerance", num(LEMMA1_TOLERANCE));
    let mut table = Table::new(
        "trials",
        &[
            "trial",
            "m",
            "N",
            "k",
            "var",
            "generators",
            "dim_submodule",
            "identity_residual",
            "invariance_residual",
        ],
    );
    let mut worst = 0.0f64;
    for (i, (t, (dim, identity, invariance))) in trials.iter().zip(&outcomes).enumerate() {
        worst = worst.max(*identity).max(*invariance);
        let gens: Vec<String> = t.generators.iter().map(|(a, c)| format!("z^{a}[c{c}]")).collect();
        table.push(vec![
            (i + 1).to_string(),
            t.basis.num_vars().to_string(),
            t.basis.max_degree().to_string(),
            t.basis.multiplicity().to_string(),
            (t.var + 1).to_string(),
            gens.join(" "),
            dim.to_string(),
            num(*identity),
            num(*invariance),
        ]);
    }
    report.tables.push(table);
    report.check(
        "identity residual < 1e-10",
        worst < LEMMA1_TOLERANCE,
        true,
        format!("max residual over {} trials = {}", params.trials, num(worst)),
    );
    Ok(report)
}
