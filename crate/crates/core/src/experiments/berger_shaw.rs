use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{list, num, ExperimentReport, Table};
use super::{check_sweep, precondition, record_thresholds, weights, ExperimentError, Result};
use crate::graded_basis::MultiIndex;
use crate::polynomial_syntax::parse_generator;
use crate::schatten_analysis::{ap_witness, convergence_diagnostic, trace, DiagnosticThresholds, Window};
use crate::shift_operators::coordinate_shift;
use crate::submodule_builder::{generator_coordinates, kernel_vector, orthonormal_span, PolynomialGenerator, Term};
use crate::weight_models::{WeightFamily, WeightSet};

/// Slack allowed in `0 ≤ Tr P_n ≤ ‖C_n‖_1`.
pub const BERGER_SHAW_TOLERANCE: f64 = 1e-8;

type C64 = Complex<f64>;

/// What spans `V_n`: kernel vectors at points, or polynomials.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    Points(Vec<Vec<C64>>),
    Generators(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BergerShawParams {
    pub family: WeightFamily,
    pub m: usize,
    pub sources: SourceSpec,
    pub degree_sweep: Vec<usize>,
    /// 0-based coordinate whose adjoint is restricted.
    pub var: usize,
    pub thresholds: DiagnosticThresholds,
}

impl Default for BergerShawParams {
    fn default() -> Self {
        BergerShawParams {
            family: WeightFamily::BergmanBall,
            m: 1,
            sources: SourceSpec::Points(vec![vec![C64::new(0.5, 0.0)]]),
            degree_sweep: vec![8, 12, 16, 20, 28, 40],
            var: 0,
            thresholds: DiagnosticThresholds::default(),
        }
    }
}

enum Source {
    Point(Vec<C64>),
    Polynomial(PolynomialGenerator<C64>),
}

struct Row {
    n: usize,
    trace_positive: f64,
    trace_norm_c: f64,
    trace_commutator: f64,
}

impl Row {
    fn slack(&self) -> f64 {
        self.trace_norm_c + BERGER_SHAW_TOLERANCE - self.trace_positive
    }

    fn holds(&self) -> bool {
        self.trace_positive >= 0.0 && self.slack() >= 0.0
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            num(self.trace_positive),
            num(self.trace_norm_c),
            num(self.trace_commutator),
            num(self.slack()),
            self.holds().to_string(),
        ]
    }
}

fn source_vector(w: &WeightSet<f64>, s: &Source) -> Result<DVector<C64>> {
    Ok(match s {
        Source::Point(z) => kernel_vector::<C64>(w, z, 0),
        Source::Polynomial(g) => generator_coordinates(w, g)?,
    })
}

/// Rows for `V_1 ⊂ V_2 ⊂ …`, `V_n` spanned by the first `n` sources, with
/// `T = Z_var*` compressed to each `V_n`.
fn chain(w: &WeightSet<f64>, sources: &[Source], var: usize) -> Result<Vec<Row>> {
    let t = coordinate_shift::<C64>(w, var)?.adjoint();
    let vectors: Vec<DVector<C64>> = sources.iter().map(|s| source_vector(w, s)).collect::<Result<_>>()?;
    (1..=vectors.len())
        .map(|n| {
            let span = orthonormal_span(w.basis().clone(), &DMatrix::from_columns(&vectors[..n]))?;
            let c = t.compress_to_range(&span)?.self_commutator();
            let witness = ap_witness(&c, 1.0)?;
            Ok(Row {
                n,
                trace_positive: witness.trace_of_positive,
                trace_norm_c: witness.trace_norm_of_c,
                trace_commutator: trace(&c, Window::Full).re,
            })
        })
        .collect()
}

fn point_label(z: &[C64]) -> String {
    let coords: Vec<String> = z
        .iter()
        .map(|c| {
            if c.im == 0.0 {
                num(c.re)
            } else {
                format!("{}{}{}i", num(c.re), if c.im < 0.0 { "-" } else { "+" }, num(c.im.abs()))
            }
        })
        .collect();
    format!("({})", coords.join(";"))
}

pub fn run_berger_shaw_check(params: &BergerShawParams) -> Result<ExperimentReport> {
    let m = params.m;
    precondition(m >= 1, || "m must be >= 1".into())?;
    precondition(params.var < m, || format!("var must be below m = {m}"))?;
    check_sweep(&params.degree_sweep)?;
    let (sources, label) = match &params.sources {
        SourceSpec::Points(points) => {
            precondition(!points.is_empty(), || "no points".into())?;
            for (i, z) in points.iter().enumerate() {
                precondition(z.len() == m, || format!("point {} has {} coordinates, m = {m}", i + 1, z.len()))?;
                let r: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                precondition(r < 1.0, || format!("point {} lies outside the unit ball", i + 1))?;
            }
            (
                points.iter().cloned().map(Source::Point).collect::<Vec<_>>(),
                points.iter().map(|z| point_label(z)).collect::<Vec<_>>().join(" "),
            )
        }
        SourceSpec::Generators(texts) => {
            precondition(!texts.is_empty(), || "no generators".into())?;
            let gens = texts
                .iter()
                .map(|t| {
                    parse_generator::<C64>(t, m, 1).map_err(|source| ExperimentError::Parse {
                        text: t.clone(),
                        source,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (gens.into_iter().map(Source::Polynomial).collect(), texts.join("; "))
        }
    };

    let mut report = ExperimentReport::new("berger-shaw");
    report.param("family", params.family.id());
    report.param("m", m.to_string());
    report.param("var", (params.var + 1).to_string());
    report.param("degree_sweep", list(&params.degree_sweep));
    report.param(
        "sources",
        match &params.sources {
            SourceSpec::Points(_) => format!("points {label}"),
            SourceSpec::Generators(_) => format!("polynomials {label}"),
        },
    );
    report.param("tolerance", num(BERGER_SHAW_TOLERANCE));
    record_thresholds(&mut report, &params.thresholds);

    let per_degree: Vec<Vec<Row>> = params
        .degree_sweep
        .par_iter()
        .map(|&n| chain(&weights(&params.family, m, n, 1)?, &sources, params.var))
        .collect::<Result<_>>()?;

    let mut table = Table::new(
        "rows",
        &[
            "N",
            "n",
            "trace_positive",
            "trace_norm_negative",
            "trace_commutator",
            "slack",
            "holds",
        ],
    );
    let mut violations = 0;
    let mut trend = Vec::new();
    for (&deg, rows) in params.degree_sweep.iter().zip(&per_degree) {
        for r in rows {
            violations += usize::from(!r.holds());
            let mut cells = vec![deg.to_string()];
            cells.extend(r.cells());
            table.push(cells);
        }
        if let Some(last) = rows.last() {
            trend.push((deg, last.trace_norm_c));
        }
    }
    report.tables.push(table);
    report.verdict(
        "trace norm of C_n, all sources, across N",
        convergence_diagnostic(&trend, &params.thresholds),
        &params.thresholds,
    );
    report.check(
        "0 <= Tr P_n <= ||C_n||_1 + 1e-8",
        violations == 0,
        true,
        format!("{violations} violating rows of {}", per_degree.iter().map(Vec::len).sum::<usize>()),
    );
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BergerShawRandomParams {
    pub instances: usize,
    pub seed: u64,
}

impl Default for BergerShawRandomParams {
    fn default() -> Self {
        BergerShawRandomParams { instances: 50, seed: 0 }
    }
}

struct Instance {
    family: WeightFamily,
    m: usize,
    degree: usize,
    var: usize,
    sources: Vec<Source>,
}

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    let raw: Vec<C64> = (0..m)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
    let radius = rng.random_range(0.0..0.85);
    raw.into_iter().map(|c| c * (radius / norm)).collect()
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn random_monomial(rng: &mut ChaCha8Rng, m: usize, max_degree: usize) -> MultiIndex {
    let d = rng.random_range(0..=max_degree);
    let mut e = vec![0u32; m];
    for _ in 0..d {
        e[rng.random_range(0..m)] += 1;
    }
    MultiIndex::new(e)
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let family = [
        WeightFamily::DruryArveson,
        WeightFamily::BergmanBall,
        WeightFamily::HardyBall,
    ][rng.random_range(0..3)]
    .clone();
    let m = rng.random_range(1..=2);
    let degree = if m == 1 {
        rng.random_range(6..=30)
    } else {
        rng.random_range(4..=12)
    };
    let var = rng.random_range(0..m);
    let count = rng.random_range(1..=4);
    let sources = if rng.random_bool(0.5) {
        let mut points: Vec<Vec<C64>> = Vec::new();
        while points.len() < count {
            let z = random_point(rng, m);
            if points.iter().all(|p| distance(p, &z) > 0.15) {
                points.push(z);
            }
        }
        points.into_iter().map(Source::Point).collect()
    } else {
        // each polynomial owns a pivot monomial no other one uses, which
        // keeps the family independent
        let mut monomials: Vec<MultiIndex> = Vec::new();
        while monomials.len() < count + 2 {
            let a = random_monomial(rng, m, degree);
            if !monomials.contains(&a) {
                monomials.push(a);
            }
        }
        let shared = &monomials[count..];
        (0..count)
            .map(|t| {
                let coefficient = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let mut terms = vec![Term {
                    index: monomials[t].clone(),
                    component: 0,
                    coefficient: C64::new(1.0, 0.0) + coefficient(rng) * 0.5,
                }];
                for s in shared {
                    if rng.random_bool(0.5) {
                        terms.push(Term {
                            index: s.clone(),
                            component: 0,
                            coefficient: coefficient(rng),
                        });
                    }
                }
                Source::Polynomial(PolynomialGenerator::new(terms).expect("distinct nonzero terms"))
            })
            .collect()
    };
    Instance {
        family,
        m,
        degree,
        var,
        sources,
    }
}

/// The inequality over randomly drawn nested chains.
pub fn run_berger_shaw_random(params: &BergerShawRandomParams) -> Result<ExperimentReport> {
    precondition(params.instances >= 1, || "need at least one instance".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let instances: Vec<Instance> = (0..params.instances).map(|_| random_instance(&mut rng)).collect();

    let mut report = ExperimentReport::new("berger-shaw-random");
    report.seed = Some(params.seed);
    report.param("instances", params.instances.to_string());
    report.param("tolerance", num(BERGER_SHAW_TOLERANCE));

    let rows: Vec<Vec<Row>> = instances
        .par_iter()
        .map(|inst| chain(&weights(&inst.family, inst.m, inst.degree, 1)?, &inst.sources, inst.var))
        .collect::<Result<_>>()?;

    let mut table = Table::new(
        "rows",
        &[
            "instance",
            "family",
            "m",
            "N",
            "var",
            "source_kind",
            "n",
            "trace_positive",
            "trace_norm_negative",
            "trace_commutator",
            "slack",
            "holds",
        ],
    );
    let mut violations = 0;
    let mut total = 0;
    for (idx, (inst, rows)) in instances.iter().zip(&rows).enumerate() {
        let kind = match inst.sources.first() {
            Some(Source::Point(_)) => "points",
            _ => "polynomials",
        };
        for r in rows {
            total += 1;
            violations += usize::from(!r.holds());
            let mut cells = vec![
                (idx + 1).to_string(),
                inst.family.id().to_string(),
                inst.m.to_string(),
                inst.degree.to_string(),
                (inst.var + 1).to_string(),
                kind.to_string(),
            ];
            cells.extend(r.cells());
            table.push(cells);
        }
    }
    report.tables.push(table);
    report.check(
        "0 <= Tr P_n <= ||C_n||_1 + 1e-8",
        violations == 0,
        true,
        format!("{violations} violating rows of {total}"),
    );
    Ok(report)
}
