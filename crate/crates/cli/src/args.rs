use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Experiment;

pub const REFERENCE: &str = "\
Polynomial generators:
  poly  := ['-'] term (('+' | '-') term)*
  term  := coef ['*' mono] [comp] | mono [comp]
  mono  := var ('*' var)*        var  := 'z' i ['^' e]
  comp  := '(' 'c' K ')'
  Variables are z1..zm. Whitespace is ignored. (cK) puts the term in the
  0-based component K of C^k (default c0). Repeated variables multiply and
  repeated terms are summed. Examples: \"z1^2 + z2^2\", \"2*z1*z2 - 0.5*z3\".

Config file (--config FILE):
  One `key = value` per line; `#` starts a comment; lists are comma
  separated; point coordinates are separated by `;` and may be complex
  (0.5;0.1+0.2i). Unknown keys and keys foreign to the experiment are
  rejected. Command-line flags override file values.
  keys: experiment family delta m k n max_degree blocks generators points
        p degrees var random instances trials zero_variety_dimension
        plateau converging_exponent diverging_exponent growth_factor
        fit_tolerance tail_fraction seed tag threads output_directory

Output:
  <root>/<experiment>-<tag or unix seconds>/{report.json, config.txt, *.csv}
  root is --out, else $SHIFTLAB_OUT, else ./out.
Exit codes: 0 success, 1 theorem-backed check failed, 2 usage error.";

#[derive(Debug, Parser)]
#[command(name = "shiftlab", version, about = "Schatten-class experiments for weighted shift Hilbert modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Report directory suffix instead of the current time.
    #[arg(long)]
    pub tag: Option<String>,
    /// Output root directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct Thresholds {
    /// Relative increment below which the tail counts as a plateau.
    #[arg(long)]
    pub plateau: Option<String>,
    #[arg(long)]
    pub converging_exponent: Option<String>,
    #[arg(long)]
    pub diverging_exponent: Option<String>,
    #[arg(long)]
    pub growth_factor: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct Fit {
    /// Relative agreement between the two largest truncations.
    #[arg(long)]
    pub fit_tolerance: Option<String>,
    #[arg(long)]
    pub tail_fraction: Option<String>,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct Example3Args {
    /// Shift parameters n, comma separated.
    #[arg(long)]
    pub n: Option<String>,
    /// Schatten exponents, comma separated (`inf` allowed).
    #[arg(long)]
    pub p: Option<String>,
    /// Truncation degree N.
    #[arg(long)]
    pub max_degree: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct CounterexampleArgs {
    /// Number of direct-sum blocks B.
    #[arg(long)]
    pub blocks: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct Example5Args {
    /// Number of variables (required).
    #[arg(long)]
    pub m: Option<String>,
    /// Exponents delta, comma separated.
    #[arg(long)]
    pub delta: Option<String>,
    /// Degree sweep, comma separated.
    #[arg(long)]
    pub degrees: Option<String>,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct ArvesonArgs {
    /// Weight family id (see list-families).
    #[arg(long)]
    pub family: Option<String>,
    /// delta for factorial-delta.
    #[arg(long)]
    pub delta: Option<String>,
    /// Number of variables (required).
    #[arg(long)]
    pub m: Option<String>,
    /// Multiplicity of C^k.
    #[arg(long)]
    pub k: Option<String>,
    /// Homogeneous generators, comma separated.
    #[arg(long)]
    pub gens: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub degrees: Option<String>,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub fit: Fit,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct BergerShawArgs {
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Number of variables (required unless --random).
    #[arg(long)]
    pub m: Option<String>,
    /// Evaluation points spanning V_n, e.g. "0.5, -0.2+0.3i".
    #[arg(long)]
    pub points: Option<String>,
    /// Polynomials spanning V_n, comma separated.
    #[arg(long)]
    pub gens: Option<String>,
    #[arg(long)]
    pub degrees: Option<String>,
    /// 1-based coordinate whose adjoint is restricted.
    #[arg(long)]
    pub var: Option<String>,
    /// Run randomized instances instead of a single configuration.
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub instances: Option<String>,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct QuotientArgs {
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Number of variables, 2 or 3 (required).
    #[arg(long)]
    pub m: Option<String>,
    /// Generators, comma separated; need not be homogeneous.
    #[arg(long)]
    pub gens: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub degrees: Option<String>,
    /// Complex dimension of the zero variety, recorded as supplied.
    #[arg(long)]
    pub zero_dim: Option<String>,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub fit: Fit,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(after_help = REFERENCE)]
pub struct Lemma1Args {
    #[arg(long)]
    pub trials: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schatten norms of [S_n*, S_n] and of its restriction.
    Example3(Example3Args),
    /// Direct sums of example3 shift blocks and their restrictions.
    Counterexample(CounterexampleArgs),
    /// Factorial-delta weights against the 1-reductive and S_2 thresholds.
    Example5(Example5Args),
    /// Cross-commutators of a homogeneous submodule and its quotient.
    ArvesonProbe(ArvesonArgs),
    /// 0 <= Tr P_n <= ||C_n||_1 on nested subspaces.
    BergerShaw(BergerShawArgs),
    /// Critical exponent of the quotient by a (possibly non-homogeneous) ideal.
    QuotientProbe(QuotientArgs),
    /// Residual of the restricted self-commutator identity on random instances.
    Lemma1Check(Lemma1Args),
    /// Print the built-in weight families.
    ListFamilies,
}

impl Command {
    pub fn experiment(&self) -> Option<Experiment> {
        Some(match self {
            Command::Example3(_) => Experiment::Example3,
            Command::Counterexample(_) => Experiment::Counterexample,
            Command::Example5(_) => Experiment::Example5,
            Command::ArvesonProbe(_) => Experiment::ArvesonProbe,
            Command::BergerShaw(_) => Experiment::BergerShaw,
            Command::QuotientProbe(_) => Experiment::QuotientProbe,
            Command::Lemma1Check(_) => Experiment::Lemma1Check,
            Command::ListFamilies => return None,
        })
    }

    pub fn common(&self) -> Option<&Common> {
        match self {
            Command::Example3(a) => Some(&a.common),
            Command::Counterexample(a) => Some(&a.common),
            Command::Example5(a) => Some(&a.common),
            Command::ArvesonProbe(a) => Some(&a.common),
            Command::BergerShaw(a) => Some(&a.common),
            Command::QuotientProbe(a) => Some(&a.common),
            Command::Lemma1Check(a) => Some(&a.common),
            Command::ListFamilies => None,
        }
    }

    /// Flag values as config keys, in the order they are applied.
    pub fn overrides(&self) -> Vec<(&'static str, Option<String>)> {
        fn thresholds(t: &Thresholds) -> [(&'static str, Option<String>); 4] {
            [
                ("plateau", t.plateau.clone()),
                ("converging_exponent", t.converging_exponent.clone()),
                ("diverging_exponent", t.diverging_exponent.clone()),
                ("growth_factor", t.growth_factor.clone()),
            ]
        }
        fn fit(f: &Fit) -> [(&'static str, Option<String>); 2] {
            [
                ("fit_tolerance", f.fit_tolerance.clone()),
                ("tail_fraction", f.tail_fraction.clone()),
            ]
        }
        let mut out: Vec<(&'static str, Option<String>)> = match self {
            Command::Example3(a) => vec![("n", a.n.clone()), ("p", a.p.clone()), ("max_degree", a.max_degree.clone())],
            Command::Counterexample(a) => {
                let mut v = vec![("blocks", a.blocks.clone()), ("p", a.p.clone())];
                v.extend(thresholds(&a.thresholds));
                v
            }
            Command::Example5(a) => {
                let mut v = vec![("m", a.m.clone()), ("delta", a.delta.clone()), ("degrees", a.degrees.clone())];
                v.extend(thresholds(&a.thresholds));
                v
            }
            Command::ArvesonProbe(a) => {
                let mut v = vec![
                    ("family", a.family.clone()),
                    ("delta", a.delta.clone()),
                    ("m", a.m.clone()),
                    ("k", a.k.clone()),
                    ("generators", a.gens.clone()),
                    ("p", a.p.clone()),
                    ("degrees", a.degrees.clone()),
                ];
                v.extend(thresholds(&a.thresholds));
                v.extend(fit(&a.fit));
                v
            }
            Command::BergerShaw(a) => {
                let mut v = vec![
                    ("family", a.family.clone()),
                    ("delta", a.delta.clone()),
                    ("m", a.m.clone()),
                    ("points", a.points.clone()),
                    ("generators", a.gens.clone()),
                    ("degrees", a.degrees.clone()),
                    ("var", a.var.clone()),
                    ("random", a.random.then(|| "true".to_string())),
                    ("instances", a.instances.clone()),
                ];
                v.extend(thresholds(&a.thresholds));
                v
            }
            Command::QuotientProbe(a) => {
                let mut v = vec![
                    ("family", a.family.clone()),
                    ("delta", a.delta.clone()),
                    ("m", a.m.clone()),
                    ("generators", a.gens.clone()),
                    ("p", a.p.clone()),
                    ("degrees", a.degrees.clone()),
                    ("zero_variety_dimension", a.zero_dim.clone()),
                ];
                v.extend(thresholds(&a.thresholds));
                v.extend(fit(&a.fit));
                v
            }
            Command::Lemma1Check(a) => vec![("trials", a.trials.clone())],
            Command::ListFamilies => Vec::new(),
        };
        if let Some(c) = self.common() {
            out.extend([
                ("seed", c.seed.clone()),
                ("tag", c.tag.clone()),
                ("threads", c.threads.clone()),
                ("output_directory", c.out.clone()),
            ]);
        }
        out
    }
}
