//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, lists are comma separated and
//! point coordinates are separated by `;`. Keys that do not apply to the
//! chosen experiment are rejected.

use std::fmt;
use std::path::PathBuf;

use shiftlab::experiments::report::num;
use shiftlab::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}` does not apply to {experiment}")]
    NotApplicable { key: String, experiment: Experiment },
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    Value {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("config names experiment `{found}` but the subcommand is `{wanted}`")]
    ExperimentMismatch { found: Experiment, wanted: Experiment },
    #[error("no experiment given")]
    MissingExperiment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Example3,
    Counterexample,
    Example5,
    ArvesonProbe,
    BergerShaw,
    QuotientProbe,
    Lemma1Check,
}

const COMMON_KEYS: &[&str] = &["experiment", "seed", "tag", "threads", "output_directory"];
const THRESHOLD_KEYS: &[&str] = &["plateau", "converging_exponent", "diverging_exponent", "growth_factor"];
const FIT_KEYS: &[&str] = &["fit_tolerance", "tail_fraction"];

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Example3,
        Experiment::Counterexample,
        Experiment::Example5,
        Experiment::ArvesonProbe,
        Experiment::BergerShaw,
        Experiment::QuotientProbe,
        Experiment::Lemma1Check,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::Example3 => "example3",
            Experiment::Counterexample => "counterexample",
            Experiment::Example5 => "example5",
            Experiment::ArvesonProbe => "arveson-probe",
            Experiment::BergerShaw => "berger-shaw",
            Experiment::QuotientProbe => "quotient-probe",
            Experiment::Lemma1Check => "lemma1-check",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.id() == id)
    }

    fn own_keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Example3 => &["n", "p", "max_degree"],
            Experiment::Counterexample => &["blocks", "p"],
            Experiment::Example5 => &["m", "delta", "degrees"],
            Experiment::ArvesonProbe => &["family", "delta", "m", "k", "generators", "p", "degrees"],
            Experiment::BergerShaw => &[
                "family",
                "delta",
                "m",
                "points",
                "generators",
                "degrees",
                "var",
                "random",
                "instances",
            ],
            Experiment::QuotientProbe => &[
                "family",
                "delta",
                "m",
                "generators",
                "p",
                "degrees",
                "zero_variety_dimension",
            ],
            Experiment::Lemma1Check => &["trials"],
        }
    }

    fn uses_thresholds(self) -> bool {
        !matches!(self, Experiment::Example3 | Experiment::Lemma1Check)
    }

    fn uses_fit(self) -> bool {
        matches!(self, Experiment::ArvesonProbe | Experiment::QuotientProbe)
    }

    /// Every key accepted for this experiment.
    pub fn keys(self) -> Vec<&'static str> {
        let mut keys: Vec<&'static str> = COMMON_KEYS.to_vec();
        keys.extend(self.own_keys());
        if self.uses_thresholds() {
            keys.extend(THRESHOLD_KEYS);
        }
        if self.uses_fit() {
            keys.extend(FIT_KEYS);
        }
        keys
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Every key in canonical order.
pub const ALL_KEYS: &[&str] = &[
    "experiment",
    "family",
    "delta",
    "m",
    "k",
    "n",
    "max_degree",
    "blocks",
    "generators",
    "points",
    "p",
    "degrees",
    "var",
    "random",
    "instances",
    "trials",
    "zero_variety_dimension",
    "plateau",
    "converging_exponent",
    "diverging_exponent",
    "growth_factor",
    "fit_tolerance",
    "tail_fraction",
    "seed",
    "tag",
    "threads",
    "output_directory",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub family: Option<String>,
    pub delta: Option<Vec<f64>>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub n: Option<Vec<usize>>,
    pub max_degree: Option<usize>,
    pub blocks: Option<usize>,
    pub generators: Option<Vec<String>>,
    pub points: Option<Vec<Vec<C64>>>,
    pub p: Option<Vec<f64>>,
    pub degrees: Option<Vec<usize>>,
    /// 1-based.
    pub var: Option<usize>,
    pub random: Option<bool>,
    pub instances: Option<usize>,
    pub trials: Option<usize>,
    pub zero_variety_dimension: Option<f64>,
    pub plateau: Option<f64>,
    pub converging_exponent: Option<f64>,
    pub diverging_exponent: Option<f64>,
    pub growth_factor: Option<f64>,
    pub fit_tolerance: Option<f64>,
    pub tail_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub tag: Option<String>,
    pub threads: Option<usize>,
    pub output_directory: Option<PathBuf>,
}

fn bad(key: &str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::Value {
        key: key.into(),
        value: value.into(),
        expected,
    }
}

fn items(value: &str) -> Vec<&str> {
    if value.trim().is_empty() {
        Vec::new()
    } else {
        value.split(',').map(str::trim).collect()
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| bad(key, value, expected))
}

fn parse_float(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_one(key, value, "a finite number")?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, value, "a finite number"))
    }
}

/// `p` lists also accept `inf`.
fn parse_p(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        v => parse_float(key, v),
    }
}

fn parse_text(key: &str, value: &str) -> Result<String, ConfigError> {
    let v = value.trim();
    if v.is_empty() || v.contains(['#', ',', '\n']) {
        Err(bad(key, value, "non-empty text without `#` or `,`"))
    } else {
        Ok(v.to_string())
    }
}

/// `1.5`, `2i`, `-0.25+0.5i`, `1e-3-2e-2i`.
pub fn parse_complex(text: &str) -> Option<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().filter(|x: &f64| x.is_finite()).map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (body[..j].parse::<f64>().ok()?, &body[j..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().ok()?,
    };
    (re.is_finite() && im.is_finite()).then(|| C64::new(re, im))
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else if z.re == 0.0 {
        format!("{}i", num(z.im))
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{sign}{}i", num(z.re), num(z.im.abs()))
    }
}

fn parse_point(key: &str, value: &str) -> Result<Vec<C64>, ConfigError> {
    value
        .split(';')
        .map(|c| parse_complex(c).ok_or_else(|| bad(key, value, "`;`-separated complex coordinates")))
        .collect()
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn p_text(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        num(p)
    }
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            family: None,
            delta: None,
            m: None,
            k: None,
            n: None,
            max_degree: None,
            blocks: None,
            generators: None,
            points: None,
            p: None,
            degrees: None,
            var: None,
            random: None,
            instances: None,
            trials: None,
            zero_variety_dimension: None,
            plateau: None,
            converging_exponent: None,
            diverging_exponent: None,
            growth_factor: None,
            fit_tolerance: None,
            tail_fraction: None,
            seed: None,
            tag: None,
            threads: None,
            output_directory: None,
        }
    }

    /// Set one key from its textual value, replacing any earlier value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !ALL_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.into()));
        }
        if !self.experiment.keys().contains(&key) {
            return Err(ConfigError::NotApplicable {
                key: key.into(),
                experiment: self.experiment,
            });
        }
        let usize_of = |v: &str| parse_one::<usize>(key, v, "a non-negative integer");
        let floats = |v: &str| items(v).into_iter().map(|x| parse_float(key, x)).collect::<Result<Vec<f64>, _>>();
        match key {
            "experiment" => {
                let found =
                    Experiment::from_id(value.trim()).ok_or_else(|| ConfigError::UnknownExperiment(value.trim().into()))?;
                if found != self.experiment {
                    return Err(ConfigError::ExperimentMismatch {
                        found,
                        wanted: self.experiment,
                    });
                }
            }
            "family" => self.family = Some(parse_text(key, value)?),
            "delta" => self.delta = Some(floats(value)?),
            "m" => self.m = Some(usize_of(value)?),
            "k" => self.k = Some(usize_of(value)?),
            "n" => self.n = Some(items(value).into_iter().map(usize_of).collect::<Result<_, _>>()?),
            "max_degree" => self.max_degree = Some(usize_of(value)?),
            "blocks" => self.blocks = Some(usize_of(value)?),
            "generators" => {
                self.generators = Some(items(value).into_iter().map(|g| parse_text(key, g)).collect::<Result<_, _>>()?)
            }
            "points" => {
                self.points = Some(items(value).into_iter().map(|pt| parse_point(key, pt)).collect::<Result<_, _>>()?)
            }
            "p" => self.p = Some(items(value).into_iter().map(|x| parse_p(key, x)).collect::<Result<_, _>>()?),
            "degrees" => self.degrees = Some(items(value).into_iter().map(usize_of).collect::<Result<_, _>>()?),
            "var" => self.var = Some(usize_of(value)?),
            "random" => self.random = Some(parse_one(key, value, "true or false")?),
            "instances" => self.instances = Some(usize_of(value)?),
            "trials" => self.trials = Some(usize_of(value)?),
            "zero_variety_dimension" => self.zero_variety_dimension = Some(parse_float(key, value)?),
            "plateau" => self.plateau = Some(parse_float(key, value)?),
            "converging_exponent" => self.converging_exponent = Some(parse_float(key, value)?),
            "diverging_exponent" => self.diverging_exponent = Some(parse_float(key, value)?),
            "growth_factor" => self.growth_factor = Some(parse_float(key, value)?),
            "fit_tolerance" => self.fit_tolerance = Some(parse_float(key, value)?),
            "tail_fraction" => self.tail_fraction = Some(parse_float(key, value)?),
            "seed" => self.seed = Some(parse_one(key, value, "a non-negative integer")?),
            "tag" => self.tag = Some(parse_text(key, value)?),
            "threads" => self.threads = Some(usize_of(value)?),
            "output_directory" => self.output_directory = Some(PathBuf::from(parse_text(key, value)?)),
            _ => unreachable!("key list and match disagree on `{key}`"),
        }
        Ok(())
    }

    /// Parse a config file. `experiment` is the subcommand, when there is one;
    /// the file may then omit the `experiment` key.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::Duplicate(key.into()));
            }
            entries.push((key, value.trim()));
        }
        let named = match entries.iter().find(|(k, _)| *k == "experiment") {
            Some((_, v)) => Some(Experiment::from_id(v).ok_or_else(|| ConfigError::UnknownExperiment(v.to_string()))?),
            None => None,
        };
        let chosen = match (named, experiment) {
            (Some(found), Some(wanted)) if found != wanted => {
                return Err(ConfigError::ExperimentMismatch { found, wanted });
            }
            (Some(e), _) | (None, Some(e)) => e,
            (None, None) => return Err(ConfigError::MissingExperiment),
        };
        let mut config = RunConfig::new(chosen);
        for (key, value) in entries {
            config.set(key, value)?;
        }
        Ok(config)
    }

    /// Set entries in canonical key order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("experiment", self.experiment.id().to_string())];
        let mut push = |key: &'static str, value: Option<String>| {
            if let Some(v) = value {
                out.push((key, v));
            }
        };
        push("family", self.family.clone());
        push("delta", self.delta.as_ref().map(|d| join(d, |x| num(*x))));
        push("m", self.m.map(|x| x.to_string()));
        push("k", self.k.map(|x| x.to_string()));
        push("n", self.n.as_ref().map(|n| join(n, |x| x.to_string())));
        push("max_degree", self.max_degree.map(|x| x.to_string()));
        push("blocks", self.blocks.map(|x| x.to_string()));
        push("generators", self.generators.as_ref().map(|g| join(g, String::clone)));
        push(
            "points",
            self.points
                .as_ref()
                .map(|pts| join(pts, |pt| pt.iter().map(|z| format_complex(*z)).collect::<Vec<_>>().join(";"))),
        );
        push("p", self.p.as_ref().map(|p| join(p, |x| p_text(*x))));
        push("degrees", self.degrees.as_ref().map(|d| join(d, |x| x.to_string())));
        push("var", self.var.map(|x| x.to_string()));
        push("random", self.random.map(|x| x.to_string()));
        push("instances", self.instances.map(|x| x.to_string()));
        push("trials", self.trials.map(|x| x.to_string()));
        push("zero_variety_dimension", self.zero_variety_dimension.map(num));
        push("plateau", self.plateau.map(num));
        push("converging_exponent", self.converging_exponent.map(num));
        push("diverging_exponent", self.diverging_exponent.map(num));
        push("growth_factor", self.growth_factor.map(num));
        push("fit_tolerance", self.fit_tolerance.map(num));
        push("tail_fraction", self.tail_fraction.map(num));
        push("seed", self.seed.map(|x| x.to_string()));
        push("tag", self.tag.clone());
        push("threads", self.threads.map(|x| x.to_string()));
        push(
            "output_directory",
            self.output_directory.as_ref().map(|d| d.display().to_string()),
        );
        out
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5"), Some(C64::new(0.5, 0.0)));
        assert_eq!(parse_complex("2i"), Some(C64::new(0.0, 2.0)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("0.1 + 0.2i"), Some(C64::new(0.1, 0.2)));
        assert_eq!(parse_complex("-1e-3-2e-2i"), Some(C64::new(-1e-3, -2e-2)));
        assert_eq!(parse_complex("1e+2i"), Some(C64::new(0.0, 100.0)));
        assert_eq!(parse_complex("x"), None);
        assert_eq!(parse_complex("inf"), None);
        for z in [C64::new(0.5, 0.0), C64::new(0.0, -0.25), C64::new(-0.1, 1e-7)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
    }

    #[test]
    fn parse_file() {
        let text = "# example5 sweep\nexperiment = example5\nm = 2  # two variables\ndelta = 0.25, 1.0\ndegrees = 8,12\n\n";
        let c = RunConfig::parse(text, None).unwrap();
        assert_eq!(c.experiment, Experiment::Example5);
        assert_eq!(c.m, Some(2));
        assert_eq!(c.delta, Some(vec![0.25, 1.0]));
        assert_eq!(c.degrees, Some(vec![8, 12]));
        assert_eq!(RunConfig::parse(&c.to_text(), None).unwrap(), c);
    }

    #[test]
    fn rejects_bad_files() {
        assert_eq!(
            RunConfig::parse("experiment = example5\nbogus = 1", None),
            Err(ConfigError::UnknownKey("bogus".into()))
        );
        assert!(matches!(
            RunConfig::parse("experiment = example5\ntrials = 3", None),
            Err(ConfigError::NotApplicable { .. })
        ));
        assert_eq!(RunConfig::parse("m = 2", None), Err(ConfigError::MissingExperiment));
        assert_eq!(
            RunConfig::parse("experiment = example5\nm 2", None),
            Err(ConfigError::Syntax { line: 2 })
        );
        assert_eq!(
            RunConfig::parse("m = 2\nm = 3", Some(Experiment::Example5)),
            Err(ConfigError::Duplicate("m".into()))
        );
        assert!(matches!(
            RunConfig::parse("experiment = lemma1-check", Some(Experiment::Example5)),
            Err(ConfigError::ExperimentMismatch { .. })
        ));
        assert!(matches!(
            RunConfig::parse("m = two", Some(Experiment::Example5)),
            Err(ConfigError::Value { .. })
        ));
    }

    #[test]
    fn points_and_infinite_p() {
        let mut c = RunConfig::new(Experiment::BergerShaw);
        c.set("points", "0.5;0.1+0.2i, -0.3;0").unwrap();
        assert_eq!(
            c.points,
            Some(vec![
                vec![C64::new(0.5, 0.0), C64::new(0.1, 0.2)],
                vec![C64::new(-0.3, 0.0), C64::new(0.0, 0.0)],
            ])
        );
        let mut q = RunConfig::new(Experiment::QuotientProbe);
        q.set("p", "1, inf").unwrap();
        assert_eq!(q.p, Some(vec![1.0, f64::INFINITY]));
        for c in [c, q] {
            assert_eq!(RunConfig::parse(&c.to_text(), None).unwrap(), c);
        }
    }

    #[test]
    fn every_experiment_key_is_known() {
        for e in Experiment::ALL {
            for k in e.keys() {
                assert!(ALL_KEYS.contains(&k), "{k}");
            }
        }
    }
}
