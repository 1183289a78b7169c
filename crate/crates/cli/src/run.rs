use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use shiftlab::experiments::{
    default_sweep, run_arveson_probe, run_berger_shaw_check, run_berger_shaw_random, run_counterexample_direct_sum,
    run_example3, run_example5, run_lemma1_check, run_quotient_smoothness_probe, ArvesonProbeParams,
    BergerShawParams, BergerShawRandomParams, CounterexampleParams, Example3Params, Example5Params, ExperimentError,
    ExperimentReport, Lemma1Params, QuotientProbeParams, SourceSpec,
};
use shiftlab::{DiagnosticThresholds, WeightFamily};
use thiserror::Error;

use crate::config::{ConfigError, Experiment, RunConfig};

pub const OUT_ENV: &str = "SHIFTLAB_OUT";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    /// 2 for anything the caller can fix by changing the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => 2,
            RunError::Experiment(
                ExperimentError::Precondition(_)
                | ExperimentError::Parse { .. }
                | ExperimentError::Basis(_)
                | ExperimentError::Weight(_)
                | ExperimentError::Submodule(_),
            ) => 2,
            RunError::Experiment(_) | RunError::Io { .. } => 1,
        }
    }
}

fn usage(message: impl Into<String>) -> RunError {
    RunError::Usage(message.into())
}

fn require_m(config: &RunConfig) -> Result<usize, RunError> {
    config
        .m
        .ok_or_else(|| usage(format!("{} needs --m (or `m = ...` in the config file)", config.experiment)))
}

fn thresholds(config: &RunConfig) -> DiagnosticThresholds {
    let d = DiagnosticThresholds::default();
    DiagnosticThresholds {
        plateau: config.plateau.unwrap_or(d.plateau),
        converging_exponent: config.converging_exponent.unwrap_or(d.converging_exponent),
        diverging_exponent: config.diverging_exponent.unwrap_or(d.diverging_exponent),
        growth_factor: config.growth_factor.unwrap_or(d.growth_factor),
    }
}

fn family(config: &RunConfig, default: WeightFamily) -> Result<WeightFamily, RunError> {
    let Some(id) = &config.family else {
        if config.delta.is_some() {
            return Err(usage("delta is only used with --family factorial-delta"));
        }
        return Ok(default);
    };
    let delta = match config.delta.as_deref() {
        None => None,
        Some([d]) => Some(*d),
        Some(_) => return Err(usage("give a single delta for the weight family")),
    };
    if delta.is_some() && id != "factorial-delta" {
        return Err(usage("delta is only used with --family factorial-delta"));
    }
    if id == "example3" {
        return Err(usage("the example3 family is only available through the example3 subcommand"));
    }
    WeightFamily::from_id(id, delta, None).map_err(|e| usage(e.to_string()))
}

/// Run the configured experiment. Nothing is written to disk.
pub fn execute(config: &RunConfig) -> Result<ExperimentReport, RunError> {
    let report = match config.experiment {
        Experiment::Example3 => {
            let d = Example3Params::default();
            run_example3(&Example3Params {
                n_values: config.n.clone().unwrap_or(d.n_values),
                p_values: config.p.clone().unwrap_or(d.p_values),
                max_degree: config.max_degree.unwrap_or(d.max_degree),
            })?
        }
        Experiment::Counterexample => {
            let d = CounterexampleParams::default();
            run_counterexample_direct_sum(&CounterexampleParams {
                max_blocks: config.blocks.unwrap_or(d.max_blocks),
                p_values: config.p.clone().unwrap_or(d.p_values),
                thresholds: thresholds(config),
            })?
        }
        Experiment::Example5 => {
            let m = require_m(config)?;
            let d = Example5Params::default();
            run_example5(&Example5Params {
                m,
                delta_values: config.delta.clone().unwrap_or(d.delta_values),
                degree_sweep: config.degrees.clone().unwrap_or_else(|| default_sweep(m)),
                thresholds: thresholds(config),
            })?
        }
        Experiment::ArvesonProbe => {
            let m = require_m(config)?;
            let d = ArvesonProbeParams::default();
            run_arveson_probe(&ArvesonProbeParams {
                family: family(config, d.family)?,
                m,
                k: config.k.unwrap_or(d.k),
                generators: config.generators.clone().unwrap_or(d.generators),
                p_values: config.p.clone().unwrap_or(d.p_values),
                degree_sweep: config.degrees.clone().unwrap_or_else(|| default_sweep(m)),
                thresholds: thresholds(config),
                fit_tolerance: config.fit_tolerance.unwrap_or(d.fit_tolerance),
                tail_fraction: config.tail_fraction.unwrap_or(d.tail_fraction),
            })?
        }
        Experiment::BergerShaw if config.random == Some(true) => {
            let single = [
                ("family", config.family.is_some()),
                ("delta", config.delta.is_some()),
                ("m", config.m.is_some()),
                ("points", config.points.is_some()),
                ("generators", config.generators.is_some()),
                ("degrees", config.degrees.is_some()),
                ("var", config.var.is_some()),
            ];
            if let Some((key, _)) = single.iter().find(|(_, set)| *set) {
                return Err(usage(format!("`{key}` cannot be combined with random mode")));
            }
            let d = BergerShawRandomParams::default();
            run_berger_shaw_random(&BergerShawRandomParams {
                instances: config.instances.unwrap_or(d.instances),
                seed: config.seed.unwrap_or(d.seed),
            })?
        }
        Experiment::BergerShaw => {
            if config.instances.is_some() {
                return Err(usage("instances needs --random"));
            }
            let m = require_m(config)?;
            let d = BergerShawParams::default();
            let sources = match (&config.points, &config.generators) {
                (Some(_), Some(_)) => return Err(usage("give points or generators, not both")),
                (Some(p), None) => SourceSpec::Points(p.clone()),
                (None, Some(g)) => SourceSpec::Generators(g.clone()),
                (None, None) => d.sources,
            };
            let var = match config.var {
                Some(0) => return Err(usage("var is 1-based")),
                Some(v) => v - 1,
                None => d.var,
            };
            run_berger_shaw_check(&BergerShawParams {
                family: family(config, d.family)?,
                m,
                sources,
                degree_sweep: config.degrees.clone().unwrap_or(d.degree_sweep),
                var,
                thresholds: thresholds(config),
            })?
        }
        Experiment::QuotientProbe => {
            let m = require_m(config)?;
            let d = QuotientProbeParams::default();
            run_quotient_smoothness_probe(&QuotientProbeParams {
                family: family(config, d.family)?,
                m,
                generators: config.generators.clone().unwrap_or(d.generators),
                p_values: config.p.clone().unwrap_or(d.p_values),
                degree_sweep: config.degrees.clone().unwrap_or_else(|| default_sweep(m)),
                zero_variety_dimension: config.zero_variety_dimension,
                thresholds: thresholds(config),
                fit_tolerance: config.fit_tolerance.unwrap_or(d.fit_tolerance),
                tail_fraction: config.tail_fraction.unwrap_or(d.tail_fraction),
            })?
        }
        Experiment::Lemma1Check => {
            let d = Lemma1Params::default();
            run_lemma1_check(&Lemma1Params {
                trials: config.trials.unwrap_or(d.trials),
                seed: config.seed.unwrap_or(d.seed),
            })?
        }
    };
    Ok(report)
}

/// `<root>/<experiment>-<tag or unix seconds>`.
pub fn report_directory(config: &RunConfig) -> PathBuf {
    let root = config
        .output_directory
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let suffix = config.tag.clone().unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
            .to_string()
    });
    root.join(format!("{}-{suffix}", config.experiment))
}

/// The config as recorded next to the report: run-location keys dropped.
pub fn recorded_config(config: &RunConfig) -> String {
    let mut c = config.clone();
    c.output_directory = None;
    c.threads = None;
    c.to_text()
}

pub fn write_report(report: &ExperimentReport, config: &RunConfig, dir: &Path) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    };
    report.write_to(dir).map_err(io)?;
    std::fs::write(dir.join("config.txt"), recorded_config(config)).map_err(io)
}
