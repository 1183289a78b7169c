use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use proptest::prelude::*;
use shiftlab_cli::args::Cli;
use shiftlab_cli::config::{format_complex, parse_complex, Experiment, RunConfig, C64};
use shiftlab_cli::resolve;

fn shiftlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(args)
        .env("SHIFTLAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn config_of(args: &[&str]) -> RunConfig {
    let cli = Cli::try_parse_from(std::iter::once("shiftlab").chain(args.iter().copied())).unwrap();
    resolve(&cli.command).unwrap().unwrap()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn example5_flags_become_config() {
    let c = config_of(&["example5", "--m", "2", "--delta", "0.25,1.0", "--degrees", "8,12,16,20"]);
    assert_eq!(c.experiment, Experiment::Example5);
    assert_eq!(c.m, Some(2));
    assert_eq!(c.delta, Some(vec![0.25, 1.0]));
    assert_eq!(c.degrees, Some(vec![8, 12, 16, 20]));
}

#[test]
fn arveson_flags_become_config() {
    let c = config_of(&["arveson-probe", "--family", "drury-arveson", "--m", "2", "--gens", "z1^2+z2^2", "--p", "3"]);
    assert_eq!(c.family.as_deref(), Some("drury-arveson"));
    assert_eq!(c.generators, Some(vec!["z1^2+z2^2".to_string()]));
    assert_eq!(c.p, Some(vec![3.0]));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "# sweep\nexperiment = example5\nm = 2\ndelta = 0.5, 2\ndegrees = 8, 12, 16, 20\n").unwrap();
    let c = config_of(&["example5", "--config", file.to_str().unwrap(), "--delta", "1"]);
    assert_eq!(c.delta, Some(vec![1.0]));
    assert_eq!(c.degrees, Some(vec![8, 12, 16, 20]));
}

#[test]
fn missing_m_is_a_usage_error() {
    let out = tempfile::tempdir().unwrap();
    let o = shiftlab(&["example5"], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("Usage: shiftlab example5"));
}

#[test]
fn failed_precondition_exits_2() {
    let out = tempfile::tempdir().unwrap();
    let o = shiftlab(&["example3", "--max-degree", "100"], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("must exceed"));
}

#[test]
fn unknown_subcommand_and_flag_exit_2() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(shiftlab(&["frobnicate"], out.path()).status.code(), Some(2));
    assert_eq!(shiftlab(&["lemma1-check", "--bogus"], out.path()).status.code(), Some(2));
    assert_eq!(shiftlab(&[], out.path()).status.code(), Some(2));
}

#[test]
fn malformed_polynomial_reports_position() {
    let out = tempfile::tempdir().unwrap();
    let o = shiftlab(&["arveson-probe", "--m", "2", "--gens", "z1^2+z2^"], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("at character 8"), "{}", text(&o.stderr));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.cfg");
    std::fs::write(&file, "trials = 3\nspeed = fast\n").unwrap();
    let o = shiftlab(&["lemma1-check", "--config", file.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("unknown key `speed`"));
}

#[test]
fn lemma1_default_succeeds_and_writes_report() {
    let out = tempfile::tempdir().unwrap();
    let o = shiftlab(&["lemma1-check", "--tag", "t"], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("PASS identity residual"));
    let dir = out.path().join("lemma1-check-t");
    let names: Vec<String> = tree(&dir).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["config.txt", "report.json", "trials.csv"]);
    let config = std::fs::read_to_string(dir.join("config.txt")).unwrap();
    assert_eq!(RunConfig::parse(&config, None).unwrap().tag.as_deref(), Some("t"));
}

#[test]
fn counterexample_writes_two_trend_tables() {
    let out = tempfile::tempdir().unwrap();
    let o = shiftlab(&["counterexample", "--blocks", "16", "--p", "3", "--tag", "c"], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let dir = out.path().join("counterexample-c");
    assert!(dir.join("full.csv").exists() && dir.join("restricted.csv").exists());
    let restricted = std::fs::read_to_string(dir.join("restricted.csv")).unwrap();
    assert_eq!(restricted.lines().count(), 17);
}

#[test]
fn out_flag_beats_environment() {
    let env_root = tempfile::tempdir().unwrap();
    let flag_root = tempfile::tempdir().unwrap();
    let o = shiftlab(
        &["example3", "--n", "1,5", "--max-degree", "20", "--tag", "x", "--out", flag_root.path().to_str().unwrap()],
        env_root.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_root.path().join("example3-x/report.json").exists());
    assert!(!env_root.path().join("example3-x").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["berger-shaw", "--random", "--instances", "8", "--seed", "9", "--tag", "r", "--threads", "2"];
    assert_eq!(shiftlab(&args, a.path()).status.code(), Some(0));
    assert_eq!(shiftlab(&args, b.path()).status.code(), Some(0));
    assert_eq!(tree(&a.path().join("berger-shaw-r")), tree(&b.path().join("berger-shaw-r")));
}

#[test]
fn berger_shaw_points_and_generators() {
    let out = tempfile::tempdir().unwrap();
    let points = shiftlab(
        &["berger-shaw", "--m", "2", "--points", "0.5;0, 0.1+0.2i;-0.3", "--degrees", "6,8,10,12", "--var", "2", "--tag", "p"],
        out.path(),
    );
    assert_eq!(points.status.code(), Some(0), "{}", text(&points.stderr));
    let gens = shiftlab(
        &["berger-shaw", "--m", "1", "--gens", "1, z1 - 0.5*z1^2", "--family", "drury-arveson", "--tag", "g"],
        out.path(),
    );
    assert_eq!(gens.status.code(), Some(0), "{}", text(&gens.stderr));
    let both = shiftlab(&["berger-shaw", "--m", "1", "--points", "0.5", "--gens", "z1"], out.path());
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn list_families_names_every_family() {
    let out = tempfile::tempdir().unwrap();
    let o = shiftlab(&["list-families"], out.path());
    assert_eq!(o.status.code(), Some(0));
    let listing = text(&o.stdout);
    for id in shiftlab::WeightFamily::IDS {
        assert!(listing.contains(id), "{id}");
    }
}

#[test]
fn every_subcommand_help_documents_grammar_and_config() {
    let out = tempfile::tempdir().unwrap();
    for e in Experiment::ALL {
        for flag in ["-h", "--help"] {
            let o = shiftlab(&[e.id(), flag], out.path());
            assert_eq!(o.status.code(), Some(0));
            let help = text(&o.stdout);
            assert!(help.contains("Polynomial generators:") && help.contains("Config file"), "{e} {flag}");
        }
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6, Just(0.0)]
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::option::of(1usize..5),
        prop::option::of(prop::collection::vec(finite(), 0..4)),
        prop::option::of(prop::collection::vec(1usize..100, 1..6)),
        prop::option::of(prop::collection::vec(
            prop::collection::vec((finite(), finite()).prop_map(|(a, b)| C64::new(a, b)), 1..3),
            1..4,
        )),
        prop::option::of(any::<u64>()),
        prop::option::of("[a-z0-9_-]{1,12}"),
        prop::option::of(finite()),
    )
        .prop_map(|(m, delta, degrees, points, seed, tag, plateau)| {
            let mut c = RunConfig::new(Experiment::BergerShaw);
            c.m = m;
            c.delta = delta;
            c.degrees = degrees;
            c.points = points;
            c.seed = seed;
            c.tag = tag;
            c.plateau = plateau;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn config_round_trips(c in arb_config()) {
        let text = c.to_text();
        prop_assert_eq!(RunConfig::parse(&text, None).unwrap(), c);
    }

    #[test]
    fn complex_round_trips(re in finite(), im in finite()) {
        let z = C64::new(re, im);
        prop_assert_eq!(parse_complex(&format_complex(z)), Some(z));
    }
}
