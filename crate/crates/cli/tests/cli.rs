//! End-to-end tests of the `civisim` binary: argument handling, exit codes,
//! and the files a run leaves behind.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_civisim"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

/// A fast-running scenario on the shipped small corpus.
fn tiny_scenario(dir: &Path, seed: u64) -> PathBuf {
    let data = repo_root().join("data/coruna_small");
    let text = format!(
        r#"schema_version = 1
scenario_kind = "preventive_measures"
replicates = 2
rng_seed = {seed}
initial_infected_fraction = 0.02

[virus]

[calendar]
horizon_days = 8

[population]
survey = "{data}/survey.csv"
census = "{data}/census.csv"
profile_tree = "{data}/profile_tree.json"
tract_map = "{data}/tract_map.txt"
target_size = 300
"#,
        data = data.display()
    );
    let path = dir.join("tiny.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_every_shipped_preset() {
    for preset in std::fs::read_dir(repo_root().join("presets")).unwrap() {
        let path = preset.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let out = bin()
            .args(["validate", "--scenario"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{} rejected: {}",
            path.display(),
            stderr_of(&out)
        );
    }
}

#[test]
fn validate_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_scenario(dir.path(), 1);
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("[virus]", "[virus]\np_icud = 1.5\np_se = -0.1\n");
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["validate", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("p_icud"), "missing p_icud violation: {err}");
    assert!(err.contains("p_se"), "missing p_se violation: {err}");
}

#[test]
fn missing_virus_section_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_scenario(dir.path(), 1);
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("[virus]\n", "");
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["validate", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("virus"));
}

#[test]
fn nonexistent_scenario_fails_cleanly() {
    let out = bin()
        .args(["validate", "--scenario", "/no/such/file.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_replicates_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_scenario(dir.path(), 1);
    let out = bin()
        .args(["run", "--replicates", "0", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn run_writes_series_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(dir.path(), 5);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    for name in [
        "replicate_00.csv",
        "replicate_01.csv",
        "mean.csv",
        "summary.json",
        "manifest.json",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let csv = std::fs::read_to_string(out_dir.join("replicate_00.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "day,susceptible,exposed,infectious,hospitalized,icu,quarantine,recovered,dead,\
new_infections,communications,acceptance_level"
    );
    assert_eq!(lines.count(), 8);
}

#[test]
fn rerun_with_identical_args_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(dir.path(), 9);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = bin()
            .args(["run", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr_of(&out));
    }
    for name in [
        "replicate_00.csv",
        "replicate_01.csv",
        "mean.csv",
        "summary.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name} differs between reruns"
        );
    }
}

#[test]
fn seed_override_changes_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(dir.path(), 5);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out_dir, seed) in [(&a, "5"), (&b, "6")] {
        let out = bin()
            .args(["run", "--seed", seed, "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr_of(&out));
    }
    assert_ne!(
        std::fs::read(a.join("replicate_00.csv")).unwrap(),
        std::fs::read(b.join("replicate_00.csv")).unwrap()
    );
}

#[test]
fn plots_and_graph_dump_flags_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(dir.path(), 5);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", "--plots", "--dump-graph", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let phases = std::fs::read_to_string(out_dir.join("mean_phases.svg")).unwrap();
    assert!(phases.starts_with("<svg"));
    assert!(phases.contains("#d62728"), "infectious curve color missing");
    assert!(out_dir.join("mean_acceptance.svg").exists());
    let graph = std::fs::read_to_string(out_dir.join("graph_initial.csv")).unwrap();
    assert!(graph.starts_with("source,target,kind,trust"));
    assert!(graph.lines().count() > 300, "graph dump implausibly small");
}

#[test]
fn plot_subcommand_renders_selected_series() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(dir.path(), 5);
    let out_dir = dir.path().join("out");
    let run = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", stderr_of(&run));
    let svg = dir.path().join("dead.svg");
    let ok = bin()
        .args(["plot", "--series", "dead,recovered", "--csv"])
        .arg(out_dir.join("mean.csv"))
        .arg("--out")
        .arg(&svg)
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", stderr_of(&ok));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("#7f7f7f"));

    let bad = bin()
        .args(["plot", "--series", "nonsense", "--csv"])
        .arg(out_dir.join("mean.csv"))
        .arg("--out")
        .arg(dir.path().join("x.svg"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr_of(&bad).contains("nonsense"));
}

#[test]
fn env_var_sets_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = tiny_scenario(dir.path(), 5);
    let base = dir.path().join("envout");
    let out = bin()
        .env("CIVISIM_OUT_DIR", &base)
        .current_dir(dir.path())
        .args(["run", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(base.join("tiny/mean.csv").exists());
}
