use std::path::Path;
use std::process::Command;

use mhdlab::config::{parse_config, ExperimentKind};
use mhdlab::orchestrate::{orchestrate, Status};

const SIMULATE: &str = "\
[experiment]
kind = simulate
q = 4

[grid]
n = 2
N = 32
L = 6.283185307179586

[solver]
dt = 1e-3
T = 0.02
delta = 1

[data]
data = random-solenoidal
b_amp = 0.3
seed = 7
";

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn simulate_writes_diagnostics_with_schema_header() {
    let cfg = parse_config(SIMULATE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = orchestrate(&cfg, dir.path()).unwrap();
    assert_eq!(out.status, Status::Pass);
    let csv = read(dir.path(), "diagnostics.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,E_u,E_B,D_u,D_B,diss_u_cum,diss_B_cum,low_u,high_u,low_B,high_B,amp_ratio,maxB,uq4,Bq4"
    );
    assert_eq!(lines.count(), 21);
    let first_row = csv.lines().nth(1).unwrap();
    for cell in first_row.split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
    }
    assert!(read(dir.path(), "plot.gp").contains("'diagnostics.csv'"));
}

#[test]
fn manifest_lists_checksums_and_echo_round_trips() {
    let cfg = parse_config(SIMULATE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    orchestrate(&cfg, dir.path()).unwrap();
    let m = manifest(dir.path());
    assert_eq!(m["status"], "pass");
    assert_eq!(m["partial"], false);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    let echo = m["config"].as_str().unwrap();
    assert_eq!(parse_config(echo).unwrap(), cfg);

    let mut listed: Vec<String> = Vec::new();
    for a in m["artifacts"].as_array().unwrap() {
        let rel = a["path"].as_str().unwrap();
        let bytes = std::fs::read(dir.path().join(rel)).unwrap();
        use sha2::Digest;
        assert_eq!(a["sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&bytes)));
        listed.push(rel.to_string());
    }
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    listed.sort();
    on_disk.sort();
    assert_eq!(listed, on_disk);
}

#[test]
fn nonuniform_report_has_one_row_per_alpha() {
    let text = "\
kind = nonuniform
alpha = 0.4,0.2,0.1
eps = 0.05
simulate = false
n = 2
N = 40
L = 14
dt = 0.01
T = 1
delta = 1
data = gaussian-bump
";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.kind, ExperimentKind::Nonuniform);
    let dir = tempfile::tempdir().unwrap();
    let out = orchestrate(&cfg, dir.path()).unwrap();
    assert_eq!(out.status, Status::Pass, "{}", out.message);
    let csv = read(dir.path(), "report.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,linear_ratio,duhamel_bound,simulated_ratio,pass");
    assert_eq!(lines.len(), 4);
    // only small alpha keeps 95% of the norm at T = 1
    assert!(lines[1].starts_with("4.0000000000000002e-1,") && lines[1].ends_with(",false"));
    assert!(lines[3].ends_with(",true"));
}

#[test]
fn runtime_box_violation_is_a_config_error_with_partial_manifest() {
    let text = "kind = simulate\nn = 2\nN = 32\nL = 4\ndt = 0.01\nT = 0.1\ndata = gaussian-bump\n";
    let cfg = parse_config(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = orchestrate(&cfg, dir.path()).unwrap();
    assert_eq!(out.status, Status::ConfigError);
    assert_eq!(out.status.exit_code(), 2);
    let m = manifest(dir.path());
    assert_eq!(m["partial"], true);
    assert_eq!(m["status"], "config-error");
}

#[test]
fn picard_and_kato_runs_write_their_tables() {
    let picard = "kind = picard-validate\nn = 2\nN = 16\nL = 6.283185307179586\ndt = 0.01\nT = 0.5\n\
                  data = random-solenoidal\nu_norm = 0.01\nb_norm = 0.01\nk_hi = 3\n";
    let dir = tempfile::tempdir().unwrap();
    let out = orchestrate(&parse_config(picard).unwrap(), dir.path()).unwrap();
    assert_eq!(out.status, Status::Pass, "{}", out.message);
    assert_eq!(read(dir.path(), "picard.csv").lines().count(), 7);

    let kato = "kind = kato\nq = 4\nt_min = 1\nn = 2\nN = 16\nL = 6.283185307179586\ndt = 0.01\nT = 2\n\
                record_every = 10\ndata = random-solenoidal\nu_norm = 0.01\nb_norm = 0.01\n";
    let dir = tempfile::tempdir().unwrap();
    let out = orchestrate(&parse_config(kato).unwrap(), dir.path()).unwrap();
    assert_eq!(out.status, Status::Pass, "{}", out.message);
    let csv = read(dir.path(), "kato.csv");
    assert_eq!(csv.lines().next().unwrap(), "t,kato_q4");
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn oscillation_run_writes_summary() {
    let text = "kind = oscillation\nn = 2\nN = 32\nL = 6.283185307179586\ndt = 0.01\nT = 0.2\ndelta = 0\n\
                data = shear-mode\nu_amp = 0\nb_amp = 1\n";
    let dir = tempfile::tempdir().unwrap();
    orchestrate(&parse_config(text).unwrap(), dir.path()).unwrap();
    assert_eq!(read(dir.path(), "oscillation.csv").lines().next().unwrap(), "t,E_u,E_B");
    assert!(read(dir.path(), "summary.txt").starts_with("M = "));
}

fn mhdlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mhdlab"))
}

#[test]
fn binary_exit_codes_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, SIMULATE).unwrap();

    let run = |out: &str, seed: Option<&str>| {
        let mut cmd = mhdlab();
        cmd.arg(&cfg_path).arg("--out").arg(dir.path().join(out)).env("MHDLAB_THREADS", "2");
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        cmd.output().unwrap()
    };
    let a = run("a", None);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    run("b", None);
    run("c", Some("8"));
    let csv = |d: &str| std::fs::read(dir.path().join(d).join("diagnostics.csv")).unwrap();
    assert_eq!(csv("a"), csv("b"));
    assert_ne!(csv("a"), csv("c"));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/manifest.json")).unwrap()).unwrap();
    assert_eq!(parse_config(m["config"].as_str().unwrap()).unwrap().data.seed, 8);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, SIMULATE.replace("dt = 1e-3", "dt = 0").replace("seed = 7", "seed = x")).unwrap();
    let out = mhdlab().arg(&bad).arg("--out").arg(dir.path().join("bad")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 11: dt"), "{err}");
    assert!(err.contains("line 18: seed"), "{err}");
}

#[test]
fn failing_experiment_exits_with_one() {
    // u does not decay to 10% by T = 0.2: the oscillation verdict fails
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("osc.cfg");
    std::fs::write(
        &cfg_path,
        "kind = oscillation\nn = 2\nN = 32\nL = 6.283185307179586\ndt = 0.01\nT = 0.2\ndelta = 0\n\
         data = taylor-green\nb_amp = 0.5\n",
    )
    .unwrap();
    let out = mhdlab().arg(&cfg_path).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "fail");
}
