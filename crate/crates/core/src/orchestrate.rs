//! Runs a configured experiment and writes its artifacts.
//!
//! Every run leaves an output directory holding CSV tables, a gnuplot
//! script that reads them by relative path, and `manifest.json` with the
//! canonical config, the outcome, the wall-clock time and a SHA-256 of every
//! other file. CSV floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentKind, RunConfig};
use crate::diagnostics::{kato_observable, DiagnosticsSeries};
use crate::error::{MhdError, Result};
use crate::experiments::{
    compensated_oscillation_experiment, nonuniform_decay_experiment, picard_validation, FamilyBase,
    OscillationThresholds, ScaledFamilyConfig,
};
use crate::grid::{build_grid, Grid};
use crate::snapshot::save_snapshot;
use crate::solver::run;

/// Picard runs pass when the final iterate is this close to IF-RK4.
pub const PICARD_DISTANCE_TOL: f64 = 1e-4;
/// Required ratio between successive Picard increments.
pub const PICARD_CONTRACTION: f64 = 2.0;
/// Relative slack allowed on each step of the Kato observable.
pub const KATO_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ConfigError,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Error => 1,
            Status::ConfigError => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub config: String,
    pub status: Status,
    pub message: String,
    pub wall_clock_seconds: f64,
    /// Set when the run stopped before writing all of its outputs.
    pub partial: bool,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

/// Result of [`orchestrate`].
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub message: String,
    pub out_dir: PathBuf,
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
    warnings: Vec<String>,
}

impl Writer {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.artifacts.push(Artifact {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn write_file(&mut self, rel: &str) -> Result<()> {
        let bytes = fs::read(self.dir.join(rel))?;
        self.artifacts.push(Artifact {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn lq_label(q: f64) -> String {
    format!("{q}")
}

/// Header of `diagnostics.csv`.
pub fn diagnostics_header(lq: &[f64]) -> String {
    let mut h = String::from("t,E_u,E_B,D_u,D_B,diss_u_cum,diss_B_cum,low_u,high_u,low_B,high_B,amp_ratio,maxB");
    for q in lq {
        let q = lq_label(*q);
        let _ = write!(h, ",uq{q},Bq{q}");
    }
    h
}

/// The diagnostics series as CSV text.
pub fn diagnostics_csv(series: &DiagnosticsSeries) -> String {
    let mut s = diagnostics_header(&series.lq);
    s.push('\n');
    for r in &series.records {
        let mut cols = vec![
            r.t, r.e_u, r.e_b, r.d_u, r.d_b, r.diss_u_cum, r.diss_b_cum, r.low_u, r.high_u, r.low_b, r.high_b,
            r.amp_ratio, r.max_b,
        ];
        for l in &r.lq {
            cols.push(l.u);
            cols.push(l.b);
        }
        let row: Vec<String> = cols.into_iter().map(f).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn plot_script(title: &str, file: &str, xlabel: &str, ylabel: &str, columns: &[(usize, &str)], logy: bool) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot -p plot.gp\nset datafile separator ','\n");
    let _ = writeln!(s, "set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'");
    if logy {
        s.push_str("set logscale y\n");
    }
    let parts: Vec<String> = columns
        .iter()
        .map(|(c, name)| format!("'{file}' using 1:{c} skip 1 with lines title '{name}'"))
        .collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

/// Runs `cfg`, writing artifacts into `out_dir` (created if needed).
///
/// Errors are returned only when the output directory or manifest cannot
/// be written; experiment failures are reported through the status.
pub fn orchestrate(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let start = Instant::now();
    fs::create_dir_all(out_dir)?;
    let mut w = Writer {
        dir: out_dir.to_path_buf(),
        artifacts: Vec::new(),
        warnings: Vec::new(),
    };
    let result = dispatch(cfg, &mut w);
    let (status, message, partial) = match result {
        Ok((true, msg)) => (Status::Pass, msg, false),
        Ok((false, msg)) => (Status::Fail, msg, false),
        Err(e @ (MhdError::Config(_) | MhdError::BoxPolicy(_) | MhdError::InvalidSchedule(_))) => {
            (Status::ConfigError, e.to_string(), true)
        }
        Err(e) => (Status::Error, e.to_string(), true),
    };
    match status {
        Status::Pass => log::info!("{}: pass: {message}", cfg.kind.name()),
        _ => log::error!("{}: {status:?}: {message}", cfg.kind.name()),
    }
    let manifest = Manifest {
        kind: cfg.kind.name().to_string(),
        config: cfg.to_text(),
        status,
        message: message.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        partial,
        warnings: w.warnings,
        artifacts: w.artifacts,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(out_dir.join("manifest.json"), json + "\n")?;
    Ok(Outcome {
        status,
        message,
        out_dir: out_dir.to_path_buf(),
    })
}

fn grid_of(cfg: &RunConfig) -> Result<Grid> {
    build_grid(cfg.dim, cfg.points, cfg.length)
}

/// Returns `(passed, message)`.
fn dispatch(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    match cfg.kind {
        ExperimentKind::Simulate => simulate(cfg, w),
        ExperimentKind::Nonuniform => nonuniform(cfg, w),
        ExperimentKind::Oscillation => oscillation(cfg, w),
        ExperimentKind::Kato => kato(cfg, w),
        ExperimentKind::PicardValidate => picard(cfg, w),
    }
}

fn energy_plot() -> String {
    plot_script("energy", "diagnostics.csv", "t", "energy", &[(2, "E_u"), (3, "E_B")], true)
}

fn simulate(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let grid = grid_of(cfg)?;
    let (u0, b0) = cfg.data.generate(&grid)?;
    let out = run(&grid, &u0, &b0, cfg.delta, &cfg.solver)?;
    w.warnings.extend(out.warnings.iter().cloned());
    w.write("diagnostics.csv", diagnostics_csv(&out.series).as_bytes())?;
    if !out.snapshots.is_empty() {
        fs::create_dir_all(w.dir.join("snapshots"))?;
    }
    for (i, snap) in out.snapshots.iter().enumerate() {
        let rel = format!("snapshots/snap_{i:05}.bin");
        save_snapshot(&w.dir.join(&rel), &grid, snap)?;
        w.write_file(&rel)?;
    }
    w.write("plot.gp", energy_plot().as_bytes())?;
    let last = out.series.records.last().expect("runs record t = 0");
    Ok((
        true,
        format!("reached t = {} with E_u = {}, E_B = {}", f(last.t), f(last.e_u), f(last.e_b)),
    ))
}

fn nonuniform(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let base = if cfg.simulate_rows {
        FamilyBase::Simulation {
            spec: cfg.data.clone(),
            points: cfg.points,
            length: cfg.length,
        }
    } else {
        FamilyBase::Profile(cfg.data.radial_profile_u(cfg.dim)?)
    };
    let family = ScaledFamilyConfig {
        dim: cfg.dim,
        base,
        alphas: cfg.alphas.clone(),
        t_final: cfg.solver.t_final,
        eps: cfg.eps,
        policy: cfg.box_policy,
        delta: cfg.delta,
        solver: cfg.solver.clone(),
    };
    let report = nonuniform_decay_experiment(&family)?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, f);
    let mut csv = String::from("alpha,linear_ratio,duhamel_bound,simulated_ratio,pass\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            f(r.alpha),
            f(r.linear_ratio),
            opt(r.duhamel_bound),
            opt(r.simulated_ratio),
            r.pass
        );
        if let Some(e) = &r.error {
            w.warnings.push(format!("alpha = {}: {e}", r.alpha));
        }
    }
    w.write("report.csv", csv.as_bytes())?;
    let plot = plot_script(
        "non-uniform decay",
        "report.csv",
        "alpha",
        "ratio at T",
        &[(2, "linear"), (4, "simulated")],
        false,
    );
    w.write("plot.gp", plot.as_bytes())?;
    let passed = report.passed();
    let msg = format!(
        "{} of {} rows pass; linear column increasing as alpha decreases: {}",
        report.rows.iter().filter(|r| r.pass).count(),
        report.rows.len(),
        report.linear_column_increasing()
    );
    Ok((passed, msg))
}

fn oscillation(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let grid = grid_of(cfg)?;
    let (u0, b0) = cfg.data.generate(&grid)?;
    let report = compensated_oscillation_experiment(&grid, &u0, &b0, &cfg.solver, &OscillationThresholds::default())?;
    w.warnings.extend(report.warnings.iter().cloned());
    let mut csv = String::from("t,E_u,E_B\n");
    for r in &report.output.series.records {
        let _ = writeln!(csv, "{},{},{}", f(r.t), f(r.e_u), f(r.e_b));
    }
    w.write("oscillation.csv", csv.as_bytes())?;
    w.write("diagnostics.csv", diagnostics_csv(&report.output.series).as_bytes())?;
    let summary = report.summary();
    w.write("summary.txt", format!("{summary}\n").as_bytes())?;
    let plot = plot_script("compensated oscillations", "oscillation.csv", "t", "energy", &[(2, "E_u"), (3, "E_B")], true);
    w.write("plot.gp", plot.as_bytes())?;
    let msg = format!(
        "{summary}; monotone = {}, saturation = {}",
        report.monotone,
        f(report.saturation)
    );
    Ok((report.passed(), msg))
}

fn kato(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let grid = grid_of(cfg)?;
    let (u0, b0) = cfg.data.generate(&grid)?;
    let out = run(&grid, &u0, &b0, cfg.delta, &cfg.solver)?;
    w.warnings.extend(out.warnings.iter().cloned());
    w.write("diagnostics.csv", diagnostics_csv(&out.series).as_bytes())?;
    let columns: Vec<Vec<(f64, f64)>> = cfg
        .solver
        .lq
        .iter()
        .map(|q| kato_observable(&out.series, cfg.p, *q, cfg.t_min))
        .collect::<Result<_>>()?;
    let mut csv = String::from("t");
    for q in &cfg.solver.lq {
        let _ = write!(csv, ",kato_q{}", lq_label(*q));
    }
    csv.push('\n');
    let rows = columns.first().map_or(0, Vec::len);
    for i in 0..rows {
        csv.push_str(&f(columns[0][i].0));
        for c in &columns {
            csv.push(',');
            csv.push_str(&f(c[i].1));
        }
        csv.push('\n');
    }
    w.write("kato.csv", csv.as_bytes())?;
    let labels: Vec<String> = cfg.solver.lq.iter().map(|q| format!("q = {q}")).collect();
    let cols: Vec<(usize, &str)> = labels.iter().enumerate().map(|(i, l)| (i + 2, l.as_str())).collect();
    let plot = plot_script("weighted Lq norms", "kato.csv", "t", "t^s (|u|_q + |B|_q)", &cols, true);
    w.write("plot.gp", plot.as_bytes())?;
    let mut worst = 0.0f64;
    for c in &columns {
        for p in c.windows(2) {
            worst = worst.max((p[1].1 - p[0].1) / p[0].1.abs().max(f64::MIN_POSITIVE));
        }
    }
    if rows < 2 {
        return Ok((false, format!("fewer than two records with t >= {}", cfg.t_min)));
    }
    Ok((
        worst <= KATO_SLACK,
        format!("largest relative increase of the weighted norm: {}", f(worst)),
    ))
}

fn picard(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let grid = grid_of(cfg)?;
    let (u0, b0) = cfg.data.generate(&grid)?;
    let v = picard_validation(
        &grid,
        &u0,
        &b0,
        cfg.delta,
        cfg.solver.t_final,
        cfg.solver.picard_iterations,
        cfg.picard_nodes,
        cfg.solver.dt,
    )?;
    let mut csv = String::from("iteration,increment\n");
    for (i, inc) in v.increments.iter().enumerate() {
        let _ = writeln!(csv, "{},{}", i + 1, f(*inc));
    }
    w.write("picard.csv", csv.as_bytes())?;
    let plot = plot_script("Picard increments", "picard.csv", "iteration", "sup distance", &[(2, "increment")], true);
    w.write("plot.gp", plot.as_bytes())?;
    let passed = v.distance_u <= PICARD_DISTANCE_TOL && v.contracts(PICARD_CONTRACTION);
    Ok((
        passed,
        format!(
            "|du| = {}, |dB| = {}, min contraction = {}",
            f(v.distance_u),
            f(v.distance_b),
            f(v.min_contraction)
        ),
    ))
}
