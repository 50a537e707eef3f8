//! Run configuration files.
//!
//! Plain `key = value` lines, optionally grouped under `[experiment]`,
//! `[grid]`, `[solver]` and `[data]` headers; `#` starts a comment. Keys
//! before the first header may belong to any section. Every problem in a
//! file is collected with its line number before anything is rejected.
//!
//! ```text
//! [experiment]
//! kind = nonuniform          # simulate | nonuniform | oscillation | kato | picard-validate
//! alpha = 0.4, 0.2, 0.1
//! eps = 0.05
//!
//! [grid]
//! n = 2
//! N = 40
//! L = 14
//!
//! [solver]
//! dt = 0.01
//! T = 1
//! delta = 1
//!
//! [data]
//! data = gaussian-bump
//! u_amp = 0.25
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::data::{DataSpec, Generator};
use crate::error::MhdError;
use crate::experiments::BoxPolicy;
use crate::solver::{Scheme, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Nonuniform,
    Oscillation,
    Kato,
    PicardValidate,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Nonuniform => "nonuniform",
            ExperimentKind::Oscillation => "oscillation",
            ExperimentKind::Kato => "kato",
            ExperimentKind::PicardValidate => "picard-validate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ExperimentKind::Simulate,
            ExperimentKind::Nonuniform,
            ExperimentKind::Oscillation,
            ExperimentKind::Kato,
            ExperimentKind::PicardValidate,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::IfRk4 => "if-rk4",
        Scheme::Picard => "picard",
    }
}

/// Fully validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub dim: usize,
    pub points: usize,
    pub length: f64,
    pub delta: f64,
    /// Step, horizon, scheme, cadence and Lq exponents (`q`).
    pub solver: SolverConfig,
    /// Time nodes of the Picard iteration in `picard-validate` runs.
    pub picard_nodes: usize,
    pub data: DataSpec,
    pub alphas: Vec<f64>,
    pub eps: f64,
    pub box_policy: BoxPolicy,
    /// Whether `nonuniform` rows run full simulations.
    pub simulate_rows: bool,
    /// Kato weight exponent.
    pub p: f64,
    /// First time included in the Kato observable.
    pub t_min: f64,
    pub out: Option<String>,
}

/// One problem found in a configuration file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Every problem found in a configuration file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

impl From<ConfigErrors> for MhdError {
    fn from(e: ConfigErrors) -> Self {
        MhdError::Config(e.to_string())
    }
}

const KEYS: &[(&str, &str)] = &[
    ("experiment", "kind"),
    ("experiment", "alpha"),
    ("experiment", "eps"),
    ("experiment", "box"),
    ("experiment", "simulate"),
    ("experiment", "q"),
    ("experiment", "p"),
    ("experiment", "t_min"),
    ("experiment", "out"),
    ("grid", "n"),
    ("grid", "N"),
    ("grid", "L"),
    ("solver", "dt"),
    ("solver", "T"),
    ("solver", "delta"),
    ("solver", "dealias"),
    ("solver", "scheme"),
    ("solver", "picard_iterations"),
    ("solver", "picard_nodes"),
    ("solver", "record_every"),
    ("solver", "snapshot_every"),
    ("solver", "nonlinear"),
    ("data", "data"),
    ("data", "u_amp"),
    ("data", "b_amp"),
    ("data", "u_norm"),
    ("data", "b_norm"),
    ("data", "sigma"),
    ("data", "offset"),
    ("data", "mode"),
    ("data", "k_lo"),
    ("data", "k_hi"),
    ("data", "seed"),
];

struct Entries {
    values: BTreeMap<&'static str, (String, usize)>,
    issues: Vec<ConfigIssue>,
}

impl Entries {
    fn issue(&mut self, line: Option<usize>, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|(_, l)| *l)
    }

    fn raw(&self, key: &str) -> Option<(String, usize)> {
        self.values.get(key).cloned()
    }

    fn typed<T>(&mut self, key: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let (v, line) = self.raw(key)?;
        match parse(&v) {
            Some(x) => Some(x),
            None => {
                self.issue(Some(line), key, format!("expected {what}, got {v:?}"));
                None
            }
        }
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        self.typed(key, "a finite number", |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        self.typed(key, "a non-negative integer", |s| s.parse::<u64>().ok())
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        self.typed(key, "true or false", |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        self.typed(key, "a comma-separated list of numbers", |s| {
            s.split(',')
                .map(|x| x.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect()
        })
    }

    fn required<T>(&mut self, key: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && !self.values.contains_key(key) {
            self.issue(None, key, "missing required key");
        }
        v
    }

    /// Records an invariant violation at the key's line.
    fn check(&mut self, ok: bool, key: &str, message: impl Into<String>) {
        if !ok {
            let line = self.line(key);
            self.issue(line, key, message);
        }
    }
}

fn tokenize(text: &str) -> Entries {
    let mut e = Entries {
        values: BTreeMap::new(),
        issues: Vec::new(),
    };
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            match name.strip_suffix(']').map(str::trim) {
                Some(s) if KEYS.iter().any(|(sec, _)| *sec == s) => section = Some(s.to_string()),
                Some(s) => {
                    e.issue(Some(line), s, "unknown section");
                    section = Some(s.to_string());
                }
                None => e.issue(Some(line), content, "malformed section header"),
            }
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            e.issue(Some(line), content, "expected key = value");
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        let known = KEYS.iter().find(|(_, key)| *key == k);
        match (known, &section) {
            (None, _) => e.issue(Some(line), k, "unknown key"),
            (Some((sec, _)), Some(s)) if sec != s => {
                e.issue(Some(line), k, format!("belongs to section [{sec}], not [{s}]"))
            }
            (Some((_, key)), _) => {
                if let Some((_, first)) = e.values.get(key) {
                    let first = *first;
                    e.issue(Some(line), k, format!("duplicate key (first set on line {first})"));
                } else if v.is_empty() {
                    e.issue(Some(line), k, "empty value");
                } else {
                    e.values.insert(key, (v.to_string(), line));
                }
            }
        }
    }
    e
}

/// Parses and validates a configuration, reporting all problems at once.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut e = tokenize(text);

    let kind = e
        .typed("kind", "an experiment kind", ExperimentKind::parse)
        .unwrap_or(ExperimentKind::Simulate);
    let dim = e.uint("n");
    let dim = e.required("n", dim);
    let points = e.uint("N");
    let points = e.required("N", points);
    let length = e.float("L");
    let length = e.required("L", length);
    let dt = e.float("dt");
    let dt = e.required("dt", dt);
    let t_final = e.float("T");
    let t_final = e.required("T", t_final);
    let delta = e.float("delta").unwrap_or(1.0);
    let defaults = SolverConfig::default();
    let dealias = e.boolean("dealias").unwrap_or(defaults.dealias);
    let scheme = e
        .typed("scheme", "if-rk4 or picard", |s| match s {
            "if-rk4" => Some(Scheme::IfRk4),
            "picard" => Some(Scheme::Picard),
            _ => None,
        })
        .unwrap_or(defaults.scheme);
    let picard_iterations = e.uint("picard_iterations").unwrap_or(defaults.picard_iterations as u64);
    let picard_nodes = e.uint("picard_nodes").unwrap_or(64);
    let record_every = e.uint("record_every").unwrap_or(defaults.record_every as u64);
    let snapshot_every = e.uint("snapshot_every");
    let nonlinear = e.boolean("nonlinear").unwrap_or(defaults.nonlinear);
    let lq = e.list("q").unwrap_or_default();

    let dd = DataSpec::default();
    let generator = e.typed("data", "a data generator name", Generator::parse);
    let generator = e.required("data", generator).unwrap_or(dd.generator);
    let data = DataSpec {
        generator,
        u_amp: e.float("u_amp").unwrap_or(dd.u_amp),
        b_amp: e.float("b_amp").unwrap_or(dd.b_amp),
        u_norm: e.float("u_norm"),
        b_norm: e.float("b_norm"),
        sigma: e.float("sigma").unwrap_or(dd.sigma),
        offset: e.float("offset").unwrap_or(dd.offset),
        mode: e.uint("mode").map_or(dd.mode, |m| m.min(u32::MAX as u64) as u32),
        k_lo: e.float("k_lo").unwrap_or(dd.k_lo),
        k_hi: e.float("k_hi").unwrap_or(dd.k_hi),
        seed: e.uint("seed").unwrap_or(dd.seed),
        alpha: 1.0,
    };

    let alphas = e.list("alpha").unwrap_or_default();
    let eps = e.float("eps").unwrap_or(0.05);
    let box_policy = e
        .typed("box", "fixed or growing", BoxPolicy::parse)
        .unwrap_or(BoxPolicy::Growing);
    let simulate_rows = e.boolean("simulate").unwrap_or(true);
    let p = e.float("p").unwrap_or(2.0);
    let t_min = e.float("t_min").unwrap_or(1.0);
    let out = e.raw("out").map(|(v, _)| v);

    // invariants
    if let Some(n) = dim {
        e.check(n == 2 || n == 3, "n", format!("dimension must be 2 or 3, got {n}"));
    }
    if let Some(n) = points {
        e.check(n >= 8 && n % 2 == 0, "N", format!("points per dimension must be even and >= 8, got {n}"));
    }
    if let Some(l) = length {
        e.check(l > 0.0, "L", format!("box length must be positive, got {l}"));
    }
    if let Some(dt) = dt {
        e.check(dt > 0.0, "dt", format!("time step must be positive, got {dt}"));
    }
    if let Some(t) = t_final {
        e.check(t >= 0.0, "T", format!("final time must be >= 0, got {t}"));
    }
    e.check(delta >= 0.0, "delta", format!("delta must be >= 0, got {delta}"));
    e.check(picard_iterations >= 1, "picard_iterations", "must be >= 1");
    e.check(picard_nodes >= 2, "picard_nodes", "must be >= 2");
    e.check(record_every >= 1, "record_every", "must be >= 1");
    e.check(snapshot_every != Some(0), "snapshot_every", "must be >= 1");
    e.check(lq.iter().all(|q| *q >= 2.0), "q", "Lq exponents must be >= 2");
    e.check(data.u_amp >= 0.0, "u_amp", "must be >= 0");
    e.check(data.b_amp >= 0.0, "b_amp", "must be >= 0");
    e.check(data.u_norm.is_none_or(|v| v >= 0.0), "u_norm", "must be >= 0");
    e.check(data.b_norm.is_none_or(|v| v >= 0.0), "b_norm", "must be >= 0");
    e.check(data.sigma > 0.0, "sigma", "must be positive");
    e.check(data.mode >= 1, "mode", "must be >= 1");
    e.check(data.k_lo >= 0.0, "k_lo", "must be >= 0");
    e.check(data.k_hi >= data.k_lo, "k_hi", "must be >= k_lo");
    e.check(delta > 0.0 || dealias || !nonlinear, "dealias", "delta = 0 runs require dealias = true");
    e.check(
        scheme != Scheme::Picard || delta > 0.0,
        "scheme",
        "the Picard scheme requires delta > 0",
    );

    match kind {
        ExperimentKind::Nonuniform => {
            e.check(!alphas.is_empty(), "alpha", "nonuniform runs need an alpha list");
            e.check(
                alphas.iter().all(|a| *a > 0.0 && *a <= 1.0),
                "alpha",
                "alpha values must lie in (0, 1]",
            );
            e.check(
                alphas.windows(2).all(|w| w[1] < w[0]),
                "alpha",
                "alpha values must be distinct and descending",
            );
            e.check(eps > 0.0 && eps < 1.0, "eps", format!("eps must lie in (0, 1), got {eps}"));
            e.check(
                generator == Generator::GaussianBump,
                "data",
                "nonuniform runs need gaussian-bump data (closed-form profile)",
            );
            e.check(t_final.is_none_or(|t| t > 0.0), "T", "nonuniform runs need T > 0");
            if let (Some(n), BoxPolicy::Growing, true) = (points, box_policy, simulate_rows) {
                for a in &alphas {
                    let m = n as f64 / a;
                    e.check(
                        (m - m.round()).abs() <= 1e-9 * m && m.round() as u64 % 2 == 0,
                        "alpha",
                        format!("N / alpha = {m} must be an even integer under the growing-box policy"),
                    );
                }
            }
        }
        ExperimentKind::Oscillation => {
            e.check(delta == 0.0, "delta", "oscillation runs use delta = 0");
            e.check(scheme == Scheme::IfRk4, "scheme", "oscillation runs use if-rk4");
        }
        ExperimentKind::Kato => {
            e.check(!lq.is_empty(), "q", "kato runs need at least one Lq exponent");
            e.check(
                p >= 1.0 && lq.iter().all(|q| p <= *q),
                "p",
                format!("need 1 <= p <= q, got p = {p}"),
            );
            e.check(t_min > 0.0, "t_min", "must be positive");
        }
        ExperimentKind::PicardValidate => {
            e.check(delta > 0.0, "delta", "picard-validate runs need delta > 0");
            e.check(t_final.is_none_or(|t| t > 0.0), "T", "picard-validate runs need T > 0");
        }
        ExperimentKind::Simulate => {}
    }

    if !e.issues.is_empty() {
        e.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(e.issues));
    }
    Ok(RunConfig {
        kind,
        dim: dim.unwrap() as usize,
        points: points.unwrap() as usize,
        length: length.unwrap(),
        delta,
        solver: SolverConfig {
            dt: dt.unwrap(),
            t_final: t_final.unwrap(),
            dealias,
            scheme,
            picard_iterations: picard_iterations as usize,
            record_every: record_every as usize,
            nonlinear,
            snapshot_every: snapshot_every.map(|s| s as usize),
            lq,
        },
        picard_nodes: picard_nodes as usize,
        data,
        alphas,
        eps,
        box_policy,
        simulate_rows,
        p,
        t_min,
        out,
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Canonical text form; `parse_config(&cfg.to_text())` returns `cfg`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("[experiment]\nkind", self.kind.name().into());
        if !self.alphas.is_empty() {
            kv("alpha", join(&self.alphas));
        }
        kv("eps", format!("{:?}", self.eps));
        kv("box", self.box_policy.name().into());
        kv("simulate", self.simulate_rows.to_string());
        if !self.solver.lq.is_empty() {
            kv("q", join(&self.solver.lq));
        }
        kv("p", format!("{:?}", self.p));
        kv("t_min", format!("{:?}", self.t_min));
        if let Some(out) = &self.out {
            kv("out", out.clone());
        }
        kv("\n[grid]\nn", self.dim.to_string());
        kv("N", self.points.to_string());
        kv("L", format!("{:?}", self.length));
        let sv = &self.solver;
        kv("\n[solver]\ndt", format!("{:?}", sv.dt));
        kv("T", format!("{:?}", sv.t_final));
        kv("delta", format!("{:?}", self.delta));
        kv("dealias", sv.dealias.to_string());
        kv("scheme", scheme_name(sv.scheme).into());
        kv("picard_iterations", sv.picard_iterations.to_string());
        kv("picard_nodes", self.picard_nodes.to_string());
        kv("record_every", sv.record_every.to_string());
        if let Some(se) = sv.snapshot_every {
            kv("snapshot_every", se.to_string());
        }
        kv("nonlinear", sv.nonlinear.to_string());
        let d = &self.data;
        kv("\n[data]\ndata", d.generator.name().into());
        kv("u_amp", format!("{:?}", d.u_amp));
        kv("b_amp", format!("{:?}", d.b_amp));
        if let Some(v) = d.u_norm {
            kv("u_norm", format!("{v:?}"));
        }
        if let Some(v) = d.b_norm {
            kv("b_norm", format!("{v:?}"));
        }
        kv("sigma", format!("{:?}", d.sigma));
        kv("offset", format!("{:?}", d.offset));
        kv("mode", d.mode.to_string());
        kv("k_lo", format!("{:?}", d.k_lo));
        kv("k_hi", format!("{:?}", d.k_hi));
        kv("seed", d.seed.to_string());
        s
    }
}
