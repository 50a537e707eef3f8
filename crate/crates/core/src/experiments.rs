//! Decay experiments: the self-similar scaled-data family and its
//! non-uniform decay, Prodi-type gradient bounds, the `delta = 0`
//! compensated-oscillation run, and Picard/IF-RK4 cross-validation.
//!
//! Scaling convention: `u0^alpha(x) = alpha^{n/2} u0(alpha x)`. This keeps
//! `||u0^alpha||_2 = ||u0||_2` and gives `||grad u0^alpha||_2^2 =
//! alpha^2 ||grad u0||_2^2`. (Writing the family without the `alpha x`
//! argument would make both statements false.)

use std::f64::consts::E;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::data::DataSpec;
use crate::diagnostics::{DiagnosticsSeries, RecordBuilder};
use crate::error::{MhdError, Result};
use crate::field::SpectralVectorField;
use crate::grid::{build_grid, Grid};
use crate::picard::picard_trajectory;
use crate::quadrature::RadialProfile;
use crate::solver::{run, MhdState, RunOutput, Scheme, SolverConfig};

/// How a scaled datum `u0(alpha x)` is fitted into a periodic box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxPolicy {
    /// Sample the scaled datum on the base box; its support must still fit.
    Fixed,
    /// Box length `L / alpha` and `N / alpha` points, so the spacing is kept.
    Growing,
}

impl BoxPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            BoxPolicy::Fixed => "fixed",
            BoxPolicy::Growing => "growing",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(BoxPolicy::Fixed),
            "growing" => Some(BoxPolicy::Growing),
            _ => None,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MhdError::config(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// Scaled analytic datum for the fixed-box policy: the returned spec samples
/// `alpha^{n/2} u0(alpha x)` about the box centre.
pub fn scale_data(spec: &DataSpec, alpha: f64) -> Result<DataSpec> {
    check_alpha(alpha)?;
    Ok(DataSpec {
        alpha: spec.alpha * alpha,
        ..spec.clone()
    })
}

/// Grid of the growing-box policy: `(N / alpha, L / alpha)`.
pub fn growing_grid(base: &Grid, alpha: f64) -> Result<Grid> {
    check_alpha(alpha)?;
    let n = base.points() as f64 / alpha;
    let rounded = n.round();
    if (n - rounded).abs() > 1e-9 * n || rounded as usize % 2 != 0 {
        return Err(MhdError::BoxPolicy(format!(
            "N / alpha = {n} is not an even integer for N = {} and alpha = {alpha}",
            base.points()
        )));
    }
    build_grid(base.dim(), rounded as usize, base.length() / alpha)
}

/// Spectral form of the scaling under the growing-box policy.
///
/// A field with period `L` and coefficients `c_m` rescaled to
/// `alpha^{n/2} v(alpha x)` has period `L / alpha` and coefficients
/// `alpha^{n/2} c_m` on the same integer modes, so the data is embedded into
/// the larger lattice exactly.
pub fn scale_field(base: &Grid, field: &SpectralVectorField, alpha: f64) -> Result<(Grid, SpectralVectorField)> {
    field.check(base)?;
    let grid = growing_grid(base, alpha)?;
    let factor = alpha.powf(base.dim() as f64 / 2.0);
    let mut out = SpectralVectorField::zeros(&grid);
    let dim = base.dim();
    for idx in 0..base.len() {
        let m = base.mode(idx);
        let target = grid
            .index_of_mode(&m[..dim])
            .expect("a larger lattice contains every base mode");
        for d in 0..dim {
            out.component_mut(d)[target] = factor * field.component(d)[idx];
        }
    }
    Ok((grid, out))
}

fn heat(grid: &Grid, field: &SpectralVectorField, t: f64) -> SpectralVectorField {
    let mut out = field.clone();
    out.apply_multiplier(|idx| (-grid.k2(idx) * t).exp());
    out
}

/// `||e^{t lap} u0^alpha||_2` on the whole space, from the radial profile of `u0`.
pub fn heat_semigroup_norm(profile: &RadialProfile, alpha: f64, t: f64) -> f64 {
    let c = 2.0 * alpha * alpha * t;
    profile.weighted_energy(|r| (-c * r * r).exp()).sqrt()
}

/// Relative L2 difference between the two sides of
/// `e^{t lap} u0^alpha (x) = alpha^{n/2} (e^{alpha^2 t lap} u0)(alpha x)`.
///
/// Left: the scaled datum sampled on `grid` (fixed box) and heat-evolved for
/// `t`. Right: the unscaled datum sampled on the box of length `alpha L` with
/// `alpha N` points, heat-evolved for `alpha^2 t`, then rescaled spectrally
/// onto `grid`. Both u and B enter the norm.
pub fn self_similarity_check(spec: &DataSpec, grid: &Grid, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(MhdError::config(format!("t must be >= 0, got {t}")));
    }
    let (lu, lb) = scale_data(spec, alpha)?.generate(grid)?;
    let (lu, lb) = (heat(grid, &lu, t), heat(grid, &lb, t));

    let nb = grid.points() as f64 * alpha;
    if (nb - nb.round()).abs() > 1e-9 * nb || nb.round() as usize % 2 != 0 || nb.round() < 8.0 {
        return Err(MhdError::BoxPolicy(format!(
            "alpha N = {nb} must be an even integer >= 8 for the unscaled box"
        )));
    }
    let base = build_grid(grid.dim(), nb.round() as usize, grid.length() * alpha)?;
    let (ru, rb) = spec.generate(&base)?;
    let tau = alpha * alpha * t;
    let (_, ru) = scale_field(&base, &heat(&base, &ru, tau), alpha)?;
    let (_, rb) = scale_field(&base, &heat(&base, &rb, tau), alpha)?;

    let diff = lu.distance(&ru, grid).powi(2) + lb.distance(&rb, grid).powi(2);
    let norm = lu.norm_sq(grid) + lb.norm_sq(grid);
    Ok(if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() })
}

/// Realized nonlinear correction to `||u(T)||_2 / ||u0||_2`:
///
/// ```text
/// int_0^T (2 e (T - s))^{-1/2} (||u||_4^2 + ||B||_4^2) ds / ||u0||_2
/// ```
///
/// `(2 e tau)^{-1/2} = sup_k |k| e^{-|k|^2 tau}` is the norm of
/// `e^{tau lap} P div` on L2, and `||u (x) u - B (x) B||_2 <= ||u||_4^2 + ||B||_4^2`.
/// On each record interval the integrand's larger end value multiplies the
/// exact kernel integral.
pub fn realized_duhamel_bound(series: &DiagnosticsSeries, u0_norm: f64) -> Result<f64> {
    let last = series.records.last().ok_or(MhdError::EmptySeries)?;
    let t_final = last.t;
    let f = |r: &crate::diagnostics::DiagnosticsRecord| -> Result<f64> {
        let l = r
            .lq_norms(4.0)
            .ok_or_else(|| MhdError::MissingDiagnostic("L4 norms".into()))?;
        Ok(l.u * l.u + l.b * l.b)
    };
    let c = (2.0 * E).sqrt().recip();
    let mut total = 0.0;
    for w in series.records.windows(2) {
        let (a, b) = (w[0].t, w[1].t);
        let kernel = 2.0 * c * ((t_final - a).max(0.0).sqrt() - (t_final - b).max(0.0).sqrt());
        total += f(&w[0])?.max(f(&w[1])?) * kernel;
    }
    if series.records.len() == 1 {
        f(last)?;
    }
    Ok(if u0_norm > 0.0 { total / u0_norm } else { total })
}

/// Base data of a scaled family.
#[derive(Clone, Debug)]
pub enum FamilyBase {
    /// Semi-analytic only: no simulation is run.
    Profile(RadialProfile),
    /// Simulated from an analytic generator on a base box.
    Simulation { spec: DataSpec, points: usize, length: f64 },
}

#[derive(Clone, Debug)]
pub struct ScaledFamilyConfig {
    pub dim: usize,
    pub base: FamilyBase,
    /// Distinct, descending, in `(0, 1]`.
    pub alphas: Vec<f64>,
    pub t_final: f64,
    pub eps: f64,
    pub policy: BoxPolicy,
    pub delta: f64,
    /// Step, dealiasing, cadence and the nonlinear switch of each row's run;
    /// its horizon is replaced by `t_final`.
    pub solver: SolverConfig,
}

impl ScaledFamilyConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.alphas.is_empty() {
            problems.push("alpha list is empty".to_string());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            problems.push(format!("alpha values must lie in (0, 1], got {a}"));
        }
        if self.alphas.windows(2).any(|w| w[1] >= w[0]) {
            problems.push("alpha values must be distinct and descending".to_string());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            problems.push(format!("T must be positive, got {}", self.t_final));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            problems.push(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.dim != 2 && self.dim != 3 {
            problems.push(format!("dimension must be 2 or 3, got {}", self.dim));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(MhdError::config(problems.join("; ")))
        }
    }

    fn profile(&self) -> Result<RadialProfile> {
        match &self.base {
            FamilyBase::Profile(p) => {
                if p.dim() != self.dim {
                    return Err(MhdError::config("profile dimension differs from the family dimension"));
                }
                Ok(p.clone())
            }
            FamilyBase::Simulation { spec, .. } => spec.radial_profile_u(self.dim),
        }
    }
}

/// One row of the non-uniform decay table.
#[derive(Clone, Debug, PartialEq)]
pub struct NonuniformRow {
    pub alpha: f64,
    /// `||e^{T lap} u0^alpha||_2 / ||u0||_2` on the whole space.
    pub linear_ratio: f64,
    pub duhamel_bound: Option<f64>,
    pub simulated_ratio: Option<f64>,
    pub pass: bool,
    /// Simulation failure of this row, if any.
    pub error: Option<String>,
}

impl NonuniformRow {
    /// `linear_ratio - duhamel_bound >= 1 - eps`.
    pub fn lower_bound_holds(&self, eps: f64) -> bool {
        self.linear_ratio - self.duhamel_bound.unwrap_or(0.0) >= 1.0 - eps
    }

    /// `|simulated_ratio - linear_ratio| <= duhamel_bound`; true when no
    /// simulation was requested.
    pub fn simulation_within_bound(&self) -> bool {
        match (self.simulated_ratio, self.duhamel_bound) {
            (Some(s), Some(b)) => (s - self.linear_ratio).abs() <= b,
            (None, _) => self.error.is_none(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NonuniformReport {
    pub rows: Vec<NonuniformRow>,
    pub eps: f64,
}

impl NonuniformReport {
    /// Every simulated row stays within its bound and the row with the
    /// smallest alpha satisfies the `1 - eps` lower bound.
    pub fn passed(&self) -> bool {
        let smallest = self.rows.last();
        self.rows.iter().all(|r| r.simulation_within_bound()) && smallest.is_some_and(|r| r.pass)
    }

    /// Linear ratios strictly increase as alpha decreases.
    pub fn linear_column_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].linear_ratio > w[0].linear_ratio)
    }
}

fn simulate_row(cfg: &ScaledFamilyConfig, alpha: f64) -> Result<(f64, f64)> {
    let FamilyBase::Simulation { spec, points, length } = &cfg.base else {
        unreachable!("profile families are not simulated")
    };
    let base_spec = DataSpec {
        alpha: 1.0,
        ..spec.clone()
    };
    let base_grid = build_grid(cfg.dim, *points, *length)?;
    let (grid, u0, b0) = match cfg.policy {
        BoxPolicy::Growing => {
            let (bu, bb) = base_spec.generate(&base_grid)?;
            let (grid, u0) = scale_field(&base_grid, &bu, alpha)?;
            let (_, b0) = scale_field(&base_grid, &bb, alpha)?;
            (grid, u0, b0)
        }
        BoxPolicy::Fixed => {
            let (u0, b0) = scale_data(&base_spec, alpha)?.generate(&base_grid)?;
            (base_grid, u0, b0)
        }
    };
    let mut lq = cfg.solver.lq.clone();
    if !lq.contains(&4.0) {
        lq.push(4.0);
    }
    let solver = SolverConfig {
        t_final: cfg.t_final,
        scheme: Scheme::IfRk4,
        snapshot_every: None,
        lq,
        ..cfg.solver.clone()
    };
    let out = run(&grid, &u0, &b0, cfg.delta, &solver)?;
    let u0_norm = u0.norm(&grid);
    let ratio = out.final_state.u.norm(&grid) / u0_norm;
    let bound = realized_duhamel_bound(&out.series, u0_norm)?;
    Ok((ratio, bound))
}

/// Linear ratios for every alpha plus, for simulated families, a full
/// nonlinear run per alpha. Rows run concurrently and are returned in the
/// configured (descending) alpha order; a failing row records its error.
pub fn nonuniform_decay_experiment(cfg: &ScaledFamilyConfig) -> Result<NonuniformReport> {
    cfg.validate()?;
    let profile = cfg.profile()?;
    let norm0 = profile.norm();
    let simulate = matches!(cfg.base, FamilyBase::Simulation { .. });
    let rows = cfg
        .alphas
        .par_iter()
        .map(|&alpha| {
            let linear_ratio = heat_semigroup_norm(&profile, alpha, cfg.t_final) / norm0;
            let mut row = NonuniformRow {
                alpha,
                linear_ratio,
                duhamel_bound: None,
                simulated_ratio: None,
                pass: false,
                error: None,
            };
            if simulate {
                match simulate_row(cfg, alpha) {
                    Ok((ratio, bound)) => {
                        row.simulated_ratio = Some(ratio);
                        row.duhamel_bound = Some(bound);
                    }
                    Err(e) => {
                        log::warn!("alpha = {alpha}: {e}");
                        row.error = Some(e.to_string());
                    }
                }
            }
            row.pass = row.error.is_none() && row.lower_bound_holds(cfg.eps) && row.simulation_within_bound();
            row
        })
        .collect();
    Ok(NonuniformReport { rows, eps: cfg.eps })
}

/// Outcome of the Prodi-type checks on a scaled-data run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProdiReport {
    pub alpha: f64,
    pub dim: usize,
    /// `phi(0) / phi_base`, to be compared with `alpha^2`.
    pub phi0_ratio: f64,
    /// `|phi0_ratio / alpha^2 - 1|`.
    pub scaling_error: f64,
    /// Smallest `C >= 0` with `phi(t) <= phi(0) exp(C int_0^t phi)` at every record.
    pub c_emp: f64,
    /// Smallest `C >= 0` with `phi(t)^{-2} >= phi(0)^{-2} - 2 C t` at every record.
    pub c_cubic: f64,
    /// `sup_t phi(t) / phi(0)`.
    pub growth: f64,
    /// Largest alpha for which the cubic bound with `c_cubic` keeps
    /// `phi <= 2 phi(0)` over the run (infinite when `c_cubic = 0`).
    pub alpha_threshold: f64,
}

impl ProdiReport {
    pub fn scaling_holds(&self, tol: f64) -> bool {
        self.scaling_error <= tol
    }

    /// `sup_t phi(t) <= 2 phi(0)`.
    pub fn doubling_holds(&self) -> bool {
        self.growth <= 2.0
    }
}

/// Prodi checks on `phi = ||grad u||^2 + ||grad B||^2`. `phi_base` is the
/// value for the unscaled datum.
pub fn prodi_bound_check(series: &DiagnosticsSeries, alpha: f64, phi_base: f64) -> Result<ProdiReport> {
    check_alpha(alpha)?;
    let first = series.records.first().ok_or(MhdError::EmptySeries)?;
    let phi0 = first.phi();
    if !(phi0 > 0.0 && phi0.is_finite()) || !(phi_base > 0.0) {
        return Err(MhdError::MissingDiagnostic("positive gradient norms".into()));
    }
    let phi0_ratio = phi0 / phi_base;
    let mut c_emp = 0.0f64;
    let mut c_cubic = 0.0f64;
    let mut growth = 1.0f64;
    for r in &series.records[1..] {
        let phi = r.phi();
        if !phi.is_finite() {
            return Err(MhdError::MissingDiagnostic("finite gradient norms".into()));
        }
        growth = growth.max(phi / phi0);
        let integral = r.diss_u_cum + r.diss_b_cum;
        if integral > 0.0 && phi > phi0 {
            c_emp = c_emp.max((phi / phi0).ln() / integral);
        }
        let dt = r.t - first.t;
        if dt > 0.0 && phi > phi0 {
            c_cubic = c_cubic.max((phi0.powi(-2) - phi.powi(-2)) / (2.0 * dt));
        }
    }
    let horizon = series.records.last().map_or(0.0, |r| r.t - first.t);
    // phi <= 2 phi0 over [0, T] when 2 C T <= (3/4) phi0^{-2}
    let alpha_threshold = if c_cubic > 0.0 && horizon > 0.0 {
        (3.0 / (8.0 * c_cubic * horizon)).powf(0.25) / phi_base.sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ProdiReport {
        alpha,
        dim: series.dim,
        phi0_ratio,
        scaling_error: (phi0_ratio / (alpha * alpha) - 1.0).abs(),
        c_emp,
        c_cubic,
        growth,
        alpha_threshold,
    })
}

/// Acceptance thresholds of the compensated-oscillation experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillationThresholds {
    /// Required `||u(T)||_2 / ||u0||_2`.
    pub u_fraction: f64,
    /// Allowed plateau spread relative to M.
    pub spread: f64,
    /// Allowed relative growth of `int ||grad u||^2` over the saturation window.
    pub saturation: f64,
    /// Allowed increase of `E_u + E_B` between records, relative to E(0).
    pub monotone_slack: f64,
    /// Fraction of records in the plateau window.
    pub plateau_window: f64,
    /// Fraction of the horizon in the saturation window.
    pub saturation_window: f64,
}

impl Default for OscillationThresholds {
    fn default() -> Self {
        OscillationThresholds {
            u_fraction: 0.1,
            spread: 0.02,
            saturation: 1e-3,
            monotone_slack: 1e-8,
            plateau_window: 0.2,
            saturation_window: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OscillationReport {
    pub u_final_fraction: f64,
    /// Plateau value of `||B||_2`.
    pub m: f64,
    pub plateau_spread: f64,
    pub monotone: bool,
    /// Largest increase of `E_u + E_B` between consecutive records, relative to E(0).
    pub max_energy_increase: f64,
    /// Relative growth of `int ||grad u||^2` over the saturation window.
    pub saturation: f64,
    pub sup_max_b: f64,
    pub warnings: Vec<String>,
    pub output: RunOutput,
    pub thresholds: OscillationThresholds,
}

impl OscillationReport {
    pub fn passed(&self) -> bool {
        let th = &self.thresholds;
        self.monotone
            && self.m > 0.0
            && self.u_final_fraction <= th.u_fraction
            && self.plateau_spread <= th.spread * self.m
            && self.saturation < th.saturation
    }

    pub fn summary(&self) -> String {
        format!(
            "M = {:.16e}, plateau spread = {:.16e}, u_final_fraction = {:.16e}, sup max|B| = {:.16e}",
            self.m, self.plateau_spread, self.u_final_fraction, self.sup_max_b
        )
    }
}

/// Runs the `delta = 0` system from `(u0, B0)` and measures the decay of u,
/// the plateau of `||B||_2` and the monotonicity of the combined energy.
pub fn compensated_oscillation_experiment(
    grid: &Grid,
    u0: &SpectralVectorField,
    b0: &SpectralVectorField,
    solver: &SolverConfig,
    thresholds: &OscillationThresholds,
) -> Result<OscillationReport> {
    if !(thresholds.plateau_window > 0.0 && thresholds.plateau_window <= 1.0)
        || !(thresholds.saturation_window > 0.0 && thresholds.saturation_window <= 1.0)
    {
        return Err(MhdError::config("oscillation windows must lie in (0, 1]"));
    }
    let cfg = SolverConfig {
        scheme: Scheme::IfRk4,
        ..solver.clone()
    };
    let output = run(grid, u0, b0, 0.0, &cfg)?;
    let recs = &output.series.records;
    let first = &recs[0];
    let last = recs.last().expect("runs record t = 0");
    let e0 = first.e_u + first.e_b;

    let mut max_increase = 0.0f64;
    for w in recs.windows(2) {
        let inc = (w[1].e_u + w[1].e_b) - (w[0].e_u + w[0].e_b);
        max_increase = max_increase.max(if e0 > 0.0 { inc / e0 } else { inc });
    }
    let monotone = max_increase <= thresholds.monotone_slack;

    let u_final_fraction = if first.e_u > 0.0 {
        (last.e_u / first.e_u).sqrt()
    } else {
        0.0
    };

    let window = ((recs.len() as f64 * thresholds.plateau_window).ceil() as usize).clamp(1, recs.len());
    let tail: Vec<f64> = recs[recs.len() - window..].iter().map(|r| r.e_b.sqrt()).collect();
    let m = tail.iter().sum::<f64>() / tail.len() as f64;
    let plateau_spread =
        tail.iter().cloned().fold(f64::MIN, f64::max) - tail.iter().cloned().fold(f64::MAX, f64::min);

    let t_start = last.t - thresholds.saturation_window * (last.t - first.t);
    let before = recs
        .iter()
        .rev()
        .find(|r| r.t <= t_start)
        .map_or(0.0, |r| r.diss_u_cum);
    let saturation = if last.diss_u_cum > 0.0 {
        (last.diss_u_cum - before) / last.diss_u_cum
    } else {
        0.0
    };

    Ok(OscillationReport {
        u_final_fraction,
        m,
        plateau_spread,
        monotone,
        max_energy_increase: max_increase,
        saturation,
        sup_max_b: output.sup_max_b(),
        warnings: output.warnings.clone(),
        output,
        thresholds: thresholds.clone(),
    })
}

/// Picard iteration measured against an IF-RK4 reference.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardValidation {
    /// `||u_picard(T) - u_rk4(T)||_2`
    pub distance_u: f64,
    pub distance_b: f64,
    /// Iterate-to-iterate distances (sup over nodes).
    pub increments: Vec<f64>,
    /// Increments below this are at roundoff level and exempt from the contraction test.
    pub roundoff_floor: f64,
    /// Smallest `increments[i-1] / increments[i]` for `i >= 2` above the floor.
    pub min_contraction: f64,
}

impl PicardValidation {
    pub fn contracts(&self, factor: f64) -> bool {
        self.min_contraction >= factor
    }
}

/// Runs the Picard iteration and an IF-RK4 reference with step `dt` from
/// the same data and compares them at `t_final`.
#[allow(clippy::too_many_arguments)]
pub fn picard_validation(
    grid: &Grid,
    u0: &SpectralVectorField,
    b0: &SpectralVectorField,
    delta: f64,
    t_final: f64,
    n_iter: usize,
    nodes: usize,
    dt: f64,
) -> Result<PicardValidation> {
    let pic = picard_trajectory(grid, u0, b0, delta, t_final, n_iter, nodes, true)?;
    let cfg = SolverConfig {
        dt,
        t_final,
        record_every: usize::MAX,
        ..SolverConfig::default()
    };
    let reference = run(grid, u0, b0, delta, &cfg)?.final_state;
    let fin = pic.final_state();
    let scale = (u0.norm_sq(grid) + b0.norm_sq(grid)).sqrt();
    let roundoff_floor = 1e3 * f64::EPSILON * scale;
    let mut min_contraction = f64::INFINITY;
    for i in 1..pic.increments.len() {
        let (prev, cur) = (pic.increments[i - 1], pic.increments[i]);
        if prev <= roundoff_floor {
            break;
        }
        min_contraction = min_contraction.min(prev / cur.max(roundoff_floor));
    }
    Ok(PicardValidation {
        distance_u: fin.u.distance(&reference.u, grid),
        distance_b: fin.b.distance(&reference.b, grid),
        increments: pic.increments,
        roundoff_floor,
        min_contraction,
    })
}

/// Diagnostics series of a precomputed trajectory (used for Picard output).
pub fn series_of(grid: &Grid, states: &[MhdState], nonlinear: bool, lq: Vec<f64>) -> Result<DiagnosticsSeries> {
    let delta = states.first().map_or(0.0, |s| s.delta);
    let mut b = RecordBuilder::new(grid, delta, nonlinear, lq);
    for s in states {
        b.record(s)?;
    }
    Ok(b.finish())
}

/// Largest continuum-normalized amplitude `L^n |v_hat(k)|`.
pub fn peak_amplitude(grid: &Grid, field: &SpectralVectorField) -> f64 {
    let vol = grid.volume();
    (0..grid.len())
        .map(|idx| vol * field.mode_norm_sq(idx).sqrt())
        .fold(0.0, f64::max)
}

#[allow(dead_code)]
fn _assert_send() {
    fn is_send<T: Send + Sync>() {}
    is_send::<Grid>();
    is_send::<SpectralVectorField>();
    is_send::<Complex64>();
}
