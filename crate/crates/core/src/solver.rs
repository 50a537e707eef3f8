//! Time integration of the incompressible MHD system
//!
//! ```text
//! du/dt + (u.grad)u - (B.grad)B + grad p = lap u
//! dB/dt + (u.grad)B - (B.grad)u         = delta lap B
//! div u = div B = 0
//! ```
//!
//! Pressure never appears in the evolution: the momentum nonlinearity is
//! Leray-projected. The linear terms are integrated exactly by the factor
//! `exp(-|k|^2 t)` (resp. `exp(-delta |k|^2 t)`); the nonlinear remainder is
//! advanced with classical RK4 in the integrating-factor variables.
//!
//! Quadratic products are formed in physical space in flux form,
//! `(u.grad)u = div(u (x) u)` and `(B.grad)u - (u.grad)B = div(u (x) B - B (x) u)`,
//! which is exact for solenoidal fields and needs only `dim` inverse
//! transforms per field.

use num_complex::Complex64;

use crate::diagnostics::{DiagnosticsSeries, RecordBuilder};
use crate::error::{MhdError, Result};
use crate::field::{
    dealias_in_place, leray_project_in_place, max_divergence, zero_nyquist_in_place,
    SpectralVectorField,
};
use crate::grid::Grid;
use crate::picard;

/// Full solution snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct MhdState {
    pub t: f64,
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
    pub delta: f64,
}

impl MhdState {
    pub fn new(u: SpectralVectorField, b: SpectralVectorField, delta: f64) -> Self {
        MhdState { t: 0.0, u, b, delta }
    }

    pub fn zeros(grid: &Grid, delta: f64) -> Self {
        MhdState::new(
            SpectralVectorField::zeros(grid),
            SpectralVectorField::zeros(grid),
            delta,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    IfRk4,
    Picard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    pub picard_iterations: usize,
    pub record_every: usize,
    /// Switch off the quadratic terms (pure heat flow).
    pub nonlinear: bool,
    /// Keep a full state every this many records (none when `None`).
    pub snapshot_every: Option<usize>,
    /// Exponents of the Lq norms attached to every record.
    pub lq: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_final: 1.0,
            dealias: true,
            scheme: Scheme::IfRk4,
            picard_iterations: 6,
            record_every: 1,
            nonlinear: true,
            snapshot_every: None,
            lq: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            problems.push(format!("T must be >= 0, got {}", self.t_final));
        }
        if self.picard_iterations < 1 {
            problems.push("picard_iterations must be >= 1".to_string());
        }
        if self.record_every < 1 {
            problems.push("record_every must be >= 1".to_string());
        }
        if self.snapshot_every == Some(0) {
            problems.push("snapshot_every must be >= 1".to_string());
        }
        if let Some(q) = self.lq.iter().find(|q| !(**q >= 2.0 && q.is_finite())) {
            problems.push(format!("Lq exponents must lie in [2, inf), got {q}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(MhdError::config(problems.join("; ")))
        }
    }

    /// Number of steps and the step actually used so that the run ends exactly at `t_final`.
    pub fn step_plan(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let steps = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }
}

/// Dealiased, projected nonlinear terms together with the largest physical
/// component magnitude seen while forming them.
#[derive(Clone, Debug)]
pub struct NonlinearTerms {
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
    pub max_amplitude: f64,
}

/// Reusable evaluator of the quadratic terms.
#[derive(Debug)]
pub struct NonlinearEvaluator {
    dealias: bool,
    phys_u: Vec<Vec<f64>>,
    phys_b: Vec<Vec<f64>>,
    work: Vec<Complex64>,
}

impl NonlinearEvaluator {
    pub fn new(grid: &Grid, dealias: bool) -> Self {
        NonlinearEvaluator {
            dealias,
            phys_u: vec![vec![0.0; grid.len()]; grid.dim()],
            phys_b: vec![vec![0.0; grid.len()]; grid.dim()],
            work: vec![Complex64::default(); grid.len()],
        }
    }

    fn load_physical(
        &mut self,
        grid: &Grid,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
    ) -> Result<f64> {
        let mut max_amp = 0.0f64;
        for (src, dst) in [(u, &mut self.phys_u), (b, &mut self.phys_b)] {
            for d in 0..grid.dim() {
                self.work.copy_from_slice(src.component(d));
                if self.dealias {
                    for idx in 0..grid.len() {
                        if !grid.is_retained(idx) {
                            self.work[idx] = Complex64::default();
                        }
                    }
                }
                grid.fft_inverse(&mut self.work)?;
                for (x, z) in dst[d].iter_mut().zip(&self.work) {
                    *x = z.re;
                    max_amp = max_amp.max(z.re.abs());
                }
            }
        }
        Ok(max_amp)
    }

    pub fn evaluate(
        &mut self,
        grid: &Grid,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
        t: f64,
        stage: &'static str,
    ) -> Result<NonlinearTerms> {
        u.check(grid)?;
        b.check(grid)?;
        if !u.is_finite() || !b.is_finite() {
            return Err(MhdError::Blowup { t, stage });
        }
        let dim = grid.dim();
        let max_amplitude = self.load_physical(grid, u, b)?;
        let mut nu = SpectralVectorField::zeros(grid);
        let mut nb = SpectralVectorField::zeros(grid);
        let i_unit = Complex64::new(0.0, 1.0);

        // S_ij = u_i u_j - B_i B_j ; N_u_i = -i sum_j k_j S_ij
        for i in 0..dim {
            for j in i..dim {
                let (ui, uj) = (&self.phys_u[i], &self.phys_u[j]);
                let (bi, bj) = (&self.phys_b[i], &self.phys_b[j]);
                product_hat(grid, &mut self.work, |x| ui[x] * uj[x] - bi[x] * bj[x])?;
                for idx in 0..grid.len() {
                    let k = grid.k(idx);
                    let s = self.work[idx];
                    nu.component_mut(i)[idx] -= i_unit * k[j] * s;
                    if i != j {
                        nu.component_mut(j)[idx] -= i_unit * k[i] * s;
                    }
                }
            }
        }
        // A_ij = u_i B_j - B_i u_j ; N_B_i = i sum_j k_j A_ij
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (ui, uj) = (&self.phys_u[i], &self.phys_u[j]);
                let (bi, bj) = (&self.phys_b[i], &self.phys_b[j]);
                product_hat(grid, &mut self.work, |x| ui[x] * bj[x] - bi[x] * uj[x])?;
                for idx in 0..grid.len() {
                    let k = grid.k(idx);
                    let a = self.work[idx];
                    nb.component_mut(i)[idx] += i_unit * k[j] * a;
                    nb.component_mut(j)[idx] -= i_unit * k[i] * a;
                }
            }
        }

        leray_project_in_place(&mut nu, grid)?;
        if self.dealias {
            dealias_in_place(&mut nu, grid)?;
            dealias_in_place(&mut nb, grid)?;
        }
        zero_nyquist_in_place(&mut nu, grid);
        zero_nyquist_in_place(&mut nb, grid);
        if !nu.is_finite() || !nb.is_finite() {
            return Err(MhdError::Blowup { t, stage });
        }
        Ok(NonlinearTerms {
            u: nu,
            b: nb,
            max_amplitude,
        })
    }
}

/// Forward transform of the pointwise product built by `f`, left in `work`.
fn product_hat(grid: &Grid, work: &mut [Complex64], f: impl Fn(usize) -> f64) -> Result<()> {
    for (idx, w) in work.iter_mut().enumerate() {
        *w = Complex64::new(f(idx), 0.0);
    }
    grid.fft_forward(work)
}

/// `(P F[(B.grad)B - (u.grad)u], F[(B.grad)u - (u.grad)B])`, dealiased.
pub fn nonlinear_rhs(
    grid: &Grid,
    state: &MhdState,
    dealias: bool,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    let terms = NonlinearEvaluator::new(grid, dealias).evaluate(grid, &state.u, &state.b, state.t, "rhs")?;
    Ok((terms.u, terms.b))
}

fn physical_components(grid: &Grid, field: &SpectralVectorField, dealias: bool) -> Result<Vec<Vec<f64>>> {
    let mut f = field.clone();
    if dealias {
        dealias_in_place(&mut f, grid)?;
    }
    Ok(crate::field::transform_inverse(grid, &f)?.components().to_vec())
}

/// `F[div(a (x) b)]`, i.e. component `i` is `i sum_j k_j F[a_i b_j]`.
fn flux_divergence(grid: &Grid, a: &[Vec<f64>], b: &[Vec<f64>], dealias: bool) -> Result<SpectralVectorField> {
    let dim = grid.dim();
    let mut out = SpectralVectorField::zeros(grid);
    let mut work = vec![Complex64::default(); grid.len()];
    for i in 0..dim {
        for j in 0..dim {
            for (idx, w) in work.iter_mut().enumerate() {
                *w = Complex64::new(a[i][idx] * b[j][idx], 0.0);
            }
            grid.fft_forward(&mut work)?;
            for idx in 0..grid.len() {
                out.component_mut(i)[idx] += Complex64::new(0.0, grid.k(idx)[j]) * work[idx];
            }
        }
    }
    if dealias {
        dealias_in_place(&mut out, grid)?;
    }
    zero_nyquist_in_place(&mut out, grid);
    Ok(out)
}

/// Unprojected advection terms `(F[(u.grad)u], F[(B.grad)B])`.
pub fn advection_terms(
    grid: &Grid,
    state: &MhdState,
    dealias: bool,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    let pu = physical_components(grid, &state.u, dealias)?;
    let pb = physical_components(grid, &state.b, dealias)?;
    Ok((
        flux_divergence(grid, &pu, &pu, dealias)?,
        flux_divergence(grid, &pb, &pb, dealias)?,
    ))
}

/// Fourier transform of the stress `u_j u_l - B_j B_l` for `j <= l`, in
/// row-major upper-triangular order.
pub fn stress_hat(grid: &Grid, state: &MhdState, dealias: bool) -> Result<Vec<Vec<Complex64>>> {
    if !state.u.is_finite() || !state.b.is_finite() {
        return Err(MhdError::Blowup { t: state.t, stage: "pressure" });
    }
    let pu = physical_components(grid, &state.u, dealias)?;
    let pb = physical_components(grid, &state.b, dealias)?;
    let dim = grid.dim();
    let mut out = Vec::new();
    for j in 0..dim {
        for l in j..dim {
            let mut w: Vec<Complex64> = (0..grid.len())
                .map(|x| Complex64::new(pu[j][x] * pu[l][x] - pb[j][x] * pb[l][x], 0.0))
                .collect();
            grid.fft_forward(&mut w)?;
            if dealias {
                for (idx, c) in w.iter_mut().enumerate() {
                    if !grid.is_retained(idx) {
                        *c = Complex64::default();
                    }
                }
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// Pressure from `lap p = sum_{j,l} d_j d_l (B_j B_l - u_j u_l)`:
/// `p(k) = -sum k_j k_l F[u_j u_l - B_j B_l] / |k|^2`, with `p(0) = 0`.
pub fn recover_pressure(grid: &Grid, state: &MhdState, dealias: bool) -> Result<Vec<Complex64>> {
    let stress = stress_hat(grid, state, dealias)?;
    let dim = grid.dim();
    let mut p = vec![Complex64::default(); grid.len()];
    for idx in 1..grid.len() {
        let k = grid.k(idx);
        let mut acc = Complex64::default();
        let mut s = 0;
        for j in 0..dim {
            for l in j..dim {
                let w = if j == l { 1.0 } else { 2.0 };
                acc += w * k[j] * k[l] * stress[s][idx];
                s += 1;
            }
        }
        p[idx] = -acc / grid.k2(idx);
    }
    Ok(p)
}

/// Integrating-factor RK4 stepper with cached exponentials for one `dt`.
#[derive(Debug)]
pub struct Integrator<'g> {
    grid: &'g Grid,
    dt: f64,
    nonlinear: bool,
    eu_half: Vec<f64>,
    eu_full: Vec<f64>,
    eb_half: Vec<f64>,
    eb_full: Vec<f64>,
    eval: NonlinearEvaluator,
}

fn multiplied(field: &SpectralVectorField, mult: &[f64]) -> SpectralVectorField {
    let mut out = field.clone();
    out.apply_multiplier(|idx| mult[idx]);
    out
}

impl<'g> Integrator<'g> {
    pub fn new(grid: &'g Grid, delta: f64, dt: f64, dealias: bool, nonlinear: bool) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(MhdError::config(format!("dt must be positive, got {dt}")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(MhdError::config(format!("delta must be >= 0, got {delta}")));
        }
        let k2 = grid.k2_all();
        let ex = |scale: f64| k2.iter().map(|k| (-scale * k).exp()).collect::<Vec<_>>();
        Ok(Integrator {
            grid,
            dt,
            nonlinear,
            eu_half: ex(0.5 * dt),
            eu_full: ex(dt),
            eb_half: ex(0.5 * delta * dt),
            eb_full: ex(delta * dt),
            eval: NonlinearEvaluator::new(grid, dealias),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn cfl_limit(&self, max_amplitude: f64) -> f64 {
        if max_amplitude > 0.0 {
            0.5 * self.grid.spacing() / max_amplitude
        } else {
            f64::INFINITY
        }
    }

    pub fn step(&mut self, s: &MhdState) -> Result<MhdState> {
        let h = self.dt;
        let grid = self.grid;
        let t = s.t;
        if !self.nonlinear {
            return Ok(MhdState {
                t: t + h,
                u: multiplied(&s.u, &self.eu_full),
                b: multiplied(&s.b, &self.eb_full),
                delta: s.delta,
            });
        }

        let k1 = self.eval.evaluate(grid, &s.u, &s.b, t, "k1")?;
        let limit = self.cfl_limit(k1.max_amplitude);
        if h > limit {
            return Err(MhdError::Cfl { t, dt: h, limit });
        }

        let mut u2 = s.u.clone();
        u2.axpy(0.5 * h, &k1.u);
        let mut b2 = s.b.clone();
        b2.axpy(0.5 * h, &k1.b);
        let u2 = multiplied(&u2, &self.eu_half);
        let b2 = multiplied(&b2, &self.eb_half);
        let k2 = self.eval.evaluate(grid, &u2, &b2, t + 0.5 * h, "k2")?;

        let mut u3 = multiplied(&s.u, &self.eu_half);
        u3.axpy(0.5 * h, &k2.u);
        let mut b3 = multiplied(&s.b, &self.eb_half);
        b3.axpy(0.5 * h, &k2.b);
        let k3 = self.eval.evaluate(grid, &u3, &b3, t + 0.5 * h, "k3")?;

        let mut u4 = multiplied(&s.u, &self.eu_full);
        u4.axpy(h, &multiplied(&k3.u, &self.eu_half));
        let mut b4 = multiplied(&s.b, &self.eb_full);
        b4.axpy(h, &multiplied(&k3.b, &self.eb_half));
        let k4 = self.eval.evaluate(grid, &u4, &b4, t + h, "k4")?;

        let mut u = s.u.clone();
        u.axpy(h / 6.0, &k1.u);
        let mut u = multiplied(&u, &self.eu_full);
        let mut mid = k2.u;
        mid.axpy(1.0, &k3.u);
        u.axpy(h / 3.0, &multiplied(&mid, &self.eu_half));
        u.axpy(h / 6.0, &k4.u);

        let mut b = s.b.clone();
        b.axpy(h / 6.0, &k1.b);
        let mut b = multiplied(&b, &self.eb_full);
        let mut mid = k2.b;
        mid.axpy(1.0, &k3.b);
        b.axpy(h / 3.0, &multiplied(&mid, &self.eb_half));
        b.axpy(h / 6.0, &k4.b);

        if !u.is_finite() || !b.is_finite() {
            return Err(MhdError::Blowup { t: t + h, stage: "update" });
        }
        Ok(MhdState {
            t: t + h,
            u,
            b,
            delta: s.delta,
        })
    }
}

/// One IF-RK4 step of size `dt`.
pub fn step_ifrk4(grid: &Grid, state: &MhdState, dt: f64, dealias: bool, nonlinear: bool) -> Result<MhdState> {
    Integrator::new(grid, state.delta, dt, dealias, nonlinear)?.step(state)
}

/// Output of a [`run`].
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub series: DiagnosticsSeries,
    pub snapshots: Vec<MhdState>,
    pub final_state: MhdState,
    pub warnings: Vec<String>,
}

impl RunOutput {
    /// Largest `max |B|` seen at any record.
    pub fn sup_max_b(&self) -> f64 {
        self.series.records.iter().map(|r| r.max_b).fold(0.0, f64::max)
    }
}

/// Relative tolerance used when checking that initial data is solenoidal and
/// mean-zero.
const DATA_TOLERANCE: f64 = 1e-10;

/// Threshold on the outer-band amplitude of B relative to its peak beyond
/// which a `delta = 0` run is flagged as under-resolved.
pub const TAIL_THRESHOLD: f64 = 1e-6;

fn check_initial(grid: &Grid, name: &str, f: &SpectralVectorField) -> Result<()> {
    f.check(grid)?;
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    let mean = (0..grid.dim()).map(|d| f.component(d)[0].norm()).fold(0.0, f64::max);
    if mean > DATA_TOLERANCE * scale {
        return Err(MhdError::config(format!("{name} must be mean-zero (|mean| = {mean:e})")));
    }
    let kmax = grid.kappa() * grid.points() as f64;
    let div = max_divergence(f, grid);
    if div > DATA_TOLERANCE * scale * kmax {
        return Err(MhdError::config(format!("{name} must be divergence-free (max |k.v| = {div:e})")));
    }
    if !f.is_finite() {
        return Err(MhdError::Blowup { t: 0.0, stage: "initial data" });
    }
    Ok(())
}

/// Ratio of the largest B amplitude in the outer fifth of the retained band
/// to the peak B amplitude.
pub fn spectral_tail_ratio(grid: &Grid, field: &SpectralVectorField) -> f64 {
    let cutoff = grid.points() as f64 / 3.0;
    let inner = 0.8 * cutoff;
    let mut peak = 0.0f64;
    let mut tail = 0.0f64;
    for idx in 0..grid.len() {
        let a = field.mode_norm_sq(idx).sqrt();
        peak = peak.max(a);
        let m = grid.max_axis_mode(idx) as f64;
        if m > inner && m <= cutoff {
            tail = tail.max(a);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        tail / peak
    }
}

/// Integrates from `(u0, b0)` to `cfg.t_final`, emitting a diagnostics record
/// every `cfg.record_every` steps including both end points.
pub fn run(
    grid: &Grid,
    u0: &SpectralVectorField,
    b0: &SpectralVectorField,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<RunOutput> {
    cfg.validate()?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(MhdError::config(format!("delta must be >= 0, got {delta}")));
    }
    if delta == 0.0 && !cfg.dealias && cfg.nonlinear {
        return Err(MhdError::config("delta = 0 runs require dealiasing"));
    }
    if cfg.scheme == Scheme::Picard && delta == 0.0 {
        return Err(MhdError::config("the Picard scheme requires delta > 0"));
    }
    check_initial(grid, "u0", u0)?;
    check_initial(grid, "B0", b0)?;

    let mut state = MhdState::new(u0.clone(), b0.clone(), delta);
    if cfg.dealias {
        dealias_in_place(&mut state.u, grid)?;
        dealias_in_place(&mut state.b, grid)?;
    }
    zero_nyquist_in_place(&mut state.u, grid);
    zero_nyquist_in_place(&mut state.b, grid);

    let mut builder = RecordBuilder::new(grid, delta, cfg.nonlinear, cfg.lq.clone());
    let mut snapshots = Vec::new();
    let mut warnings = Vec::new();
    let mut tail_warned = false;
    let (steps, dt) = cfg.step_plan();

    let mut emit = |state: &MhdState, builder: &mut RecordBuilder| -> Result<()> {
        builder.record(state)?;
        let n_records = builder.len();
        if let Some(every) = cfg.snapshot_every {
            if (n_records - 1) % every == 0 {
                snapshots.push(state.clone());
            }
        }
        if delta == 0.0 && cfg.nonlinear && !tail_warned {
            let tail = spectral_tail_ratio(grid, &state.b);
            if tail > TAIL_THRESHOLD {
                let msg = format!(
                    "delta = 0 run under-resolved at t = {}: B spectral tail ratio {tail:e} exceeds {TAIL_THRESHOLD:e}",
                    state.t
                );
                log::warn!("{msg}");
                warnings.push(msg);
                tail_warned = true;
            }
        }
        Ok(())
    };

    emit(&state, &mut builder)?;
    match cfg.scheme {
        Scheme::IfRk4 => {
            let mut integ = Integrator::new(grid, delta, dt, cfg.dealias, cfg.nonlinear)?;
            for step in 1..=steps {
                let mut next = integ.step(&state)?;
                if step == steps {
                    next.t = cfg.t_final;
                } else {
                    next.t = step as f64 * dt;
                }
                state = next;
                if step % cfg.record_every == 0 || step == steps {
                    emit(&state, &mut builder)?;
                }
            }
        }
        Scheme::Picard => {
            if steps > 0 {
                let out = picard::picard_trajectory(
                    grid,
                    &state.u,
                    &state.b,
                    delta,
                    cfg.t_final,
                    cfg.picard_iterations,
                    steps + 1,
                    cfg.dealias,
                )?;
                for (step, s) in out.trajectory.into_iter().enumerate().skip(1) {
                    if step % cfg.record_every == 0 || step == steps {
                        emit(&s, &mut builder)?;
                    }
                    if step == steps {
                        state = s;
                    }
                }
            }
        }
    }

    Ok(RunOutput {
        series: builder.finish(),
        snapshots,
        final_state: state,
        warnings,
    })
}
