//! Scalar and spectral observables of MHD states and runs.
//!
//! All norms use the box normalization of [`crate::field`]: `||v||_2^2` is
//! the integral of `|v|^2` over the periodic box. Amplitudes that stand in
//! for whole-space Fourier transforms use the continuum normalization,
//! i.e. a lattice coefficient times the box volume `L^n`.

use crate::error::{MhdError, Result};
use crate::field::{transform_inverse, SpectralVectorField};
use crate::grid::Grid;
use crate::solver::{advection_terms, MhdState, RunOutput};

/// Box Lq norms of u and B for one exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct LqNorms {
    pub q: f64,
    pub u: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_u: f64,
    pub e_b: f64,
    pub d_u: f64,
    pub d_b: f64,
    /// `int_0^t ||grad u||_2^2`
    pub diss_u_cum: f64,
    /// `int_0^t ||grad B||_2^2` (without the factor delta)
    pub diss_b_cum: f64,
    pub low_u: f64,
    pub high_u: f64,
    pub low_b: f64,
    pub high_b: f64,
    pub amp_ratio: f64,
    pub max_b: f64,
    pub lq: Vec<LqNorms>,
}

impl DiagnosticsRecord {
    /// Prodi quantity `||grad u||^2 + ||grad B||^2`.
    pub fn phi(&self) -> f64 {
        self.d_u + self.d_b
    }

    pub fn lq_norms(&self, q: f64) -> Option<&LqNorms> {
        self.lq.iter().find(|l| l.q == q)
    }
}

/// Records of one run, in time order.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsSeries {
    pub dim: usize,
    pub delta: f64,
    pub nonlinear: bool,
    pub lq: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
}

/// Builds a [`DiagnosticsSeries`] one state at a time.
///
/// The dissipation integrals are accumulated mode by mode: between two
/// records the density `|k|^2 |v(k)|^2` is integrated with the logarithmic
/// mean `(a - b) / ln(a / b)` of its end values, which is exact whenever the
/// mode decays exponentially (pure heat flow) and second-order accurate
/// otherwise.
#[derive(Debug)]
pub struct RecordBuilder<'g> {
    grid: &'g Grid,
    delta: f64,
    nonlinear: bool,
    lq: Vec<f64>,
    prev_u: Vec<f64>,
    prev_b: Vec<f64>,
    records: Vec<DiagnosticsRecord>,
}

fn dissipation_density(grid: &Grid, f: &SpectralVectorField) -> Vec<f64> {
    let vol = grid.volume();
    (0..grid.len()).map(|idx| vol * grid.k2(idx) * f.mode_norm_sq(idx)).collect()
}

/// Logarithmic mean of two nonnegative numbers, falling back to the
/// arithmetic mean when either vanishes or the two nearly coincide.
pub fn log_mean(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.5 * (a + b);
    }
    let r = a / b;
    if (r - 1.0).abs() < 1e-6 {
        // series of (r - 1) / ln r about r = 1, times b
        let x = r - 1.0;
        return b * (1.0 + x / 2.0 - x * x / 12.0);
    }
    (a - b) / r.ln()
}

impl<'g> RecordBuilder<'g> {
    pub fn new(grid: &'g Grid, delta: f64, nonlinear: bool, lq: Vec<f64>) -> Self {
        RecordBuilder {
            grid,
            delta,
            nonlinear,
            lq,
            prev_u: Vec::new(),
            prev_b: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&mut self, state: &MhdState) -> Result<()> {
        let grid = self.grid;
        let (e_u, e_b) = energy(grid, state);
        let dens_u = dissipation_density(grid, &state.u);
        let dens_b = dissipation_density(grid, &state.b);
        let (diss_u_cum, diss_b_cum) = match self.records.last() {
            None => (0.0, 0.0),
            Some(prev) => {
                let h = state.t - prev.t;
                let iu: f64 = self.prev_u.iter().zip(&dens_u).map(|(a, b)| log_mean(*a, *b)).sum();
                let ib: f64 = self.prev_b.iter().zip(&dens_b).map(|(a, b)| log_mean(*a, *b)).sum();
                (prev.diss_u_cum + h * iu, prev.diss_b_cum + h * ib)
            }
        };
        let split = frequency_split(grid, state, SplitWeight::GaussianT);
        let b_phys = transform_inverse(grid, &state.b)?;
        let mut lq = Vec::with_capacity(self.lq.len());
        if !self.lq.is_empty() {
            let u_phys = transform_inverse(grid, &state.u)?;
            for &q in &self.lq {
                lq.push(LqNorms {
                    q,
                    u: physical_lq(grid, &u_phys, q),
                    b: physical_lq(grid, &b_phys, q),
                });
            }
        }
        let rec = DiagnosticsRecord {
            t: state.t,
            e_u,
            e_b,
            d_u: dens_u.iter().sum(),
            d_b: dens_b.iter().sum(),
            diss_u_cum,
            diss_b_cum,
            low_u: split.low_u,
            high_u: split.high_u,
            low_b: split.low_b,
            high_b: split.high_b,
            amp_ratio: amplitude_bound_ratio(grid, state),
            max_b: b_phys.max_magnitude(),
            lq,
        };
        self.prev_u = dens_u;
        self.prev_b = dens_b;
        self.records.push(rec);
        Ok(())
    }

    pub fn finish(self) -> DiagnosticsSeries {
        DiagnosticsSeries {
            dim: self.grid.dim(),
            delta: self.delta,
            nonlinear: self.nonlinear,
            lq: self.lq,
            records: self.records,
        }
    }
}

/// `(||u||_2^2, ||B||_2^2)`.
pub fn energy(grid: &Grid, state: &MhdState) -> (f64, f64) {
    (state.u.norm_sq(grid), state.b.norm_sq(grid))
}

/// `max_t |E_u + E_B + 2 int ||grad u||^2 + 2 delta int ||grad B||^2 - E(0)| / E(0)`.
pub fn energy_balance_residual(series: &DiagnosticsSeries) -> Result<f64> {
    let first = series.records.first().ok_or(MhdError::EmptySeries)?;
    let rhs = first.e_u + first.e_b;
    let mut worst = 0.0f64;
    for r in &series.records {
        let lhs = r.e_u + r.e_b + 2.0 * r.diss_u_cum + 2.0 * series.delta * r.diss_b_cum;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(if rhs > 0.0 { worst / rhs } else { worst })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitWeight {
    /// `phi(k) = exp(-|k|^2 t)` at the state's own time.
    GaussianT,
    /// `phi(k) = exp(-|k|^2)`.
    GaussianFixed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencySplit {
    pub low_u: f64,
    pub high_u: f64,
    pub low_b: f64,
    pub high_b: f64,
}

/// `low = ||phi v||_2`, `high = ||(1 - phi) v||_2` for v = u and v = B.
pub fn frequency_split(grid: &Grid, state: &MhdState, weight: SplitWeight) -> FrequencySplit {
    let tau = match weight {
        SplitWeight::GaussianT => state.t,
        SplitWeight::GaussianFixed => 1.0,
    };
    let vol = grid.volume();
    let mut acc = [0.0f64; 4];
    for idx in 0..grid.len() {
        let phi = (-grid.k2(idx) * tau).exp();
        let (au, ab) = (state.u.mode_norm_sq(idx), state.b.mode_norm_sq(idx));
        acc[0] += phi * phi * au;
        acc[1] += (1.0 - phi) * (1.0 - phi) * au;
        acc[2] += phi * phi * ab;
        acc[3] += (1.0 - phi) * (1.0 - phi) * ab;
    }
    let [lu, hu, lb, hb] = acc.map(|a| (vol * a).sqrt());
    FrequencySplit {
        low_u: lu,
        high_u: hu,
        low_b: lb,
        high_b: hb,
    }
}

/// `max_{k != 0} |u_hat(k)| / (1 + 1/|k|)` in continuum normalization.
pub fn amplitude_bound_ratio(grid: &Grid, state: &MhdState) -> f64 {
    let vol = grid.volume();
    (1..grid.len())
        .map(|idx| {
            let k = grid.k2(idx).sqrt();
            vol * state.u.mode_norm_sq(idx).sqrt() / (1.0 + 1.0 / k)
        })
        .fold(0.0, f64::max)
}

/// Largest ratio over `k != 0` of `|u_hat(k, t)|` to the bound
/// `|u_hat_0(k)| + c (1 - exp(-|k|^2 t)) / |k|` (continuum normalization).
/// Modes where both sides vanish are skipped.
pub fn amplitude_chain_ratio(grid: &Grid, initial: &MhdState, state: &MhdState, c: f64) -> f64 {
    let vol = grid.volume();
    let t = state.t - initial.t;
    let mut worst = 0.0f64;
    for idx in 1..grid.len() {
        let k2 = grid.k2(idx);
        let lhs = vol * state.u.mode_norm_sq(idx).sqrt();
        let bound = vol * initial.u.mode_norm_sq(idx).sqrt() + c * (-(-k2 * t).exp_m1()) / k2.sqrt();
        if lhs == 0.0 {
            continue;
        }
        worst = worst.max(if bound > 0.0 { lhs / bound } else { f64::INFINITY });
    }
    worst
}

/// Fourier-splitting weight `E(t)` and radius `G(t)`, related by `E' = 2 E G^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplittingSchedule {
    /// `E = exp(eps t)`, `G = sqrt(eps / 2)`.
    Exponential { eps: f64 },
    /// `E = (1 + t)^a`, `G = sqrt(a / (2 (1 + t)))`, requires `a > 3`.
    Polynomial { alpha_fs: f64 },
}

impl SplittingSchedule {
    pub fn exponential(eps: f64) -> Result<Self> {
        let s = SplittingSchedule::Exponential { eps };
        s.validate()?;
        Ok(s)
    }

    pub fn polynomial(alpha_fs: f64) -> Result<Self> {
        let s = SplittingSchedule::Polynomial { alpha_fs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SplittingSchedule::Exponential { eps } if !(eps > 0.0 && eps.is_finite()) => Err(
                MhdError::InvalidSchedule(format!("exponential schedule needs eps > 0, got {eps}")),
            ),
            SplittingSchedule::Polynomial { alpha_fs } if !(alpha_fs > 3.0 && alpha_fs.is_finite()) => {
                Err(MhdError::InvalidSchedule(format!(
                    "polynomial schedule needs exponent > 3, got {alpha_fs}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `(E(t), G(t))`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if !(t > -1.0 && t.is_finite()) {
            return Err(MhdError::InvalidSchedule(format!("time must exceed -1, got {t}")));
        }
        Ok(match *self {
            SplittingSchedule::Exponential { eps } => ((eps * t).exp(), (eps / 2.0).sqrt()),
            SplittingSchedule::Polynomial { alpha_fs } => {
                ((1.0 + t).powf(alpha_fs), (alpha_fs / (2.0 * (1.0 + t))).sqrt())
            }
        })
    }
}

/// Both sides of the mollified energy inequality
///
/// ```text
/// ||phi u(t)||^2 <= ||e^{(t-s) lap} phi u(s)||^2
///     + 2 int_s^t |<(u.grad)u, w>| + |<(B.grad)B, w>| dtau,
/// w = e^{2 (t - tau) lap} phi^2 u(tau)
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifiedEnergyCheck {
    pub lhs: f64,
    pub heat_term: f64,
    pub nonlinear_term: f64,
    /// `lhs - heat_term - nonlinear_term`; the inequality holds when this is `<= 0`.
    pub residual: f64,
}

fn find_snapshot<'a>(snaps: &'a [MhdState], t: f64) -> Result<&'a MhdState> {
    snaps
        .iter()
        .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
        .ok_or(MhdError::MissingSnapshot(t))
}

fn inner(grid: &Grid, a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
    let mut acc = 0.0;
    for d in 0..grid.dim() {
        for (x, y) in a.component(d).iter().zip(b.component(d)) {
            acc += (x * y.conj()).re;
        }
    }
    grid.volume() * acc
}

/// Evaluates the mollified energy inequality between snapshot times `s <= t`
/// using every stored snapshot in `[s, t]` as a trapezoid node. The mollifier
/// is a radial Fourier multiplier `phi(|k|)`.
pub fn mollified_energy_check(
    output: &RunOutput,
    grid: &Grid,
    s: f64,
    t: f64,
    mollifier: impl Fn(f64) -> f64,
) -> Result<MollifiedEnergyCheck> {
    if !(s <= t) {
        return Err(MhdError::config(format!("need s <= t, got s = {s}, t = {t}")));
    }
    let snaps = &output.snapshots;
    let start = find_snapshot(snaps, s)?;
    let end = find_snapshot(snaps, t)?;
    let phi: Vec<f64> = (0..grid.len()).map(|idx| mollifier(grid.k2(idx).sqrt())).collect();
    let vol = grid.volume();

    let lhs: f64 = vol
        * (0..grid.len())
            .map(|idx| phi[idx] * phi[idx] * end.u.mode_norm_sq(idx))
            .sum::<f64>();
    let heat_term: f64 = vol
        * (0..grid.len())
            .map(|idx| {
                let m = phi[idx] * (-grid.k2(idx) * (end.t - start.t)).exp();
                m * m * start.u.mode_norm_sq(idx)
            })
            .sum::<f64>();

    let mut nonlinear_term = 0.0;
    if output.series.nonlinear && end.t > start.t {
        let nodes: Vec<&MhdState> = snaps
            .iter()
            .filter(|x| x.t >= start.t && x.t <= end.t)
            .collect();
        let mut values = Vec::with_capacity(nodes.len());
        for st in &nodes {
            let mut w = st.u.clone();
            w.apply_multiplier(|idx| phi[idx] * phi[idx] * (-2.0 * grid.k2(idx) * (end.t - st.t)).exp());
            let (adv_u, adv_b) = advection_terms(grid, st, true)?;
            values.push(inner(grid, &adv_u, &w).abs() + inner(grid, &adv_b, &w).abs());
        }
        for (pair, v) in nodes.windows(2).zip(values.windows(2)) {
            nonlinear_term += (pair[1].t - pair[0].t) * (v[0] + v[1]);
        }
    }
    Ok(MollifiedEnergyCheck {
        lhs,
        heat_term,
        nonlinear_term,
        residual: lhs - heat_term - nonlinear_term,
    })
}

fn physical_lq(grid: &Grid, f: &crate::field::PhysicalField, q: f64) -> f64 {
    let sum: f64 = (0..grid.len()).map(|idx| f.magnitude_at(idx).powf(q)).sum();
    (grid.cell_volume() * sum).powf(1.0 / q)
}

/// Box Lq norm of `|v|` by collocation-point quadrature, `q >= 2`.
pub fn lq_norm(grid: &Grid, field: &SpectralVectorField, q: f64) -> Result<f64> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(MhdError::config(format!("Lq exponent must lie in [2, inf), got {q}")));
    }
    Ok(physical_lq(grid, &transform_inverse(grid, field)?, q))
}

/// `t^{(n/p - n/q)/2} (||u||_q + ||B||_q)` for every record with `t >= t_min`.
pub fn kato_observable(series: &DiagnosticsSeries, p: f64, q: f64, t_min: f64) -> Result<Vec<(f64, f64)>> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(MhdError::config(format!("Lq exponent must lie in [2, inf), got {q}")));
    }
    if !(p >= 1.0 && p <= q) {
        return Err(MhdError::config(format!("need 1 <= p <= q, got p = {p}")));
    }
    let n = series.dim as f64;
    let expo = 0.5 * (n / p - n / q);
    let mut out = Vec::new();
    for r in series.records.iter().filter(|r| r.t >= t_min) {
        let l = r
            .lq_norms(q)
            .ok_or_else(|| MhdError::MissingDiagnostic(format!("L{q} norms")))?;
        let w = if expo == 0.0 { 1.0 } else { r.t.powf(expo) };
        out.push((r.t, w * (l.u + l.b)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DataSpec, Generator};
    use crate::field::{transform_forward, PhysicalField};
    use crate::grid::build_grid;
    use crate::solver::{run, SolverConfig};
    use std::f64::consts::PI;

    fn sin_state(grid: &Grid, m: f64) -> MhdState {
        let u = transform_forward(grid, &PhysicalField::from_fn(grid, |x| [0.0, (m * x[0]).sin(), 0.0])).unwrap();
        MhdState::new(u, SpectralVectorField::zeros(grid), 1.0)
    }

    fn random_state(grid: &Grid, seed: u64) -> MhdState {
        let spec = DataSpec {
            generator: Generator::RandomSolenoidal,
            u_norm: Some(1.3),
            b_norm: Some(0.4),
            k_hi: 5.0,
            seed,
            ..DataSpec::default()
        };
        let (u, b) = spec.generate(grid).unwrap();
        MhdState::new(u, b, 1.0)
    }

    #[test]
    fn energy_of_simple_states() {
        let g = build_grid(2, 16, 2.0 * PI).unwrap();
        assert_eq!(energy(&g, &MhdState::zeros(&g, 1.0)), (0.0, 0.0));
        let (eu, eb) = energy(&g, &sin_state(&g, 1.0));
        assert!((eu - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(eb, 0.0);
    }

    #[test]
    fn energy_matches_physical_quadrature() {
        let g = build_grid(2, 32, 3.0).unwrap();
        let s = random_state(&g, 3);
        let phys = transform_inverse(&g, &s.u).unwrap();
        let direct: f64 = (0..g.len()).map(|i| phys.magnitude_at(i).powi(2)).sum::<f64>() * g.cell_volume();
        let (eu, _) = energy(&g, &s);
        assert!((eu - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn log_mean_is_exact_for_exponentials() {
        let (a, b) = (2.0f64, 2.0 * (-0.3f64).exp());
        // int_0^1 a e^{-0.3 s} ds
        let exact = a * (1.0 - (-0.3f64).exp()) / 0.3;
        assert!((log_mean(a, b) - exact).abs() < 1e-15);
        assert_eq!(log_mean(0.0, 4.0), 2.0);
        let near = log_mean(1.0, 1.0 + 1e-9);
        assert!((near - (1.0 + 0.5e-9)).abs() < 1e-15);
    }

    #[test]
    fn balance_residual_edge_cases() {
        let empty = DiagnosticsSeries {
            dim: 2,
            delta: 1.0,
            nonlinear: true,
            lq: vec![],
            records: vec![],
        };
        assert!(matches!(energy_balance_residual(&empty), Err(MhdError::EmptySeries)));
        let g = build_grid(2, 16, 2.0 * PI).unwrap();
        let s = random_state(&g, 1);
        let cfg = SolverConfig {
            t_final: 0.0,
            ..SolverConfig::default()
        };
        let out = run(&g, &s.u, &s.b, 1.0, &cfg).unwrap();
        assert_eq!(energy_balance_residual(&out.series).unwrap(), 0.0);
    }

    #[test]
    fn linear_run_balances_energy() {
        let g = build_grid(2, 16, 2.0 * PI).unwrap();
        let s = random_state(&g, 2);
        let cfg = SolverConfig {
            dt: 0.05,
            t_final: 1.0,
            nonlinear: false,
            record_every: 3,
            ..SolverConfig::default()
        };
        let out = run(&g, &s.u, &s.b, 0.7, &cfg).unwrap();
        assert!(energy_balance_residual(&out.series).unwrap() <= 1e-8);
    }

    #[test]
    fn frequency_split_examples() {
        let g = build_grid(2, 16, 2.0 * PI).unwrap();
        let s = sin_state(&g, 1.0);
        let norm = s.u.norm(&g);
        let at0 = frequency_split(&g, &s, SplitWeight::GaussianT);
        assert!((at0.low_u - norm).abs() < 1e-14 && at0.high_u == 0.0);
        let fixed = frequency_split(&g, &s, SplitWeight::GaussianFixed);
        let e = (-1.0f64).exp();
        assert!((fixed.low_u - e * norm).abs() < 1e-13);
        assert!((fixed.high_u - (1.0 - e) * norm).abs() < 1e-13);

        let r = random_state(&g, 9);
        let f = frequency_split(&g, &r, SplitWeight::GaussianFixed);
        for (lo, hi, n) in [(f.low_u, f.high_u, r.u.norm(&g)), (f.low_b, f.high_b, r.b.norm(&g))] {
            assert!(lo * lo + hi * hi <= 2.0 * n * n);
            assert!(lo + hi >= n * (1.0 - 1e-14));
            assert!(lo.max(hi) <= n * (1.0 + 1e-14));
        }
    }

    #[test]
    fn amplitude_ratio_under_heat_flow() {
        let g = build_grid(2, 16, 2.0 * PI).unwrap();
        assert_eq!(amplitude_bound_ratio(&g, &MhdState::zeros(&g, 1.0)), 0.0);
        let s = random_state(&g, 4);
        let cfg = SolverConfig {
            dt: 0.05,
            t_final: 1.0,
            nonlinear: false,
            ..SolverConfig::default()
        };
        let out = run(&g, &s.u, &s.b, 1.0, &cfg).unwrap();
        for w in out.series.records.windows(2) {
            assert!(w[1].amp_ratio <= w[0].amp_ratio);
        }
    }

    #[test]
    fn schedules() {
        let p = SplittingSchedule::polynomial(4.0).unwrap();
        let (e, g) = p.eval(0.0).unwrap();
        assert_eq!(e, 1.0);
        assert!((g - 2f64.sqrt()).abs() < 1e-15);
        let x = SplittingSchedule::exponential(0.5).unwrap();
        assert_eq!(x.eval(3.7).unwrap().1, 0.5);
        assert!(SplittingSchedule::polynomial(3.0).is_err());
        assert!(SplittingSchedule::exponential(0.0).is_err());
        assert!(SplittingSchedule::Exponential { eps: -1.0 }.eval(1.0).is_err());
    }

    #[test]
    fn schedule_satisfies_its_ode_at_second_order() {
        for sch in [
            SplittingSchedule::polynomial(4.5).unwrap(),
            SplittingSchedule::exponential(0.3).unwrap(),
        ] {
            for t in [0.5, 1.0, 2.0] {
                let defect = |h: f64| {
                    let (ep, _) = sch.eval(t + h).unwrap();
                    let (em, _) = sch.eval(t - h).unwrap();
                    let (e, g) = sch.eval(t).unwrap();
                    ((ep - em) / (2.0 * h) - 2.0 * e * g * g).abs() / e
                };
                let (d1, d2) = (defect(1e-2), defect(5e-3));
                assert!(d1 < 1e-3, "{sch:?} t={t}: {d1}");
                let order = (d1 / d2).log2();
                assert!((order - 2.0).abs() < 0.1, "{sch:?} t={t}: order {order}");
            }
        }
    }

    #[test]
    fn mollified_check_trivial_cases() {
        let g = build_grid(2, 16, 2.0 * PI).unwrap();
        let s = random_state(&g, 5);
        let cfg = SolverConfig {
            dt: 0.02,
            t_final: 0.4,
            nonlinear: false,
            snapshot_every: Some(2),
            ..SolverConfig::default()
        };
        let out = run(&g, &s.u, &s.b, 1.0, &cfg).unwrap();
        let c = mollified_energy_check(&out, &g, 0.08, 0.4, |k| (-k * k).exp()).unwrap();
        assert_eq!(c.nonlinear_term, 0.0);
        assert!(c.residual.abs() <= 1e-8 * c.lhs.max(1e-300));
        let same = mollified_energy_check(&out, &g, 0.2, 0.2, |_| 1.0).unwrap();
        assert_eq!(same.residual, 0.0);
        assert!(matches!(
            mollified_energy_check(&out, &g, 0.1, 0.2, |_| 1.0),
            Err(MhdError::MissingSnapshot(_))
        ));
    }

    #[test]
    fn lq_and_kato() {
        let g = build_grid(2, 32, 2.0 * PI).unwrap();
        let s = random_state(&g, 6);
        let l2 = lq_norm(&g, &s.u, 2.0).unwrap();
        assert!((l2 - s.u.norm(&g)).abs() < 1e-10 * l2);
        assert!(lq_norm(&g, &s.u, 1.5).is_err());

        let single = sin_state(&g, 1.0);
        let cfg = SolverConfig {
            dt: 0.1,
            t_final: 1.0,
            nonlinear: false,
            lq: vec![2.0],
            ..SolverConfig::default()
        };
        let out = run(&g, &single.u, &single.b, 1.0, &cfg).unwrap();
        let obs = kato_observable(&out.series, 2.0, 2.0, 0.1).unwrap();
        let u0 = single.u.norm(&g);
        for w in obs.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        for (t, v) in &obs {
            assert!((v - (-t).exp() * u0).abs() < 1e-10 * u0);
        }
        assert!(kato_observable(&out.series, 2.0, 4.0, 0.1).is_err());

        let zero = run(&g, &SpectralVectorField::zeros(&g), &SpectralVectorField::zeros(&g), 1.0, &cfg).unwrap();
        assert!(kato_observable(&zero.series, 2.0, 2.0, 0.5).unwrap().iter().all(|(_, v)| *v == 0.0));
    }
}
