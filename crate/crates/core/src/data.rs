//! Initial-data generators.
//!
//! Every generator returns mean-zero, divergence-free spectral fields with
//! the Nyquist planes zeroed. Analytic generators are sampled at the
//! collocation points and Leray-projected; `random-solenoidal` is built
//! directly in Fourier space from a seeded ChaCha stream.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MhdError, Result};
use crate::field::{
    hermitian_symmetrize_in_place, leray_project_in_place, transform_forward,
    zero_nyquist_in_place, PhysicalField, SpectralVectorField,
};
use crate::grid::Grid;
use crate::quadrature::RadialProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// `u` Taylor–Green vortex, `B` a shear mode `b_amp sin(mode kappa y) e_1`.
    TaylorGreen,
    /// Localized swirls `curl(psi e_z)` around Gaussian streamfunctions.
    GaussianBump,
    /// `u = u_amp sin(mode kappa y) e_1`, `B = b_amp sin(mode kappa y) e_1`.
    ShearMode,
    /// Band-limited random solenoidal fields; amplitudes are L2 norms.
    RandomSolenoidal,
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::TaylorGreen => "taylor-green",
            Generator::GaussianBump => "gaussian-bump",
            Generator::ShearMode => "shear-mode",
            Generator::RandomSolenoidal => "random-solenoidal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "taylor-green" => Some(Generator::TaylorGreen),
            "gaussian-bump" => Some(Generator::GaussianBump),
            "shear-mode" => Some(Generator::ShearMode),
            "random-solenoidal" => Some(Generator::RandomSolenoidal),
            _ => None,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Named generator plus its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSpec {
    pub generator: Generator,
    /// Peak amplitude of u (L2 norm for `random-solenoidal`).
    pub u_amp: f64,
    /// Peak amplitude of B (L2 norm for `random-solenoidal`).
    pub b_amp: f64,
    /// Rescale u to this exact box L2 norm after sampling.
    pub u_norm: Option<f64>,
    pub b_norm: Option<f64>,
    /// Gaussian width of `gaussian-bump`.
    pub sigma: f64,
    /// Separation of the u and B bump centres along x.
    pub offset: f64,
    /// Integer wavenumber of shear modes.
    pub mode: u32,
    /// Band `[k_lo, k_hi]` in units of `2 pi / L` for `random-solenoidal`.
    pub k_lo: f64,
    pub k_hi: f64,
    pub seed: u64,
    /// Self-similar scaling factor: samples `alpha^{n/2} f(c + alpha (x - c))`
    /// about the box centre `c` (fixed-box policy).
    pub alpha: f64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            generator: Generator::TaylorGreen,
            u_amp: 1.0,
            b_amp: 0.0,
            u_norm: None,
            b_norm: None,
            sigma: 1.0,
            offset: 0.0,
            mode: 1,
            k_lo: 1.0,
            k_hi: 4.0,
            seed: 0,
            alpha: 1.0,
        }
    }
}

/// Radius, in widths, beyond which a Gaussian bump is treated as zero (the
/// swirl amplitude there is below `1e-7` of its peak).
const BUMP_SUPPORT_WIDTHS: f64 = 6.0;

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [("u_amp", self.u_amp), ("b_amp", self.b_amp)] {
            if !v.is_finite() {
                problems.push(format!("{name} must be finite"));
            }
        }
        for (name, v) in [("u_norm", self.u_norm), ("b_norm", self.b_norm)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    problems.push(format!("{name} must be >= 0"));
                }
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            problems.push("sigma must be positive".into());
        }
        if !self.offset.is_finite() {
            problems.push("offset must be finite".into());
        }
        if self.mode == 0 {
            problems.push("mode must be >= 1".into());
        }
        if !(self.k_lo >= 0.0 && self.k_hi >= self.k_lo && self.k_hi.is_finite()) {
            problems.push("need 0 <= k_lo <= k_hi".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            problems.push(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(MhdError::config(problems.join("; ")))
        }
    }

    /// Samples `(u0, B0)` on `grid`.
    pub fn generate(&self, grid: &Grid) -> Result<(SpectralVectorField, SpectralVectorField)> {
        self.validate()?;
        let (mut u, mut b) = match self.generator {
            Generator::RandomSolenoidal => {
                if self.alpha != 1.0 {
                    return Err(MhdError::BoxPolicy(
                        "random-solenoidal data can only be scaled under the growing-box policy".into(),
                    ));
                }
                self.random(grid)?
            }
            _ => {
                self.check_support(grid)?;
                let u = self.sample(grid, Field::Velocity)?;
                let b = self.sample(grid, Field::Magnetic)?;
                (u, b)
            }
        };
        if let Some(target) = self.u_norm {
            normalize(&mut u, grid, target);
        }
        if let Some(target) = self.b_norm {
            normalize(&mut b, grid, target);
        }
        Ok((u, b))
    }

    fn check_support(&self, grid: &Grid) -> Result<()> {
        let localized = self.generator == Generator::GaussianBump;
        if !localized {
            if self.alpha != 1.0 {
                return Err(MhdError::BoxPolicy(format!(
                    "{} data is not localized and cannot be scaled inside a fixed box",
                    self.generator
                )));
            }
            return Ok(());
        }
        let radius = (0.5 * self.offset.abs() + BUMP_SUPPORT_WIDTHS * self.sigma) / self.alpha;
        if radius > 0.5 * grid.length() {
            return Err(MhdError::BoxPolicy(format!(
                "scaled bump support radius {radius} exceeds half the box length {}",
                0.5 * grid.length()
            )));
        }
        Ok(())
    }

    fn sample(&self, grid: &Grid, which: Field) -> Result<SpectralVectorField> {
        let dim = grid.dim();
        let kappa = grid.kappa();
        let centre = 0.5 * grid.length();
        let alpha = self.alpha;
        let pre = alpha.powf(dim as f64 / 2.0);
        let amp = match which {
            Field::Velocity => self.u_amp,
            Field::Magnetic => self.b_amp,
        };
        let m = self.mode as f64;
        let sigma = self.sigma;
        let shift = match which {
            Field::Velocity => 0.5 * self.offset,
            Field::Magnetic => -0.5 * self.offset,
        };
        let swirl = amp * sigma * 0.5f64.exp();
        let generator = self.generator;

        let phys = PhysicalField::from_fn(grid, |x| {
            let mut y = [0.0; 3];
            for d in 0..dim {
                y[d] = centre + alpha * (x[d] - centre);
            }
            let v = match (generator, which) {
                (Generator::TaylorGreen, Field::Velocity) => {
                    let cz = if dim == 3 { (kappa * y[2]).cos() } else { 1.0 };
                    [
                        amp * (kappa * y[0]).sin() * (kappa * y[1]).cos() * cz,
                        -amp * (kappa * y[0]).cos() * (kappa * y[1]).sin() * cz,
                        0.0,
                    ]
                }
                (Generator::TaylorGreen, Field::Magnetic) | (Generator::ShearMode, _) => {
                    [amp * (m * kappa * y[1]).sin(), 0.0, 0.0]
                }
                (Generator::GaussianBump, _) => {
                    let dx = y[0] - centre - shift;
                    let dy = y[1] - centre;
                    let dz = if dim == 3 { y[2] - centre } else { 0.0 };
                    let r2 = dx * dx + dy * dy + dz * dz;
                    let psi = (-r2 / (2.0 * sigma * sigma)).exp();
                    // curl(psi e_z) = (d_y psi, -d_x psi, 0)
                    let s = swirl / (sigma * sigma);
                    [-s * dy * psi, s * dx * psi, 0.0]
                }
                (Generator::RandomSolenoidal, _) => unreachable!(),
            };
            [pre * v[0], pre * v[1], pre * v[2]]
        });
        let mut spec = transform_forward(grid, &phys)?;
        finish(&mut spec, grid)?;
        Ok(spec)
    }

    fn random(&self, grid: &Grid) -> Result<(SpectralVectorField, SpectralVectorField)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut draw = |target: f64| -> Result<SpectralVectorField> {
            let mut f = SpectralVectorField::zeros(grid);
            for d in 0..grid.dim() {
                for idx in 0..grid.len() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    let m = grid.mode(idx);
                    let mnorm = (m.iter().map(|&x| (x as f64).powi(2)).sum::<f64>()).sqrt();
                    if mnorm >= self.k_lo && mnorm <= self.k_hi {
                        f.component_mut(d)[idx] = Complex64::new(re, im);
                    }
                }
            }
            hermitian_symmetrize_in_place(&mut f, grid);
            finish(&mut f, grid)?;
            normalize(&mut f, grid, target);
            Ok(f)
        };
        let u = draw(self.u_amp)?;
        let b = draw(self.b_amp)?;
        Ok((u, b))
    }

    /// Whole-space radial profile of u (unitary normalization), available for
    /// `gaussian-bump` data. The `alpha` and `u_norm` settings are ignored:
    /// this is the unscaled base datum `u0` with peak amplitude `u_amp`.
    pub fn radial_profile_u(&self, dim: usize) -> Result<RadialProfile> {
        self.bump_profile(dim, self.u_amp)
    }

    /// Radial profile of B, as [`DataSpec::radial_profile_u`].
    pub fn radial_profile_b(&self, dim: usize) -> Result<RadialProfile> {
        self.bump_profile(dim, self.b_amp)
    }

    fn bump_profile(&self, dim: usize, amp: f64) -> Result<RadialProfile> {
        if self.generator != Generator::GaussianBump {
            return Err(MhdError::config(format!(
                "no closed-form radial profile for {} data",
                self.generator
            )));
        }
        let sigma = self.sigma;
        let swirl = amp * sigma * 0.5f64.exp();
        // |u_hat| = swirl |xi_perp| (2 pi sigma^2)^{n/2} e^{-sigma^2 rho^2/2}; the
        // unitary factor (2 pi)^{-n/2} cancels the 2 pi. In 3D the angular mean
        // of |xi_perp|^2 is 2 rho^2 / 3.
        let angular = if dim == 3 { (2.0f64 / 3.0).sqrt() } else { 1.0 };
        let sn = sigma.powi(dim as i32);
        RadialProfile::from_fn(dim, move |r| {
            swirl * angular * sn * r * (-0.5 * sigma * sigma * r * r).exp()
        })
    }
}

#[derive(Clone, Copy)]
enum Field {
    Velocity,
    Magnetic,
}

fn finish(f: &mut SpectralVectorField, grid: &Grid) -> Result<()> {
    zero_nyquist_in_place(f, grid);
    for d in 0..grid.dim() {
        f.component_mut(d)[0] = Complex64::default();
    }
    leray_project_in_place(f, grid)
}

fn normalize(f: &mut SpectralVectorField, grid: &Grid, target: f64) {
    let n = f.norm(grid);
    if n > 0.0 {
        f.scale(target / n);
    }
}

/// `2 pi / L` shorthand used by tests of periodic generators.
pub fn fundamental(length: f64) -> f64 {
    2.0 * PI / length
}
