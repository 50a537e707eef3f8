//! Vector fields in physical and spectral form, plus the spectral operators
//! every other module builds on.

use num_complex::Complex64;

use crate::error::{MhdError, Result};
use crate::grid::Grid;

/// Real samples of a vector field, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    comps: Vec<Vec<f64>>,
}

impl PhysicalField {
    pub fn zeros(grid: &Grid) -> Self {
        PhysicalField {
            comps: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }

    pub fn from_components(comps: Vec<Vec<f64>>) -> Self {
        PhysicalField { comps }
    }

    /// Samples `f(x)` at every collocation point.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let v = f(grid.position(idx));
            for d in 0..grid.dim() {
                out.comps[d][idx] = v[d];
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, d: usize) -> &[f64] {
        &self.comps[d]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Pointwise Euclidean magnitude at sample `idx`.
    pub fn magnitude_at(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx] * c[idx]).sum::<f64>().sqrt()
    }

    /// Largest absolute component value over the box.
    pub fn max_abs_component(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn max_magnitude(&self) -> f64 {
        let len = self.comps.first().map_or(0, Vec::len);
        (0..len).map(|i| self.magnitude_at(i)).fold(0.0, f64::max)
    }

    /// Box integral of `|v|^2` by rectangle quadrature at the collocation points.
    pub fn norm_sq(&self, grid: &Grid) -> f64 {
        let len = grid.len();
        grid.cell_volume() * (0..len).map(|i| self.magnitude_at(i).powi(2)).sum::<f64>()
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.comps.len() != grid.dim() {
            return Err(MhdError::shape(
                format!("{} components", grid.dim()),
                format!("{} components", self.comps.len()),
            ));
        }
        self.comps.iter().try_for_each(|c| grid.check_len(c.len()))
    }
}

/// Fourier-series coefficients of a real vector field (see [`crate::grid`] for
/// layout and normalization).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVectorField {
    comps: Vec<Vec<Complex64>>,
}

impl SpectralVectorField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralVectorField {
            comps: vec![vec![Complex64::default(); grid.len()]; grid.dim()],
        }
    }

    pub fn from_components(comps: Vec<Vec<Complex64>>) -> Self {
        SpectralVectorField { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn len(&self) -> usize {
        self.comps.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, d: usize) -> &[Complex64] {
        &self.comps[d]
    }

    pub fn component_mut(&mut self, d: usize) -> &mut [Complex64] {
        &mut self.comps[d]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    /// Coefficient vector at mode `idx`.
    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        let mut v = [Complex64::default(); 3];
        for (d, c) in self.comps.iter().enumerate() {
            v[d] = c[idx];
        }
        v
    }

    /// `sum_d |c_d(idx)|^2`.
    pub fn mode_norm_sq(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx].norm_sqr()).sum()
    }

    /// Box integral of `|v|^2` via Plancherel.
    pub fn norm_sq(&self, grid: &Grid) -> f64 {
        grid.volume() * (0..self.len()).map(|i| self.mode_norm_sq(i)).sum::<f64>()
    }

    pub fn norm(&self, grid: &Grid) -> f64 {
        self.norm_sq(grid).sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        self.comps
            .iter_mut()
            .flat_map(|c| c.iter_mut())
            .for_each(|v| *v *= s);
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.scale(s);
        self
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SpectralVectorField) {
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in c.iter_mut().zip(o) {
                *x += a * y;
            }
        }
    }

    /// Box L2 norm of `self - other`.
    pub fn distance(&self, other: &SpectralVectorField, grid: &Grid) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()))
            .sum();
        (grid.volume() * s).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |a, v| a.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Applies a real per-mode multiplier to every component.
    pub fn apply_multiplier(&mut self, mult: impl Fn(usize) -> f64) {
        let len = self.len();
        for idx in 0..len {
            let m = mult(idx);
            for c in self.comps.iter_mut() {
                c[idx] *= m;
            }
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.comps.len() != grid.dim() {
            return Err(MhdError::shape(
                format!("{} components", grid.dim()),
                format!("{} components", self.comps.len()),
            ));
        }
        self.comps.iter().try_for_each(|c| grid.check_len(c.len()))
    }
}

/// Physical samples to Fourier coefficients.
pub fn transform_forward(grid: &Grid, field: &PhysicalField) -> Result<SpectralVectorField> {
    field.check(grid)?;
    let mut comps = Vec::with_capacity(grid.dim());
    for c in field.components() {
        let mut buf: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.fft_forward(&mut buf)?;
        comps.push(buf);
    }
    Ok(SpectralVectorField { comps })
}

/// Coefficients to complex physical samples (imaginary parts vanish for
/// Hermitian input).
pub fn transform_inverse_complex(
    grid: &Grid,
    field: &SpectralVectorField,
) -> Result<Vec<Vec<Complex64>>> {
    field.check(grid)?;
    field
        .components()
        .iter()
        .map(|c| {
            let mut buf = c.clone();
            grid.fft_inverse(&mut buf)?;
            Ok(buf)
        })
        .collect()
}

/// Coefficients to real physical samples (imaginary parts discarded).
pub fn transform_inverse(grid: &Grid, field: &SpectralVectorField) -> Result<PhysicalField> {
    let comps = transform_inverse_complex(grid, field)?
        .into_iter()
        .map(|c| c.into_iter().map(|z| z.re).collect())
        .collect();
    Ok(PhysicalField { comps })
}

/// Largest imaginary part of the physical samples of `field`.
pub fn max_imaginary_part(grid: &Grid, field: &SpectralVectorField) -> Result<f64> {
    Ok(transform_inverse_complex(grid, field)?
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |a, z| a.max(z.im.abs())))
}

/// Projection onto divergence-free fields: `v(k) - k (k.v(k)) / |k|^2` for
/// `k != 0`; the mean mode passes through.
pub fn leray_project(field: &SpectralVectorField, grid: &Grid) -> Result<SpectralVectorField> {
    let mut out = field.clone();
    leray_project_in_place(&mut out, grid)?;
    Ok(out)
}

pub fn leray_project_in_place(field: &mut SpectralVectorField, grid: &Grid) -> Result<()> {
    field.check(grid)?;
    let dim = grid.dim();
    for idx in 1..grid.len() {
        let k = grid.k(idx);
        let k2 = grid.k2(idx);
        let mut kdotv = Complex64::default();
        for d in 0..dim {
            kdotv += k[d] * field.comps[d][idx];
        }
        let s = kdotv / k2;
        for d in 0..dim {
            field.comps[d][idx] -= k[d] * s;
        }
    }
    Ok(())
}

/// `max_k |k . v(k)|` over nonzero modes.
pub fn max_divergence(field: &SpectralVectorField, grid: &Grid) -> f64 {
    (1..grid.len())
        .map(|idx| {
            let k = grid.k(idx);
            (0..grid.dim())
                .map(|d| k[d] * field.comps[d][idx])
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// Box integral of `|grad v|^2`, i.e. `L^dim sum |k|^2 |v(k)|^2`.
pub fn gradient_norm_sq(field: &SpectralVectorField, grid: &Grid) -> f64 {
    grid.volume()
        * (0..grid.len())
            .map(|idx| grid.k2(idx) * field.mode_norm_sq(idx))
            .sum::<f64>()
}

/// 2/3-rule truncation: zeroes every mode with some `|m_j| > N/3`.
pub fn dealias_23(field: &SpectralVectorField, grid: &Grid) -> Result<SpectralVectorField> {
    let mut out = field.clone();
    dealias_in_place(&mut out, grid)?;
    Ok(out)
}

pub fn dealias_in_place(field: &mut SpectralVectorField, grid: &Grid) -> Result<()> {
    field.check(grid)?;
    for idx in 0..grid.len() {
        if !grid.is_retained(idx) {
            for c in field.comps.iter_mut() {
                c[idx] = Complex64::default();
            }
        }
    }
    Ok(())
}

/// Zeroes modes on the Nyquist planes, which have no Hermitian partner.
pub fn zero_nyquist_in_place(field: &mut SpectralVectorField, grid: &Grid) {
    for idx in 0..grid.len() {
        if grid.is_nyquist(idx) {
            for c in field.comps.iter_mut() {
                c[idx] = Complex64::default();
            }
        }
    }
}

/// Replaces each coefficient with `(c(k) + conj c(-k)) / 2`.
pub fn hermitian_symmetrize_in_place(field: &mut SpectralVectorField, grid: &Grid) {
    for c in field.comps.iter_mut() {
        let orig = c.clone();
        for (idx, v) in c.iter_mut().enumerate() {
            let partner = orig[grid.conjugate_index(idx)];
            *v = 0.5 * (orig[idx] + partner.conj());
        }
    }
}

/// `max_k |c(-k) - conj c(k)|` over all components.
pub fn hermitian_defect(field: &SpectralVectorField, grid: &Grid) -> f64 {
    field
        .comps
        .iter()
        .flat_map(|c| (0..grid.len()).map(move |idx| (c[grid.conjugate_index(idx)] - c[idx].conj()).norm()))
        .fold(0.0, f64::max)
}
