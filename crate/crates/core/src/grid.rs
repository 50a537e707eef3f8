//! Periodic box discretization and its wavenumber lattice.
//!
//! Samples live on `points^dim` collocation points `x_j = i_j L / N`, stored
//! row-major with axis 0 slowest. Spectral arrays use the same layout in FFT
//! order: index `i` on an axis carries the integer wavenumber `m = i` for
//! `i < N/2` and `m = i - N` otherwise, so `k = 2 pi m / L`.
//!
//! Normalization: forward transforms divide by `N^dim`, making spectral
//! arrays Fourier-series coefficients `c_m`. Box integrals then follow from
//! Plancherel as `int |v|^2 dx = L^dim * sum |c_m|^2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{MhdError, Result};

#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    modes: Vec<[i32; 3]>,
    kvec: Vec<[f64; 3]>,
    k2: Vec<f64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.length == other.length
    }
}

/// Builds a grid of `points^dim` samples on a box of period `length`.
pub fn build_grid(dim: usize, points: usize, length: f64) -> Result<Grid> {
    Grid::new(dim, points, length)
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if dim != 2 && dim != 3 {
            problems.push(format!("dimension must be 2 or 3, got {dim}"));
        }
        if points < 8 {
            problems.push(format!("points per dimension must be >= 8, got {points}"));
        }
        if points % 2 != 0 {
            problems.push(format!("points per dimension must be even, got {points}"));
        }
        if !(length > 0.0 && length.is_finite()) {
            problems.push(format!("box length must be positive and finite, got {length}"));
        }
        if !problems.is_empty() {
            return Err(MhdError::config(problems.join("; ")));
        }

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(points);
        let inv = planner.plan_fft_inverse(points);

        let total = points.pow(dim as u32);
        let kappa = 2.0 * PI / length;
        let mut modes = Vec::with_capacity(total);
        let mut kvec = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        for idx in 0..total {
            let multi = unravel(idx, dim, points);
            let mut m = [0i32; 3];
            let mut k = [0.0; 3];
            for d in 0..dim {
                m[d] = signed_mode(multi[d], points);
                k[d] = kappa * m[d] as f64;
            }
            modes.push(m);
            kvec.push(k);
            k2.push(k.iter().map(|x| x * x).sum());
        }

        Ok(Grid {
            dim,
            points,
            length,
            fwd,
            inv,
            modes,
            kvec,
            k2,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples (and of lattice modes).
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Box volume `L^dim`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Volume of one collocation cell `(L/N)^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Fundamental wavenumber `2 pi / L`.
    pub fn kappa(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Per-axis wavenumbers in FFT storage order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.kappa() * signed_mode(i, self.points) as f64)
            .collect()
    }

    pub fn mode(&self, idx: usize) -> [i32; 3] {
        self.modes[idx]
    }

    pub fn k(&self, idx: usize) -> [f64; 3] {
        self.kvec[idx]
    }

    pub fn k2(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    pub fn k2_all(&self) -> &[f64] {
        &self.k2
    }

    /// Largest per-axis `|m|` of a mode.
    pub fn max_axis_mode(&self, idx: usize) -> u32 {
        self.modes[idx][..self.dim]
            .iter()
            .map(|m| m.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// True when some axis sits on the Nyquist index `m = -N/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = (self.points / 2) as i32;
        self.modes[idx][..self.dim].iter().any(|&m| m == -half)
    }

    /// True when the mode survives 2/3-rule truncation (`3|m_j| <= N` on every axis).
    pub fn is_retained(&self, idx: usize) -> bool {
        self.modes[idx][..self.dim]
            .iter()
            .all(|m| 3 * m.unsigned_abs() as usize <= self.points)
    }

    /// Flat index of the mode `-m` (the Hermitian partner of `idx`).
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let multi = unravel(idx, self.dim, self.points);
        let mut out = 0;
        for d in 0..self.dim {
            let i = (self.points - multi[d]) % self.points;
            out = out * self.points + i;
        }
        out
    }

    /// Flat index of the lattice mode `m`, if it lies on this grid.
    pub fn index_of_mode(&self, m: &[i32]) -> Option<usize> {
        let half = (self.points / 2) as i32;
        let mut out = 0;
        for d in 0..self.dim {
            let md = m.get(d).copied().unwrap_or(0);
            if md < -half || md >= half {
                return None;
            }
            let i = if md >= 0 { md as usize } else { (md + self.points as i32) as usize };
            out = out * self.points + i;
        }
        Some(out)
    }

    /// Physical coordinates of sample `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let multi = unravel(idx, self.dim, self.points);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = multi[d] as f64 * h;
        }
        x
    }

    /// In-place forward transform, scaled to Fourier-series coefficients.
    pub fn fft_forward(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform_axes(data, &self.fwd);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(())
    }

    /// In-place inverse transform (unnormalized synthesis `sum c_m e^{ikx}`).
    pub fn fft_inverse(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform_axes(data, &self.inv);
        Ok(())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(MhdError::shape(
                format!("{} samples ({}^{})", self.len(), self.points, self.dim),
                format!("{len} samples"),
            ));
        }
        Ok(())
    }

    fn transform_axes(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.points;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        plan.process_with_scratch(data, &mut scratch);

        let mut lines = Vec::new();
        for axis in (0..self.dim - 1).rev() {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = n * stride;
            lines.resize(block, Complex64::default());
            for chunk in data.chunks_mut(block) {
                for i in 0..n {
                    for j in 0..stride {
                        lines[j * n + i] = chunk[i * stride + j];
                    }
                }
                plan.process_with_scratch(&mut lines, &mut scratch);
                for i in 0..n {
                    for j in 0..stride {
                        chunk[i * stride + j] = lines[j * n + i];
                    }
                }
            }
        }
    }
}

fn signed_mode(i: usize, n: usize) -> i32 {
    if i < n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

fn unravel(mut idx: usize, dim: usize, n: usize) -> [usize; 3] {
    let mut out = [0usize; 3];
    for d in (0..dim).rev() {
        out[d] = idx % n;
        idx /= n;
    }
    out
}
