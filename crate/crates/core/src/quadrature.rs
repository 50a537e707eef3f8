//! Gauss–Legendre rules and radial profiles of whole-space data.

use std::f64::consts::PI;

use crate::error::{MhdError, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

const PANEL_ORDER: usize = 16;

/// Composite Gauss–Legendre rule with `panels` equal panels on `[a, b]`.
pub fn composite_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
    let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = composite_rule(a, b, panels);
    x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum()
}

/// Surface area of the unit sphere in `R^dim`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Radial amplitude `a(rho)` of whole-space data on quadrature nodes.
///
/// Amplitudes use the unitary normalization, so that
/// `||u||_2^2 = |S^{n-1}| sum_i w_i a_i^2 rho_i^{n-1}`. For data that is not
/// radially symmetric, `a^2` is the angular average of `|u_hat|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    amps: Vec<f64>,
}

impl RadialProfile {
    pub fn new(dim: usize, nodes: Vec<f64>, weights: Vec<f64>, amps: Vec<f64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(MhdError::config(format!("profile dimension must be 2 or 3, got {dim}")));
        }
        if nodes.len() != weights.len() || nodes.len() != amps.len() || nodes.is_empty() {
            return Err(MhdError::config("profile arrays must be non-empty and of equal length"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MhdError::config("profile nodes must be positive and strictly increasing"));
        }
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(MhdError::config("profile weights must be positive"));
        }
        let p = RadialProfile {
            dim,
            nodes,
            weights,
            amps,
        };
        if !p.norm().is_finite() {
            return Err(MhdError::config("profile L2 norm is not finite"));
        }
        Ok(p)
    }

    /// Builds a profile from an amplitude function with a composite
    /// Gauss–Legendre rule on `[0, R]`: `R` doubles until the tail beyond it
    /// is below `1e-14` of the integral, then the panel count doubles until
    /// `int a^2 rho^{n-1}` changes by less than `1e-10` relative.
    pub fn from_fn(dim: usize, amp: impl Fn(f64) -> f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(MhdError::config(format!("profile dimension must be 2 or 3, got {dim}")));
        }
        let density = |r: f64| amp(r).powi(2) * r.powi(dim as i32 - 1);

        let mut radius = 1.0;
        loop {
            let body = integrate(&density, 0.0, radius, 64);
            let tail = integrate(&density, radius, 2.0 * radius, 64);
            if !body.is_finite() || !tail.is_finite() {
                return Err(MhdError::config("profile density is not finite"));
            }
            if tail <= 1e-14 * body || (body == 0.0 && tail == 0.0 && radius >= 64.0) {
                break;
            }
            radius *= 2.0;
            if radius > 1e8 {
                return Err(MhdError::config("profile tail does not decay"));
            }
        }

        let mut panels = 8;
        let mut prev = integrate(&density, 0.0, radius, panels);
        loop {
            panels *= 2;
            let cur = integrate(&density, 0.0, radius, panels);
            if (cur - prev).abs() <= 1e-10 * cur.abs() || panels >= 1 << 16 {
                break;
            }
            prev = cur;
        }

        let (nodes, weights) = composite_rule(0.0, radius, panels);
        let amps = nodes.iter().map(|&r| amp(r)).collect();
        RadialProfile::new(dim, nodes, weights, amps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    /// `|S^{n-1}| sum_i w_i m(rho_i) a_i^2 rho_i^{n-1}` for a radial multiplier `m`.
    pub fn weighted_energy(&self, mult: impl Fn(f64) -> f64) -> f64 {
        let pow = self.dim as i32 - 1;
        sphere_area(self.dim)
            * self
                .nodes
                .iter()
                .zip(&self.weights)
                .zip(&self.amps)
                .map(|((r, w), a)| w * mult(*r) * a * a * r.powi(pow))
                .sum::<f64>()
    }

    /// Whole-space L2 norm.
    pub fn norm(&self) -> f64 {
        self.weighted_energy(|_| 1.0).sqrt()
    }

    /// Whole-space `||grad u||_2^2`.
    pub fn gradient_norm_sq(&self) -> f64 {
        self.weighted_energy(|r| r * r)
    }

    /// Profile with every amplitude multiplied by `s`.
    pub fn scaled(mut self, s: f64) -> Self {
        self.amps.iter_mut().for_each(|a| *a *= s);
        self
    }
}
