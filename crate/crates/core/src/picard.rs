//! Mild-solution (Duhamel) iteration
//!
//! ```text
//! v_{n+1}(t) = e^{-tA} v_0 + int_0^t e^{-(t-s)A} N(v_n(s)) ds
//! ```
//!
//! with `A = (-lap, -delta lap)` applied spectrally and `N` the projected
//! nonlinear terms of [`crate::solver`]. The time integral is a composite
//! trapezoid over uniform nodes, evaluated by the recursion
//! `I_j = e^{-hA}(I_{j-1} + h/2 N_{j-1}) + h/2 N_j`.

use crate::error::{MhdError, Result};
use crate::field::SpectralVectorField;
use crate::grid::Grid;
use crate::solver::{MhdState, NonlinearEvaluator};

/// Iterates on the node lattice plus the iterate-to-iterate distances.
#[derive(Clone, Debug)]
pub struct PicardOutput {
    /// The last iterate at every node `t_j = j T / (nodes - 1)`.
    pub trajectory: Vec<MhdState>,
    /// `increments[i]` is `sup_j ||v_{i+1}(t_j) - v_i(t_j)||_2` (u and B combined).
    pub increments: Vec<f64>,
}

impl PicardOutput {
    pub fn final_state(&self) -> &MhdState {
        self.trajectory.last().expect("trajectory has at least two nodes")
    }
}

fn multiplied(field: &SpectralVectorField, mult: &[f64]) -> SpectralVectorField {
    let mut out = field.clone();
    out.apply_multiplier(|idx| mult[idx]);
    out
}

fn pair_norm(grid: &Grid, s: &MhdState) -> f64 {
    (s.u.norm_sq(grid) + s.b.norm_sq(grid)).sqrt()
}

/// Full Picard trajectory on `nodes` uniform time nodes over `[0, t_final]`.
#[allow(clippy::too_many_arguments)]
pub fn picard_trajectory(
    grid: &Grid,
    u0: &SpectralVectorField,
    b0: &SpectralVectorField,
    delta: f64,
    t_final: f64,
    n_iter: usize,
    nodes: usize,
    dealias: bool,
) -> Result<PicardOutput> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(MhdError::config(format!("Picard iteration requires delta > 0, got {delta}")));
    }
    if nodes < 2 {
        return Err(MhdError::config("Picard iteration needs at least 2 time nodes"));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(MhdError::config(format!("Picard horizon must be positive, got {t_final}")));
    }
    u0.check(grid)?;
    b0.check(grid)?;

    let h = t_final / (nodes - 1) as f64;
    let eu: Vec<f64> = grid.k2_all().iter().map(|k| (-h * k).exp()).collect();
    let eb: Vec<f64> = grid.k2_all().iter().map(|k| (-h * delta * k).exp()).collect();
    let time = |j: usize| if j == nodes - 1 { t_final } else { j as f64 * h };

    // iterate 0: heat semigroup
    let mut heat = Vec::with_capacity(nodes);
    let mut cur = MhdState::new(u0.clone(), b0.clone(), delta);
    heat.push(cur.clone());
    for j in 1..nodes {
        cur = MhdState {
            t: time(j),
            u: multiplied(&cur.u, &eu),
            b: multiplied(&cur.b, &eb),
            delta,
        };
        heat.push(cur.clone());
    }

    let initial = pair_norm(grid, &heat[0]);
    let mut eval = NonlinearEvaluator::new(grid, dealias);
    let mut iterate = heat.clone();
    let mut increments = Vec::with_capacity(n_iter);
    for it in 1..=n_iter {
        let terms = iterate
            .iter()
            .map(|s| eval.evaluate(grid, &s.u, &s.b, s.t, "picard"))
            .collect::<Result<Vec<_>>>()?;

        let mut next = Vec::with_capacity(nodes);
        next.push(heat[0].clone());
        let mut acc_u = SpectralVectorField::zeros(grid);
        let mut acc_b = SpectralVectorField::zeros(grid);
        for j in 1..nodes {
            acc_u.axpy(0.5 * h, &terms[j - 1].u);
            acc_b.axpy(0.5 * h, &terms[j - 1].b);
            acc_u = multiplied(&acc_u, &eu);
            acc_b = multiplied(&acc_b, &eb);
            acc_u.axpy(0.5 * h, &terms[j].u);
            acc_b.axpy(0.5 * h, &terms[j].b);

            let mut u = heat[j].u.clone();
            u.axpy(1.0, &acc_u);
            let mut b = heat[j].b.clone();
            b.axpy(1.0, &acc_b);
            next.push(MhdState { t: time(j), u, b, delta });
        }

        let mut inc = 0.0f64;
        let mut sup = 0.0f64;
        for (a, b) in next.iter().zip(&iterate) {
            let du = a.u.distance(&b.u, grid);
            let db = a.b.distance(&b.b, grid);
            inc = inc.max((du * du + db * db).sqrt());
            sup = sup.max(pair_norm(grid, a));
        }
        if !sup.is_finite() || sup > 10.0 * initial {
            return Err(MhdError::PicardDivergence {
                iteration: it,
                norm: sup,
                initial,
            });
        }
        increments.push(inc);
        iterate = next;
    }

    Ok(PicardOutput {
        trajectory: iterate,
        increments,
    })
}

/// The `n_iter`-th Picard iterate evaluated at `t_final`.
#[allow(clippy::too_many_arguments)]
pub fn picard_iterate(
    grid: &Grid,
    u0: &SpectralVectorField,
    b0: &SpectralVectorField,
    delta: f64,
    t_final: f64,
    n_iter: usize,
    nodes: usize,
    dealias: bool,
) -> Result<MhdState> {
    let out = picard_trajectory(grid, u0, b0, delta, t_final, n_iter, nodes, dealias)?;
    Ok(out.final_state().clone())
}
