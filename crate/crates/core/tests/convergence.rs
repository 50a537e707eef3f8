//! Temporal order of the IF-RK4 integrator on a nonlinear run.

use mhdlab::data::{DataSpec, Generator};
use mhdlab::solver::run;
use mhdlab::{build_grid, SolverConfig};

#[test]
fn ifrk4_is_fourth_order_in_time() {
    let g = build_grid(2, 32, 6.283185307179586).unwrap();
    let spec = DataSpec {
        generator: Generator::RandomSolenoidal,
        u_amp: 1.0,
        b_amp: 0.8,
        k_hi: 4.0,
        seed: 5,
        ..DataSpec::default()
    };
    let (u0, b0) = spec.generate(&g).unwrap();
    let solve = |dt: f64| {
        let cfg = SolverConfig {
            dt,
            t_final: 0.4,
            record_every: usize::MAX,
            ..SolverConfig::default()
        };
        run(&g, &u0, &b0, 0.5, &cfg).unwrap().final_state
    };
    let reference = solve(0.4 / 800.0);
    let errors: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|steps| {
            let s = solve(0.4 / steps);
            s.u.distance(&reference.u, &g) + s.b.distance(&reference.b, &g)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((3.6..4.6).contains(&order), "observed order {order:.2}, errors {errors:?}");
    }
}
