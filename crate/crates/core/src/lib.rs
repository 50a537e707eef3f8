//! Pseudo-spectral solver for the incompressible MHD equations on a periodic
//! box, with the diagnostics and experiments used to study long-time energy
//! decay.
//!
//! Conventions shared by every module:
//!
//! * lattice arrays are row-major with axis 0 slowest, in FFT storage order
//!   (mode `m = i` for `i < N/2`, else `i - N`, wavenumber `k = 2 pi m / L`);
//! * spectral coefficients are Fourier-series coefficients (the forward
//!   transform divides by `N^n`), so the box integral of `|v|^2` is
//!   `L^n sum |v_hat|^2`;
//! * whole-space amplitudes use the continuum normalization `L^n v_hat`.

pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod orchestrate;
pub mod picard;
pub mod quadrature;
pub mod snapshot;
pub mod solver;

pub use error::{MhdError, Result};
pub use field::{PhysicalField, SpectralVectorField};
pub use grid::{build_grid, Grid};
pub use solver::{MhdState, Scheme, SolverConfig};
