//! Quench dynamics of two-band lattice models under twisted boundary
//! conditions.
//!
//! The crate computes Loschmidt echoes and rate functions on flux-shifted
//! momentum grids, solves for the critical momenta, fluxes and times at which
//! a finite system's echo vanishes exactly, evaluates the thermodynamic-limit
//! rate function, and runs exact diagonalization for the interacting SSH
//! chain.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the common double-precision case.
//!
//! ```
//! use dqpt::{critical_set, QuenchSpec};
//!
//! let quench = QuenchSpec::ssh(1.5_f64, 0.5).unwrap();
//! let set = critical_set(&quench, 20, 2).unwrap();
//! let pair = &set.pairs[0];
//! assert!((pair.t_star[0] - 2.565).abs() < 2e-3);
//! ```

pub mod band;
pub mod critical;
pub mod ed;
pub mod eigen;
pub mod error;
pub mod loschmidt;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod thermo;

pub use band::{
    band_energy, d_vector, lambda_from_dvectors, lambda_k, le_from_dvectors, le_mode, DVector, ModelSpec,
    Momentum, QuenchSpec,
};
pub use critical::{
    asymptotic_le, constraint_residual, critical_flux, critical_set, critical_times, critical_times_from_energy,
    qwz_critical_pairs, qwz_critical_time_band, qwz_dual_flux, solve_critical_momenta, CriticalPair, CriticalSet,
};
pub use ed::{
    build_basis, build_hamiltonian, ed_rate_function, ground_state, EdQuench, FockBasis, ManyBodyOperator,
    SpectralEvolution,
};
pub use eigen::{eigh, CMatrix, EigenDecomposition};
pub use error::{Error, Result};
pub use loschmidt::{
    lambda_max_vs_flux, local_maxima, loschmidt_echo, make_grid, rate_function, size_sweep, FluxPoint, Lattice,
    ModeTable, MomentumGrid, PeakSelection, RateSeries, SizePoint, TimeWindow, TwistAxis,
};
pub use scalar::Real;
pub use thermo::{thermo_rate, thermo_rate_with, thermo_series, ThermoOptions};

pub type DVector64 = DVector<f64>;
pub type ModelSpec64 = ModelSpec<f64>;
pub type QuenchSpec64 = QuenchSpec<f64>;
pub type MomentumGrid64 = MomentumGrid<f64>;
pub type RateSeries64 = RateSeries<f64>;
pub type CriticalSet64 = CriticalSet<f64>;
pub type EdQuench64 = EdQuench<f64>;

pub type QuenchSpec32 = QuenchSpec<f32>;
pub type RateSeries32 = RateSeries<f32>;
