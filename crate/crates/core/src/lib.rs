//! Particle creation in a cubic cavity swinging about its z-axis.
//!
//! The field inside the rotating cavity is expanded on the static sine modes
//! of the cube. Rotation couples modes inside one `n_z` block, and a drive at
//! the sum of two mode frequencies pumps both of them out of the vacuum. Two
//! solvers are provided:
//!
//! * [`msa`] reduces the coupled-mode system to a slow-time linear ODE for the
//!   positive/negative frequency amplitudes `(B, C)` of the resonant modes,
//!   and solves it in closed form for star-shaped resonant sets.
//! * [`direct`] integrates the truncated coupled-mode system in real time and
//!   extracts the same amplitudes from the state, which makes it the reference
//!   the reduction is checked against.
//!
//! Units follow `c = 1`; frequencies scale as `1/L`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
    }};
}

pub mod coupling;
pub mod direct;
pub mod error;
pub mod msa;
mod ode;
mod sparse;
pub mod spectrum;

pub use num_complex::Complex64 as C64;

pub use crate::coupling::{
    build_coupled_system, coupling_weight, g_scalar, g_tensor, slow_coupling, CoupledSystem,
    FrameTerms, Rotation, RotationProfile,
};
pub use crate::direct::{
    direct_particle_number, extract_slow_amplitudes, fit_growth_rate, integrate_full,
    slow_amplitudes, step_bound, DirectState, GrowthFit, IntegrationSettings, PumpRun,
};
pub use crate::error::Error;
pub use crate::msa::{
    build_slow_system, integrate_reduced, integrate_reduced_at, integrate_reduced_trajectory,
    particle_number, solve_three_mode_analytic, SlowAmplitudes, SlowGrowth, SlowSystem,
};
pub use crate::sparse::SparseMatrix;
pub use crate::spectrum::{
    find_resonant_pairs, find_resonant_pairs_with, mode_frequency, three_mode_drive_frequency,
    Axis, CavityConfig, MatchKind, ModeIndex, ProfileKind, ResonanceSearch, ResonantPair,
    SpeedRegime,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
