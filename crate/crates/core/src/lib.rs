//! Enantiomer-specific pumping (ESP) of cyclic three-level chiral molecules.
//!
//! Each enantiomer is modelled as a cyclic `{b, a, c}` system driven by three
//! microwaves, plus a laser-coupled excited level `e` that decays into the
//! ground manifold and `n` leakage levels `x_1..x_n`. The loop phase differs by
//! `π` between the two handednesses, so for a suitable two-photon detuning only
//! one of them has a microwave dark state and survives the optical pumping.
//!
//! Units: angular frequencies in rad/µs, times in µs.
//!
//! Modules:
//! - [`model`]: Hilbert-space layout, parameters, Hamiltonians, dressed states.
//! - [`liouvillian`]: the master-equation generator, matrix-free and assembled.
//! - [`dynamics`]: time propagation and steady states.
//! - [`analysis`]: parameter sweeps, purity and the two-peak detection estimator.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod liouvillian;
pub mod model;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/µs.
pub fn mhz_to_rad_per_us(mhz: f64) -> f64 {
    std::f64::consts::TAU * mhz
}

/// Converts an angular frequency in rad/µs to an ordinary frequency in MHz.
pub fn rad_per_us_to_mhz(w: f64) -> f64 {
    w / std::f64::consts::TAU
}

/// Largest entry modulus, `‖·‖∞` over entries.
pub fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
