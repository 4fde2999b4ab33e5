//! Full counting statistics of heat for a resonantly driven two-level
//! system weakly coupled to a bosonic bath.
//!
//! The pipeline: solve the Rabi problem in the Floquet picture
//! ([`floquet`]), expand the coupling operator over quasienergy sidebands
//! and attach golden-rule rates ([`rates`]), tilt the resulting two-state
//! generator with a counting field ([`tilted`]), and read heat statistics
//! off the tilted propagator ([`heat`]): cumulants, the long-time Gaussian
//! comb and the exact finite-time distribution on the
//! {n Omega + m Omega_R} lattice. [`mc`] cross-checks everything by jump
//! unraveling, [`closed_forms`] covers the analytically solvable corners
//! and [`validation`] bundles the end-to-end checks.
//!
//! Sign convention throughout: positive heat flows from the system into the
//! bath.

// Guards spelled !(x > 0.0) reject NaN along with the out-of-range values;
// index loops keep the alpha/beta mode indices of the rate algebra visible.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bath;
pub mod closed_forms;
pub mod error;
pub mod floquet;
pub mod heat;
pub mod linalg;
pub mod mc;
pub mod rates;
pub mod tilted;
pub mod validation;

pub use bath::BathParameters;
pub use error::{Error, Result};
pub use floquet::{rabi_floquet, FloquetSolution, InitialState, RabiParameters};
pub use heat::{
    finite_time_pdf, longtime_cumulants, longtime_pdf, mean_heat_power, CumulantSet, HeatAtom,
    HeatDistribution,
};
pub use rates::{partial_rates, CouplingMatrixElements, RateTable};
pub use tilted::{characteristic_function, spectral_decompose, SpectralDecomposition};
