//! Time-dependent q-deformed Klauder coherent states for the oscillator
//! `H = hbar omega A^dag A` with `A A^dag - q^2 A^dag A = 1`.
//!
//! - [`qkernel`]: q-integers, q-factorials, `E_q`, `F_q` and the Jackson derivative
//! - [`coherent`]: the states `|J, gamma>_q`, overlaps and the mean occupation
//! - [`observables`]: closed-form expectations, the generalized uncertainty
//!   relation and Ehrenfest's theorem
//! - [`fockoracle`]: dense truncated-Fock-space cross-check of the closed forms
//! - [`revival`]: revival-time hierarchy and autocorrelation scans
//! - [`verify`]: the invariant suite behind `qklauder verify`
//! - [`cli`]: command-line front end

pub mod cli;
pub mod coherent;
pub mod error;
pub mod fockoracle;
pub mod observables;
pub mod qkernel;
pub mod revival;
pub mod verify;

pub use coherent::{energy_expectation, mean_occupation, overlap, CoherentState};
pub use error::{Error, Result};
pub use observables::{PhysicalScales, Quadrature, QuadratureCoeffs, UncertaintyReport};
pub use qkernel::{Deformation, SeriesValue, Truncation};
pub use revival::{RevivalTimes, ScanResult};
