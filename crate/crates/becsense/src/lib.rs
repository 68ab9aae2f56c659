//! Frequency-domain simulator for a hybrid optomechanical force sensor.
//!
//! The system is a driven optical cavity coupled to a parametrically
//! modulated moving mirror and to the Bogoliubov mode of an intracavity
//! atomic condensate, which acts as a second (frequency-tunable) mechanical
//! oscillator. Everything here works on the linearized quantum Langevin
//! equations of the three quadrature pairs:
//!
//! * [`params`]: raw physical parameters and the derived operating point
//!   (couplings, detunings, cooperativities),
//! * [`dynamics`]: the 6x6 drift matrix and its stability,
//! * [`response`]: susceptibilities and output transfer functions,
//! * [`spectra`]: output phase-quadrature spectrum, mechanical response
//!   `R_m` and added measurement noise `n_add`,
//! * [`sensing`]: force-referred noise, sensitivity and SNR,
//! * [`design`]: impedance matching and the laboratory parameter chain.
//!
//! All frequencies and rates are angular (rad/s). Spectra are two-sided
//! and symmetrized.

pub mod design;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod params;
pub mod response;
pub mod sensing;
pub mod spectra;

pub use error::{Error, Result};
pub use model::LinearModel;
pub use params::{
    derive, derive_on_branch, thermal_occupation, DerivedParams, DetuningBranch,
    ModulationSettings, SystemParams, ThermalEnvironment,
};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
