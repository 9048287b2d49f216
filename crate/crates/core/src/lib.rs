//! Simulation and parameter estimation for driven, weakly anharmonic
//! superconducting oscillators.
//!
//! The crate is organised by physical subsystem:
//!
//! * [`circuit`]: lumped-element and thin-film materials model, including the
//!   in-plane magnetic field dependence of the qubit frequency.
//! * [`fluorescence`]: closed-form steady state of a driven two-level system
//!   and the resulting single-port reflection coefficient.
//! * [`kerr`]: truncated-Fock driven Kerr oscillator, Lindblad steady state,
//!   reflection spectra and multi-photon ladder analysis.
//! * [`estimation`]: damped Gauss-Newton fits of traces and field sweeps.
//! * [`magnetics`]: Biot-Savart fields of filamentary coil assemblies.
//! * [`io`]: trace, config, report and manifest file formats plus the bundled
//!   reference dataset.
//!
//! All stored frequencies are ordinary frequencies in Hz. Rates and
//! couplings (κ, γ, Ω, K) are angular frequencies in rad/s.

pub mod circuit;
pub mod constants;
pub mod error;
pub mod estimation;
pub mod fluorescence;
pub mod io;
pub mod kerr;
pub mod magnetics;
pub mod units;

pub use circuit::{CircuitParams, GrAlVolume, JunctionModel, MaterialParams};
pub use error::{Error, Result};
pub use estimation::{ComplexTrace, FitResult};
pub use fluorescence::{DriveConfig, TwoLevelParams};
pub use kerr::{DensityMatrix, KerrModel, SpectrumGrid};
pub use magnetics::{CoilGeometry, FieldPoint, HelmholtzPair, Vec3};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
