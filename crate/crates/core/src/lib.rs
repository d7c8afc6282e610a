//! Simulation of a coherently driven three-level emitter (|g⟩, |e⟩, |p⟩)
//! coupled to a structured photonic reservoir: a Lorentzian cavity inside a
//! photonic band gap over a flat background.
//!
//! Driving the lower g–e transition dresses the emitter and shifts the two
//! decay channels of |p⟩ away from the cavity peak, which slows the decay of
//! |p⟩ and narrows its emission lines. The crate provides
//!
//! * the rotating-frame master equation as a 9×9 superoperator
//!   ([`liouvillian`]), built from a frequency-resolved decomposition of the
//!   transition operators ([`dressing`]) and the reservoir spectral density
//!   ([`spectral_density`]);
//! * two-time field correlations and time-dependent / time-integrated
//!   physical spectra ([`spectra`]);
//! * peak, linewidth and emission-delay analysis ([`analysis`]);
//! * closed-form reference models of coherent and incoherent population
//!   transfer ([`toymodels`]).
//!
//! Internally every frequency is an angular frequency in ps⁻¹ measured from
//! the laser frequency and every time is in ps; [`units`] converts at the
//! boundaries.

pub mod config;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod state;
pub mod units;

pub mod analysis;
pub mod dressing;
pub mod liouvillian;
pub mod pipeline;
pub mod spectra;
pub mod spectral_density;
pub mod toymodels;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use liouvillian::{Liouvillian, Trajectory, build_liouvillian};
pub use pipeline::Pipeline;
pub use params::{DephasingModel, SystemParams, Violation, validate};
pub use spectral_density::{EmissionRate, FlatDensity, SpectralDensityParams};
pub use spectra::{DetectionOperator, SpectrumGrid, WindowId};
pub use state::DensityMatrix;
pub use units::Constants;
