//! Simulation and analysis toolkit for emitters chirally coupled to
//! one-dimensional nanophotonic waveguides.
//!
//! - [`quantum`]: labeled pure states, 2×2 unitaries, projective measurement.
//! - [`coupling`]: directional decay rates and figures of merit from mode fields.
//! - [`scattering`]: single-photon transmission/reflection on a chiral emitter.
//! - [`cnot`]: state-vector execution of the spin-mediated photon-photon CNOT.
//! - [`spectroscopy`]: Zeeman spectra, Lorentzian fits, directionality
//!   extraction, photon streams, g² and lifetime analysis.

pub mod cnot;
pub mod coupling;
pub mod quantum;
pub mod scattering;
pub mod seed;
pub mod spectroscopy;
