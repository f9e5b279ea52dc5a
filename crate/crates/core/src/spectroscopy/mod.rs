//! Synthetic magneto-optical spectra and photon streams, and the analysis
//! chain run on them: Lorentzian fits, FWHM-window integration,
//! directionality versus field, lifetime fits and pulsed g².
//!
//! Energies are in μeV, times in ns, fields in tesla.

mod analysis;
mod fit;
mod lifetime;
mod photons;
mod spectrum;
mod zeeman;

pub use analysis::{
    analyze_point, curve_to_csv, directionality_vs_field, extract_directionality, integrate_peak,
    plateau_mean, AnalysisOptions, Directionality, FieldPoint, FieldSweep, IntegratedPeak, Integration,
};
pub use fit::{fit_lorentzians, lorentzian_bin, FitOptions, FitResult, Peak};
pub use lifetime::{fit_lifetime, synthesize_decay, DecayComponent, DecayTrace, LifetimeFit};
pub use photons::{
    correlate, g2_zero, poisson_stream, read_timestamps, simulate_photon_stream, timestamps_to_text,
    CorrelationHistogram, DetectorModel, DetectorStreams, G2Report, Route, StreamEmitter,
};
pub use spectrum::{synthesize_spectrum, Emitter, Pedestal, PortSpectra, SpectralGrid, SynthesisOptions};
pub use zeeman::{zeeman_peaks, Transition, ZeemanModel, ZeemanPeak, BOHR_MAGNETON_UEV_PER_T};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectroscopyError {
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("counts budget must be positive")]
    ZeroCounts,
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("cannot initialize {0} peaks")]
    DegenerateInit(usize),
    #[error("fit did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("zero denominator in directionality ratio")]
    ZeroDenominator,
    #[error("field grid must be ascending")]
    UnsortedGrid,
    #[error("stream is empty")]
    EmptyStream,
    #[error("correlation window {window} ns shorter than {needed} ns")]
    WindowTooShort { window: f64, needed: f64 },
    #[error("decay trace spans {0:.2} decades, need at least 2")]
    InsufficientRange(f64),
    #[error("no plateau points in [{0}, {1}] T")]
    EmptyPlateau(f64, f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn check_positive(name: &'static str, value: f64) -> Result<(), SpectroscopyError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SpectroscopyError::InvalidParameter { name, value })
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), SpectroscopyError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SpectroscopyError::InvalidParameter { name, value })
    }
}
