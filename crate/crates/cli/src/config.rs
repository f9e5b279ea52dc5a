//! Flat TOML run configs, one schema per subcommand. Every key is optional;
//! the resolved config (defaults filled in) is written next to the outputs.

use crate::error::{config, CliError};
use chiral_core::coupling::Direction;
use chiral_core::spectroscopy::BOHR_MAGNETON_UEV_PER_T;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::path::Path;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipoleChoice {
    SigmaPlus,
    SigmaMinus,
    Linear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub seed: u64,
    /// Field-map file; empty selects the analytic toy field.
    pub field_file: String,
    pub lattice_constant: f64,
    pub frequency: f64,
    pub toy_nx: usize,
    pub toy_ny: usize,
    pub toy_y_extent: f64,
    pub toy_envelope_width: f64,
    /// Phase of E_y relative to E_x; π/2 makes the field circular at x = a/4.
    pub toy_phase: f64,
    pub dipole: DipoleChoice,
    /// Polarization angle of a linear dipole, rad.
    pub dipole_angle: f64,
    pub gamma_rad: f64,
    pub rate_scale: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            seed: 0,
            field_file: String::new(),
            lattice_constant: 1.0,
            frequency: 0.26,
            toy_nx: 64,
            toy_ny: 1,
            toy_y_extent: 0.5,
            toy_envelope_width: 0.5,
            toy_phase: FRAC_PI_2,
            dipole: DipoleChoice::SigmaPlus,
            dipole_angle: 0.0,
            gamma_rad: 0.0,
            rate_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffBranchChoice {
    FarDetuned,
    Splitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EraserChoice {
    Enumerate,
    Sample,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateFileConfig {
    pub seed: u64,
    pub beta_dir: f64,
    pub backward_share: f64,
    /// Photonic amplitudes over |00⟩, |01⟩, |10⟩, |11⟩ (control first),
    /// normalized before use.
    pub input_re: [f64; 4],
    pub input_im: [f64; 4],
    pub eraser: EraserChoice,
    pub post_select: bool,
    pub control_direction: Direction,
    pub closed_ratio: f64,
    pub interferometer_ratio: f64,
    /// Detunings in units of the total decay rate.
    pub control_detuning: f64,
    pub target_detuning: f64,
    pub off_branch: OffBranchChoice,
    pub off_branch_splitting: f64,
    /// Extra runs written to `gate_sweep.csv`; empty skips the sweep.
    pub sweep_betas: Vec<f64>,
}

impl Default for GateFileConfig {
    fn default() -> Self {
        GateFileConfig {
            seed: 0,
            beta_dir: 1.0,
            backward_share: 0.0,
            input_re: [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0],
            input_im: [0.0; 4],
            eraser: EraserChoice::Enumerate,
            post_select: false,
            control_direction: Direction::Left,
            closed_ratio: 1.0,
            interferometer_ratio: 0.5,
            control_detuning: 0.0,
            target_detuning: 0.0,
            off_branch: OffBranchChoice::FarDetuned,
            off_branch_splitting: 0.0,
            sweep_betas: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationChoice {
    FwhmWindow,
    FittedArea,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraConfig {
    pub seed: u64,
    pub f_dir: f64,
    pub sigma_plus_direction: Direction,
    /// μeV
    pub e0: f64,
    pub g_factor: f64,
    /// μeV/T²
    pub kappa: f64,
    /// Lorentzian FWHM, μeV.
    pub linewidth: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub b_points: usize,
    pub counts_budget: f64,
    pub poisson: bool,
    pub bin_over_linewidth: f64,
    pub margin_linewidths: f64,
    pub resolve_ratio: f64,
    pub integration: IntegrationChoice,
    pub poisson_weights: bool,
    pub max_iterations: usize,
    pub plateau_min: f64,
    pub plateau_max: f64,
    /// Unpolarized background line; zero fraction disables it.
    pub pedestal_fraction: f64,
    pub pedestal_offset: f64,
    pub pedestal_fwhm: f64,
    /// Gaussian spectrometer response, μeV; zero disables it.
    pub resolution_fwhm: f64,
    pub write_spectra: bool,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        SpectraConfig {
            seed: 1,
            f_dir: 0.9,
            sigma_plus_direction: Direction::Left,
            e0: 1_347_700.0,
            g_factor: 2.0,
            kappa: 0.0,
            linewidth: 2.0 * BOHR_MAGNETON_UEV_PER_T / 3.0,
            b_min: 0.0,
            b_max: 5.0,
            b_points: 21,
            counts_budget: 1.0e6,
            poisson: true,
            bin_over_linewidth: 0.05,
            margin_linewidths: 20.0,
            resolve_ratio: 1.0,
            integration: IntegrationChoice::FwhmWindow,
            poisson_weights: false,
            max_iterations: 200,
            plateau_min: 1.0,
            plateau_max: 5.0,
            pedestal_fraction: 0.0,
            pedestal_offset: 0.0,
            pedestal_fwhm: 200.0,
            resolution_fwhm: 0.0,
            write_spectra: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// One emitter behind a 50:50 splitter (auto-correlation).
    Single,
    /// Two independent emitters, one per detector (cross-correlation).
    Pair,
    /// Continuous Poissonian light.
    Poisson,
    /// Timestamp files, one float (ns) per line.
    Files,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G2Config {
    pub seed: u64,
    pub source: Source,
    pub pulse_rate_mhz: f64,
    pub pulses: u64,
    /// 1/ns
    pub decay_rate: f64,
    pub excitation: f64,
    pub split: f64,
    pub efficiency: f64,
    /// Per detector, 1/ns.
    pub dark_rate: f64,
    /// Photons per ns for the Poisson source.
    pub poisson_rate: f64,
    pub poisson_duration: f64,
    pub timestamps_a: String,
    pub timestamps_b: String,
    pub bin_width: f64,
    /// Histogram half-width in pulse periods.
    pub window_periods: f64,
    pub fit_lifetime: bool,
    pub lifetime_bin: f64,
    pub lifetime_tail_start: f64,
    pub write_timestamps: bool,
}

impl Default for G2Config {
    fn default() -> Self {
        G2Config {
            seed: 1,
            source: Source::Single,
            pulse_rate_mhz: 76.0,
            pulses: 1_000_000,
            decay_rate: 0.8,
            excitation: 1.0,
            split: 0.5,
            efficiency: 1.0,
            dark_rate: 0.0,
            poisson_rate: 0.05,
            poisson_duration: 2.0e7,
            timestamps_a: String::new(),
            timestamps_b: String::new(),
            bin_width: 0.05,
            window_periods: 6.0,
            fit_lifetime: true,
            lifetime_bin: 0.05,
            lifetime_tail_start: 0.0,
            write_timestamps: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub seed: u64,
    pub beta_dir: f64,
    pub backward_share: f64,
    /// Detuning range in units of the total decay rate.
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    pub far_detuned: bool,
    /// Also solve the lattice model at every point (`scatter_oracle.csv`).
    pub oracle: bool,
    pub oracle_sites: usize,
    pub oracle_hopping: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            seed: 0,
            beta_dir: 0.98,
            backward_share: 0.0,
            delta_min: -5.0,
            delta_max: 5.0,
            points: 101,
            far_detuned: false,
            oracle: false,
            oracle_sites: 1001,
            oracle_hopping: 1.0e4,
        }
    }
}
