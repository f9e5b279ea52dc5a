use super::zeeman::{zeeman_peaks, Transition, ZeemanModel};
use super::{check_positive, check_unit, SpectroscopyError};
use crate::coupling::Direction;
use crate::seed::rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// `hc` in μeV·nm, for the wavelength column of exported spectra.
const HC_UEV_NM: f64 = 1_239_841_984.0;

/// Uniform energy bins `[start + i·step, start + (i+1)·step)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub start: f64,
    pub step: f64,
    pub bins: usize,
}

impl SpectralGrid {
    pub fn around(center: f64, half_span: f64, step: f64) -> Result<Self, SpectroscopyError> {
        check_positive("half_span", half_span)?;
        check_positive("step", step)?;
        let bins = (2.0 * half_span / step).ceil() as usize;
        Ok(SpectralGrid {
            start: center - bins as f64 * step / 2.0,
            step,
            bins,
        })
    }

    pub fn edge(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn center(&self, i: usize) -> f64 {
        self.start + (i as f64 + 0.5) * self.step
    }

    pub fn end(&self) -> f64 {
        self.edge(self.bins)
    }
}

/// Lorentzian probability mass in `[lo, hi)`.
pub(crate) fn lorentzian_mass(center: f64, fwhm: f64, lo: f64, hi: f64) -> f64 {
    let g = fwhm / 2.0;
    (((hi - center) / g).atan() - ((lo - center) / g).atan()) / PI
}

/// One quantum dot: a Zeeman doublet whose σ+ line emits preferentially in
/// `sigma_plus_direction` with directionality `f_dir`; σ− mirrors it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emitter {
    pub zeeman: ZeemanModel,
    pub f_dir: f64,
    pub sigma_plus_direction: Direction,
    /// Relative brightness when several emitters share a spectrum.
    pub weight: f64,
}

impl Emitter {
    pub fn new(zeeman: ZeemanModel, f_dir: f64) -> Self {
        Emitter {
            zeeman,
            f_dir,
            sigma_plus_direction: Direction::Left,
            weight: 1.0,
        }
    }

    /// Fraction of a transition's photons leaving through `port`.
    pub fn port_share(&self, transition: Transition, port: Direction) -> f64 {
        let preferred = match transition {
            Transition::SigmaPlus => self.sigma_plus_direction,
            Transition::SigmaMinus => self.sigma_plus_direction.opposite(),
        };
        if port == preferred {
            self.f_dir
        } else {
            1.0 - self.f_dir
        }
    }
}

/// Unpolarized background line, equal in both ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestal {
    pub center: f64,
    pub fwhm: f64,
    /// Expected counts as a fraction of the emitter budget.
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Expected emitter counts summed over both ports (before grid clipping).
    pub counts_budget: f64,
    /// Draw Poisson counts; otherwise return expectations.
    pub poisson: bool,
    pub pedestal: Option<Pedestal>,
    /// Gaussian spectrometer response FWHM, μeV.
    pub resolution_fwhm: Option<f64>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            counts_budget: 1.0e6,
            poisson: true,
            pedestal: None,
            resolution_fwhm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSpectra {
    pub field: f64,
    pub grid: SpectralGrid,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl PortSpectra {
    pub fn port(&self, port: Direction) -> &[f64] {
        match port {
            Direction::Left => &self.left,
            Direction::Right => &self.right,
        }
    }

    /// `wavelength,counts` in nm, ascending wavelength.
    pub fn to_csv(&self, port: Direction) -> String {
        let mut s = String::from("wavelength,counts\n");
        for i in (0..self.grid.bins).rev() {
            let _ = writeln!(s, "{},{}", HC_UEV_NM / self.grid.center(i), self.port(port)[i]);
        }
        s
    }
}

fn convolve_gaussian(v: &[f64], fwhm_bins: f64) -> Vec<f64> {
    let sigma = fwhm_bins / (8.0 * 2f64.ln()).sqrt();
    let half = (5.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|k| (-(k as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let n = v.len() as isize;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(j, w)| {
                    let src = i + j as isize - half;
                    (0..n).contains(&src).then(|| w * v[src as usize])
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Expected per-bin counts in both ports, or Poisson draws around them.
pub fn synthesize_spectrum(
    emitters: &[Emitter],
    field: f64,
    grid: SpectralGrid,
    opts: &SynthesisOptions,
    seed: u64,
) -> Result<PortSpectra, SpectroscopyError> {
    if !(opts.counts_budget > 0.0 && opts.counts_budget.is_finite()) {
        return Err(SpectroscopyError::ZeroCounts);
    }
    if emitters.is_empty() || grid.bins == 0 {
        return Err(SpectroscopyError::EmptySpectrum);
    }
    check_positive("step", grid.step)?;
    let total_weight: f64 = emitters.iter().map(|e| e.weight).sum();
    for e in emitters {
        e.zeeman.validate()?;
        if !(0.5..=1.0).contains(&e.f_dir) {
            return Err(SpectroscopyError::InvalidParameter {
                name: "f_dir",
                value: e.f_dir,
            });
        }
        if !(e.weight >= 0.0) {
            return Err(SpectroscopyError::InvalidParameter {
                name: "weight",
                value: e.weight,
            });
        }
    }
    check_positive("total weight", total_weight)?;

    let mut left = vec![0.0; grid.bins];
    let mut right = vec![0.0; grid.bins];
    let mut add = |center: f64, fwhm: f64, area_l: f64, area_r: f64| {
        for i in 0..grid.bins {
            let m = lorentzian_mass(center, fwhm, grid.edge(i), grid.edge(i + 1));
            left[i] += area_l * m;
            right[i] += area_r * m;
        }
    };
    for e in emitters {
        // equal populations: each transition carries half the emitter's counts
        let per_line = opts.counts_budget * e.weight / total_weight / 2.0;
        let (p, m) = zeeman_peaks(&e.zeeman, field);
        for peak in [p, m] {
            add(
                peak.center,
                peak.fwhm,
                per_line * e.port_share(peak.transition, Direction::Left),
                per_line * e.port_share(peak.transition, Direction::Right),
            );
        }
    }
    if let Some(ped) = opts.pedestal {
        check_positive("pedestal fwhm", ped.fwhm)?;
        check_unit("pedestal fraction", ped.fraction)?;
        let each = opts.counts_budget * ped.fraction / 2.0;
        add(ped.center, ped.fwhm, each, each);
    }
    if let Some(res) = opts.resolution_fwhm {
        check_positive("resolution_fwhm", res)?;
        left = convolve_gaussian(&left, res / grid.step);
        right = convolve_gaussian(&right, res / grid.step);
    }
    if opts.poisson {
        let mut r = rng(seed);
        for v in left.iter_mut().chain(right.iter_mut()) {
            *v = if *v > 0.0 {
                Poisson::new(*v).expect("positive mean").sample(&mut r)
            } else {
                0.0
            };
        }
    }
    Ok(PortSpectra {
        field,
        grid,
        left,
        right,
    })
}
