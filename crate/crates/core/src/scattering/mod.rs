//! Narrow-band single-photon scattering on a chirally coupled two-level
//! transition.
//!
//! A photon travelling in the emitter's preferred direction ("forward")
//! couples with rate `γ_fwd`; the opposite direction couples with `γ_bwd`,
//! and `γ_rad` leaks to non-guided modes. With `Γ = γ_fwd + γ_bwd + γ_rad`:
//!
//! ```text
//! t(Δ) = 1 − γ_fwd / (Γ/2 − iΔ)
//! r(Δ) = −√(γ_fwd γ_bwd) / (Γ/2 − iΔ)
//! ```
//!
//! On resonance `t = 1 − 2β_dir`, so a perfectly chiral, lossless emitter
//! returns the photon with a π phase. [`oracle_lattice_scatter`] solves the
//! same problem numerically on a discretized waveguide and exists only to
//! check the closed form.

mod lattice;

pub use lattice::{oracle_lattice_scatter, LatticeDiscretization, LatticeSolution};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("invalid rate {name} = {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("total decay rate must be positive")]
    ZeroTotalRate,
    #[error("β_dir = {0} outside [0, 1]")]
    InvalidBeta(f64),
    #[error("lattice needs an odd number of sites ≥ 201, got {0}")]
    InvalidLattice(usize),
    #[error("photon energy {0} lies outside the lattice band")]
    OutsideBand(f64),
    #[error("lattice solve did not converge (residual {residual:.3e} > {tolerance:.1e})")]
    NonConvergence { residual: f64, tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringParams {
    /// Photon minus transition frequency, same units as the rates.
    pub detuning: f64,
    pub gamma_fwd: f64,
    pub gamma_bwd: f64,
    pub gamma_rad: f64,
}

impl ScatteringParams {
    pub fn new(
        detuning: f64,
        gamma_fwd: f64,
        gamma_bwd: f64,
        gamma_rad: f64,
    ) -> Result<Self, ScatteringError> {
        if !detuning.is_finite() {
            return Err(ScatteringError::InvalidRate {
                name: "detuning",
                value: detuning,
            });
        }
        for (name, value) in [
            ("gamma_fwd", gamma_fwd),
            ("gamma_bwd", gamma_bwd),
            ("gamma_rad", gamma_rad),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ScatteringError::InvalidRate { name, value });
            }
        }
        if !(gamma_fwd + gamma_bwd + gamma_rad > 0.0) {
            return Err(ScatteringError::ZeroTotalRate);
        }
        Ok(ScatteringParams {
            detuning,
            gamma_fwd,
            gamma_bwd,
            gamma_rad,
        })
    }

    /// Unit total rate with `γ_fwd = β_dir`; the remainder is split between
    /// backward coupling (`backward_share`) and radiation.
    pub fn from_beta_dir(beta_dir: f64, backward_share: f64, detuning: f64) -> Result<Self, ScatteringError> {
        if !(0.0..=1.0).contains(&beta_dir) {
            return Err(ScatteringError::InvalidBeta(beta_dir));
        }
        if !(0.0..=1.0).contains(&backward_share) {
            return Err(ScatteringError::InvalidRate {
                name: "backward_share",
                value: backward_share,
            });
        }
        let rest = 1.0 - beta_dir;
        Self::new(
            detuning,
            beta_dir,
            rest * backward_share,
            rest * (1.0 - backward_share),
        )
    }

    pub fn gamma_tot(&self) -> f64 {
        self.gamma_fwd + self.gamma_bwd + self.gamma_rad
    }

    pub fn beta_dir(&self) -> f64 {
        self.gamma_fwd / self.gamma_tot()
    }

    pub fn with_detuning(&self, detuning: f64) -> Self {
        ScatteringParams { detuning, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub t: Complex64,
    pub r: Complex64,
    /// Probability scattered out of the waveguide.
    pub loss: f64,
}

impl ScatteringAmplitudes {
    /// `|t|² + |r|² + loss`, which should be one.
    pub fn budget(&self) -> f64 {
        self.t.norm_sqr() + self.r.norm_sqr() + self.loss
    }
}

pub fn scatter(p: &ScatteringParams) -> ScatteringAmplitudes {
    let denom = Complex64::new(p.gamma_tot() / 2.0, -p.detuning);
    let t = Complex64::new(1.0, 0.0) - p.gamma_fwd / denom;
    let r = -(p.gamma_fwd * p.gamma_bwd).sqrt() / denom;
    // γ_rad·|1/denom|² is the same quantity as 1 − |t|² − |r|², without the cancellation.
    let loss = p.gamma_rad * p.gamma_fwd / denom.norm_sqr();
    ScatteringAmplitudes { t, r, loss }
}

/// Photon far from resonance with the transition: it passes untouched.
pub fn scatter_far_detuned(_p: &ScatteringParams) -> ScatteringAmplitudes {
    ScatteringAmplitudes {
        t: Complex64::new(1.0, 0.0),
        r: Complex64::new(0.0, 0.0),
        loss: 0.0,
    }
}

/// `(Δ, amplitudes)` over an evenly spaced detuning grid.
pub fn detuning_sweep(
    base: &ScatteringParams,
    start: f64,
    stop: f64,
    points: usize,
) -> Vec<(f64, ScatteringAmplitudes)> {
    (0..points)
        .map(|i| {
            let d = if points == 1 {
                start
            } else {
                start + (stop - start) * i as f64 / (points - 1) as f64
            };
            (d, scatter(&base.with_detuning(d)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_chiral_emitter_gives_pi_phase() {
        let p = ScatteringParams::new(0.0, 1.0, 0.0, 0.0).unwrap();
        let a = scatter(&p);
        assert_eq!(a.t, Complex64::new(-1.0, 0.0));
        assert_eq!(a.r, Complex64::new(0.0, 0.0));
        assert_eq!(a.loss, 0.0);
    }

    #[test]
    fn half_coupling_blocks_transmission() {
        for share in [0.0, 0.3, 1.0] {
            let p = ScatteringParams::from_beta_dir(0.5, share, 0.0).unwrap();
            assert!(scatter(&p).t.norm() < 1e-15);
        }
    }

    #[test]
    fn design_point_transmission() {
        let p = ScatteringParams::from_beta_dir(0.98, 0.0, 0.0).unwrap();
        let a = scatter(&p);
        assert!((a.t - Complex64::new(-0.96, 0.0)).norm() < 1e-12);
        assert!((a.t.norm_sqr() - 0.9216).abs() < 1e-12);
    }

    #[test]
    fn far_detuned_passes_unperturbed() {
        let p = ScatteringParams::new(3.0, 1.0, 0.2, 0.1).unwrap();
        let a = scatter_far_detuned(&p);
        assert_eq!(
            (a.t, a.r, a.loss),
            (Complex64::new(1.0, 0.0), Complex64::default(), 0.0)
        );
    }

    #[test]
    fn transmission_recovers_off_resonance() {
        let base = ScatteringParams::new(0.0, 0.9, 0.05, 0.05).unwrap();
        let mut last = 0.0;
        let mut last_phase = f64::INFINITY;
        for k in 0..40 {
            let d = 0.5 * 1.5f64.powi(k);
            let t = scatter(&base.with_detuning(d)).t;
            assert!(t.norm() >= last, "|t| not monotone at Δ={d}");
            last = t.norm();
            assert!(t.arg().abs() <= last_phase + 1e-15);
            last_phase = t.arg().abs();
        }
        assert!((last - 1.0).abs() < 1e-6);
        assert!(last_phase < 1e-6);
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(
            ScatteringParams::new(0.0, 0.0, 0.0, 0.0).unwrap_err(),
            ScatteringError::ZeroTotalRate
        );
        assert!(ScatteringParams::new(0.0, -1.0, 0.0, 1.0).is_err());
        assert!(ScatteringParams::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
        assert!(ScatteringParams::from_beta_dir(1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn sweep_is_evenly_spaced() {
        let base = ScatteringParams::new(0.0, 1.0, 0.0, 0.0).unwrap();
        let s = detuning_sweep(&base, -2.0, 2.0, 5);
        let ds: Vec<f64> = s.iter().map(|(d, _)| *d).collect();
        assert_eq!(ds, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }
}
