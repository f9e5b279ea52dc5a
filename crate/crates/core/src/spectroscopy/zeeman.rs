use super::{check_positive, SpectroscopyError};
use serde::{Deserialize, Serialize};

/// Bohr magneton in μeV/T.
pub const BOHR_MAGNETON_UEV_PER_T: f64 = 57.883_818_060;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    SigmaPlus,
    SigmaMinus,
}

impl Transition {
    pub fn other(self) -> Self {
        match self {
            Transition::SigmaPlus => Transition::SigmaMinus,
            Transition::SigmaMinus => Transition::SigmaPlus,
        }
    }
}

/// Exciton doublet in a Faraday field. The exciton g-factor and diamagnetic
/// shift are not fixed by anything measured here; only the ratio of the
/// splitting to the linewidth matters to the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanModel {
    /// Zero-field line, μeV.
    pub e0: f64,
    pub g_factor: f64,
    /// Diamagnetic coefficient, μeV/T².
    pub kappa: f64,
    /// Lorentzian FWHM, μeV.
    pub linewidth: f64,
}

impl Default for ZeemanModel {
    fn default() -> Self {
        ZeemanModel {
            e0: 1_347_700.0,
            g_factor: 2.0,
            kappa: 0.0,
            // splitting at 1 T is three linewidths
            linewidth: 2.0 * BOHR_MAGNETON_UEV_PER_T / 3.0,
        }
    }
}

impl ZeemanModel {
    pub fn validate(&self) -> Result<(), SpectroscopyError> {
        check_positive("linewidth", self.linewidth)?;
        check_positive("e0", self.e0)?;
        if !self.g_factor.is_finite() || !self.kappa.is_finite() {
            return Err(SpectroscopyError::InvalidParameter {
                name: "g_factor",
                value: self.g_factor,
            });
        }
        Ok(())
    }

    /// Signed splitting `E(σ+) − E(σ−) = g μ_B B`.
    pub fn splitting(&self, b: f64) -> f64 {
        self.g_factor * BOHR_MAGNETON_UEV_PER_T * b
    }

    pub fn center(&self, b: f64) -> f64 {
        self.e0 + self.kappa * b * b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanPeak {
    pub center: f64,
    pub fwhm: f64,
    pub transition: Transition,
}

/// `(σ+, σ−)` lines. Reversing the field moves each label to the other
/// energy.
pub fn zeeman_peaks(model: &ZeemanModel, b: f64) -> (ZeemanPeak, ZeemanPeak) {
    let mid = model.center(b);
    let half = model.splitting(b) / 2.0;
    (
        ZeemanPeak {
            center: mid + half,
            fwhm: model.linewidth,
            transition: Transition::SigmaPlus,
        },
        ZeemanPeak {
            center: mid - half,
            fwhm: model.linewidth,
            transition: Transition::SigmaMinus,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_is_degenerate() {
        let (p, m) = zeeman_peaks(&ZeemanModel::default(), 0.0);
        assert_eq!(p.center, m.center);
    }

    #[test]
    fn splitting_at_one_tesla() {
        let m = ZeemanModel::default();
        let (p, n) = zeeman_peaks(&m, 1.0);
        assert!((p.center - n.center - 115.767_636_12).abs() < 1e-6);
        assert!((m.splitting(1.0) / m.linewidth - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_field_swaps_labels() {
        let m = ZeemanModel {
            kappa: 5.0,
            ..Default::default()
        };
        let (p, n) = zeeman_peaks(&m, 2.0);
        let (p2, n2) = zeeman_peaks(&m, -2.0);
        assert!((p.center - n2.center).abs() < 1e-9);
        assert!((n.center - p2.center).abs() < 1e-9);
        // diamagnetic shift is even in B
        assert!((p.center + n.center - 2.0 * (m.e0 + 20.0)).abs() < 1e-9);
    }
}
