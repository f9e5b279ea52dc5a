use super::{CouplingError, Direction, ModePair, TransitionDipole};
use serde::{Deserialize, Serialize};

/// Decay rates into the right- and left-going guided modes and into
/// non-guided radiation, all in 1/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterRates {
    pub gamma_r: f64,
    pub gamma_l: f64,
    pub gamma_rad: f64,
}

impl EmitterRates {
    pub fn new(gamma_r: f64, gamma_l: f64, gamma_rad: f64) -> Result<Self, CouplingError> {
        for (name, value) in [
            ("gamma_r", gamma_r),
            ("gamma_l", gamma_l),
            ("gamma_rad", gamma_rad),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(CouplingError::InvalidRate { name, value });
            }
        }
        Ok(EmitterRates {
            gamma_r,
            gamma_l,
            gamma_rad,
        })
    }

    pub fn gamma_wg(&self) -> f64 {
        self.gamma_r + self.gamma_l
    }

    pub fn total(&self) -> f64 {
        self.gamma_wg() + self.gamma_rad
    }

    pub fn preferred(&self) -> Direction {
        if self.gamma_r >= self.gamma_l {
            Direction::Right
        } else {
            Direction::Left
        }
    }

    /// `F_dir = max(Γ_R, Γ_L) / Γ_wg`, in `[1/2, 1]`.
    pub fn directionality(&self) -> Result<f64, CouplingError> {
        let wg = self.gamma_wg();
        if !(wg > 0.0) {
            return Err(CouplingError::UndefinedDirectionality);
        }
        Ok(self.gamma_r.max(self.gamma_l) / wg)
    }

    /// `(β, β_dir)` with `β = Γ_wg/Γ_tot` and `β_dir = max(Γ_R, Γ_L)/Γ_tot`.
    pub fn beta_factors(&self) -> Result<(f64, f64), CouplingError> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(CouplingError::ZeroRates);
        }
        Ok((self.gamma_wg() / total, self.gamma_r.max(self.gamma_l) / total))
    }
}

/// Directional rates of `dipole` at `(x, y)`: `Γ_dir = rate_scale·|d*·E_dir(r)|²`.
pub fn emission_rates(
    dipole: &TransitionDipole,
    modes: &ModePair,
    position: (f64, f64),
    gamma_rad: f64,
    rate_scale: f64,
) -> Result<EmitterRates, CouplingError> {
    if !(rate_scale >= 0.0 && rate_scale.is_finite()) {
        return Err(CouplingError::InvalidRate {
            name: "rate_scale",
            value: rate_scale,
        });
    }
    let (x, y) = position;
    let e_r = modes.right().interpolate(x, y)?;
    let e_l = modes.left().interpolate(x, y)?;
    EmitterRates::new(
        rate_scale * dipole.project(e_r).norm_sqr(),
        rate_scale * dipole.project(e_l).norm_sqr(),
        gamma_rad,
    )
}
