use super::CouplingError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DipoleKind {
    SigmaPlus,
    SigmaMinus,
    /// Real dipole along angle θ from x̂.
    Linear(f64),
    Elliptical,
}

/// In-plane transition dipole `(dx, dy)` with `|dx|² + |dy|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionDipole {
    d: [Complex64; 2],
    kind: DipoleKind,
}

impl TransitionDipole {
    /// `(x̂ + iŷ)/√2`
    pub fn sigma_plus() -> Self {
        TransitionDipole {
            d: [
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, FRAC_1_SQRT_2),
            ],
            kind: DipoleKind::SigmaPlus,
        }
    }

    /// `(x̂ − iŷ)/√2`
    pub fn sigma_minus() -> Self {
        TransitionDipole {
            d: [
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, -FRAC_1_SQRT_2),
            ],
            kind: DipoleKind::SigmaMinus,
        }
    }

    pub fn linear(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        TransitionDipole {
            d: [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            kind: DipoleKind::Linear(theta),
        }
    }

    /// Arbitrary components, rescaled to unit norm.
    pub fn elliptical(dx: Complex64, dy: Complex64) -> Result<Self, CouplingError> {
        let n = (dx.norm_sqr() + dy.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(CouplingError::DipoleNorm(n * n));
        }
        Ok(TransitionDipole {
            d: [dx / n, dy / n],
            kind: DipoleKind::Elliptical,
        })
    }

    /// Components that must already be normalized to within 1e-12.
    pub fn new(dx: Complex64, dy: Complex64, kind: DipoleKind) -> Result<Self, CouplingError> {
        let n2 = dx.norm_sqr() + dy.norm_sqr();
        if !((n2 - 1.0).abs() <= 1e-12) {
            return Err(CouplingError::DipoleNorm(n2));
        }
        Ok(TransitionDipole { d: [dx, dy], kind })
    }

    pub fn components(&self) -> [Complex64; 2] {
        self.d
    }

    pub fn kind(&self) -> DipoleKind {
        self.kind
    }

    /// Complex conjugate dipole; exchanges σ+ and σ−.
    pub fn conj(&self) -> Self {
        let kind = match self.kind {
            DipoleKind::SigmaPlus => DipoleKind::SigmaMinus,
            DipoleKind::SigmaMinus => DipoleKind::SigmaPlus,
            k => k,
        };
        TransitionDipole {
            d: [self.d[0].conj(), self.d[1].conj()],
            kind,
        }
    }

    /// `d*·E`
    pub fn project(&self, e: [Complex64; 2]) -> Complex64 {
        self.d[0].conj() * e[0] + self.d[1].conj() * e[1]
    }

    pub fn is_real(&self) -> bool {
        self.d.iter().all(|c| c.im == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_dipoles_are_orthogonal() {
        let p = TransitionDipole::sigma_plus();
        let m = TransitionDipole::sigma_minus();
        // σ− field seen by a σ+ dipole
        assert!(p.project(m.components()).norm() < 1e-15);
        assert!((p.project(p.components()) - 1.0).norm() < 1e-15);
        assert_eq!(p.conj(), m);
    }

    #[test]
    fn normalization_enforced() {
        let one = Complex64::new(1.0, 0.0);
        assert!(TransitionDipole::new(one, one, DipoleKind::Elliptical).is_err());
        let e = TransitionDipole::elliptical(one, Complex64::new(0.0, 2.0)).unwrap();
        let [a, b] = e.components();
        assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(TransitionDipole::elliptical(Complex64::default(), Complex64::default()).is_err());
    }
}
