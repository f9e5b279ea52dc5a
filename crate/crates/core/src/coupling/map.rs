use super::{emission_rates, CouplingError, Direction, EmitterRates, ModePair, TransitionDipole};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Non-guided decay rate, either uniform or one value per grid node
/// (indexed like the field samples, x fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadiativeModel {
    Constant(f64),
    Table(Vec<f64>),
}

impl RadiativeModel {
    fn at(&self, k: usize) -> f64 {
        match self {
            RadiativeModel::Constant(g) => *g,
            RadiativeModel::Table(t) => t[k],
        }
    }
}

/// Per-node figures of merit over the field grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalityMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Indexed `iy * nx + ix`.
    pub f_dir: Vec<f64>,
    pub beta_dir: Vec<f64>,
    pub preferred: Vec<Direction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub f_dir_min: f64,
    pub f_dir_max: f64,
    pub f_dir_mean: f64,
    pub beta_dir_min: f64,
    pub beta_dir_max: f64,
    pub beta_dir_mean: f64,
    /// Node with the largest β_dir.
    pub optimum_x: f64,
    pub optimum_y: f64,
}

impl DirectionalityMap {
    pub fn len(&self) -> usize {
        self.f_dir.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_dir.is_empty()
    }

    pub fn position(&self, k: usize) -> (f64, f64) {
        let nx = self.xs.len();
        (self.xs[k % nx], self.ys[k / nx])
    }

    /// `x,y,F_dir,beta_dir`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,F_dir,beta_dir\n");
        for k in 0..self.len() {
            let (x, y) = self.position(k);
            let _ = writeln!(s, "{x},{y},{},{}", self.f_dir[k], self.beta_dir[k]);
        }
        s
    }

    pub fn summary(&self) -> MapSummary {
        let stats = |v: &[f64]| {
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (min, max, mean)
        };
        let (fmin, fmax, fmean) = stats(&self.f_dir);
        let (bmin, bmax, bmean) = stats(&self.beta_dir);
        let best = self
            .beta_dir
            .iter()
            .enumerate()
            .fold(0, |best, (k, &b)| if b > self.beta_dir[best] { k } else { best });
        let (ox, oy) = self.position(best);
        MapSummary {
            f_dir_min: fmin,
            f_dir_max: fmax,
            f_dir_mean: fmean,
            beta_dir_min: bmin,
            beta_dir_max: bmax,
            beta_dir_mean: bmean,
            optimum_x: ox,
            optimum_y: oy,
        }
    }
}

fn node(
    modes: &ModePair,
    dipole: &TransitionDipole,
    rate_scale: f64,
    gamma_rad: &RadiativeModel,
    k: usize,
) -> Result<(f64, f64, Direction), CouplingError> {
    let right = modes.right();
    let nx = right.nx();
    let pos = (right.xs()[k % nx], right.ys()[k / nx]);
    let rates: EmitterRates = emission_rates(dipole, modes, pos, gamma_rad.at(k), rate_scale)?;
    let f = rates.directionality()?;
    let (_, bd) = rates.beta_factors()?;
    Ok((f, bd, rates.preferred()))
}

fn check_table(modes: &ModePair, gamma_rad: &RadiativeModel) -> Result<(), CouplingError> {
    if let RadiativeModel::Table(t) = gamma_rad {
        let expected = modes.right().len();
        if t.len() != expected {
            return Err(CouplingError::TableSize {
                expected,
                got: t.len(),
            });
        }
    }
    Ok(())
}

fn assemble(modes: &ModePair, nodes: Vec<(f64, f64, Direction)>) -> DirectionalityMap {
    let mut map = DirectionalityMap {
        xs: modes.right().xs().to_vec(),
        ys: modes.right().ys().to_vec(),
        f_dir: Vec::with_capacity(nodes.len()),
        beta_dir: Vec::with_capacity(nodes.len()),
        preferred: Vec::with_capacity(nodes.len()),
    };
    for (f, b, d) in nodes {
        map.f_dir.push(f);
        map.beta_dir.push(b);
        map.preferred.push(d);
    }
    map
}

/// F_dir and β_dir at every grid node, evaluated in parallel.
pub fn directionality_map(
    modes: &ModePair,
    dipole: &TransitionDipole,
    rate_scale: f64,
    gamma_rad: &RadiativeModel,
) -> Result<DirectionalityMap, CouplingError> {
    check_table(modes, gamma_rad)?;
    let nodes = (0..modes.right().len())
        .into_par_iter()
        .map(|k| node(modes, dipole, rate_scale, gamma_rad, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(modes, nodes))
}

/// Single-threaded reference for [`directionality_map`].
pub fn directionality_map_serial(
    modes: &ModePair,
    dipole: &TransitionDipole,
    rate_scale: f64,
    gamma_rad: &RadiativeModel,
) -> Result<DirectionalityMap, CouplingError> {
    check_table(modes, gamma_rad)?;
    let nodes = (0..modes.right().len())
        .map(|k| node(modes, dipole, rate_scale, gamma_rad, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(modes, nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{toy_field, ModeFieldMap, ToyFieldParams};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn uniform_circular_field_is_fully_directional() {
        let h = FRAC_1_SQRT_2;
        let n = 6;
        let map = ModeFieldMap::new(
            1.0,
            0.26,
            (0..n).map(|i| i as f64).collect(),
            vec![0.0],
            vec![Complex64::new(h, 0.0); n],
            vec![Complex64::new(0.0, h); n],
            Direction::Right,
        )
        .unwrap();
        let m = directionality_map(
            &ModePair::from_single(map),
            &TransitionDipole::sigma_plus(),
            1.0,
            &RadiativeModel::Constant(0.0),
        )
        .unwrap();
        assert!(m.f_dir.iter().all(|&f| (f - 1.0).abs() < 1e-15));
        assert!(m.preferred.iter().all(|&d| d == Direction::Right));
    }

    #[test]
    fn toy_field_closed_form() {
        let p = ToyFieldParams {
            nx: 64,
            ..Default::default()
        };
        let modes = ModePair::from_single(toy_field(&p).unwrap());
        let m = directionality_map(
            &modes,
            &TransitionDipole::sigma_plus(),
            1.0,
            &RadiativeModel::Constant(0.0),
        )
        .unwrap();
        for (k, &f) in m.f_dir.iter().enumerate() {
            let (x, _) = m.position(k);
            // F = 1/2 + |cos·sin| / (cos² + sin²) for the π/2-phase toy
            let arg = std::f64::consts::PI * x;
            let expected = 0.5 + (arg.cos() * arg.sin()).abs();
            assert!((f - expected).abs() < 1e-12, "x={x}: {f} vs {expected}");
        }
        assert!((m.f_dir[16] - 1.0).abs() < 1e-15); // x = a/4
        assert_eq!(m.f_dir[0], 0.5);
    }

    #[test]
    fn opposite_dipole_mirrors_preference() {
        let modes = ModePair::from_single(toy_field(&ToyFieldParams::default()).unwrap());
        let g = RadiativeModel::Constant(0.1);
        let plus = directionality_map(&modes, &TransitionDipole::sigma_plus(), 1.0, &g).unwrap();
        let minus = directionality_map(&modes, &TransitionDipole::sigma_minus(), 1.0, &g).unwrap();
        for k in 0..plus.len() {
            assert!((plus.f_dir[k] - minus.f_dir[k]).abs() < 1e-15);
            if plus.f_dir[k] > 0.5 + 1e-12 {
                assert_eq!(plus.preferred[k], minus.preferred[k].opposite());
            }
        }
    }

    #[test]
    fn table_size_checked() {
        let modes = ModePair::from_single(toy_field(&ToyFieldParams::default()).unwrap());
        let err = directionality_map(
            &modes,
            &TransitionDipole::sigma_plus(),
            1.0,
            &RadiativeModel::Table(vec![0.0; 3]),
        )
        .unwrap_err();
        assert!(matches!(err, CouplingError::TableSize { .. }));
    }

    #[test]
    fn csv_header_and_rows() {
        let p = ToyFieldParams {
            nx: 4,
            ..Default::default()
        };
        let modes = ModePair::from_single(toy_field(&p).unwrap());
        let m = directionality_map(
            &modes,
            &TransitionDipole::sigma_plus(),
            1.0,
            &RadiativeModel::Constant(0.0),
        )
        .unwrap();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,F_dir,beta_dir");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,0,0.5,0.5");
        let s = m.summary();
        assert_eq!(s.f_dir_min, 0.5);
        assert!((s.f_dir_max - 1.0).abs() < 1e-15);
        assert_eq!(s.optimum_x, 0.25);
    }
}
