//! Levenberg-Marquardt fit of a sum of bin-integrated Lorentzians.

use super::spectrum::{lorentzian_mass, SpectralGrid};
use super::SpectroscopyError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: f64,
    pub fwhm: f64,
    /// Total counts under the line.
    pub area: f64,
}

/// Expected counts of `peak` in `[lo, hi)`.
pub fn lorentzian_bin(peak: &Peak, lo: f64, hi: f64) -> f64 {
    peak.area * lorentzian_mass(peak.center, peak.fwhm, lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative cost decrease below which an accepted step ends the fit.
    pub tolerance: f64,
    /// Weight residuals by `1/max(counts, 1)`. Off by default: weighting
    /// by the observed counts pulls fitted areas low, weak lines most.
    pub poisson_weights: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            tolerance: 1e-12,
            poisson_weights: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Sorted by center.
    pub peaks: Vec<Peak>,
    /// `√(Σ w (model − data)²)`
    pub residual_norm: f64,
    pub iterations: usize,
}

fn model_and_jacobian(grid: &SpectralGrid, p: &[f64], jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
    let n = grid.bins;
    let mut model = vec![0.0; n];
    let mut jac = jac;
    for (k, chunk) in p.chunks(3).enumerate() {
        let (c, f, a) = (chunk[0], chunk[1], chunk[2]);
        let g = f / 2.0;
        for i in 0..n {
            let uh = (grid.edge(i + 1) - c) / g;
            let ul = (grid.edge(i) - c) / g;
            let mass = (uh.atan() - ul.atan()) / PI;
            model[i] += a * mass;
            if let Some(j) = jac.as_deref_mut() {
                let (dh, dl) = (1.0 / (1.0 + uh * uh), 1.0 / (1.0 + ul * ul));
                j[(i, 3 * k)] = -a * (dh - dl) / (g * PI);
                j[(i, 3 * k + 1)] = -a * (uh * dh - ul * dl) / (2.0 * g * PI);
                j[(i, 3 * k + 2)] = mass;
            }
        }
    }
    model
}

fn valid(p: &[f64]) -> bool {
    p.chunks(3)
        .all(|c| c.iter().all(|v| v.is_finite()) && c[1] > 0.0 && c[2] >= 0.0)
}

/// Largest local maxima of a lightly smoothed copy, with rough widths.
fn initial_guess(grid: &SpectralGrid, y: &[f64], n_peaks: usize) -> Result<Vec<Peak>, SpectroscopyError> {
    let n = y.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 3).min(n);
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let top = smooth.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(SpectroscopyError::DegenerateInit(n_peaks));
    }
    let mut maxima: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1] && smooth[i] > 0.05 * top)
        .collect();
    maxima.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]).then(a.cmp(&b)));
    if maxima.len() < n_peaks {
        return Err(SpectroscopyError::DegenerateInit(n_peaks));
    }
    let mut peaks: Vec<Peak> = maxima[..n_peaks]
        .iter()
        .map(|&i| {
            let half = smooth[i] / 2.0;
            let right = (i..n).find(|&j| smooth[j] < half).unwrap_or(n - 1);
            let left = (0..=i).rev().find(|&j| smooth[j] < half).unwrap_or(0);
            let fwhm = ((right - left) as f64 * grid.step).max(2.0 * grid.step);
            Peak {
                center: grid.center(i),
                fwhm,
                area: smooth[i] * PI * fwhm / (2.0 * grid.step),
            }
        })
        .collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(peaks)
}

/// Fit `n_peaks` Lorentzians to binned counts. Without `initial`, starting
/// values come from the strongest local maxima.
pub fn fit_lorentzians(
    grid: &SpectralGrid,
    counts: &[f64],
    n_peaks: usize,
    initial: Option<&[Peak]>,
    opts: &FitOptions,
) -> Result<FitResult, SpectroscopyError> {
    if counts.is_empty() || counts.len() != grid.bins {
        return Err(SpectroscopyError::EmptySpectrum);
    }
    if n_peaks == 0 {
        return Err(SpectroscopyError::DegenerateInit(0));
    }
    let start = match initial {
        Some(p) if p.len() == n_peaks => p.to_vec(),
        Some(_) => return Err(SpectroscopyError::DegenerateInit(n_peaks)),
        None => initial_guess(grid, counts, n_peaks)?,
    };
    let mut p: Vec<f64> = start.iter().flat_map(|k| [k.center, k.fwhm, k.area]).collect();
    if !valid(&p) {
        return Err(SpectroscopyError::DegenerateInit(n_peaks));
    }
    let w: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if opts.poisson_weights {
                1.0 / c.max(1.0)
            } else {
                1.0
            }
        })
        .collect();
    let cost_of = |m: &[f64]| -> f64 {
        m.iter()
            .zip(counts)
            .zip(&w)
            .map(|((m, y), w)| w * (m - y).powi(2))
            .sum()
    };

    let np = p.len();
    let mut jac = DMatrix::zeros(grid.bins, np);
    let mut model = model_and_jacobian(grid, &p, Some(&mut jac));
    let mut cost = cost_of(&model);
    let mut lambda = 1e-3;
    for iter in 1..=opts.max_iterations {
        let r = DVector::from_iterator(grid.bins, model.iter().zip(counts).map(|(m, y)| m - y));
        let wv = DVector::from_vec(w.clone());
        let jw = DMatrix::from_fn(grid.bins, np, |i, j| jac[(i, j)] * wv[i]);
        let a = jw.transpose() * &jac;
        let g = jw.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for j in 0..np {
                damped[(j, j)] += lambda * a[(j, j)].max(1e-300);
            }
            let Some(delta) = damped.lu().solve(&(-&g)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            if !valid(&trial) {
                lambda *= 4.0;
                continue;
            }
            let trial_model = model_and_jacobian(grid, &trial, None);
            let trial_cost = cost_of(&trial_model);
            if trial_cost <= cost {
                let drop = cost - trial_cost;
                let step = delta
                    .iter()
                    .zip(&p)
                    .map(|(d, v)| d.abs() / (v.abs() + 1e-12))
                    .fold(0.0, f64::max);
                p = trial;
                model = model_and_jacobian(grid, &p, Some(&mut jac));
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if drop <= opts.tolerance * cost || step < 1e-13 || cost == 0.0 {
                    return Ok(finish(p, cost, iter));
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no direction lowers the cost: at a minimum to working precision
            return Ok(finish(p, cost, iter));
        }
    }
    Err(SpectroscopyError::NonConvergence(opts.max_iterations))
}

fn finish(p: Vec<f64>, cost: f64, iterations: usize) -> FitResult {
    let mut peaks: Vec<Peak> = p
        .chunks(3)
        .map(|c| Peak {
            center: c[0],
            fwhm: c[1],
            area: c[2],
        })
        .collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    FitResult {
        peaks,
        residual_norm: cost.sqrt(),
        iterations,
    }
}
