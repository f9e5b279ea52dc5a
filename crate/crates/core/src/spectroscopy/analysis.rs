use super::fit::{fit_lorentzians, FitOptions, Peak};
use super::spectrum::{synthesize_spectrum, Emitter, PortSpectra, SpectralGrid, SynthesisOptions};
use super::zeeman::zeeman_peaks;
use super::SpectroscopyError;
use crate::coupling::Direction;
use crate::seed::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratedPeak {
    pub counts: f64,
    /// The window ran past the spectrum edge.
    pub truncated: bool,
}

/// Counts inside a window one FWHM wide centered on the peak. Edge bins
/// contribute in proportion to their overlap with the window.
pub fn integrate_peak(grid: &SpectralGrid, counts: &[f64], center: f64, fwhm: f64) -> IntegratedPeak {
    let lo = center - fwhm / 2.0;
    let hi = center + fwhm / 2.0;
    if counts.is_empty() {
        return IntegratedPeak {
            counts: 0.0,
            truncated: false,
        };
    }
    let mut sum = 0.0;
    for (i, c) in counts.iter().enumerate().take(grid.bins) {
        let overlap = hi.min(grid.edge(i + 1)) - lo.max(grid.edge(i));
        if overlap > 0.0 {
            sum += c * overlap / grid.step;
        }
    }
    IntegratedPeak {
        counts: sum,
        truncated: lo < grid.start || hi > grid.end(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Directionality {
    pub left: f64,
    pub right: f64,
    pub average: f64,
}

/// `F_L = I₊,L / (I₊,L + I₋,L)`, `F_R = I₋,R / (I₊,R + I₋,R)` and their
/// mean, assuming equal populations of the two transitions.
pub fn extract_directionality(
    plus_left: f64,
    minus_left: f64,
    plus_right: f64,
    minus_right: f64,
) -> Result<Directionality, SpectroscopyError> {
    for v in [plus_left, minus_left, plus_right, minus_right] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(SpectroscopyError::InvalidParameter {
                name: "intensity",
                value: v,
            });
        }
    }
    let (dl, dr) = (plus_left + minus_left, plus_right + minus_right);
    if !(dl > 0.0 && dr > 0.0) {
        return Err(SpectroscopyError::ZeroDenominator);
    }
    let left = plus_left / dl;
    let right = minus_right / dr;
    Ok(Directionality {
        left,
        right,
        average: (left + right) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub field: f64,
    pub f_left: f64,
    pub f_right: f64,
    pub f_avg: f64,
    /// Both lines fitted separately; otherwise one shared window.
    pub resolved: bool,
    pub truncated: bool,
}

/// How a fitted line is turned into an intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    /// Counts within one FWHM of the fitted center. Each window also
    /// collects the neighbour's tail, which biases F_dir toward 1/2 by a
    /// fixed amount set by splitting/FWHM (≈0.027 at 3×FWHM for F = 0.9).
    FwhmWindow,
    /// Fitted Lorentzian area.
    FittedArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Splitting, in linewidths, below which the doublet is one line.
    pub resolve_ratio: f64,
    pub integration: Integration,
    pub fit: FitOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            resolve_ratio: 1.0,
            integration: Integration::FwhmWindow,
            fit: FitOptions::default(),
        }
    }
}

/// Fit and integrate both ports of one spectrum. Line identities come from
/// the Zeeman model: the fitted peak nearest the predicted σ+ energy is σ+.
/// Below `resolve_ratio` linewidths of splitting the doublet is fitted as a
/// single line and both transitions share its window.
pub fn analyze_point(
    spectra: &PortSpectra,
    emitter: &Emitter,
    opts: &AnalysisOptions,
) -> Result<FieldPoint, SpectroscopyError> {
    let grid = &spectra.grid;
    let fit = &opts.fit;
    let (plus, minus) = zeeman_peaks(&emitter.zeeman, spectra.field);
    let resolved = (plus.center - minus.center).abs() >= opts.resolve_ratio * emitter.zeeman.linewidth;
    let guess = |port: &[f64], center: f64| {
        let i = (((center - grid.start) / grid.step).floor().max(0.0) as usize).min(grid.bins - 1);
        let fwhm = emitter.zeeman.linewidth;
        Peak {
            center,
            fwhm,
            area: (port[i] * std::f64::consts::PI * fwhm / (2.0 * grid.step)).max(1.0),
        }
    };

    let mut intensities = [[0.0; 2]; 2]; // [port][σ+, σ−]
    let mut truncated = false;
    for (k, port) in [Direction::Left, Direction::Right].into_iter().enumerate() {
        let y = spectra.port(port);
        let windows: [Peak; 2] = if resolved {
            let init = [guess(y, plus.center), guess(y, minus.center)];
            let f = fit_lorentzians(grid, y, 2, Some(&init), fit)?;
            let d = |p: &Peak, c: f64| (p.center - c).abs();
            let (a, b) = (f.peaks[0], f.peaks[1]);
            if d(&a, plus.center) + d(&b, minus.center) <= d(&b, plus.center) + d(&a, minus.center) {
                [a, b]
            } else {
                [b, a]
            }
        } else {
            let mid = (plus.center + minus.center) / 2.0;
            let f = fit_lorentzians(grid, y, 1, Some(&[guess(y, mid)]), fit)?;
            [f.peaks[0], f.peaks[0]]
        };
        for (j, w) in windows.iter().enumerate() {
            intensities[k][j] = match opts.integration {
                Integration::FwhmWindow => {
                    let r = integrate_peak(grid, y, w.center, w.fwhm);
                    truncated |= r.truncated;
                    r.counts
                }
                Integration::FittedArea => w.area,
            };
        }
    }
    let d = extract_directionality(
        intensities[0][0],
        intensities[0][1],
        intensities[1][0],
        intensities[1][1],
    )?;
    Ok(FieldPoint {
        field: spectra.field,
        f_left: d.left,
        f_right: d.right,
        f_avg: d.average,
        resolved,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSweep {
    pub emitter: Emitter,
    /// Ascending, tesla.
    pub fields: Vec<f64>,
    pub synthesis: SynthesisOptions,
    /// Bin width in linewidths.
    pub bin_over_linewidth: f64,
    /// Margin beyond the widest doublet, in linewidths.
    pub margin_linewidths: f64,
    pub analysis: AnalysisOptions,
    pub seed: u64,
}

impl FieldSweep {
    pub fn new(emitter: Emitter, fields: Vec<f64>, seed: u64) -> Self {
        FieldSweep {
            emitter,
            fields,
            synthesis: SynthesisOptions::default(),
            bin_over_linewidth: 0.05,
            margin_linewidths: 20.0,
            analysis: AnalysisOptions::default(),
            seed,
        }
    }

    /// One grid for the whole sweep, wide enough for the largest splitting.
    pub fn grid(&self) -> Result<SpectralGrid, SpectroscopyError> {
        let z = &self.emitter.zeeman;
        let b_max = self.fields.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        let half = z.splitting(b_max).abs() / 2.0 + self.margin_linewidths * z.linewidth;
        let center = self.fields.iter().map(|&b| z.center(b)).fold(z.e0, f64::max);
        SpectralGrid::around(
            center,
            half + (center - z.e0),
            self.bin_over_linewidth * z.linewidth,
        )
    }

    /// Spectrum synthesized for point `i`, with its derived seed.
    pub fn spectrum(&self, i: usize) -> Result<PortSpectra, SpectroscopyError> {
        synthesize_spectrum(
            &[self.emitter],
            self.fields[i],
            self.grid()?,
            &self.synthesis,
            derive_seed(self.seed, i as u64),
        )
    }
}

/// Synthesize and analyze every field point. Points run in parallel; each
/// uses `derive_seed(seed, index)`, so the curve does not depend on
/// scheduling.
pub fn directionality_vs_field(sweep: &FieldSweep) -> Result<Vec<FieldPoint>, SpectroscopyError> {
    if sweep.fields.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SpectroscopyError::UnsortedGrid);
    }
    sweep.emitter.zeeman.validate()?;
    (0..sweep.fields.len())
        .into_par_iter()
        .map(|i| {
            let s = sweep.spectrum(i)?;
            analyze_point(&s, &sweep.emitter, &sweep.analysis)
        })
        .collect()
}

/// Mean of `f_avg` over points with `b_min ≤ |B| ≤ b_max`.
pub fn plateau_mean(curve: &[FieldPoint], b_min: f64, b_max: f64) -> Result<f64, SpectroscopyError> {
    let v: Vec<f64> = curve
        .iter()
        .filter(|p| (b_min..=b_max).contains(&p.field.abs()))
        .map(|p| p.f_avg)
        .collect();
    if v.is_empty() {
        return Err(SpectroscopyError::EmptyPlateau(b_min, b_max));
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// `B,F_L,F_R,F_avg,resolved`
pub fn curve_to_csv(curve: &[FieldPoint]) -> String {
    let mut s = String::from("B,F_L,F_R,F_avg,resolved\n");
    for p in curve {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            p.field, p.f_left, p.f_right, p.f_avg, p.resolved
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectroscopy::fit::lorentzian_bin;
    use crate::spectroscopy::zeeman::ZeemanModel;

    fn lorentz_counts(g: &SpectralGrid, p: &Peak) -> Vec<f64> {
        (0..g.bins)
            .map(|i| lorentzian_bin(p, g.edge(i), g.edge(i + 1)))
            .collect()
    }

    #[test]
    fn fwhm_window_holds_half_the_line() {
        let g = SpectralGrid::around(0.0, 20000.0, 0.5).unwrap();
        let p = Peak {
            center: 0.25,
            fwhm: 40.0,
            area: 1.0,
        };
        let r = integrate_peak(&g, &lorentz_counts(&g, &p), p.center, p.fwhm);
        // fractional edge bins interpolate linearly inside one 0.5 μeV bin
        assert!((r.counts - 0.5).abs() < 1e-4, "{}", r.counts);
        assert!(!r.truncated);
        assert_eq!(integrate_peak(&g, &[], 0.0, 1.0).counts, 0.0);
    }

    #[test]
    fn truncation_is_flagged() {
        let g = SpectralGrid::around(0.0, 10.0, 1.0).unwrap();
        let r = integrate_peak(&g, &vec![1.0; g.bins], 9.0, 4.0);
        assert!(r.truncated);
        // only [7, 10) lies on the grid
        assert!((r.counts - 3.0).abs() < 1e-12);
    }

    #[test]
    fn resolved_duplet_integrals_close_to_isolated() {
        let g = SpectralGrid::around(0.0, 1500.0, 1.0).unwrap();
        let fwhm = 38.6;
        let a = Peak {
            center: -1.5 * fwhm,
            fwhm,
            area: 1e5,
        };
        let b = Peak {
            center: 1.5 * fwhm,
            ..a
        };
        let alone = integrate_peak(&g, &lorentz_counts(&g, &a), a.center, fwhm).counts;
        let both: Vec<f64> = lorentz_counts(&g, &a)
            .iter()
            .zip(lorentz_counts(&g, &b))
            .map(|(x, y)| x + y)
            .collect();
        let with = integrate_peak(&g, &both, a.center, fwhm).counts;
        assert!((with - alone) / alone < 0.04);
        assert!(with > alone);
    }

    #[test]
    fn directionality_formula() {
        let d = extract_directionality(3.0, 3.0, 5.0, 5.0).unwrap();
        assert_eq!((d.left, d.right, d.average), (0.5, 0.5, 0.5));
        let d = extract_directionality(7.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(d.average, 1.0);
        assert_eq!(
            extract_directionality(0.0, 0.0, 1.0, 1.0).unwrap_err(),
            SpectroscopyError::ZeroDenominator
        );
        assert!(extract_directionality(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn per_port_scale_invariance() {
        let a = extract_directionality(9.0, 1.0, 2.0, 8.0).unwrap();
        let b = extract_directionality(9.0 * 0.3, 1.0 * 0.3, 2.0 * 7.0, 8.0 * 7.0).unwrap();
        assert!((a.left - b.left).abs() < 1e-15);
        assert!((a.right - b.right).abs() < 1e-15);
    }

    #[test]
    fn close_lines_pull_windowed_ratio_toward_equality() {
        // 0.5 FWHM apart: each window also collects the neighbour
        let g = SpectralGrid::around(0.0, 1500.0, 1.0).unwrap();
        let fwhm = 38.6;
        let strong = Peak {
            center: -0.25 * fwhm,
            fwhm,
            area: 9e4,
        };
        let weak = Peak {
            center: 0.25 * fwhm,
            fwhm,
            area: 1e4,
        };
        let y: Vec<f64> = lorentz_counts(&g, &strong)
            .iter()
            .zip(lorentz_counts(&g, &weak))
            .map(|(x, y)| x + y)
            .collect();
        let f = fit_lorentzians(&g, &y, 2, Some(&[strong, weak]), &FitOptions::default()).unwrap();
        let i_s = integrate_peak(&g, &y, f.peaks[0].center, f.peaks[0].fwhm).counts;
        let i_w = integrate_peak(&g, &y, f.peaks[1].center, f.peaks[1].fwhm).counts;
        let measured = i_s / (i_s + i_w);
        assert!(measured < 0.75, "{measured}");
        assert!(measured > 0.5);
    }

    #[test]
    fn zero_field_point_reads_one_half() {
        let e = Emitter::new(ZeemanModel::default(), 0.9);
        let sweep = FieldSweep::new(e, vec![0.0, 2.0], 11);
        let c = directionality_vs_field(&sweep).unwrap();
        assert!(!c[0].resolved);
        assert!((c[0].f_avg - 0.5).abs() < 1e-12);
        assert!((c[1].f_avg - 0.9).abs() < 0.03, "{}", c[1].f_avg);
    }

    #[test]
    fn unsorted_fields_rejected() {
        let e = Emitter::new(ZeemanModel::default(), 0.9);
        let sweep = FieldSweep::new(e, vec![1.0, 0.0], 0);
        assert_eq!(
            directionality_vs_field(&sweep).unwrap_err(),
            SpectroscopyError::UnsortedGrid
        );
        assert!(plateau_mean(&[], 1.0, 5.0).is_err());
    }
}
