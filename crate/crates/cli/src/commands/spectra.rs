use crate::config::{IntegrationChoice, SpectraConfig};
use crate::error::{config, CliError};
use crate::output::Outputs;
use chiral_core::coupling::Direction;
use chiral_core::spectroscopy::{
    curve_to_csv, directionality_vs_field, plateau_mean, AnalysisOptions, Emitter, FieldPoint, FieldSweep,
    FitOptions, Integration, Pedestal, ZeemanModel,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Serialize)]
struct Report {
    f_dir_true: f64,
    plateau_min: f64,
    plateau_max: f64,
    plateau_mean: f64,
    plateau_points: usize,
    /// Extracted value at the lowest field of the sweep.
    f_dir_low_field: f64,
    first_resolved_field: Option<f64>,
    truncated_points: usize,
    curve: Vec<FieldPoint>,
}

fn sweep(cfg: &SpectraConfig) -> Result<FieldSweep, CliError> {
    if cfg.b_points == 0 {
        return Err(config("b_points must be at least 1"));
    }
    if !(cfg.b_max >= cfg.b_min) {
        return Err(config("b_max must not be below b_min"));
    }
    let fields: Vec<f64> = if cfg.b_points == 1 {
        vec![cfg.b_min]
    } else {
        let step = (cfg.b_max - cfg.b_min) / (cfg.b_points - 1) as f64;
        (0..cfg.b_points).map(|i| cfg.b_min + step * i as f64).collect()
    };
    let zeeman = ZeemanModel {
        e0: cfg.e0,
        g_factor: cfg.g_factor,
        kappa: cfg.kappa,
        linewidth: cfg.linewidth,
    };
    let mut emitter = Emitter::new(zeeman, cfg.f_dir);
    emitter.sigma_plus_direction = cfg.sigma_plus_direction;
    let mut s = FieldSweep::new(emitter, fields, cfg.seed);
    s.synthesis.counts_budget = cfg.counts_budget;
    s.synthesis.poisson = cfg.poisson;
    s.synthesis.pedestal = (cfg.pedestal_fraction > 0.0).then_some(Pedestal {
        center: cfg.e0 + cfg.pedestal_offset,
        fwhm: cfg.pedestal_fwhm,
        fraction: cfg.pedestal_fraction,
    });
    s.synthesis.resolution_fwhm = (cfg.resolution_fwhm > 0.0).then_some(cfg.resolution_fwhm);
    s.bin_over_linewidth = cfg.bin_over_linewidth;
    s.margin_linewidths = cfg.margin_linewidths;
    s.analysis = AnalysisOptions {
        resolve_ratio: cfg.resolve_ratio,
        integration: match cfg.integration {
            IntegrationChoice::FwhmWindow => Integration::FwhmWindow,
            IntegrationChoice::FittedArea => Integration::FittedArea,
        },
        fit: FitOptions {
            max_iterations: cfg.max_iterations,
            poisson_weights: cfg.poisson_weights,
            ..FitOptions::default()
        },
    };
    Ok(s)
}

pub fn run(cfg: &SpectraConfig) -> Result<(Outputs, String), CliError> {
    let s = sweep(cfg)?;
    let curve = directionality_vs_field(&s)?;
    let plateau = plateau_mean(&curve, cfg.plateau_min, cfg.plateau_max)?;
    let in_plateau = |b: f64| (cfg.plateau_min..=cfg.plateau_max).contains(&b.abs());

    let mut out = Outputs::default();
    out.text("directionality_curve.csv", curve_to_csv(&curve));
    out.json(
        "spectra_summary.json",
        &Report {
            f_dir_true: cfg.f_dir,
            plateau_min: cfg.plateau_min,
            plateau_max: cfg.plateau_max,
            plateau_mean: plateau,
            plateau_points: curve.iter().filter(|p| in_plateau(p.field)).count(),
            f_dir_low_field: curve[0].f_avg,
            first_resolved_field: curve.iter().find(|p| p.resolved).map(|p| p.field),
            truncated_points: curve.iter().filter(|p| p.truncated).count(),
            curve: curve.clone(),
        },
    )?;
    if cfg.write_spectra {
        let spectra = (0..s.fields.len())
            .into_par_iter()
            .map(|i| s.spectrum(i))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, sp) in spectra.iter().enumerate() {
            for port in [Direction::Left, Direction::Right] {
                out.text(format!("spectrum_{i:03}_{}.csv", port.as_str()), sp.to_csv(port));
            }
        }
    }
    let line = format!(
        "plateau mean F_dir {:.4} over {} points in [{}, {}] T",
        plateau,
        curve.iter().filter(|p| in_plateau(p.field)).count(),
        cfg.plateau_min,
        cfg.plateau_max
    );
    Ok((out, line))
}
