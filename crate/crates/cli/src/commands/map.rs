use crate::config::{DipoleChoice, MapConfig};
use crate::error::{config, CliError};
use crate::output::Outputs;
use chiral_core::coupling::{
    directionality_map, toy_field, MapSummary, ModeFieldMap, ModePair, RadiativeModel, ToyFieldParams,
    TransitionDipole,
};
use serde::Serialize;

#[derive(Serialize)]
struct Report {
    source: String,
    dipole: DipoleChoice,
    points: usize,
    #[serde(flatten)]
    summary: MapSummary,
    /// Direction favoured at the β_dir optimum.
    preferred_at_optimum: &'static str,
    right_preferred_points: usize,
}

pub fn run(cfg: &MapConfig) -> Result<(Outputs, String), CliError> {
    let field = if cfg.field_file.is_empty() {
        toy_field(&ToyFieldParams {
            lattice_constant: cfg.lattice_constant,
            frequency: cfg.frequency,
            nx: cfg.toy_nx,
            ny: cfg.toy_ny,
            y_extent: cfg.toy_y_extent,
            envelope_width: cfg.toy_envelope_width,
            phase: cfg.toy_phase,
        })
        .map_err(config)?
    } else {
        ModeFieldMap::load(&cfg.field_file)?
    };
    let dipole = match cfg.dipole {
        DipoleChoice::SigmaPlus => TransitionDipole::sigma_plus(),
        DipoleChoice::SigmaMinus => TransitionDipole::sigma_minus(),
        DipoleChoice::Linear => TransitionDipole::linear(cfg.dipole_angle),
    };
    let modes = ModePair::from_single(field);
    let map = directionality_map(
        &modes,
        &dipole,
        cfg.rate_scale,
        &RadiativeModel::Constant(cfg.gamma_rad),
    )?;
    let summary = map.summary();
    let best = (0..map.len())
        .find(|&k| map.position(k) == (summary.optimum_x, summary.optimum_y))
        .unwrap_or(0);
    let report = Report {
        source: if cfg.field_file.is_empty() {
            "toy".into()
        } else {
            cfg.field_file.clone()
        },
        dipole: cfg.dipole,
        points: map.len(),
        summary,
        preferred_at_optimum: map.preferred[best].as_str(),
        right_preferred_points: map.preferred.iter().filter(|d| d.as_str() == "right").count(),
    };

    let mut out = Outputs::default();
    out.text("directionality_map.csv", map.to_csv());
    out.json("map_summary.json", &report)?;
    let line = format!(
        "F_dir in [{:.6}, {:.6}], max beta_dir {:.6} at x = {}",
        summary.f_dir_min, summary.f_dir_max, summary.beta_dir_max, summary.optimum_x
    );
    Ok((out, line))
}
