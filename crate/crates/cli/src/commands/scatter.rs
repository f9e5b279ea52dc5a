use crate::config::ScatterConfig;
use crate::error::{config, CliError};
use crate::output::Outputs;
use chiral_core::scattering::{
    oracle_lattice_scatter, scatter, scatter_far_detuned, LatticeDiscretization, ScatteringAmplitudes,
    ScatteringParams,
};
use rayon::prelude::*;
use std::fmt::Write as _;

const HEADER: &str = "delta,re_t,im_t,re_r,im_r,loss\n";

fn row(csv: &mut String, delta: f64, a: &ScatteringAmplitudes) {
    let _ = writeln!(
        csv,
        "{delta},{},{},{},{},{}",
        a.t.re, a.t.im, a.r.re, a.r.im, a.loss
    );
}

pub fn run(cfg: &ScatterConfig) -> Result<(Outputs, String), CliError> {
    if cfg.points == 0 {
        return Err(config("points must be at least 1"));
    }
    let base = ScatteringParams::from_beta_dir(cfg.beta_dir, cfg.backward_share, 0.0)?;
    let deltas: Vec<f64> = (0..cfg.points)
        .map(|i| {
            if cfg.points == 1 {
                cfg.delta_min
            } else {
                cfg.delta_min + (cfg.delta_max - cfg.delta_min) * i as f64 / (cfg.points - 1) as f64
            }
        })
        .collect();

    let mut csv = String::from(HEADER);
    let mut worst: f64 = 0.0;
    for &d in &deltas {
        let p = base.with_detuning(d);
        let a = if cfg.far_detuned {
            scatter_far_detuned(&p)
        } else {
            scatter(&p)
        };
        worst = worst.max((a.budget() - 1.0).abs());
        row(&mut csv, d, &a);
    }
    let mut out = Outputs::default();
    out.text("scatter.csv", csv);

    let mut line = format!("{} points, worst budget deviation {worst:.1e}", deltas.len());
    if cfg.oracle {
        let disc = LatticeDiscretization {
            hopping_over_gamma: cfg.oracle_hopping,
            ..LatticeDiscretization::default()
        };
        let solved = deltas
            .par_iter()
            .map(|&d| oracle_lattice_scatter(&base.with_detuning(d), cfg.oracle_sites, disc))
            .collect::<Result<Vec<_>, _>>()?;
        let mut csv = String::from(HEADER);
        let mut gap: f64 = 0.0;
        for (&d, s) in deltas.iter().zip(&solved) {
            gap = gap.max((s.amplitudes.t - scatter(&base.with_detuning(d)).t).norm());
            row(&mut csv, d, &s.amplitudes);
        }
        out.text("scatter_oracle.csv", csv);
        line += &format!(", max |t - t_lattice| {gap:.1e}");
    }
    Ok((out, line))
}
