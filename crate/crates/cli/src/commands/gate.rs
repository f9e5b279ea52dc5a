use crate::config::{EraserChoice, GateFileConfig, OffBranchChoice};
use crate::error::{config, CliError};
use crate::output::Outputs;
use chiral_core::cnot::{
    fidelity_entangling, fidelity_min, gate_input, photonic_factor, run_protocol, sweep_beta, EraserMode,
    GateConfig, GateRun, OffBranch, TransitionPolicy,
};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Serialize)]
struct Branch {
    outcome: &'static str,
    probability: f64,
    fidelity_heralded: f64,
    /// Normalized photonic state after the eraser, over |00⟩..|11⟩.
    photons: Vec<Complex64>,
    spin_schmidt_weight: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    beta_dir: f64,
    input: Vec<Complex64>,
    fidelity_vs_ideal: f64,
    fidelity_unheralded: f64,
    fidelity_heralded: f64,
    loss_weight: f64,
    /// Closed forms at this β_dir: β² for the entangling input and
    /// (1 − 2β)² for the worst input.
    closed_form_entangling: Option<f64>,
    closed_form_min: Option<f64>,
    branches: Vec<Branch>,
    transcript: &'a [chiral_core::cnot::StepRecord],
}

fn gate_config(cfg: &GateFileConfig, beta_dir: f64) -> GateConfig {
    let off = match cfg.off_branch {
        OffBranchChoice::FarDetuned => OffBranch::FarDetuned,
        OffBranchChoice::Splitting => OffBranch::Splitting(cfg.off_branch_splitting),
    };
    GateConfig {
        beta_dir,
        backward_share: cfg.backward_share,
        control: TransitionPolicy {
            detuning: cfg.control_detuning,
            off_branch: off,
        },
        target: TransitionPolicy {
            detuning: cfg.target_detuning,
            off_branch: off,
        },
        closed_ratio: cfg.closed_ratio,
        interferometer_ratio: cfg.interferometer_ratio,
        seed: cfg.seed,
        eraser: match cfg.eraser {
            EraserChoice::Enumerate => EraserMode::Enumerate,
            EraserChoice::Sample => EraserMode::Sample,
        },
        post_select: cfg.post_select,
        control_direction: cfg.control_direction,
    }
}

fn branches(run: &GateRun) -> Result<Vec<Branch>, CliError> {
    run.branches
        .iter()
        .map(|b| {
            let (p, w) = photonic_factor(&b.output)?;
            Ok(Branch {
                outcome: if b.outcome == 0 { "up" } else { "down" },
                probability: b.probability,
                fidelity_heralded: b.fidelity,
                photons: p.amplitudes().to_vec(),
                spin_schmidt_weight: w,
            })
        })
        .collect()
}

pub fn run(cfg: &GateFileConfig) -> Result<(Outputs, String), CliError> {
    let raw: Vec<Complex64> = (0..4)
        .map(|k| Complex64::new(cfg.input_re[k], cfg.input_im[k]))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(config("input amplitudes must be finite and not all zero"));
    }
    let amps: Vec<Complex64> = raw.iter().map(|a| a / norm).collect();
    let input = gate_input([amps[0], amps[1], amps[2], amps[3]])?;
    let gc = gate_config(cfg, cfg.beta_dir);
    gc.validate()?;
    let run = run_protocol(&input, &gc)?;

    let report = Report {
        beta_dir: cfg.beta_dir,
        input: amps,
        fidelity_vs_ideal: run.fidelity_vs_ideal,
        fidelity_unheralded: run.fidelity_unheralded,
        fidelity_heralded: run.fidelity_heralded,
        loss_weight: run.loss_weight,
        closed_form_entangling: fidelity_entangling(cfg.beta_dir).ok(),
        closed_form_min: fidelity_min(cfg.beta_dir).ok(),
        branches: branches(&run)?,
        transcript: &run.transcript,
    };
    let mut out = Outputs::default();
    out.json("gate_result.json", &report)?;

    if !cfg.sweep_betas.is_empty() {
        for &b in &cfg.sweep_betas {
            gate_config(cfg, b).validate()?;
        }
        let runs = sweep_beta(&input, &gc, &cfg.sweep_betas)?;
        let mut csv = String::from("beta_dir,fidelity,fidelity_unheralded,fidelity_heralded,loss_weight\n");
        for (b, r) in cfg.sweep_betas.iter().zip(&runs) {
            let _ = writeln!(
                csv,
                "{b},{},{},{},{}",
                r.fidelity_vs_ideal, r.fidelity_unheralded, r.fidelity_heralded, r.loss_weight
            );
        }
        out.text("gate_sweep.csv", csv);
    }
    let line = format!(
        "fidelity {:.6} (unheralded {:.6}, heralded {:.6}), loss {:.6}",
        run.fidelity_vs_ideal, run.fidelity_unheralded, run.fidelity_heralded, run.loss_weight
    );
    Ok((out, line))
}
