//! State-vector execution of the spin-mediated photon-photon CNOT.
//!
//! Basis order is `(control, target, spin)`, control the most significant
//! bit; spin `|↑⟩ = 0`, `|↓⟩ = 1`. The control photon travels in the
//! waveguide section holding the emitter when in `|1⟩_c`. In the default
//! orientation it propagates left and scatters on the ↓-spin transition;
//! the counter-propagating target photon addresses the ↑-spin transition.
//!
//! With the symmetric coupler `[[√r, i√(1−r)], [i√(1−r), √r]]` a bare
//! balanced Mach-Zehnder maps `|0⟩ → i|1⟩`, so the target interferometer
//! carries fixed `diag(1, i)` phase trims on its input and output ports.
//! With them the six-step sequence is exactly CNOT (up to a global phase)
//! at `β_dir = 1`.

use crate::coupling::Direction;
use crate::quantum::{MeasureMode, PureState, QuantumError, Unitary2};
use crate::scattering::{scatter, ScatteringError, ScatteringParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

pub const CONTROL: &str = "control";
pub const TARGET: &str = "target";
pub const SPIN: &str = "spin";
pub const GATE_LABELS: [&str; 3] = [CONTROL, TARGET, SPIN];
pub const PHOTON_LABELS: [&str; 2] = [CONTROL, TARGET];

/// Largest spin-photon entanglement (smaller Schmidt weight) treated as a
/// product state.
pub const SEPARABILITY_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("invalid gate config: {0}")]
    InvalidConfig(String),
    #[error("invalid input state: {0}")]
    InvalidInput(String),
    #[error("spin remains entangled with the photons (Schmidt weight {0:.3e})")]
    EntangledSpin(f64),
    #[error("norm bookkeeping violated by {0:.3e}")]
    NormViolation(f64),
    #[error("β_dir = {0} outside (1/2, 1]")]
    Domain(f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

/// What the photon sees when the spin sits in the branch whose transition
/// it does not address.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffBranch {
    /// Passes untouched.
    FarDetuned,
    /// The other transition, split off by this many `γ_tot`. It is seen from
    /// its weak direction, so forward and backward rates swap roles.
    Splitting(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPolicy {
    /// Photon detuning from the addressed transition, in units of `γ_tot`.
    pub detuning: f64,
    pub off_branch: OffBranch,
}

impl Default for TransitionPolicy {
    fn default() -> Self {
        TransitionPolicy {
            detuning: 0.0,
            off_branch: OffBranch::FarDetuned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EraserMode {
    Enumerate,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub beta_dir: f64,
    /// Share of `1 − β_dir` coupled backwards; reflected photons count as loss.
    pub backward_share: f64,
    pub control: TransitionPolicy,
    pub target: TransitionPolicy,
    /// Coupler setting while the control photon passes (1 = fully uncoupled).
    pub closed_ratio: f64,
    /// Coupler setting forming the target interferometer.
    pub interferometer_ratio: f64,
    pub seed: u64,
    pub eraser: EraserMode,
    /// Report the heralded (loss-renormalized) fidelity as the headline value.
    pub post_select: bool,
    /// Propagation direction of the control photon; the target runs opposite.
    pub control_direction: Direction,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            beta_dir: 1.0,
            backward_share: 0.0,
            control: TransitionPolicy::default(),
            target: TransitionPolicy::default(),
            closed_ratio: 1.0,
            interferometer_ratio: 0.5,
            seed: 0,
            eraser: EraserMode::Enumerate,
            post_select: false,
            control_direction: Direction::Left,
        }
    }
}

impl GateConfig {
    pub fn with_beta(beta_dir: f64) -> Self {
        GateConfig {
            beta_dir,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), GateError> {
        if !(self.beta_dir > 0.5 && self.beta_dir <= 1.0) {
            return Err(GateError::InvalidConfig(format!(
                "beta_dir = {} outside (1/2, 1]",
                self.beta_dir
            )));
        }
        for (name, v) in [
            ("backward_share", self.backward_share),
            ("closed_ratio", self.closed_ratio),
            ("interferometer_ratio", self.interferometer_ratio),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GateError::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (name, p) in [("control", self.control), ("target", self.target)] {
            let split_ok = match p.off_branch {
                OffBranch::FarDetuned => true,
                OffBranch::Splitting(s) => s.is_finite(),
            };
            if !p.detuning.is_finite() || !split_ok {
                return Err(GateError::InvalidConfig(format!("{name} detuning not finite")));
            }
        }
        Ok(())
    }

    /// Spin bit whose transition the control photon addresses.
    fn control_spin(&self) -> usize {
        match self.control_direction {
            Direction::Left => 1,
            Direction::Right => 0,
        }
    }

    /// Spin rotations are expressed in the `(target-coupled, control-coupled)`
    /// basis; relabelling ↑ ↔ ↓ reverses the rotation sense.
    fn rotation(&self, angle: f64) -> Unitary2 {
        if self.control_spin() == 1 {
            Unitary2::spin_rotation(angle)
        } else {
            Unitary2::spin_rotation(-angle)
        }
    }

    /// `(addressed, off-branch)` transmission for one photon.
    fn amplitudes(&self, policy: &TransitionPolicy) -> Result<(Complex64, Complex64), GateError> {
        let p = ScatteringParams::from_beta_dir(self.beta_dir, self.backward_share, policy.detuning)?;
        let on = scatter(&p).t;
        let off = match policy.off_branch {
            OffBranch::FarDetuned => ONE,
            OffBranch::Splitting(s) => {
                let q = ScatteringParams::new(policy.detuning + s, p.gamma_bwd, p.gamma_fwd, p.gamma_rad)?;
                scatter(&q).t
            }
        };
        Ok((on, off))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u8,
    pub action: String,
    pub guided_norm: f64,
    pub loss_weight: f64,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EraserBranch {
    /// Spin measurement result, 0 = ↑.
    pub outcome: u8,
    /// Absolute probability; branches sum to the guided norm.
    pub probability: f64,
    /// Normalized, feed-forward-corrected state over `(control, target, spin)`.
    pub output: PureState,
    /// Heralded fidelity of this branch against the ideal gate.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateRun {
    pub input: PureState,
    /// First enumerated (or the sampled) branch.
    pub output: PureState,
    pub branches: Vec<EraserBranch>,
    /// Headline value; heralded when `post_select` is set.
    pub fidelity_vs_ideal: f64,
    /// Overlap without renormalizing away photon loss.
    pub fidelity_unheralded: f64,
    /// Overlap conditioned on both photons surviving.
    pub fidelity_heralded: f64,
    pub loss_weight: f64,
    pub transcript: Vec<StepRecord>,
}

/// Two-photon input `Σ a_{ct} |c t⟩` with the spin in `|↑⟩`.
pub fn gate_input(photons: [Complex64; 4]) -> Result<PureState, GateError> {
    let p = PureState::new(&PHOTON_LABELS, photons.to_vec())?;
    Ok(p.tensor(&PureState::basis(&[SPIN], 0)?)?)
}

/// Textbook CNOT on a `(control, target)` state, `|1⟩_c` flipping the target.
pub fn ideal_cnot(photons: &PureState) -> Result<PureState, GateError> {
    check_labels(photons, &PHOTON_LABELS)?;
    let a = photons.amplitudes();
    Ok(PureState::with_loss(
        &PHOTON_LABELS,
        vec![a[0], a[1], a[3], a[2]],
        photons.loss_weight(),
    )?)
}

fn check_labels(s: &PureState, expected: &[&str]) -> Result<(), GateError> {
    if s.labels().iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(GateError::InvalidInput(format!(
            "expected labels {expected:?}, got {:?}",
            s.labels()
        )));
    }
    Ok(())
}

/// Photonic factor of a `(control, target, spin)` state, keeping its norm.
/// Returns the factor and the smaller Schmidt weight of the spin cut.
pub fn photonic_factor(state: &PureState) -> Result<(PureState, f64), GateError> {
    if state.labels().len() == 2 {
        check_labels(state, &PHOTON_LABELS)?;
        return Ok((state.clone(), 0.0));
    }
    check_labels(state, &GATE_LABELS)?;
    let amp = state.amplitudes();
    let col = |s: usize| [amp[s], amp[2 + s], amp[4 + s], amp[6 + s]];
    let (c0, c1) = (col(0), col(1));
    let dot = |x: &[Complex64; 4], y: &[Complex64; 4]| -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    };
    // Gram matrix of the two spin columns
    let g00 = dot(&c0, &c0).re;
    let g11 = dot(&c1, &c1).re;
    let g01 = dot(&c0, &c1);
    let total = g00 + g11;
    if total <= f64::MIN_POSITIVE {
        return Err(QuantumError::ZeroNorm.into());
    }
    let half = (g00 - g11) / 2.0;
    let root = (half * half + g01.norm_sqr()).sqrt();
    let top = total / 2.0 + root;
    let weight = ((total / 2.0 - root) / total).max(0.0);
    let spin = if g01.norm() > 1e-300 {
        let v = [g01, Complex64::new(top - g00, 0.0)];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / n, v[1] / n]
    } else if g00 >= g11 {
        [ONE, ZERO]
    } else {
        [ZERO, ONE]
    };
    let photons: Vec<Complex64> = (0..4).map(|p| c0[p] * spin[0] + c1[p] * spin[1]).collect();
    let guided: f64 = photons.iter().map(|a| a.norm_sqr()).sum();
    // weight dropped by the projection onto the dominant spin state, zero up
    // to rounding when the spin is separable
    let dropped = total - guided;
    let dropped = if dropped.abs() <= 1e-14 { 0.0 } else { dropped };
    let loss = (state.loss_weight() + dropped).clamp(0.0, 1.0);
    let out = PureState::with_loss(&PHOTON_LABELS, photons, loss)?;
    Ok((out, weight))
}

/// `|⟨CNOT·input | output⟩|²` on the photonic factors. Either state may
/// carry the spin label, in which case it must factor out.
pub fn fidelity_vs_ideal(output: &PureState, input: &PureState) -> Result<f64, GateError> {
    let (out, w_out) = photonic_factor(output)?;
    let (inp, w_in) = photonic_factor(input)?;
    for w in [w_out, w_in] {
        if w > SEPARABILITY_TOLERANCE {
            return Err(GateError::EntangledSpin(w));
        }
    }
    let ideal = ideal_cnot(&inp)?;
    Ok(ideal.overlap_sqr(&out)?.clamp(0.0, 1.0))
}

fn check_domain(beta_dir: f64) -> Result<(), GateError> {
    if beta_dir > 0.5 && beta_dir <= 1.0 {
        Ok(())
    } else {
        Err(GateError::Domain(beta_dir))
    }
}

/// Fidelity with `Φ⁺` for the input `(|0⟩_c + |1⟩_c)|0⟩_t/√2`.
pub fn fidelity_entangling(beta_dir: f64) -> Result<f64, GateError> {
    check_domain(beta_dir)?;
    Ok(beta_dir * beta_dir)
}

/// Fidelity for the least favourable input.
pub fn fidelity_min(beta_dir: f64) -> Result<f64, GateError> {
    check_domain(beta_dir)?;
    Ok((1.0 - 2.0 * beta_dir).powi(2))
}

/// `(|00⟩ + |10⟩)/√2`, which the ideal gate maps to `Φ⁺`.
pub fn entangling_input() -> PureState {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    gate_input([h, ZERO, h, ZERO]).expect("normalized")
}

fn record(log: &mut Vec<StepRecord>, step: u8, action: &str, s: &PureState) {
    log.push(StepRecord {
        step,
        action: action.to_owned(),
        guided_norm: s.norm_sqr(),
        loss_weight: s.loss_weight(),
        state: s.to_string(),
    });
}

fn bit(index: usize, mask: usize) -> usize {
    usize::from(index & mask != 0)
}

pub fn run_protocol(input: &PureState, config: &GateConfig) -> Result<GateRun, GateError> {
    config.validate()?;
    check_labels(input, &GATE_LABELS)?;
    if input.loss_weight() != 0.0 || (input.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(GateError::InvalidInput(format!(
            "norm {} with loss {}",
            input.norm_sqr(),
            input.loss_weight()
        )));
    }
    let (photons, weight) = photonic_factor(input)?;
    if weight > SEPARABILITY_TOLERANCE {
        return Err(GateError::InvalidInput(
            "spin is entangled with the photons and cannot be re-initialized".into(),
        ));
    }

    let sc = config.control_spin();
    let st = 1 - sc;
    let c_bit = 0b100;
    let s_bit = 0b001;
    let mut log = Vec::new();

    // 1: spin to the target-coupled state
    let mut s = photons.tensor(&PureState::basis(&[SPIN], st)?)?;
    let spin_name = |b: usize| if b == 0 { "↑" } else { "↓" };
    record(
        &mut log,
        1,
        &format!("initialize spin to |{}⟩", spin_name(st)),
        &s,
    );

    // 2
    s.apply_single_mut(&config.rotation(FRAC_PI_2), SPIN)?;
    record(&mut log, 2, "spin rotation R(π/2)", &s);

    // 3: |1⟩_c passes the emitter between two closed couplers; what leaks
    // to the other waveguide leaves the logical space
    let (t_on, t_off) = config.amplitudes(&config.control)?;
    let rho = config.closed_ratio;
    let pass = |x: Complex64| x * rho - (1.0 - rho);
    s.attenuate(|i| bit(i, c_bit) == 1 && bit(i, s_bit) == sc, pass(t_on))?;
    s.attenuate(|i| bit(i, c_bit) == 1 && bit(i, s_bit) == st, pass(t_off))?;
    record(
        &mut log,
        3,
        &format!(
            "control |1⟩_c scatters on the |{}⟩ transition, t = {:.6}{:+.6}i",
            spin_name(sc),
            t_on.re,
            t_on.im
        ),
        &s,
    );

    // 4
    s.apply_single_mut(&config.rotation(-FRAC_PI_2), SPIN)?;
    record(&mut log, 4, "spin rotation R(−π/2)", &s);

    // 5: balanced interferometer on the target, emitter in arm 0
    let (u_on, u_off) = config.amplitudes(&config.target)?;
    let bs = Unitary2::beamsplitter(config.interferometer_ratio)?;
    let trim = Unitary2::diagonal(ONE, I)?;
    for spin in [0usize, 1] {
        let x = if spin == st { u_on } else { u_off };
        let arm = [[x, ZERO], [ZERO, ONE]];
        let m = mat_mul(
            &trim.matrix(),
            &mat_mul(
                &bs.matrix(),
                &mat_mul(&arm, &mat_mul(&bs.matrix(), &trim.matrix())),
            ),
        );
        s.apply_contraction(m, TARGET, |i| bit(i, s_bit) == spin)?;
    }
    record(
        &mut log,
        5,
        &format!(
            "target interferometer, arm 0 scatters on the |{}⟩ transition, t = {:.6}{:+.6}i",
            spin_name(st),
            u_on.re,
            u_on.im
        ),
        &s,
    );

    // 6: eraser
    s.apply_single_mut(&config.rotation(FRAC_PI_2), SPIN)?;
    record(&mut log, 6, "spin rotation R(π/2)", &s);
    let drift = (s.norm_sqr() + s.loss_weight() - 1.0).abs();
    if drift > 1e-9 {
        return Err(GateError::NormViolation(drift));
    }

    let mode = match config.eraser {
        EraserMode::Enumerate => MeasureMode::Enumerate,
        EraserMode::Sample => MeasureMode::Sample(config.seed),
    };
    let guided = s.norm_sqr();
    let mut branches = Vec::new();
    for o in s.measure(SPIN, mode)? {
        let Some(mut post) = o.posterior else { continue };
        if usize::from(o.outcome) == sc {
            post.attenuate(|i| bit(i, c_bit) == 1, -ONE)?;
        }
        let fidelity = fidelity_vs_ideal(&post, &photons)?;
        record(
            &mut log,
            6,
            &format!(
                "measured |{}⟩ (p = {:.6}){}",
                spin_name(o.outcome.into()),
                o.probability,
                if usize::from(o.outcome) == sc {
                    ", π phase on |1⟩_c"
                } else {
                    ""
                }
            ),
            &post,
        );
        branches.push(EraserBranch {
            outcome: o.outcome,
            probability: o.probability,
            output: post,
            fidelity,
        });
    }

    let (unheralded, heralded) = match config.eraser {
        EraserMode::Enumerate => {
            let f: f64 = branches.iter().map(|b| b.probability * b.fidelity).sum();
            (f, f / guided)
        }
        EraserMode::Sample => {
            let f = branches[0].fidelity;
            (f * guided, f)
        }
    };
    Ok(GateRun {
        input: input.clone(),
        output: branches[0].output.clone(),
        fidelity_vs_ideal: if config.post_select { heralded } else { unheralded },
        fidelity_unheralded: unheralded.clamp(0.0, 1.0),
        fidelity_heralded: heralded.clamp(0.0, 1.0),
        loss_weight: s.loss_weight(),
        branches,
        transcript: log,
    })
}

/// One run per `β_dir`, in parallel; the result order follows `betas`.
pub fn sweep_beta(input: &PureState, base: &GateConfig, betas: &[f64]) -> Result<Vec<GateRun>, GateError> {
    betas
        .par_iter()
        .map(|&b| run_protocol(input, &GateConfig { beta_dir: b, ..*base }))
        .collect()
}

fn mat_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut m = [[ZERO; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}
