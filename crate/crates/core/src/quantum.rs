//! Pure-state toolbox over labeled qubit registers.
//!
//! Amplitudes are stored in a flat vector of length `2^n`. The first label is
//! the most significant bit of the basis index, so for the gate register
//! `(control, target, spin)` the index is `4*c + 2*t + s`.
//!
//! Probability that leaves the guided modes is not represented by extra basis
//! states. It is accumulated in [`PureState::loss_weight`], and every
//! operation keeps `norm² + loss_weight == 1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Tolerance on `‖U†U − I‖_F` accepted by [`Unitary2::new`].
pub const UNITARITY_TOLERANCE: f64 = 1e-9;

/// Tolerance on `norm² + loss == 1` accepted when constructing states.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Deviations from unitarity at or below this are rounding, not loss.
const SNAP: f64 = 1e-14;

fn snap(x: f64) -> f64 {
    if x.abs() <= SNAP {
        0.0
    } else {
        x
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("unknown subsystem label `{0}`")]
    UnknownSubsystem(String),
    #[error("matrix is not unitary (Frobenius deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("expected {expected} amplitudes for {qubits} qubits, got {got}")]
    DimensionMismatch {
        qubits: usize,
        expected: usize,
        got: usize,
    },
    #[error("state norm {norm} plus loss {loss} differs from one")]
    NotNormalized { norm: f64, loss: f64 },
    #[error("state has zero guided norm")]
    ZeroNorm,
    #[error("basis labels differ: {0:?} vs {1:?}")]
    LabelMismatch(Vec<String>, Vec<String>),
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("beamsplitter ratio {0} outside [0, 1]")]
    InvalidRatio(f64),
    #[error("attenuation factor with modulus {0} would create probability")]
    Amplifying(f64),
}

/// A 2×2 unitary acting on one qubit factor, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self, QuantumError> {
        let u = Unitary2 { m };
        let dev = u.unitarity_deviation();
        if !(dev <= UNITARITY_TOLERANCE) {
            return Err(QuantumError::NonUnitary(dev));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        Unitary2 {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn pauli_x() -> Self {
        Unitary2 {
            m: [[ZERO, ONE], [ONE, ZERO]],
        }
    }

    pub fn pauli_z() -> Self {
        Unitary2 {
            m: [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// `diag(p0, p1)`; both entries must have unit modulus.
    pub fn diagonal(p0: Complex64, p1: Complex64) -> Result<Self, QuantumError> {
        Self::new([[p0, ZERO], [ZERO, p1]])
    }

    /// Phase `e^{iφ}` on the `|1⟩` component.
    pub fn phase(phi: f64) -> Self {
        Unitary2 {
            m: [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, phi)]],
        }
    }

    /// Lossless directional coupler with transmitted intensity fraction `ratio`:
    /// `[[√r, i√(1−r)], [i√(1−r), √r]]`.
    pub fn beamsplitter(ratio: f64) -> Result<Self, QuantumError> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(QuantumError::InvalidRatio(ratio));
        }
        let t = Complex64::new(ratio.sqrt(), 0.0);
        let r = I * (1.0 - ratio).sqrt();
        Ok(Unitary2 { m: [[t, r], [r, t]] })
    }

    /// Real rotation about the y axis, `R_y(a) = [[cos a/2, −sin a/2], [sin a/2, cos a/2]]`.
    pub fn spin_rotation(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Unitary2 {
            m: [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Unitary2) -> Unitary2 {
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        Unitary2 { m }
    }

    pub fn adjoint(&self) -> Unitary2 {
        let m = self.m;
        Unitary2 {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint().then_after(self);
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { ONE } else { ZERO };
                acc += (p.m[i][j] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn apply_to(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

/// Pure state over named qubits plus the probability already lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    labels: Vec<String>,
    amplitudes: Vec<Complex64>,
    loss_weight: f64,
}

impl PureState {
    /// Lossless state; `Σ|a|²` must equal one.
    pub fn new<S: AsRef<str>>(labels: &[S], amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        Self::with_loss(labels, amplitudes, 0.0)
    }

    pub fn with_loss<S: AsRef<str>>(
        labels: &[S],
        amplitudes: Vec<Complex64>,
        loss_weight: f64,
    ) -> Result<Self, QuantumError> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_owned()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(QuantumError::DuplicateLabel(l.clone()));
            }
        }
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(QuantumError::DimensionMismatch {
                qubits: labels.len(),
                expected,
                got: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite()
            || !(0.0..=1.0).contains(&loss_weight)
            || (norm + loss_weight - 1.0).abs() > NORM_TOLERANCE
        {
            return Err(QuantumError::NotNormalized {
                norm,
                loss: loss_weight,
            });
        }
        Ok(PureState {
            labels,
            amplitudes,
            loss_weight,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis<S: AsRef<str>>(labels: &[S], index: usize) -> Result<Self, QuantumError> {
        let dim = 1usize << labels.len();
        let mut amps = vec![ZERO; dim];
        if index >= dim {
            return Err(QuantumError::DimensionMismatch {
                qubits: labels.len(),
                expected: dim,
                got: index,
            });
        }
        amps[index] = ONE;
        Self::new(labels, amps)
    }

    /// Tensor product, `self` occupying the more significant bits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, QuantumError> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let (a, b) = (self.loss_weight, other.loss_weight);
        PureState::with_loss(&labels, amps, (a + b - a * b).clamp(0.0, 1.0))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn loss_weight(&self) -> f64 {
        self.loss_weight
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Guided norm `Σ|a|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask of `label` inside the basis index.
    pub fn bit_of(&self, label: &str) -> Result<usize, QuantumError> {
        let pos = self
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| QuantumError::UnknownSubsystem(label.to_owned()))?;
        Ok(1 << (self.labels.len() - 1 - pos))
    }

    pub fn apply_single(&self, u: &Unitary2, subsystem: &str) -> Result<PureState, QuantumError> {
        let mut out = self.clone();
        out.apply_single_mut(u, subsystem)?;
        Ok(out)
    }

    pub fn apply_single_mut(&mut self, u: &Unitary2, subsystem: &str) -> Result<(), QuantumError> {
        let dev = u.unitarity_deviation();
        if !(dev <= UNITARITY_TOLERANCE) {
            return Err(QuantumError::NonUnitary(dev));
        }
        let bit = self.bit_of(subsystem)?;
        for i0 in (0..self.dim()).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            let [a0, a1] = u.apply_to([self.amplitudes[i0], self.amplitudes[i1]]);
            self.amplitudes[i0] = a0;
            self.amplitudes[i1] = a1;
        }
        Ok(())
    }

    /// Multiply every amplitude whose index satisfies `select` by `factor`
    /// (`|factor| ≤ 1`). The removed probability moves to the loss weight.
    pub fn attenuate<F>(&mut self, select: F, factor: Complex64) -> Result<(), QuantumError>
    where
        F: Fn(usize) -> bool,
    {
        let mag = factor.norm_sqr();
        if mag > 1.0 + 1e-12 {
            return Err(QuantumError::Amplifying(mag.sqrt()));
        }
        let removed = snap(1.0 - mag);
        let mut lost = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if select(i) {
                lost += a.norm_sqr() * removed;
                *a *= factor;
            }
        }
        self.loss_weight = (self.loss_weight + lost).clamp(0.0, 1.0);
        Ok(())
    }

    /// Apply a contraction (`‖M‖ ≤ 1`) to `subsystem` on the amplitude pairs
    /// whose index satisfies `select`. `select` must not depend on the
    /// subsystem's own bit. Probability removed by `M` is added to the loss.
    pub fn apply_contraction<F>(
        &mut self,
        m: [[Complex64; 2]; 2],
        subsystem: &str,
        select: F,
    ) -> Result<(), QuantumError>
    where
        F: Fn(usize) -> bool,
    {
        let bit = self.bit_of(subsystem)?;
        // removed probability is ⟨a|(I − M†M)|a⟩
        let d00 = snap(1.0 - m[0][0].norm_sqr() - m[1][0].norm_sqr());
        let d11 = snap(1.0 - m[0][1].norm_sqr() - m[1][1].norm_sqr());
        let mut d01 = -(m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1]);
        if d01.norm() <= SNAP {
            d01 = ZERO;
        }
        let lowest = (d00 + d11) / 2.0 - (((d00 - d11) / 2.0).powi(2) + d01.norm_sqr()).sqrt();
        if lowest < -1e-12 {
            return Err(QuantumError::Amplifying((1.0 - lowest).sqrt()));
        }
        let mut lost = 0.0;
        for i0 in (0..self.dim()).filter(|&i| i & bit == 0 && select(i)) {
            let i1 = i0 | bit;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            lost += d00 * a0.norm_sqr() + d11 * a1.norm_sqr() + 2.0 * (a0.conj() * d01 * a1).re;
            self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        self.loss_weight = (self.loss_weight + lost).clamp(0.0, 1.0);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, QuantumError> {
        if self.labels != other.labels {
            return Err(QuantumError::LabelMismatch(
                self.labels.clone(),
                other.labels.clone(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`; global phases drop out.
    pub fn overlap_sqr(&self, other: &PureState) -> Result<f64, QuantumError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability of reading `bit` on `subsystem`, unnormalized by the guided norm.
    pub fn probability(&self, subsystem: &str, bit: u8) -> Result<f64, QuantumError> {
        let mask = self.bit_of(subsystem)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & mask != 0) == (bit == 1))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projective measurement of one qubit.
    ///
    /// Outcome probabilities are absolute, so they sum to the guided norm.
    /// Posteriors are renormalized over the guided amplitudes and carry no loss.
    pub fn measure(
        &self,
        subsystem: &str,
        mode: MeasureMode,
    ) -> Result<Vec<MeasurementOutcome>, QuantumError> {
        let mask = self.bit_of(subsystem)?;
        let guided = self.norm_sqr();
        if guided <= f64::MIN_POSITIVE {
            return Err(QuantumError::ZeroNorm);
        }
        let branch = |bit: u8| -> MeasurementOutcome {
            let mut amps = self.amplitudes.clone();
            let mut p = 0.0;
            for (i, a) in amps.iter_mut().enumerate() {
                if (i & mask != 0) == (bit == 1) {
                    p += a.norm_sqr();
                } else {
                    *a = ZERO;
                }
            }
            let posterior = if p > 0.0 {
                let s = p.sqrt();
                amps.iter_mut().for_each(|a| *a /= s);
                Some(PureState {
                    labels: self.labels.clone(),
                    amplitudes: amps,
                    loss_weight: 0.0,
                })
            } else {
                None
            };
            MeasurementOutcome {
                outcome: bit,
                probability: p,
                posterior,
            }
        };
        match mode {
            MeasureMode::Enumerate => Ok(vec![branch(0), branch(1)]),
            MeasureMode::Sample(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p0 = self.probability(subsystem, 0)? / guided;
                let bit = if rng.random::<f64>() < p0 { 0 } else { 1 };
                Ok(vec![branch(bit)])
            }
        }
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num_qubits();
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() < 1e-24 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.4}{:+.4}i)|{:0width$b}⟩", a.re, a.im, i, width = n)?;
        }
        if first {
            write!(f, "0")?;
        }
        if self.loss_weight > 0.0 {
            write!(f, " [loss {:.4e}]", self.loss_weight)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureMode {
    /// Return both branches with their probabilities.
    Enumerate,
    /// Draw one branch from a ChaCha8 stream seeded with this value.
    Sample(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub outcome: u8,
    pub probability: f64,
    /// `None` when the branch has zero probability.
    pub posterior: Option<PureState>,
}
