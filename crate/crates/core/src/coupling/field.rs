//! Sampled Bloch-mode fields and their text format.
//!
//! ```text
//! a=1
//! freq=0.26
//! nx=2
//! ny=1
//! 0 0 0.7071067811865476 0 0 0.7071067811865476
//! 0.5 0 ...
//! ```
//!
//! Header keys `a`, `freq`, `nx`, `ny` are required; `direction=right|left`
//! and `ng=<float>` are optional. Data rows are `x y Re(Ex) Im(Ex) Re(Ey) Im(Ey)`,
//! row-major with x varying fastest. Lines starting with `#` are ignored.

use super::CouplingError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Right => "right",
            Direction::Left => "left",
        }
    }
}

/// In-plane field of one propagation direction over one unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFieldMap {
    lattice_constant: f64,
    frequency: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    ex: Vec<Complex64>,
    ey: Vec<Complex64>,
    direction: Direction,
    group_index: Option<f64>,
}

impl ModeFieldMap {
    /// `ex`/`ey` are indexed `iy * nx + ix`.
    pub fn new(
        lattice_constant: f64,
        frequency: f64,
        xs: Vec<f64>,
        ys: Vec<f64>,
        ex: Vec<Complex64>,
        ey: Vec<Complex64>,
        direction: Direction,
    ) -> Result<Self, CouplingError> {
        if !(lattice_constant > 0.0 && lattice_constant.is_finite()) {
            return Err(CouplingError::InvalidMap(format!(
                "lattice constant {lattice_constant}"
            )));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(CouplingError::InvalidMap(format!("frequency {frequency}")));
        }
        if xs.is_empty() || ys.is_empty() {
            return Err(CouplingError::RaggedGrid("empty axis".into()));
        }
        let n = xs.len() * ys.len();
        if ex.len() != n || ey.len() != n {
            return Err(CouplingError::RaggedGrid(format!(
                "{} x {} grid needs {n} samples, got {}/{}",
                xs.len(),
                ys.len(),
                ex.len(),
                ey.len()
            )));
        }
        for axis in [&xs, &ys] {
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(CouplingError::InvalidMap("non-finite coordinate".into()));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CouplingError::RaggedGrid(
                    "coordinates must be strictly increasing".into(),
                ));
            }
        }
        if ex
            .iter()
            .chain(&ey)
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(CouplingError::InvalidMap("non-finite field sample".into()));
        }
        Ok(ModeFieldMap {
            lattice_constant,
            frequency,
            xs,
            ys,
            ex,
            ey,
            direction,
            group_index: None,
        })
    }

    pub fn with_group_index(mut self, ng: f64) -> Self {
        self.group_index = Some(ng);
        self
    }

    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn group_index(&self) -> Option<f64> {
        self.group_index
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn len(&self) -> usize {
        self.ex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ex.is_empty()
    }

    /// Field at grid node `(ix, iy)`.
    pub fn sample(&self, ix: usize, iy: usize) -> [Complex64; 2] {
        let k = iy * self.nx() + ix;
        [self.ex[k], self.ey[k]]
    }

    /// Time-reversed partner: conjugate field, opposite direction.
    pub fn conjugate(&self) -> ModeFieldMap {
        ModeFieldMap {
            ex: self.ex.iter().map(|c| c.conj()).collect(),
            ey: self.ey.iter().map(|c| c.conj()).collect(),
            direction: self.direction.opposite(),
            ..self.clone()
        }
    }

    /// Multiply the whole field by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> ModeFieldMap {
        let p = Complex64::from_polar(1.0, phi);
        ModeFieldMap {
            ex: self.ex.iter().map(|c| c * p).collect(),
            ey: self.ey.iter().map(|c| c * p).collect(),
            ..self.clone()
        }
    }

    /// Bilinear interpolation of `(Ex, Ey)` at `(x, y)`.
    pub fn interpolate(&self, x: f64, y: f64) -> Result<[Complex64; 2], CouplingError> {
        let (ix, tx) = bracket(&self.xs, x).ok_or(CouplingError::OutsideGrid { x, y })?;
        let (iy, ty) = bracket(&self.ys, y).ok_or(CouplingError::OutsideGrid { x, y })?;
        let ix1 = (ix + 1).min(self.nx() - 1);
        let iy1 = (iy + 1).min(self.ny() - 1);
        let w = [
            ((1.0 - tx) * (1.0 - ty), ix, iy),
            (tx * (1.0 - ty), ix1, iy),
            ((1.0 - tx) * ty, ix, iy1),
            (tx * ty, ix1, iy1),
        ];
        let mut out = [Complex64::default(); 2];
        for (weight, i, j) in w {
            if weight == 0.0 {
                continue;
            }
            let s = self.sample(i, j);
            out[0] += s[0] * weight;
            out[1] += s[1] * weight;
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self, CouplingError> {
        let mut a = None;
        let mut freq = None;
        let mut nx: Option<usize> = None;
        let mut ny: Option<usize> = None;
        let mut direction = Direction::Right;
        let mut ng = None;
        let mut rows: Vec<(usize, [f64; 6])> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if !rows.is_empty() {
                    return Err(CouplingError::MalformedHeader(format!(
                        "header line {lineno} after data rows"
                    )));
                }
                let (key, value) = (key.trim(), value.trim());
                let bad = |what: &str| {
                    CouplingError::MalformedHeader(format!("line {lineno}: bad {what} `{value}`"))
                };
                match key {
                    "a" => a = Some(value.parse::<f64>().map_err(|_| bad("a"))?),
                    "freq" => freq = Some(value.parse::<f64>().map_err(|_| bad("freq"))?),
                    "nx" => nx = Some(value.parse().map_err(|_| bad("nx"))?),
                    "ny" => ny = Some(value.parse().map_err(|_| bad("ny"))?),
                    "ng" => ng = Some(value.parse::<f64>().map_err(|_| bad("ng"))?),
                    "direction" => {
                        direction = match value {
                            "right" => Direction::Right,
                            "left" => Direction::Left,
                            _ => return Err(bad("direction")),
                        }
                    }
                    other => {
                        return Err(CouplingError::MalformedHeader(format!(
                            "line {lineno}: unknown key `{other}`"
                        )))
                    }
                }
                continue;
            }
            let mut vals = [0.0f64; 6];
            let mut count = 0;
            for tok in line.split_whitespace() {
                if count == 6 {
                    return Err(CouplingError::Parse {
                        line: lineno,
                        msg: "more than 6 columns".into(),
                    });
                }
                vals[count] = tok.parse().map_err(|_| CouplingError::Parse {
                    line: lineno,
                    msg: format!("bad number `{tok}`"),
                })?;
                count += 1;
            }
            if count != 6 {
                return Err(CouplingError::Parse {
                    line: lineno,
                    msg: format!("expected 6 columns, got {count}"),
                });
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(CouplingError::NonFinite(lineno));
            }
            rows.push((lineno, vals));
        }

        let missing = |k: &str| CouplingError::MalformedHeader(format!("missing `{k}`"));
        let a = a.ok_or_else(|| missing("a"))?;
        let freq = freq.ok_or_else(|| missing("freq"))?;
        let nx = nx.ok_or_else(|| missing("nx"))?;
        let ny = ny.ok_or_else(|| missing("ny"))?;
        if nx == 0 || ny == 0 {
            return Err(CouplingError::MalformedHeader(
                "nx and ny must be positive".into(),
            ));
        }
        if rows.len() != nx * ny {
            return Err(CouplingError::RaggedGrid(format!(
                "header declares {nx} x {ny} = {} samples, file has {}",
                nx * ny,
                rows.len()
            )));
        }
        let xs: Vec<f64> = rows[..nx].iter().map(|(_, v)| v[0]).collect();
        let ys: Vec<f64> = rows.iter().step_by(nx).map(|(_, v)| v[1]).collect();
        for (k, (lineno, v)) in rows.iter().enumerate() {
            let (ix, iy) = (k % nx, k / nx);
            if v[0] != xs[ix] || v[1] != ys[iy] {
                return Err(CouplingError::RaggedGrid(format!(
                    "line {lineno}: sample ({}, {}) breaks the x-fastest grid",
                    v[0], v[1]
                )));
            }
        }
        let ex = rows.iter().map(|(_, v)| Complex64::new(v[2], v[3])).collect();
        let ey = rows.iter().map(|(_, v)| Complex64::new(v[4], v[5])).collect();
        let map = ModeFieldMap::new(a, freq, xs, ys, ex, ey, direction)?;
        Ok(match ng {
            Some(ng) => map.with_group_index(ng),
            None => map,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CouplingError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| CouplingError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// Text form; floats use shortest round-trip formatting so `parse` recovers
    /// every bit.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "a={}", self.lattice_constant);
        let _ = writeln!(s, "freq={}", self.frequency);
        let _ = writeln!(s, "nx={}", self.nx());
        let _ = writeln!(s, "ny={}", self.ny());
        let _ = writeln!(s, "direction={}", self.direction.as_str());
        if let Some(ng) = self.group_index {
            let _ = writeln!(s, "ng={ng}");
        }
        for (iy, y) in self.ys.iter().enumerate() {
            for (ix, x) in self.xs.iter().enumerate() {
                let [ex, ey] = self.sample(ix, iy);
                let _ = writeln!(s, "{x} {y} {} {} {} {}", ex.re, ex.im, ey.re, ey.im);
            }
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CouplingError> {
        std::fs::write(path.as_ref(), self.to_text()).map_err(|e| CouplingError::Io(e.to_string()))
    }
}

/// Lower grid index and fractional offset for `v`, or `None` outside the axis.
fn bracket(axis: &[f64], v: f64) -> Option<(usize, f64)> {
    let (first, last) = (axis[0], axis[axis.len() - 1]);
    if !(v >= first && v <= last) {
        return None;
    }
    if axis.len() == 1 {
        return Some((0, 0.0));
    }
    let i = axis
        .partition_point(|&p| p <= v)
        .saturating_sub(1)
        .min(axis.len() - 2);
    let t = (v - axis[i]) / (axis[i + 1] - axis[i]);
    Some((i, t))
}

/// The right- and left-going modes of one band at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePair {
    right: ModeFieldMap,
    left: ModeFieldMap,
}

impl ModePair {
    /// Builds the pair from either direction; the partner is its conjugate.
    pub fn from_right(map: ModeFieldMap) -> Self {
        Self::from_single(map)
    }

    pub fn from_single(map: ModeFieldMap) -> Self {
        let partner = map.conjugate();
        match map.direction() {
            Direction::Right => ModePair {
                right: map,
                left: partner,
            },
            Direction::Left => ModePair {
                right: partner,
                left: map,
            },
        }
    }

    /// Both directions supplied; they must be conjugate within `tolerance`.
    pub fn from_both(right: ModeFieldMap, left: ModeFieldMap, tolerance: f64) -> Result<Self, CouplingError> {
        if right.direction() != Direction::Right || left.direction() != Direction::Left {
            return Err(CouplingError::InvalidMap("direction labels do not match".into()));
        }
        if right.xs != left.xs || right.ys != left.ys {
            return Err(CouplingError::RaggedGrid(
                "grids of the two directions differ".into(),
            ));
        }
        let dev = right
            .ex
            .iter()
            .zip(&left.ex)
            .chain(right.ey.iter().zip(&left.ey))
            .map(|(r, l)| (r.conj() - l).norm())
            .fold(0.0, f64::max);
        if dev > tolerance {
            return Err(CouplingError::NotConjugate(dev));
        }
        Ok(ModePair { right, left })
    }

    pub fn right(&self) -> &ModeFieldMap {
        &self.right
    }

    pub fn left(&self) -> &ModeFieldMap {
        &self.left
    }

    pub fn get(&self, dir: Direction) -> &ModeFieldMap {
        match dir {
            Direction::Right => &self.right,
            Direction::Left => &self.left,
        }
    }

    /// Exchange the roles of the two directions (equivalent to `E → E*`).
    pub fn swapped(&self) -> ModePair {
        let mut right = self.left.clone();
        let mut left = self.right.clone();
        right.direction = Direction::Right;
        left.direction = Direction::Left;
        ModePair { right, left }
    }
}

/// Analytic toy mode used for tests and demonstrations.
///
/// `E(x, y) = (cos(πx/a), e^{iφ} sin(πx/a)) · exp(−y²/w²)`. With `φ = π/2`
/// the field is circular at `x = a/4` and linear at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyFieldParams {
    pub lattice_constant: f64,
    pub frequency: f64,
    pub nx: usize,
    pub ny: usize,
    /// y runs over `[−y_extent, y_extent]`; ignored when `ny == 1`.
    pub y_extent: f64,
    pub envelope_width: f64,
    pub phase: f64,
}

impl Default for ToyFieldParams {
    fn default() -> Self {
        ToyFieldParams {
            lattice_constant: 1.0,
            frequency: 0.26,
            nx: 64,
            ny: 1,
            y_extent: 0.5,
            envelope_width: 0.5,
            phase: PI / 2.0,
        }
    }
}

pub fn toy_field(p: &ToyFieldParams) -> Result<ModeFieldMap, CouplingError> {
    if p.nx == 0 || p.ny == 0 {
        return Err(CouplingError::InvalidMap("toy grid must be non-empty".into()));
    }
    let a = p.lattice_constant;
    let xs: Vec<f64> = (0..p.nx).map(|i| a * i as f64 / p.nx as f64).collect();
    let ys: Vec<f64> = if p.ny == 1 {
        vec![0.0]
    } else {
        (0..p.ny)
            .map(|j| -p.y_extent + 2.0 * p.y_extent * j as f64 / (p.ny - 1) as f64)
            .collect()
    };
    let rot = Complex64::from_polar(1.0, p.phase);
    let mut ex = Vec::with_capacity(p.nx * p.ny);
    let mut ey = Vec::with_capacity(p.nx * p.ny);
    for &y in &ys {
        let env = (-(y / p.envelope_width).powi(2)).exp();
        for &x in &xs {
            let (s, c) = (PI * x / a).sin_cos();
            ex.push(Complex64::new(c * env, 0.0));
            ey.push(rot * (s * env));
        }
    }
    ModeFieldMap::new(a, p.frequency, xs, ys, ex, ey, Direction::Right)
}
