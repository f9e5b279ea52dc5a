//! Directional emission of an in-plane dipole into a waveguide mode.
//!
//! The decay rate into each propagation direction is proportional to
//! `|d*·E_dir(r)|²`. Counter-propagating Bloch modes are related by
//! `E_left(r) = E_right(r)*`, so a circular dipole sitting where the
//! right-going field is circularly polarized couples to one direction only.

mod dipole;
mod field;
mod map;
mod rates;

pub use dipole::{DipoleKind, TransitionDipole};
pub use field::{toy_field, Direction, ModeFieldMap, ModePair, ToyFieldParams};
pub use map::{directionality_map, directionality_map_serial, DirectionalityMap, MapSummary, RadiativeModel};
pub use rates::{emission_rates, EmitterRates};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("malformed field file header: {0}")]
    MalformedHeader(String),
    #[error("ragged grid: {0}")]
    RaggedGrid(String),
    #[error("non-finite value at line {0}")]
    NonFinite(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("position ({x}, {y}) lies outside the sampled grid")]
    OutsideGrid { x: f64, y: f64 },
    #[error("dipole is not normalized (|d|² = {0})")]
    DipoleNorm(f64),
    #[error("invalid rate {name} = {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("directionality undefined: no coupling to the waveguide")]
    UndefinedDirectionality,
    #[error("all decay rates are zero")]
    ZeroRates,
    #[error("counter-propagating fields are not conjugate (max deviation {0:.3e})")]
    NotConjugate(f64),
    #[error("radiative table has {got} entries for a grid of {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("invalid field map: {0}")]
    InvalidMap(String),
}
