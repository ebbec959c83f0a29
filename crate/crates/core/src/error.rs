use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be between 1 and {max}, got {got}")]
    InvalidDimension { got: i64, max: usize },

    #[error("step count must be non-negative, got {0}")]
    NegativeSteps(i64),

    #[error("increment {index} is not a unit lattice step")]
    NonUnitStep { index: usize },

    #[error("path is empty")]
    EmptyPath,

    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {value} does not fit the packed lattice key for dimension {dimension}")]
    CoordinateOverflow { value: i64, dimension: usize },

    #[error("time {time} is beyond the horizon {horizon}")]
    BeyondHorizon { time: usize, horizon: usize },

    #[error("invalid window [{start}, {end}] for horizon {horizon}")]
    InvalidWindow { start: usize, end: usize, horizon: usize },

    #[error("horizon {horizon} exceeds the cap {cap} of this routine")]
    CapExceeded { horizon: usize, cap: usize },

    #[error("no cut times in [0, {0}]")]
    NoCutTimes(usize),

    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),

    #[error("grid must be strictly increasing and within [0, {horizon}]")]
    InvalidGrid { horizon: usize },

    #[error("linear solver stopped after {iterations} iterations with relative residual {residual:e} (tolerance {tolerance:e})")]
    SolverNonConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("radius {0} must be positive")]
    InvalidRadius(f64),

    #[error("ball of radius {radius} covers every vertex of the finite range; its complement is empty")]
    EmptyComplement { radius: f64 },

    #[error("radius {requested} is not reachable inside the non-provisional region (max {available})")]
    RadiusBeyondHorizon { requested: u32, available: u32 },

    #[error("not enough samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("walk horizon too short: need {needed} steps, environment supports {available}")]
    WalkHorizon { needed: u64, available: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bad trajectory file: {0}")]
    BadFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
