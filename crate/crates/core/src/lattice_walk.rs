//! Simple random walk trajectories on Z^d.
//!
//! A trajectory is stored as one byte per step (`axis << 1 | negative`);
//! lattice points are only materialized when asked for.

use std::io::{Read, Write};
use std::sync::OnceLock;

use rand::Rng;

use crate::seeds::stream_rng;
use crate::{Error, Result};

/// Largest supported lattice dimension. Points are packed into a `u128` key
/// with `128 / d` bits per coordinate, so eight dimensions leave 16 bits each.
pub const MAX_DIMENSION: usize = 8;

/// File magic of the binary trajectory cache.
pub const TRAJECTORY_MAGIC: &[u8; 4] = b"RWR4";
/// Current version of the binary trajectory cache.
pub const TRAJECTORY_VERSION: u16 = 1;
const FLAG_SYNTHETIC: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 8 + 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    coords: Vec<i64>,
}

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn origin(dimension: usize) -> Self {
        Self { coords: vec![0; dimension] }
    }

    /// `e_axis` scaled by `scale`.
    pub fn axis(dimension: usize, axis: usize, scale: i64) -> Self {
        let mut coords = vec![0; dimension];
        coords[axis] = scale;
        Self { coords }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn l1_distance(&self, other: &LatticePoint) -> i64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn plus(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }
}

/// A single nearest-neighbour increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step(u8);

impl Step {
    pub fn new(axis: usize, negative: bool) -> Self {
        Step(((axis as u8) << 1) | negative as u8)
    }

    pub fn from_code(code: u8) -> Self {
        Step(code)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn axis(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn delta(self) -> i64 {
        if self.is_negative() {
            -1
        } else {
            1
        }
    }
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Seeded(u64),
    /// Hand-built fixture; no seed.
    Synthetic,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    dimension: usize,
    source: Source,
    steps: Vec<u8>,
    positions: OnceLock<Vec<i64>>,
}

impl PartialEq for Trajectory {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.source == other.source && self.steps == other.steps
    }
}

impl Eq for Trajectory {}

pub fn check_dimension(dimension: i64) -> Result<usize> {
    if dimension < 1 || dimension as usize > MAX_DIMENSION {
        return Err(Error::InvalidDimension { got: dimension, max: MAX_DIMENSION });
    }
    Ok(dimension as usize)
}

/// Converts a signed step count coming from user input.
pub fn check_steps(steps: i64) -> Result<usize> {
    usize::try_from(steps).map_err(|_| Error::NegativeSteps(steps))
}

/// Simple random walk with `steps` increments drawn from stream 0 of `seed`.
pub fn generate_trajectory(dimension: usize, steps: usize, seed: u64) -> Result<Trajectory> {
    check_dimension(dimension as i64)?;
    let mut rng = stream_rng(seed, 0);
    Ok(Trajectory {
        dimension,
        source: Source::Seeded(seed),
        steps: draw_steps(&mut rng, dimension, steps),
        positions: OnceLock::new(),
    })
}

fn draw_steps<R: Rng>(rng: &mut R, dimension: usize, steps: usize) -> Vec<u8> {
    let choices = 2 * dimension as u32;
    (0..steps).map(|_| rng.random_range(0..choices) as u8).collect()
}

/// Two independent walks from the origin, drawn from streams 1 and 2 of
/// `seed` (stream 0 is what [`generate_trajectory`] uses).
pub fn two_sided_trajectory(
    dimension: usize,
    steps_each_side: usize,
    seed: u64,
) -> Result<(Trajectory, Trajectory)> {
    check_dimension(dimension as i64)?;
    let mut first = stream_rng(seed, 1);
    let mut second = stream_rng(seed, 2);
    let make = |steps| Trajectory {
        dimension,
        source: Source::Seeded(seed),
        steps,
        positions: OnceLock::new(),
    };
    Ok((
        make(draw_steps(&mut first, dimension, steps_each_side)),
        make(draw_steps(&mut second, dimension, steps_each_side)),
    ))
}

/// Wraps an explicit nearest-neighbour path starting at the origin.
pub fn load_fixed_path(points: &[LatticePoint]) -> Result<Trajectory> {
    let first = points.first().ok_or(Error::EmptyPath)?;
    let dimension = check_dimension(first.dimension() as i64)?;
    if first.coords().iter().any(|&c| c != 0) {
        return Err(Error::InvalidParameter("fixed path must start at the origin".into()));
    }
    let mut steps = Vec::with_capacity(points.len() - 1);
    for (index, pair) in points.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if b.dimension() != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, got: b.dimension() });
        }
        let diffs: Vec<(usize, i64)> = a
            .coords()
            .iter()
            .zip(b.coords())
            .enumerate()
            .filter(|(_, (x, y))| x != y)
            .map(|(axis, (x, y))| (axis, y - x))
            .collect();
        match diffs.as_slice() {
            [(axis, delta)] if delta.abs() == 1 => steps.push(Step::new(*axis, *delta < 0).code()),
            _ => return Err(Error::NonUnitStep { index }),
        }
    }
    Ok(Trajectory { dimension, source: Source::Synthetic, steps, positions: OnceLock::new() })
}

impl Trajectory {
    /// Builds a trajectory from raw step codes, validating each code.
    pub fn from_steps(dimension: usize, source: Source, steps: Vec<u8>) -> Result<Self> {
        check_dimension(dimension as i64)?;
        if let Some(index) = steps.iter().position(|&c| Step(c).axis() >= dimension) {
            return Err(Error::NonUnitStep { index });
        }
        Ok(Self { dimension, source, steps, positions: OnceLock::new() })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Seed, or `None` for synthetic fixtures.
    pub fn seed(&self) -> Option<u64> {
        match self.source {
            Source::Seeded(seed) => Some(seed),
            Source::Synthetic => None,
        }
    }

    /// Number of steps N; the path has N + 1 points.
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step_codes(&self) -> &[u8] {
        &self.steps
    }

    pub fn steps(&self) -> impl Iterator<Item = Step> + '_ {
        self.steps.iter().map(|&c| Step(c))
    }

    /// All points, flattened as `(N + 1) * d` coordinates. Computed once.
    pub fn positions(&self) -> &[i64] {
        self.positions.get_or_init(|| {
            let d = self.dimension;
            let mut out = Vec::with_capacity((self.steps.len() + 1) * d);
            let mut current = vec![0i64; d];
            out.extend_from_slice(&current);
            for step in self.steps() {
                current[step.axis()] += step.delta();
                out.extend_from_slice(&current);
            }
            out
        })
    }

    pub fn point(&self, k: usize) -> LatticePoint {
        let d = self.dimension;
        LatticePoint::new(self.positions()[k * d..(k + 1) * d].to_vec())
    }

    pub fn points(&self) -> Vec<LatticePoint> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Calls `f(k, coords)` for every point without materializing the path.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[i64])) {
        let mut current = [0i64; MAX_DIMENSION];
        let d = self.dimension;
        f(0, &current[..d]);
        for (k, step) in self.steps().enumerate() {
            current[step.axis()] += step.delta();
            f(k + 1, &current[..d]);
        }
    }

    /// Serialized `RWR4` bytes (header plus one byte per step).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.steps.len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (flags, seed) = match self.source {
            Source::Seeded(seed) => (0, seed),
            Source::Synthetic => (FLAG_SYNTHETIC, 0),
        };
        w.write_all(TRAJECTORY_MAGIC)?;
        w.write_all(&TRAJECTORY_VERSION.to_le_bytes())?;
        w.write_all(&flags.to_le_bytes())?;
        w.write_all(&(self.dimension as u32).to_le_bytes())?;
        w.write_all(&(self.steps.len() as u64).to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(&self.steps)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|e| Error::BadFormat(format!("truncated header: {e}")))?;
        if &header[0..4] != TRAJECTORY_MAGIC {
            return Err(Error::BadFormat("missing RWR4 magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != TRAJECTORY_VERSION {
            return Err(Error::BadFormat(format!("unsupported version {version}")));
        }
        let flags = u16::from_le_bytes([header[6], header[7]]);
        let dimension = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let steps = u64::from_le_bytes(header[12..20].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(header[20..28].try_into().unwrap());
        let mut codes = Vec::with_capacity(steps);
        r.take(steps as u64).read_to_end(&mut codes)?;
        if codes.len() != steps {
            return Err(Error::BadFormat(format!("expected {steps} steps, found {}", codes.len())));
        }
        let source = if flags & FLAG_SYNTHETIC != 0 { Source::Synthetic } else { Source::Seeded(seed) };
        Trajectory::from_steps(dimension, source, codes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let t = Self::read_from(bytes)?;
        if bytes.len() != HEADER_LEN + t.horizon() {
            return Err(Error::BadFormat("trailing bytes after step stream".into()));
        }
        Ok(t)
    }
}
