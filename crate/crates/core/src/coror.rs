//! Co-occurrence of quantized ridge orientations.
//!
//! For a displacement of `d` pixels along one of four directions, an 8×8
//! matrix counts ordered pairs `(p, p + Δ)` of valid pixels by their levels.
//! Matrices for every (offset, direction) pair are flattened row-major,
//! concatenated offset-major and normalized to zero mean and unit L2 norm.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::orientation::{QuantizedOrientationField, LEVELS};

/// Offset schedules evaluated for the descriptor.
pub const OFFSETS_C1: [usize; 3] = [1, 2, 3];
pub const OFFSETS_C2: [usize; 4] = [1, 2, 3, 4];
pub const OFFSETS_G1: [usize; 3] = [5, 10, 15];
pub const OFFSETS_G2: [usize; 4] = [5, 10, 15, 20];

/// Co-occurrence direction. Displacements are `(row, col)` with rows growing
/// downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Direction {
    D0,
    D45,
    D90,
    D135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::D0, Direction::D45, Direction::D90, Direction::D135];

    pub fn degrees(self) -> u32 {
        match self {
            Direction::D0 => 0,
            Direction::D45 => 45,
            Direction::D90 => 90,
            Direction::D135 => 135,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Self> {
        match deg {
            0 => Some(Direction::D0),
            45 => Some(Direction::D45),
            90 => Some(Direction::D90),
            135 => Some(Direction::D135),
            _ => None,
        }
    }

    /// `(drow, dcol)` for offset `d`.
    pub fn displacement(self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            Direction::D0 => (0, d),
            Direction::D45 => (-d, d),
            Direction::D90 => (-d, 0),
            Direction::D135 => (-d, -d),
        }
    }
}

impl From<Direction> for u32 {
    fn from(d: Direction) -> u32 {
        d.degrees()
    }
}

impl TryFrom<u32> for Direction {
    type Error = &'static str;

    fn try_from(v: u32) -> core::result::Result<Self, Self::Error> {
        Direction::from_degrees(v).ok_or("direction must be one of 0, 45, 90, 135")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoRorMatrix {
    /// `counts[i][j]` for levels `i + 1`, `j + 1`.
    pub counts: [[u32; LEVELS]; LEVELS],
    pub offset: usize,
    pub direction: Direction,
}

impl CoRorMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().map(|&c| u64::from(c)).sum()
    }

    /// Count for 1-based levels, as the matrices are usually written.
    pub fn at(&self, i: u8, j: u8) -> u32 {
        self.counts[usize::from(i) - 1][usize::from(j) - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoRorDescriptor {
    pub values: Vec<f64>,
    pub offsets: Vec<usize>,
    pub directions: Vec<Direction>,
}

impl CoRorDescriptor {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Counts directional (non-symmetrized) level pairs at one displacement.
pub fn cooccurrence(
    field: &QuantizedOrientationField,
    offset: usize,
    direction: Direction,
) -> Result<CoRorMatrix> {
    let (w, h) = (field.width, field.height);
    let limit = w.min(h);
    if offset == 0 || offset >= limit {
        return Err(Error::OffsetTooLarge { offset, limit });
    }
    let (dr, dc) = direction.displacement(offset);
    let mut counts = [[0u32; LEVELS]; LEVELS];
    // Rows/cols whose partner stays in frame.
    let r0 = (-dr).max(0) as usize;
    let r1 = (h as isize - dr.max(0)) as usize;
    let c0 = (-dc).max(0) as usize;
    let c1 = (w as isize - dc.max(0)) as usize;
    for r in r0..r1 {
        let rr = (r as isize + dr) as usize;
        for c in c0..c1 {
            let a = r * w + c;
            let b = rr * w + (c as isize + dc) as usize;
            if field.valid[a] && field.valid[b] {
                counts[usize::from(field.bins[a]) - 1][usize::from(field.bins[b]) - 1] += 1;
            }
        }
    }
    Ok(CoRorMatrix {
        counts,
        offset,
        direction,
    })
}

/// Subtracts the mean and scales to unit L2 norm in place.
pub(crate) fn center_and_normalize(values: &mut [f64]) -> Result<()> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter_mut().for_each(|v| *v -= mean);
    let norm = math::sqrt(values.iter().map(|v| v * v).sum::<f64>());
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateDescriptor);
    }
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

pub fn build_coror(
    field: &QuantizedOrientationField,
    offsets: &[usize],
    directions: &[Direction],
) -> Result<CoRorDescriptor> {
    if offsets.is_empty() {
        return Err(Error::config("coror.offsets", "must not be empty"));
    }
    if directions.is_empty() {
        return Err(Error::config("coror.directions", "must not be empty"));
    }
    let mut values = Vec::with_capacity(LEVELS * LEVELS * offsets.len() * directions.len());
    for &d in offsets {
        for &phi in directions {
            let m = cooccurrence(field, d, phi)?;
            values.extend(m.counts.iter().flatten().map(|&c| f64::from(c)));
        }
    }
    center_and_normalize(&mut values)?;
    Ok(CoRorDescriptor {
        values,
        offsets: offsets.to_vec(),
        directions: directions.to_vec(),
    })
}
