use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Annihilation operator truncated to `n` levels.
pub fn destroy(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = C64::new(((i + 1) as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let rows = match axis {
        Axis::X => [[z, one], [one, z]],
        Axis::Y => [[z, -i], [i, z]],
        Axis::Z => [[one, z], [z, -one]],
    };
    ComplexMatrix::from_rows(&rows.map(|r| r.to_vec())).expect("2x2")
}

/// `|a⟩⟨b|` in a `dim`-level space.
pub fn transition(level_a: usize, level_b: usize, dim: usize) -> Result<ComplexMatrix> {
    for level in [level_a, level_b] {
        if level >= dim {
            return Err(Error::LevelOutOfRange { level, dim });
        }
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(level_a, level_b)] = C64::new(1.0, 0.0);
    Ok(m)
}

pub fn projector(level: usize, dim: usize) -> Result<ComplexMatrix> {
    transition(level, level, dim)
}
