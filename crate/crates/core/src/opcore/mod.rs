//! Complex linear algebra on labeled tensor-product spaces.

mod density;
mod eigen;
mod expm;
mod matrix;
mod ops;
mod space;
mod sparse;

pub use num_complex::Complex64 as C64;

pub use density::{expect, partial_trace, DensityMatrix};
pub use eigen::{eigh, eigh_real, HermitianEigen};
pub use expm::{expm, expm_pade};
pub use matrix::ComplexMatrix;
pub use ops::{destroy, pauli, projector, transition, Axis};
pub use space::{tensor_embed, HilbertSpace};
pub use sparse::{CsrMatrix, SparseOperator};

/// 2π·GHz → rad/ns.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// MHz → rad/ns.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    TWO_PI * mhz * 1e-3
}

/// GHz → rad/ns.
pub fn ghz_to_angular(ghz: f64) -> f64 {
    TWO_PI * ghz
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
