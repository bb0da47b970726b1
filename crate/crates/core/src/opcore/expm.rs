//! Matrix exponential.
//!
//! Hermitian and skew-Hermitian inputs go through an eigendecomposition, which
//! keeps `exp(-iH)` unitary to working precision. Everything else uses
//! scaling-and-squaring with a degree-13 Padé approximant (Higham 2005).

use super::{eigh, ComplexMatrix, C64};
use crate::error::Result;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_square()?;
    let n = a.rows();
    if n == 0 {
        return Ok(a.clone());
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let tol = 1e-14 * scale.max(1.0);
    if a.hermiticity_error() <= tol {
        let e = eigh(a)?;
        return Ok(e.reconstruct(|x| C64::new(x.exp(), 0.0)));
    }
    // skew-Hermitian: A = -iH with H = iA Hermitian
    let h = a.scale(C64::new(0.0, 1.0));
    if h.hermiticity_error() <= tol {
        let e = eigh(&h)?;
        return Ok(e.reconstruct(|x| C64::new(0.0, -x).exp()));
    }
    expm_pade(a)
}

/// Scaling-and-squaring Padé path, exposed for cross-checks.
pub fn expm_pade(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_square()?;
    let n = a.rows();
    let norm = a.one_norm();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(C64::new(0.5f64.powi(s), 0.0));
    let ident = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let lin = |c: [usize; 3]| -> ComplexMatrix {
        &(&a6.scale(b(c[0])) + &a4.scale(b(c[1]))) + &a2.scale(b(c[2]))
    };
    let u_inner = &a6 * &lin([13, 11, 9]);
    let u_poly = &(&(&(&u_inner + &a6.scale(b(7))) + &a4.scale(b(5))) + &a2.scale(b(3)))
        + &ident.scale(b(1));
    let u = &a * &u_poly;
    let v_inner = &a6 * &lin([12, 10, 8]);
    let v = &(&(&(&v_inner + &a6.scale(b(6))) + &a4.scale(b(4))) + &a2.scale(b(2)))
        + &ident.scale(b(0));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.solve(&p)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
