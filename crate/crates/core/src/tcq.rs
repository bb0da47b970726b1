//! Charge-basis model of a single tunable-coupling transmon.
//!
//! Two islands with Cooper-pair numbers `n₊, n₋ ∈ [-N_c, N_c]`:
//!
//! ```text
//! H = Σ± 4 E_C± (n± - n_g±)² - Σ± E_J±(Φ±) cos γ± + 4 E_I n₊ n₋
//! E_J±(Φ±) = E_J±^max cos(π Φ±)
//! ```
//!
//! `cos γ` is the half-sum of the charge-raising and -lowering operators. The
//! spectrum is obtained by exact diagonalization; levels are labeled by energy
//! order. The upper single-excitation mode (the `|1̃0⟩` state) is located
//! separately as the excited state with the largest charge matrix element to
//! the ground state, since a two-excitation state of the lower mode can sit
//! below it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::significant;
use crate::opcore::{eigh_real, ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcqParams {
    pub ec_plus: f64,
    pub ec_minus: f64,
    pub e_int: f64,
    pub ejmax_plus: f64,
    pub ejmax_minus: f64,
    #[serde(default)]
    pub ng_plus: f64,
    #[serde(default)]
    pub ng_minus: f64,
    pub charge_cutoff: usize,
}

impl TcqParams {
    /// Device used for the collective-gate proposal: E_C± = 0.5 GHz,
    /// E_I = 0.35 GHz, E_J± = 25 GHz.
    pub fn reference() -> Self {
        Self {
            ec_plus: 0.5,
            ec_minus: 0.5,
            e_int: 0.35,
            ejmax_plus: 25.0,
            ejmax_minus: 25.0,
            ng_plus: 0.0,
            ng_minus: 0.0,
            charge_cutoff: 7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ec_plus", self.ec_plus),
            ("ec_minus", self.ec_minus),
            ("e_int", self.e_int),
            ("ejmax_plus", self.ejmax_plus),
            ("ejmax_minus", self.ejmax_minus),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("{v} must be a positive energy"),
                });
            }
        }
        if self.charge_cutoff < 5 {
            return Err(Error::InvalidParameter {
                field: "charge_cutoff",
                reason: format!("{} < 5", self.charge_cutoff),
            });
        }
        Ok(())
    }

    pub fn basis_dim(&self) -> usize {
        let d = 2 * self.charge_cutoff + 1;
        d * d
    }
}

/// Flux pair in units of the flux quantum, each in `[0, 0.5]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxBias {
    pub phi_plus: f64,
    pub phi_minus: f64,
}

impl FluxBias {
    pub fn new(phi_plus: f64, phi_minus: f64) -> Result<Self> {
        for (field, v) in [("phi_plus", phi_plus), ("phi_minus", phi_minus)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("{v} outside [0, 0.5] flux quanta"),
                });
            }
        }
        Ok(Self { phi_plus, phi_minus })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcqSpectrum {
    /// E₁ − E₀ (GHz).
    pub omega_plus: f64,
    /// E₂ − E₀ (GHz), energy-ordered third level.
    pub omega_minus: f64,
    /// |⟨1|n̂|0⟩|.
    pub n01: f64,
    /// |⟨2|n̂|0⟩|.
    pub n02: f64,
    /// E₃ − E₀, E₄ − E₀, E₅ − E₀ (GHz).
    pub anharm_diag: [f64; 3],
    /// Upper single-excitation mode: transition frequency (GHz).
    pub omega_upper: f64,
    /// Upper single-excitation mode: |⟨k|n̂|0⟩|.
    pub n_upper: f64,
    /// Energy index of the upper single-excitation mode.
    pub upper_level: usize,
    /// min(E₁ − E₀, E₂ − E₁) (GHz).
    pub min_gap: f64,
}

/// `E_J± = E_J±^max cos(π Φ±)`.
pub fn effective_josephson(params: &TcqParams, flux: FluxBias) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    (
        params.ejmax_plus * (pi * flux.phi_plus).cos(),
        params.ejmax_minus * (pi * flux.phi_minus).cos(),
    )
}

/// Smallest `E_J/E_C` of the two islands; the charge-insensitive regime needs ≥ 10.
pub fn transmon_ratio(params: &TcqParams, flux: FluxBias) -> f64 {
    let (ejp, ejm) = effective_josephson(params, flux);
    (ejp / params.ec_plus).min(ejm / params.ec_minus)
}

pub fn check_transmon_regime(params: &TcqParams, fluxes: &[FluxBias]) -> Result<()> {
    for &f in fluxes {
        let r = transmon_ratio(params, f);
        if r < 10.0 {
            return Err(Error::InvalidParameter {
                field: "flux",
                reason: format!(
                    "E_J/E_C = {r:.2} < 10 at (Φ₊, Φ₋) = ({}, {})",
                    f.phi_plus, f.phi_minus
                ),
            });
        }
    }
    Ok(())
}

fn charge_values(params: &TcqParams) -> Vec<f64> {
    let nc = params.charge_cutoff as i64;
    (-nc..=nc).map(|n| n as f64).collect()
}

/// Real symmetric Hamiltonian, row-major, plus diagonal of `n̂ = n₊ + n₋`.
fn charge_hamiltonian_real(params: &TcqParams, flux: FluxBias) -> (Vec<f64>, Vec<f64>) {
    let n = charge_values(params);
    let d = n.len();
    let dim = d * d;
    let (ejp, ejm) = effective_josephson(params, flux);
    let mut h = vec![0.0; dim * dim];
    let mut ntot = vec![0.0; dim];
    for i in 0..d {
        for j in 0..d {
            let idx = i * d + j;
            let (np, nm) = (n[i], n[j]);
            h[idx * dim + idx] = 4.0 * params.ec_plus * (np - params.ng_plus).powi(2)
                + 4.0 * params.ec_minus * (nm - params.ng_minus).powi(2)
                + 4.0 * params.e_int * np * nm;
            ntot[idx] = np + nm;
            if i + 1 < d {
                let up = (i + 1) * d + j;
                h[idx * dim + up] = -ejp / 2.0;
                h[up * dim + idx] = -ejp / 2.0;
            }
            if j + 1 < d {
                let up = i * d + j + 1;
                h[idx * dim + up] = -ejm / 2.0;
                h[up * dim + idx] = -ejm / 2.0;
            }
        }
    }
    (h, ntot)
}

/// Charge-basis Hamiltonian on `|n₊, n₋⟩` (index `(n₊+N_c)(2N_c+1) + (n₋+N_c)`).
pub fn build_charge_hamiltonian(params: &TcqParams, flux: FluxBias) -> ComplexMatrix {
    let dim = params.basis_dim();
    let (h, _) = charge_hamiltonian_real(params, flux);
    ComplexMatrix::from_vec(dim, dim, h.into_iter().map(|x| C64::new(x, 0.0)).collect())
        .expect("square")
}

/// Diagonal of `n̂ = n₊ + n₋` in the charge basis.
pub fn charge_operator_diag(params: &TcqParams) -> Vec<f64> {
    charge_hamiltonian_real(params, FluxBias { phi_plus: 0.0, phi_minus: 0.0 }).1
}

/// Sorted eigenvalues and eigenvectors with the gauge `⟨k|n̂|0⟩ ≥ 0`.
pub struct TcqEigen {
    pub energies: Vec<f64>,
    /// `vectors[k]` is the k-th eigenvector in the charge basis.
    pub vectors: Vec<Vec<f64>>,
    pub n_diag: Vec<f64>,
}

impl TcqEigen {
    pub fn charge_element(&self, k: usize, l: usize) -> f64 {
        self.vectors[k]
            .iter()
            .zip(&self.vectors[l])
            .zip(&self.n_diag)
            .map(|((a, b), n)| a * n * b)
            .sum()
    }
}

pub fn diagonalize(params: &TcqParams, flux: FluxBias, n_levels: usize) -> Result<TcqEigen> {
    params.validate()?;
    let dim = params.basis_dim();
    let (h, n_diag) = charge_hamiltonian_real(params, flux);
    let n_levels = n_levels.min(dim);
    let (energies, mut vectors) = if params.ng_plus == 0.0 && params.ng_minus == 0.0 {
        lowest_by_parity(dim, &h, n_levels)?
    } else {
        let (values, vecs) = eigh_real(dim, &h)?;
        let vectors = (0..n_levels)
            .map(|k| vecs.column(k).iter().copied().collect())
            .collect();
        (values[..n_levels].to_vec(), vectors)
    };
    // ground-state sign: largest component positive
    let g = &vectors[0];
    let imax = (0..dim).max_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs())).unwrap_or(0);
    if vectors[0][imax] < 0.0 {
        vectors[0].iter_mut().for_each(|x| *x = -*x);
    }
    let mut eig = TcqEigen { energies, vectors, n_diag };
    for k in 1..n_levels {
        if eig.charge_element(k, 0) < 0.0 {
            eig.vectors[k].iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(eig)
}

/// Without offset charges `H` commutes with `|n₊, n₋⟩ → |−n₊, −n₋⟩`, which
/// maps basis index `i` to `dim − 1 − i`. Diagonalizing the even and odd
/// blocks separately is about four times cheaper than the full matrix.
fn lowest_by_parity(dim: usize, h: &[f64], n_levels: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let c = (dim - 1) / 2;
    let mirror = |i: usize| dim - 1 - i;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let at = |i: usize, j: usize| h[i * dim + j];

    let ne = c + 1;
    let mut even = vec![0.0; ne * ne];
    let mut odd = vec![0.0; c * c];
    for a in 0..c {
        for b in 0..c {
            let (ma, mb) = (mirror(a), mirror(b));
            even[a * ne + b] = 0.5 * (at(a, b) + at(a, mb) + at(ma, b) + at(ma, mb));
            odd[a * c + b] = 0.5 * (at(a, b) - at(a, mb) - at(ma, b) + at(ma, mb));
        }
        let v = r * (at(a, c) + at(mirror(a), c));
        even[a * ne + c] = v;
        even[c * ne + a] = v;
    }
    even[c * ne + c] = at(c, c);

    let (ve, we) = eigh_real(ne, &even)?;
    let (vo, wo) = eigh_real(c, &odd)?;
    let mut levels: Vec<(f64, Vec<f64>)> = Vec::with_capacity(2 * n_levels);
    for k in 0..n_levels.min(ne) {
        let mut full = vec![0.0; dim];
        for a in 0..c {
            full[a] = r * we[(a, k)];
            full[mirror(a)] = r * we[(a, k)];
        }
        full[c] = we[(c, k)];
        levels.push((ve[k], full));
    }
    for k in 0..n_levels.min(c) {
        let mut full = vec![0.0; dim];
        for a in 0..c {
            full[a] = r * wo[(a, k)];
            full[mirror(a)] = -r * wo[(a, k)];
        }
        levels.push((vo[k], full));
    }
    levels.sort_by(|x, y| x.0.total_cmp(&y.0));
    levels.truncate(n_levels);
    Ok(levels.into_iter().unzip())
}

pub fn spectrum(params: &TcqParams, flux: FluxBias) -> Result<TcqSpectrum> {
    let eig = diagonalize(params, flux, 9)?;
    let e = &eig.energies;
    if e.len() < 6 {
        return Err(Error::InvalidParameter {
            field: "charge_cutoff",
            reason: "basis too small for six levels".into(),
        });
    }
    let upper_level = (2..e.len())
        .max_by(|&a, &b| {
            eig.charge_element(a, 0)
                .abs()
                .total_cmp(&eig.charge_element(b, 0).abs())
        })
        .expect("at least three levels");
    Ok(TcqSpectrum {
        omega_plus: e[1] - e[0],
        omega_minus: e[2] - e[0],
        n01: eig.charge_element(1, 0).abs(),
        n02: eig.charge_element(2, 0).abs(),
        anharm_diag: [e[3] - e[0], e[4] - e[0], e[5] - e[0]],
        omega_upper: e[upper_level] - e[0],
        n_upper: eig.charge_element(upper_level, 0).abs(),
        upper_level,
        min_gap: (e[1] - e[0]).min(e[2] - e[1]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        (0..self.n)
            .map(|i| self.start + (self.end - self.start) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxGrid {
    pub phi_plus: AxisRange,
    pub phi_minus: AxisRange,
}

impl FluxGrid {
    pub fn square(n: usize) -> Self {
        let axis = AxisRange { start: 0.0, end: 0.5, n };
        Self { phi_plus: axis, phi_minus: axis }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxScan {
    pub n_plus: usize,
    pub n_minus: usize,
    /// Row-major over (Φ₊, Φ₋), Φ₋ fastest.
    pub points: Vec<(FluxBias, TcqSpectrum)>,
}

impl FluxScan {
    pub fn at(&self, i_plus: usize, i_minus: usize) -> &(FluxBias, TcqSpectrum) {
        &self.points[i_plus * self.n_minus + i_minus]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phi_plus,phi_minus,omega_plus_ghz,omega_minus_ghz,n01,n02")?;
        for (f, s) in &self.points {
            let cols = [f.phi_plus, f.phi_minus, s.omega_plus, s.omega_minus, s.n01, s.n02];
            let line: Vec<String> = cols.iter().map(|&x| significant(x, 12)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn scan_flux_plane(params: &TcqParams, grid: &FluxGrid) -> Result<FluxScan> {
    if grid.phi_plus.n < 16 || grid.phi_minus.n < 16 {
        return Err(Error::InvalidParameter {
            field: "grid",
            reason: format!(
                "resolution {}x{} below 16x16",
                grid.phi_plus.n, grid.phi_minus.n
            ),
        });
    }
    scan_points(params, &grid.phi_plus.values(), &grid.phi_minus.values())
}

/// Spectra on an arbitrary product of flux samples (no resolution floor).
pub fn scan_points(params: &TcqParams, phi_plus: &[f64], phi_minus: &[f64]) -> Result<FluxScan> {
    params.validate()?;
    let mut fluxes = Vec::with_capacity(phi_plus.len() * phi_minus.len());
    for &p in phi_plus {
        for &m in phi_minus {
            fluxes.push(FluxBias::new(p, m)?);
        }
    }
    let points = fluxes
        .into_par_iter()
        .map(|f| spectrum(params, f).map(|s| (f, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FluxScan {
        n_plus: phi_plus.len(),
        n_minus: phi_minus.len(),
        points,
    })
}

/// Second-order shift of the dressed frequencies from the fast part of the
/// diagonalizing angle λ(t) = λ_d cos(ω_λ t):
///
/// ```text
/// ω̃_λ = λ_d² ω_λ² (ω̃₊ − ω̃₋) / (2 [(ω̃₊ − ω̃₋)² − ω_λ²])
/// ```
///
/// Returned as `(+ω̃_λ, −ω̃_λ)`, the additive corrections to `(ω̃₊, ω̃₋)`: the
/// coupling pushes the two modes apart when `ω_λ < |ω̃₊ − ω̃₋|`.
pub fn lambda_renormalization(
    lambda_d: f64,
    omega_lambda: f64,
    omega_plus: f64,
    omega_minus: f64,
) -> Result<(f64, f64)> {
    let diff = omega_plus - omega_minus;
    let denom = 2.0 * (diff * diff - omega_lambda * omega_lambda);
    let scale = (diff * diff).max(omega_lambda * omega_lambda).max(f64::MIN_POSITIVE);
    if denom.abs() <= 1e-12 * scale {
        return Err(Error::Singularity(format!(
            "|ω̃₊ − ω̃₋| = {} equals ω_λ = {omega_lambda}",
            diff.abs()
        )));
    }
    let shift = lambda_d * lambda_d * omega_lambda * omega_lambda * diff / denom;
    Ok((shift, -shift))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flux(p: f64, m: f64) -> FluxBias {
        FluxBias::new(p, m).unwrap()
    }

    #[test]
    fn josephson_endpoints() {
        let p = TcqParams::reference();
        assert_eq!(effective_josephson(&p, flux(0.0, 0.0)).0, 25.0);
        assert!(effective_josephson(&p, flux(0.5, 0.0)).0.abs() < 1e-14);
        let (_, ejm) = effective_josephson(&p, flux(0.0, 0.4));
        // 25 cos(0.4π)
        assert!((ejm - 7.725424859373686).abs() < 1e-12);
    }

    #[test]
    fn flux_outside_quadrant_rejected() {
        assert!(FluxBias::new(0.6, 0.0).is_err());
        assert!(FluxBias::new(0.0, -0.1).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = TcqParams::reference();
        p.charge_cutoff = 4;
        assert!(p.validate().is_err());
        let mut p = TcqParams::reference();
        p.e_int = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn bare_charging_parabolas() {
        let mut p = TcqParams::reference();
        p.e_int = 1e-300;
        p.ejmax_plus = 1e-300;
        p.ejmax_minus = 1e-300;
        let h = build_charge_hamiltonian(&p, flux(0.0, 0.0));
        let d = 2 * p.charge_cutoff + 1;
        for i in 0..d {
            for j in 0..d {
                let (np, nm) = (i as f64 - 7.0, j as f64 - 7.0);
                let idx = i * d + j;
                let expect = 4.0 * 0.5 * np * np + 4.0 * 0.5 * nm * nm;
                assert!((h[(idx, idx)].re - expect).abs() < 1e-12);
            }
        }
        assert!(
            (0..h.rows()).all(|r| (0..h.cols()).all(|c| r == c || h[(r, c)].norm() < 1e-200))
        );
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = build_charge_hamiltonian(&TcqParams::reference(), flux(0.13, 0.4));
        assert_eq!(h.hermiticity_error(), 0.0);
    }

    /// Single Cooper-pair box by direct diagonalization.
    fn single_island(ec: f64, ej: f64, nc: i64) -> Vec<f64> {
        let n: Vec<f64> = (-nc..=nc).map(|x| x as f64).collect();
        let d = n.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = 4.0 * ec * n[i] * n[i];
            if i + 1 < d {
                h[i * d + i + 1] = -ej / 2.0;
                h[(i + 1) * d + i] = -ej / 2.0;
            }
        }
        eigh_real(d, &h).unwrap().0
    }

    #[test]
    fn decoupled_islands_add() {
        let mut p = TcqParams::reference();
        p.e_int = 1e-300;
        p.ejmax_minus = 18.0;
        let f = flux(0.1, 0.2);
        let (ejp, ejm) = effective_josephson(&p, f);
        let ep = single_island(p.ec_plus, ejp, 7);
        let em = single_island(p.ec_minus, ejm, 7);
        let mut sums: Vec<f64> = ep.iter().flat_map(|a| em.iter().map(move |b| a + b)).collect();
        sums.sort_by(f64::total_cmp);
        let eig = diagonalize(&p, f, 12).unwrap();
        for k in 0..12 {
            assert!((eig.energies[k] - sums[k]).abs() < 1e-9, "level {k}");
        }
    }

    #[test]
    fn transmon_asymptotic_frequency() {
        let mut p = TcqParams::reference();
        p.e_int = 1e-300;
        p.ejmax_minus = 5.0;
        let s = spectrum(&p, flux(0.0, 0.0)).unwrap();
        // E_J/E_C = 50: ω ≈ √(8 E_J E_C) − E_C = 9.5 GHz, but the E_J⁻ island
        // sits lower, so the plus island is the upper single-excitation mode
        let oracle = (8.0f64 * 25.0 * 0.5).sqrt() - 0.5;
        assert!((s.omega_upper - oracle).abs() / oracle < 0.03);
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let eig = diagonalize(&TcqParams::reference(), flux(0.2, 0.4), 6).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let dot: f64 = eig.vectors[a].iter().zip(&eig.vectors[b]).map(|(x, y)| x * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn parity_blocks_match_full_diagonalization() {
        let p = TcqParams::reference();
        let f = flux(0.23, 0.4);
        let fast = diagonalize(&p, f, 9).unwrap();
        let mut q = p.clone();
        q.ng_plus = 1e-300;
        let full = diagonalize(&q, f, 9).unwrap();
        for k in 0..9 {
            assert!((fast.energies[k] - full.energies[k]).abs() < 1e-9, "level {k}");
            if k > 0 {
                let (a, b) = (fast.charge_element(k, 0), full.charge_element(k, 0));
                assert!((a - b).abs() < 1e-8, "element {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gauge_makes_elements_nonnegative() {
        let eig = diagonalize(&TcqParams::reference(), flux(0.1, 0.4), 6).unwrap();
        for k in 1..6 {
            assert!(eig.charge_element(k, 0) >= 0.0);
        }
    }

    #[test]
    fn renormalization_formula() {
        assert_eq!(lambda_renormalization(0.0, 1.0, 4.5, 7.0).unwrap(), (0.0, -0.0));
        let (a, _) = lambda_renormalization(0.1, 0.0, 4.5, 7.0).unwrap();
        assert_eq!(a, 0.0);
        let (a, b) = lambda_renormalization(0.1, 1.0, 4.5, 7.0).unwrap();
        let expect = 0.01 * 1.0 * (-2.5) / (2.0 * (6.25 - 1.0));
        assert!((a - expect).abs() < 1e-15);
        assert!((a + 2.38e-3).abs() < 1e-5);
        assert_eq!(b, -a);
        assert!(matches!(
            lambda_renormalization(0.1, 2.5, 4.5, 7.0),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn transmon_regime_check() {
        let p = TcqParams::reference();
        assert!(check_transmon_regime(&p, &[flux(0.0, 0.4), flux(0.4, 0.4)]).is_ok());
        assert!(check_transmon_regime(&p, &[flux(0.49, 0.0)]).is_err());
    }
}
