//! Ideal collective gates: the effective all-to-all Hamiltonian, its exact
//! evolution, the sideband propagator, and a compiler for many-body Pauli
//! exponentials built from two collective gates and one local phase.
//!
//! Qubit 0 is the most significant bit of a register index and the first
//! Kronecker factor. `|0⟩` is the ground level, `σ^z|0⟩ = +|0⟩`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{
    destroy, eigh, expm, mhz_to_angular, pauli, Axis, ComplexMatrix,
    HermitianEigen, C64,
};

/// Largest register handled with dense `2^N` matrices.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest register for which compiled sequences are verified.
pub const MAX_VERIFY_QUBITS: usize = 8;

/// How the pair sum of the effective Hamiltonian is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConvention {
    /// `H = −ξ Σ_{i<j} σ^α_i σ^α_j`.
    #[default]
    UnorderedPairs,
    /// `H = −ξ Σ_{i≠j} σ^α_i σ^α_j`, i.e. twice the unordered sum. This is
    /// what a detuned two-tone sideband drive with `ξ = g_d²/4δ` produces.
    OrderedPairs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsGateSpec {
    pub n_qubits: usize,
    /// Interaction strength (MHz).
    pub xi: f64,
    pub axis: Axis,
    /// Gate duration (ns).
    pub time: f64,
    #[serde(default)]
    pub pairs: PairConvention,
}

impl MsGateSpec {
    pub fn new(n_qubits: usize, xi: f64, axis: Axis, time: f64) -> Self {
        Self { n_qubits, xi, axis, time, pairs: PairConvention::UnorderedPairs }
    }

    /// Gate generated by two tones of amplitude `g_d` detuned by `δ` (MHz):
    /// `ξ = g_d²/4δ` over ordered pairs, run for one detachment period `1/δ`.
    pub fn from_sideband(n_qubits: usize, g_d: f64, delta: f64, axis: Axis) -> Self {
        Self {
            n_qubits,
            xi: g_d * g_d / (4.0 * delta),
            axis,
            time: 1e3 / delta,
            pairs: PairConvention::OrderedPairs,
        }
    }

    /// Coefficient multiplying `Σ_{i<j}` (MHz).
    pub fn pair_coefficient(&self) -> f64 {
        match self.pairs {
            PairConvention::UnorderedPairs => self.xi,
            PairConvention::OrderedPairs => 2.0 * self.xi,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidParameter { field: "n_qubits", reason: "must be ≥ 1".into() });
        }
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit { n: self.n_qubits, max: MAX_DENSE_QUBITS });
        }
        if self.axis == Axis::Z {
            return Err(Error::InvalidParameter {
                field: "axis",
                reason: "collective gates act along x or y".into(),
            });
        }
        Ok(())
    }
}

/// `Σ_{i<j∈qubits} σ^α_i σ^α_j` on an `n`-qubit register.
pub fn pair_sum(n: usize, axis: Axis, qubits: &[usize]) -> Result<ComplexMatrix> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit { n, max: MAX_DENSE_QUBITS });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::SiteOutOfRange { site: q, n_factors: n });
    }
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (a, &i) in qubits.iter().enumerate() {
        for &j in &qubits[a + 1..] {
            let (bi, bj) = (n - 1 - i, n - 1 - j);
            let mask = (1usize << bi) | (1usize << bj);
            for col in 0..dim {
                let row = col ^ mask;
                let v = match axis {
                    Axis::X => C64::new(1.0, 0.0),
                    // σ^y|0⟩ = i|1⟩, σ^y|1⟩ = −i|0⟩
                    Axis::Y => {
                        let f = |bit: usize| if (col >> bit) & 1 == 0 { C64::i() } else { -C64::i() };
                        f(bi) * f(bj)
                    }
                    Axis::Z => {
                        let s = |bit: usize| if (col >> bit) & 1 == 0 { 1.0 } else { -1.0 };
                        m[(col, col)] += C64::new(s(bi) * s(bj), 0.0);
                        continue;
                    }
                };
                m[(row, col)] += v;
            }
        }
    }
    Ok(m)
}

/// Effective Hamiltonian in MHz: `−c Σ_{i<j} σ^α_i σ^α_j` with `c` the pair coefficient.
pub fn ms_hamiltonian(spec: &MsGateSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let all: Vec<usize> = (0..spec.n_qubits).collect();
    Ok(pair_sum(spec.n_qubits, spec.axis, &all)?.scale(C64::new(-spec.pair_coefficient(), 0.0)))
}

/// Exact evolution under the effective Hamiltonian from a fixed initial state.
pub struct IdealEvolution {
    eig: HermitianEigen,
    /// `V† ψ₀`.
    coeffs: Vec<C64>,
}

impl IdealEvolution {
    pub fn new(spec: &MsGateSpec, psi0: &[C64]) -> Result<Self> {
        let h = ms_hamiltonian(spec)?;
        if psi0.len() != h.rows() {
            return Err(crate::error::shape_err(h.rows(), psi0.len()));
        }
        let eig = eigh(&h)?;
        let coeffs = (0..h.rows())
            .map(|k| (0..h.rows()).map(|i| eig.vectors[(i, k)].conj() * psi0[i]).sum())
            .collect();
        Ok(Self { eig, coeffs })
    }

    pub fn from_ground(spec: &MsGateSpec) -> Result<Self> {
        spec.validate()?;
        let mut psi0 = vec![C64::new(0.0, 0.0); 1 << spec.n_qubits];
        psi0[0] = C64::new(1.0, 0.0);
        Self::new(spec, &psi0)
    }

    /// `exp(−2πi H t) ψ₀` with `H` in MHz and `t` in ns.
    pub fn state(&self, t: f64) -> Vec<C64> {
        let d = self.coeffs.len();
        let phases: Vec<C64> = self
            .eig
            .values
            .iter()
            .zip(&self.coeffs)
            .map(|(&e, &c)| c * C64::from_polar(1.0, -mhz_to_angular(e) * t))
            .collect();
        (0..d)
            .map(|i| (0..d).map(|k| self.eig.vectors[(i, k)] * phases[k]).sum())
            .collect()
    }
}

pub fn ideal_evolution(spec: &MsGateSpec, t: f64) -> Result<Vec<C64>> {
    Ok(IdealEvolution::from_ground(spec)?.state(t))
}

/// `|⟨GHZ_φ|ψ⟩|²` maximized over the relative phase `φ` of
/// `(|0…0⟩ + e^{iφ}|1…1⟩)/√2`.
pub fn ghz_fidelity(psi: &[C64]) -> f64 {
    let last = psi.len() - 1;
    let s = psi[0].norm() + psi[last].norm();
    0.5 * s * s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptimum {
    pub time: f64,
    pub value: f64,
}

/// Golden-section refinement of a unimodal maximum on `[a, b]`.
fn refine_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> ScanOptimum {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 * b.abs().max(1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    ScanOptimum { time: t, value: f(t) }
}

fn scan_then_refine(f: impl Fn(f64) -> f64 + Copy, t_max: f64, n_grid: usize) -> ScanOptimum {
    let h = t_max / n_grid as f64;
    let (mut best_k, mut best) = (1, f64::NEG_INFINITY);
    for k in 1..=n_grid {
        let v = f(k as f64 * h);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let a = (best_k as f64 - 1.0) * h;
    let b = ((best_k as f64 + 1.0) * h).min(t_max);
    refine_max(f, a, b)
}

/// Scans `t ∈ (0, 1/(4ξ)]` for the best GHZ fidelity from `|0…0⟩`.
pub fn ghz_scan(spec: &MsGateSpec, n_grid: usize) -> Result<ScanOptimum> {
    let ev = IdealEvolution::from_ground(spec)?;
    let t_max = 1e3 / (4.0 * spec.xi);
    Ok(scan_then_refine(|t| ghz_fidelity(&ev.state(t)), t_max, n_grid))
}

/// First return to `|0…0⟩` after `t_min`, searched up to `t_max` (ns).
pub fn recurrence_time(spec: &MsGateSpec, t_min: f64, t_max: f64, n_grid: usize) -> Result<ScanOptimum> {
    let ev = IdealEvolution::from_ground(spec)?;
    let f = |t: f64| ev.state(t)[0].norm_sqr();
    let h = (t_max - t_min) / n_grid as f64;
    let mut prev = f(t_min);
    let mut rising = false;
    for k in 1..=n_grid {
        let t = t_min + k as f64 * h;
        let v = f(t);
        if v < prev {
            if rising && prev > 0.5 {
                return Ok(refine_max(f, t - 2.0 * h, t));
            }
            rising = false;
        } else {
            rising = true;
        }
        prev = v;
    }
    Err(Error::InvalidParameter {
        field: "t_max",
        reason: format!("no recurrence found in ({t_min}, {t_max}] ns"),
    })
}

/// Detuned two-tone sideband Hamiltonian in rad/ns on qubits ⊗ resonator:
/// `H(t) = −i (g_d/2) S^y (a† e^{iδt} − a e^{−iδt})`.
pub fn sideband_hamiltonian(
    n_qubits: usize,
    g_d: f64,
    delta: f64,
    t: f64,
    photon_cutoff: usize,
) -> Result<ComplexMatrix> {
    let sy = collective_y(n_qubits)?;
    let a = destroy(photon_cutoff)?;
    let g = mhz_to_angular(g_d);
    let d = mhz_to_angular(delta);
    let e = C64::from_polar(1.0, d * t);
    let field = &a.dagger().scale(e) - &a.scale(e.conj());
    Ok(sy.kron(&field).scale(C64::new(0.0, -g / 2.0)))
}

/// `S^y = Σ_i σ^y_i`.
pub fn collective_y(n: usize) -> Result<ComplexMatrix> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit { n, max: MAX_DENSE_QUBITS });
    }
    let mut s = ComplexMatrix::zeros(1 << n, 1 << n);
    for q in 0..n {
        s = &s + &embed_qubit(n, q, &pauli(Axis::Y));
    }
    Ok(s)
}

fn embed_qubit(n: usize, q: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(1);
    for k in 0..n {
        m = if k == q { m.kron(op) } else { m.kron(&ComplexMatrix::identity(2)) };
    }
    m
}

/// Exact second-order Magnus propagator of [`sideband_hamiltonian`] from 0 to `t`:
///
/// ```text
/// U(t) = exp{(g S/2δ)[i(e^{iδt} − 1) a† − h.c.]} · exp{−i (g S/2δ)² [sin δt − δt]}
/// ```
///
/// with angular `g`, `δ`. Errors if the largest displacement `|α|²` reaches
/// `photon_cutoff/4`.
pub fn magnus_propagator(
    n_qubits: usize,
    g_d: f64,
    delta: f64,
    t: f64,
    photon_cutoff: usize,
) -> Result<ComplexMatrix> {
    if delta == 0.0 {
        return Err(Error::Singularity("sideband detuning δ = 0".into()));
    }
    let g = mhz_to_angular(g_d);
    let d = mhz_to_angular(delta);
    let phase_arc = if d * t.abs() >= std::f64::consts::PI { 2.0 } else { (C64::from_polar(1.0, d * t) - 1.0).norm() };
    let alpha = g * n_qubits as f64 / (2.0 * d) * phase_arc;
    if alpha * alpha >= photon_cutoff as f64 / 4.0 {
        return Err(Error::Truncation { cutoff: photon_cutoff, alpha_sq: alpha * alpha });
    }
    let sy = collective_y(n_qubits)?;
    let a = destroy(photon_cutoff)?;
    let x = a.dagger().scale(C64::new(0.0, 1.0) * (C64::from_polar(1.0, d * t) - 1.0));
    let gen = sy.kron(&(&x - &x.dagger())).scale(C64::new(g / (2.0 * d), 0.0));
    let displacement = expm(&gen)?;
    let k = (g / (2.0 * d)).powi(2) * ((d * t).sin() - d * t);
    let sy2 = (&sy * &sy).kron(&ComplexMatrix::identity(photon_cutoff));
    let phase = expm(&sy2.scale(C64::new(0.0, -k)))?;
    displacement.matmul(&phase)
}

/// `min_χ ‖U − e^{iχ}V‖₂` with `e^{iχ}` the phase of `Tr[V†U]`.
pub fn phase_aligned_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<(f64, f64)> {
    let overlap = v.dagger().matmul(u)?.trace();
    let chi = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let diff = u - &v.scale(C64::from_polar(1.0, chi));
    Ok((diff.operator_norm(), chi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => pauli(Axis::X),
            Pauli::Y => pauli(Axis::Y),
            Pauli::Z => pauli(Axis::Z),
        }
    }

    fn from_axis(axis: Axis) -> Self {
        match axis {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub letters: Vec<Pauli>,
    /// One of ±1, ±i.
    pub phase: C64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: C64) -> Result<Self> {
        let ok = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::i(), -C64::i()]
            .iter()
            .any(|p| (p - phase).norm() < 1e-12);
        if !ok {
            return Err(Error::InvalidParameter {
                field: "phase",
                reason: format!("{phase} is not one of ±1, ±i"),
            });
        }
        Ok(Self { letters, phase })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let m = self
            .letters
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, p| acc.kron(&p.matrix()));
        m.scale(self.phase)
    }

    /// `exp(iθ P)`; `P² = I` for real phase so this is `cos θ + i sin θ P`.
    pub fn exponential(&self, theta: f64) -> Result<ComplexMatrix> {
        expm(&self.matrix().scale(C64::new(0.0, theta)))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if (self.phase - C64::new(1.0, 0.0)).norm() < 1e-12 {
            "+"
        } else if (self.phase + C64::new(1.0, 0.0)).norm() < 1e-12 {
            "-"
        } else if (self.phase - C64::i()).norm() < 1e-12 {
            "+i"
        } else {
            "-i"
        };
        write!(f, "{sign}")?;
        for p in &self.letters {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    /// `exp(−i(φ/2) Σ_{i<j∈qubits} σ^α_i σ^α_j)`; qubits outside the set are untouched.
    CollectiveMs { phi: f64, axis: Axis, qubits: Vec<usize> },
    /// `exp(iθ σ^z_q)`.
    LocalZ { theta: f64, qubit: usize },
}

impl Gate {
    pub fn unitary(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        match self {
            Gate::CollectiveMs { phi, axis, qubits } => {
                let s = pair_sum(n_qubits, *axis, qubits)?;
                expm(&s.scale(C64::new(0.0, -phi / 2.0)))
            }
            Gate::LocalZ { theta, qubit } => {
                if *qubit >= n_qubits {
                    return Err(Error::SiteOutOfRange { site: *qubit, n_factors: n_qubits });
                }
                let z = embed_qubit(n_qubits, *qubit, &pauli(Axis::Z));
                expm(&z.scale(C64::new(0.0, *theta)))
            }
        }
    }
}

/// Gates in time order: the first entry acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        if self.n_qubits > MAX_VERIFY_QUBITS {
            return Err(Error::SizeLimit { n: self.n_qubits, max: MAX_VERIFY_QUBITS });
        }
        let mut u = ComplexMatrix::identity(1 << self.n_qubits);
        for g in &self.gates {
            u = g.unitary(self.n_qubits)?.matmul(&u)?;
        }
        Ok(u)
    }
}

/// Row of the `N mod 4` table the prediction came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerCase {
    FourNMinusOne,
    FourNPlusOne,
    FourN,
    FourNMinusTwo,
}

impl StabilizerCase {
    pub fn of(n: usize) -> Self {
        match n % 4 {
            3 => Self::FourNMinusOne,
            1 => Self::FourNPlusOne,
            0 => Self::FourN,
            _ => Self::FourNMinusTwo,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::FourNMinusOne => "N=4n-1",
            Self::FourNPlusOne => "N=4n+1",
            Self::FourN => "N=4n",
            Self::FourNMinusTwo => "N=4n-2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledStabilizer {
    pub sequence: GateSequence,
    pub case: StabilizerCase,
    /// The gate is predicted to equal `exp(iθ P)`.
    pub predicted: PauliString,
    pub theta: f64,
}

/// Tabulated prediction `P` such that the sequence realizes `exp(iθ P)`:
///
/// ```text
/// N = 4n−1:  −σ^z₁ σ^α₂⋯σ^α_N
/// N = 4n+1:  +σ^z₁ σ^α₂⋯σ^α_N
/// N = 4n:    +σ^β₁ σ^α₂⋯σ^α_N,  σ^β = −σ^y (α = x), +σ^x (α = y)
/// N = 4n−2:  −σ^β₁ σ^α₂⋯σ^α_N,  σ^β = +σ^y (α = x), −σ^x (α = y)
/// ```
pub fn predicted_stabilizer(axis: Axis, n: usize) -> Result<(StabilizerCase, PauliString)> {
    if n < 2 {
        return Err(Error::InvalidParameter { field: "n_qubits", reason: format!("{n} < 2") });
    }
    if axis == Axis::Z {
        return Err(Error::InvalidParameter { field: "axis", reason: "must be x or y".into() });
    }
    let alpha = Pauli::from_axis(axis);
    let case = StabilizerCase::of(n);
    let one = C64::new(1.0, 0.0);
    let (first, phase) = match (case, axis) {
        (StabilizerCase::FourNMinusOne, _) => (Pauli::Z, -one),
        (StabilizerCase::FourNPlusOne, _) => (Pauli::Z, one),
        (StabilizerCase::FourN, Axis::X) => (Pauli::Y, -one),
        (StabilizerCase::FourN, _) => (Pauli::X, one),
        (StabilizerCase::FourNMinusTwo, Axis::X) => (Pauli::Y, -one),
        (StabilizerCase::FourNMinusTwo, _) => (Pauli::X, one),
    };
    let mut letters = vec![first];
    letters.extend(std::iter::repeat(alpha).take(n - 1));
    Ok((case, PauliString::new(letters, phase)?))
}

/// `[CollectiveMs(+π/2), LocalZ(θ, qubit 0), CollectiveMs(−π/2)]` with the table prediction.
pub fn compile_stabilizer(axis: Axis, n_qubits: usize, theta: f64) -> Result<CompiledStabilizer> {
    let (case, predicted) = predicted_stabilizer(axis, n_qubits)?;
    let all: Vec<usize> = (0..n_qubits).collect();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let sequence = GateSequence {
        n_qubits,
        gates: vec![
            Gate::CollectiveMs { phi: half_pi, axis, qubits: all.clone() },
            Gate::LocalZ { theta, qubit: 0 },
            Gate::CollectiveMs { phi: -half_pi, axis, qubits: all },
        ],
    };
    Ok(CompiledStabilizer { sequence, case, predicted, theta })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n_qubits: usize,
    pub case: String,
    pub predicted: String,
    pub theta: f64,
    /// `min_χ ‖U_seq − e^{iχ} exp(iθP)‖₂`.
    pub norm: f64,
    /// Optimal global phase χ (rad).
    pub phase: f64,
    pub pass: bool,
}

pub const VERIFY_TOL: f64 = 1e-10;

pub fn verify_sequence(
    seq: &GateSequence,
    predicted: &PauliString,
    theta: f64,
    case_label: &str,
) -> Result<VerificationReport> {
    if predicted.n_qubits() != seq.n_qubits {
        return Err(crate::error::shape_err(seq.n_qubits, predicted.n_qubits()));
    }
    let u = seq.unitary()?;
    let v = predicted.exponential(theta)?;
    let (norm, phase) = phase_aligned_distance(&u, &v)?;
    Ok(VerificationReport {
        n_qubits: seq.n_qubits,
        case: case_label.to_string(),
        predicted: predicted.to_string(),
        theta,
        norm,
        phase,
        pass: norm < VERIFY_TOL,
    })
}

/// `τ_n = n/δ` in ns for δ in MHz.
pub fn detachment_time(delta_mhz: f64, n: usize) -> f64 {
    n as f64 * 1e3 / delta_mhz
}
