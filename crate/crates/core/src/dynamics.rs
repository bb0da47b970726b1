//! Open-system dynamics of N three-level TCQs sharing one resonator.
//!
//! The Hamiltonian is kept in the interaction picture as a list of terms
//! `c·O·e^{2πiνt} + h.c.`, each tagged with its net rotation frequency `ν`.
//! For qubit `q`, level `ℓ ∈ {1, 2}` with frequency `ω̃_ℓ` and each Fourier
//! component `(ν_k, c_k)` of that level's coupling:
//!
//! ```text
//!  c_k σ⁺_{0ℓ} a  e^{2πi(ν_k + ω̃_ℓ − ω_r)t}
//! −c_k σ⁺_{0ℓ} a† e^{2πi(ν_k + ω̃_ℓ + ω_r)t}
//! ```
//!
//! Terms rotating faster than the frame cutoff are dropped unless the cutoff
//! is `full`. Dissipators follow `L(A)ρ = AρA† − ½{A†A, ρ}` with rates in
//! MHz multiplied by 2π. The Hilbert space is `[3; N] ⊗ [photon_cutoff]`,
//! resonator last.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape_err, Error, Result};
use crate::format::shortest;
use crate::gates::{IdealEvolution, MsGateSpec};
use crate::opcore::{
    destroy, ghz_to_angular, mhz_to_angular, partial_trace, transition, Axis, ComplexMatrix,
    CsrMatrix, DensityMatrix, HilbertSpace, SparseOperator, C64,
};
use crate::pulse::{CouplingSchedule, FourierComponent};

/// Levels kept per TCQ: ground, lower mode, upper mode.
pub const QUTRIT: usize = 3;
/// Largest composite dimension integrated with a dense density matrix.
pub const MAX_DIM: usize = 2048;
/// Largest tolerated `|Tr ρ − 1|`.
pub const TRACE_GATE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameCutoff {
    /// Keep terms with `|ν| ≤ cutoff` (GHz).
    Ghz(f64),
    /// Keep every term.
    Full,
}

impl FrameCutoff {
    pub fn keeps(self, freq: f64) -> bool {
        match self {
            FrameCutoff::Full => true,
            FrameCutoff::Ghz(c) => freq.abs() <= c,
        }
    }
}

impl Serialize for FrameCutoff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FrameCutoff::Ghz(v) => s.serialize_f64(*v),
            FrameCutoff::Full => s.serialize_str("full"),
        }
    }
}

impl<'de> Deserialize<'de> for FrameCutoff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v >= 0.0 => Ok(FrameCutoff::Ghz(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("negative frame cutoff {v}"))),
            Raw::Text(t) if t == "full" => Ok(FrameCutoff::Full),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "frame cutoff must be a number (GHz) or \"full\", got \"{t}\""
            ))),
        }
    }
}

/// A value shared by all qubits or given per qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerQubit<T> {
    Each(Vec<T>),
    Uniform(T),
}

impl<T> PerQubit<T> {
    pub fn get(&self, q: usize) -> &T {
        match self {
            PerQubit::Uniform(v) => v,
            PerQubit::Each(v) => &v[q],
        }
    }

    fn len_ok(&self, n: usize) -> bool {
        match self {
            PerQubit::Uniform(_) => true,
            PerQubit::Each(v) => v.len() == n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitCoupling {
    /// Two-tone coupling of the lower mode; `g_minus_s` is used as a static
    /// upper-mode coupling when no components are given.
    pub schedule: CouplingSchedule,
    /// Fourier components of the upper-mode coupling `g₋(t)`.
    #[serde(default)]
    pub g_minus_components: Vec<FourierComponent>,
}

impl QubitCoupling {
    pub fn plus_components(&self) -> Vec<FourierComponent> {
        self.schedule.components()
    }

    pub fn minus_components(&self) -> Vec<FourierComponent> {
        if self.g_minus_components.is_empty() {
            vec![FourierComponent { freq: 0.0, amp: C64::new(self.schedule.g_minus_s, 0.0) }]
        } else {
            self.g_minus_components.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_qubits: usize,
    /// Resonator frequency (GHz).
    pub omega_r: f64,
    /// Lower-mode transition frequency (GHz).
    pub omega_plus: PerQubit<f64>,
    /// Upper-mode transition frequency (GHz).
    pub omega_minus: PerQubit<f64>,
    pub photon_cutoff: usize,
    pub schedules: PerQubit<QubitCoupling>,
    /// Resonator decay κ (MHz).
    pub kappa: f64,
    /// Qubit dephasing Γ_φ (MHz).
    pub gamma_phi: f64,
    /// Qubit relaxation Γ₋ (MHz).
    pub gamma_minus: f64,
    pub frame_cutoff: FrameCutoff,
}

impl SystemConfig {
    /// Four TCQs at `ω̃± = 4.5/7` GHz driven at `g_s = 40`, `g_d = 20`,
    /// `δ = 50` MHz with a static upper-mode coupling of 60 MHz; κ = 100 kHz,
    /// Γ_φ = Γ₋ = 20 kHz, frame cutoff 7 GHz, photon cutoff 10. The largest
    /// displacement at N = 4 is |α|² = (4 g_d/δ)² = 2.56.
    pub fn reference(omega_r: f64) -> Self {
        let schedule = CouplingSchedule::detuned_sidebands(40.0, 20.0, 50.0, omega_r, 4.5, 60.0);
        Self {
            n_qubits: 4,
            omega_r,
            omega_plus: PerQubit::Uniform(4.5),
            omega_minus: PerQubit::Uniform(7.0),
            photon_cutoff: 10,
            schedules: PerQubit::Uniform(QubitCoupling { schedule, g_minus_components: Vec::new() }),
            kappa: 0.1,
            gamma_phi: 0.02,
            gamma_minus: 0.02,
            frame_cutoff: FrameCutoff::Ghz(7.0),
        }
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        let mut dims = vec![QUTRIT; self.n_qubits];
        dims.push(self.photon_cutoff);
        HilbertSpace::new(dims)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.n_qubits == 0 {
            return cfg("n_qubits must be at least 1".into());
        }
        if self.photon_cutoff < 4 {
            return cfg(format!("photon_cutoff {} < 4", self.photon_cutoff));
        }
        let dim = QUTRIT.pow(self.n_qubits as u32).saturating_mul(self.photon_cutoff);
        if dim > MAX_DIM {
            return cfg(format!("composite dimension {dim} exceeds {MAX_DIM}"));
        }
        for (name, ok) in [
            ("omega_plus", self.omega_plus.len_ok(self.n_qubits)),
            ("omega_minus", self.omega_minus.len_ok(self.n_qubits)),
            ("schedules", self.schedules.len_ok(self.n_qubits)),
        ] {
            if !ok {
                return cfg(format!("{name} must be one value or {} values", self.n_qubits));
            }
        }
        if !(self.omega_r > 0.0) {
            return cfg(format!("omega_r = {} must be positive", self.omega_r));
        }
        for q in 0..self.n_qubits {
            for (name, v) in [("omega_plus", *self.omega_plus.get(q)), ("omega_minus", *self.omega_minus.get(q))] {
                if !(v > 0.0) {
                    return cfg(format!("{name}[{q}] = {v} must be positive"));
                }
            }
        }
        for (name, v) in [("kappa", self.kappa), ("gamma_phi", self.gamma_phi), ("gamma_minus", self.gamma_minus)] {
            if !(v >= 0.0) {
                return cfg(format!("{name} = {v} must be nonnegative"));
            }
        }
        Ok(())
    }

    /// Effective gate implied by the drives: all driven qubits must share
    /// `g_d`, `δ` and the tone phase (0 → σ^y, π/2 → σ^x).
    pub fn ideal_spec(&self) -> Result<MsGateSpec> {
        let first = &self.schedules.get(0).schedule;
        for q in 1..self.n_qubits {
            let s = &self.schedules.get(q).schedule;
            if s.g_d != first.g_d || s.delta != first.delta || s.phase != first.phase {
                return Err(Error::Config(
                    "ideal reference needs identical drives on all qubits".into(),
                ));
            }
        }
        if first.g_d == 0.0 {
            return Ok(MsGateSpec::new(self.n_qubits, 0.0, Axis::Y, 0.0));
        }
        let axis = if first.phase.abs() < 1e-12 {
            Axis::Y
        } else if (first.phase - std::f64::consts::FRAC_PI_2).abs() < 1e-12 {
            Axis::X
        } else {
            return Err(Error::Config(format!(
                "tone phase {} maps to neither the x nor the y axis",
                first.phase
            )));
        };
        Ok(MsGateSpec::from_sideband(self.n_qubits, first.g_d, first.delta, axis))
    }
}

/// `amp·op·e^{2πi·freq·t} + h.c.`
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTerm {
    pub op: SparseOperator,
    /// GHz.
    pub freq: f64,
    /// MHz.
    pub amp: C64,
    pub qubit: usize,
    pub level: usize,
}

pub fn build_hamiltonian_terms(config: &SystemConfig) -> Result<Vec<HamiltonianTerm>> {
    config.validate()?;
    let space = config.space()?;
    let nq = config.n_qubits;
    let a = destroy(config.photon_cutoff)?;
    let ad = a.dagger();
    let mut terms = Vec::new();
    let mut any_coupling = false;
    for q in 0..nq {
        let coupling = config.schedules.get(q);
        for (level, omega, comps) in [
            (1, *config.omega_plus.get(q), coupling.plus_components()),
            (2, *config.omega_minus.get(q), coupling.minus_components()),
        ] {
            let raise = transition(level, 0, QUTRIT)?;
            let absorb = space.embed_product(&[(q, &raise), (nq, &a)])?;
            let emit = space.embed_product(&[(q, &raise), (nq, &ad)])?.scale(C64::new(-1.0, 0.0));
            for (op, shift) in [(&absorb, omega - config.omega_r), (&emit, omega + config.omega_r)] {
                for c in &comps {
                    if c.amp.norm() == 0.0 {
                        continue;
                    }
                    any_coupling = true;
                    let freq = c.freq + shift;
                    if config.frame_cutoff.keeps(freq) {
                        terms.push(HamiltonianTerm { op: op.clone(), freq, amp: c.amp, qubit: q, level });
                    }
                }
            }
        }
    }
    if any_coupling && terms.is_empty() {
        return Err(Error::Config(
            "frame cutoff drops every coupling term; raise frame_cutoff".into(),
        ));
    }
    Ok(terms)
}

/// Dense `H(t)` in rad/ns; reference path for tests and small systems.
pub fn dense_hamiltonian(terms: &[HamiltonianTerm], dim: usize, t: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    for term in terms {
        let c = C64::from_polar(mhz_to_angular(1.0), ghz_to_angular(term.freq) * t) * term.amp;
        for &(r, col, v) in term.op.triplets() {
            h[(r, col)] += c * v;
            h[(col, r)] += (c * v).conj();
        }
    }
    h
}

/// Jump operators with angular rates (rad/ns).
pub fn jump_operators(config: &SystemConfig) -> Result<Vec<(f64, SparseOperator)>> {
    let space = config.space()?;
    let nq = config.n_qubits;
    let mut out = Vec::new();
    if config.kappa > 0.0 {
        out.push((mhz_to_angular(config.kappa), space.embed(&destroy(config.photon_cutoff)?, nq)?));
    }
    let sz = ComplexMatrix::from_diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]);
    let sm = transition(0, 1, QUTRIT)?;
    for q in 0..nq {
        if config.gamma_phi > 0.0 {
            out.push((mhz_to_angular(config.gamma_phi), space.embed(&sz, q)?));
        }
        if config.gamma_minus > 0.0 {
            out.push((mhz_to_angular(config.gamma_minus), space.embed(&sm, q)?));
        }
    }
    Ok(out)
}

enum JumpKind {
    /// At most one entry per row: `(AρA†)_ij = v_i ρ_{c_i c_j} v̄_j`.
    Monomial(Vec<Option<(usize, C64)>>),
    General(CsrMatrix),
}

struct Jump {
    rate: f64,
    kind: JumpKind,
}

struct TermSlots {
    omega: f64,
    amp: C64,
    slots: Vec<(usize, C64)>,
    adj_slots: Vec<(usize, C64)>,
}

/// Sparse Lindblad generator with a fixed nonzero pattern.
///
/// `H_eff = H(t) − (i/2) Σ γ A†A` is refilled per call; the commutator and
/// anticommutator parts then come from one sparse-dense product `X = H_eff ρ`
/// as `−iX + iX†`.
pub struct Generator {
    dim: usize,
    pattern: CsrMatrix,
    base: Vec<C64>,
    terms: Vec<TermSlots>,
    jumps: Vec<Jump>,
    x: Vec<C64>,
    tmp: Vec<C64>,
    f_max: f64,
    amp_scale: f64,
}

impl Generator {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let terms = build_hamiltonian_terms(config)?;
        let jumps = jump_operators(config)?;
        Self::from_parts(config.space()?.dim(), &terms, &jumps)
    }

    pub fn from_parts(
        dim: usize,
        terms: &[HamiltonianTerm],
        jumps: &[(f64, SparseOperator)],
    ) -> Result<Self> {
        let mut decay = SparseOperator::zeros(dim);
        for (rate, a) in jumps {
            if a.dim() != dim {
                return Err(shape_err(dim, a.dim()));
            }
            decay = decay.add(&a.adjoint().matmul(a)?.scale(C64::new(*rate, 0.0)))?;
        }
        let mut cells: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for &(r, c, v) in decay.triplets() {
            cells.insert((r, c), C64::new(0.0, -0.5) * v);
        }
        for t in terms {
            if t.op.dim() != dim {
                return Err(shape_err(dim, t.op.dim()));
            }
            for &(r, c, _) in t.op.triplets() {
                cells.entry((r, c)).or_default();
                cells.entry((c, r)).or_default();
            }
        }
        let pattern_op = SparseOperator::from_triplets(
            dim,
            cells.keys().map(|&(r, c)| (r, c, C64::new(1.0, 0.0))),
        )?;
        let mut pattern = CsrMatrix::from_sparse(&pattern_op);
        let mut base = vec![C64::new(0.0, 0.0); pattern.values.len()];
        for (&(r, c), &v) in &cells {
            base[pattern.slot(r, c).expect("pattern cell")] = v;
        }
        pattern.values.fill(C64::new(0.0, 0.0));

        let mut slots_terms = Vec::with_capacity(terms.len());
        let mut f_max = 0.0f64;
        let mut amp_scale = 0.0;
        for t in terms {
            let slots = t.op.triplets().iter().map(|&(r, c, v)| (pattern.slot(r, c).unwrap(), v)).collect();
            let adj_slots = t
                .op
                .triplets()
                .iter()
                .map(|&(r, c, v)| (pattern.slot(c, r).unwrap(), v.conj()))
                .collect();
            let op_norm = t.op.triplets().iter().map(|x| x.2.norm()).fold(0.0, f64::max);
            amp_scale += 2.0 * mhz_to_angular(t.amp.norm()) * op_norm;
            f_max = f_max.max(t.freq.abs());
            slots_terms.push(TermSlots {
                omega: ghz_to_angular(t.freq),
                amp: t.amp * mhz_to_angular(1.0),
                slots,
                adj_slots,
            });
        }
        let jumps = jumps
            .iter()
            .map(|(rate, a)| {
                let kind = match a.monomial_rows() {
                    Some(rows) => JumpKind::Monomial(rows),
                    None => JumpKind::General(CsrMatrix::from_sparse(a)),
                };
                Jump { rate: *rate, kind }
            })
            .collect::<Vec<_>>();
        amp_scale += jumps.iter().map(|j| j.rate).sum::<f64>();
        Ok(Self {
            dim,
            pattern,
            base,
            terms: slots_terms,
            jumps,
            x: vec![C64::new(0.0, 0.0); dim * dim],
            tmp: vec![C64::new(0.0, 0.0); dim * dim],
            f_max,
            amp_scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest retained rotation frequency (GHz).
    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest step: `1/(20 f_max)`, also bounded by the coupling strengths.
    pub fn max_dt(&self) -> f64 {
        let by_freq = if self.f_max > 0.0 { 1.0 / (20.0 * self.f_max) } else { f64::INFINITY };
        let by_amp = if self.amp_scale > 0.0 { 0.5 / self.amp_scale } else { f64::INFINITY };
        by_freq.min(by_amp)
    }

    fn fill(&mut self, t: f64) {
        self.pattern.values.copy_from_slice(&self.base);
        for term in &self.terms {
            let c = term.amp * C64::from_polar(1.0, term.omega * t);
            let cc = c.conj();
            for &(s, v) in &term.slots {
                self.pattern.values[s] += c * v;
            }
            for &(s, v) in &term.adj_slots {
                self.pattern.values[s] += cc * v;
            }
        }
    }

    /// `out = 𝓛(t)[ρ]` for a row-major `dim × dim` Hermitian `ρ`.
    pub fn apply(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        assert_eq!(rho.len(), d * d, "density matrix size");
        assert_eq!(out.len(), d * d, "output size");
        self.fill(t);
        let pattern = &self.pattern;
        self.x.par_chunks_mut(d).enumerate().for_each(|(r, row)| {
            row.fill(C64::new(0.0, 0.0));
            for (c, v) in pattern.row(r) {
                for (o, &p) in row.iter_mut().zip(&rho[c * d..(c + 1) * d]) {
                    *o += v * p;
                }
            }
        });
        let x = &self.x;
        let jumps = &self.jumps;
        let tmp = &mut self.tmp;
        let minus_i = C64::new(0.0, -1.0);
        out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
            for (jcol, o) in row.iter_mut().enumerate() {
                *o = minus_i * x[i * d + jcol] - minus_i * x[jcol * d + i].conj();
            }
            for jump in jumps {
                if let JumpKind::Monomial(rows) = &jump.kind {
                    if let Some((ci, vi)) = rows[i] {
                        let src = &rho[ci * d..(ci + 1) * d];
                        let vi = vi * jump.rate;
                        for (jcol, o) in row.iter_mut().enumerate() {
                            if let Some((cj, vj)) = rows[jcol] {
                                *o += vi * src[cj] * vj.conj();
                            }
                        }
                    }
                }
            }
        });
        for jump in jumps {
            if let JumpKind::General(a) = &jump.kind {
                // (A ρ) A† = (A (A ρ)†)†
                a.mul_dense_into(rho, tmp);
                let mut y = vec![C64::new(0.0, 0.0); d * d];
                let tmp_dag: Vec<C64> = (0..d * d).map(|k| tmp[(k % d) * d + k / d].conj()).collect();
                a.mul_dense_into(&tmp_dag, &mut y);
                for i in 0..d {
                    for jcol in 0..d {
                        out[i * d + jcol] += jump.rate * y[jcol * d + i].conj();
                    }
                }
            }
        }
    }
}

/// `dρ/dt` at time `t` (rad/ns units); builds the generator on each call.
pub fn lindblad_rhs(rho: &DensityMatrix, t: f64, config: &SystemConfig) -> Result<DensityMatrix> {
    let space = config.space()?;
    if rho.space() != &space {
        return Err(shape_err(format!("{:?}", space.factor_dims()), format!("{:?}", rho.space().factor_dims())));
    }
    let mut g = Generator::new(config)?;
    let d = space.dim();
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    g.apply(t, rho.matrix().as_slice(), &mut out);
    DensityMatrix::new(space, ComplexMatrix::from_vec(d, d, out)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observers {
    /// Spacing of emitted samples (ns).
    pub output_dt: f64,
    /// Times at which full density matrices are kept (ns).
    pub snapshot_times: Vec<f64>,
    /// Step override (ns); must not exceed the generator bound.
    pub dt: Option<f64>,
}

impl Default for Observers {
    fn default() -> Self {
        Self { output_dt: 0.1, snapshot_times: Vec::new(), dt: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    pub t: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub photons: Vec<f64>,
    pub jz_sim: Vec<f64>,
    pub jz_ideal: Vec<f64>,
    pub trace_err: Vec<f64>,
    pub hermiticity_err: Vec<f64>,
    /// Summed population of the upper level over qubits.
    pub leakage: Vec<f64>,
    pub snapshots: Vec<(f64, DensityMatrix)>,
    pub dt: f64,
    pub steps: usize,
}

impl EvolutionResult {
    fn empty(dt: f64) -> Self {
        Self {
            t: Vec::new(),
            fidelity: Vec::new(),
            photons: Vec::new(),
            jz_sim: Vec::new(),
            jz_ideal: Vec::new(),
            trace_err: Vec::new(),
            hermiticity_err: Vec::new(),
            leakage: Vec::new(),
            snapshots: Vec::new(),
            dt,
            steps: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Index of the sample closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        (0..self.t.len())
            .min_by(|&a, &b| (self.t[a] - t).abs().total_cmp(&(self.t[b] - t).abs()))
            .unwrap_or(0)
    }

    /// Index of the largest fidelity with `t ∈ [lo, hi]`.
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<usize> {
        (0..self.t.len())
            .filter(|&k| self.t[k] >= lo && self.t[k] <= hi)
            .max_by(|&a, &b| self.fidelity[a].total_cmp(&self.fidelity[b]))
    }

    pub fn snapshot(&self, t: f64) -> Option<&DensityMatrix> {
        self.snapshots.iter().find(|(s, _)| (s - t).abs() < 1e-9).map(|(_, r)| r)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_ns,fidelity,photons,jz_sim,jz_ideal,trace_err")?;
        for k in 0..self.t.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                shortest(self.t[k]),
                shortest(self.fidelity[k]),
                shortest(self.photons[k]),
                shortest(self.jz_sim[k]),
                shortest(self.jz_ideal[k]),
                shortest(self.trace_err[k])
            )?;
        }
        Ok(())
    }
}

/// Register index of a bit string inside the qutrit register.
fn qubit_to_qutrit_index(bits: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, k| acc * QUTRIT + ((bits >> (n - 1 - k)) & 1))
}

/// Per-sample diagnostics computed directly on the flat density matrix.
struct Probe {
    nc: usize,
    d: usize,
    photon: Vec<f64>,
    jz: Vec<f64>,
    upper: Vec<f64>,
    qubit_idx: Vec<usize>,
}

impl Probe {
    fn new(n: usize, nc: usize) -> Self {
        let nq = QUTRIT.pow(n as u32);
        let d = nq * nc;
        let mut photon = vec![0.0; d];
        let mut jz = vec![0.0; d];
        let mut upper = vec![0.0; d];
        for i in 0..d {
            photon[i] = (i % nc) as f64;
            let mut reg = i / nc;
            for _ in 0..n {
                match reg % QUTRIT {
                    0 => jz[i] += 1.0,
                    1 => jz[i] -= 1.0,
                    _ => upper[i] += 1.0,
                }
                reg /= QUTRIT;
            }
            jz[i] /= n as f64;
        }
        let qubit_idx = (0..1usize << n).map(|b| qubit_to_qutrit_index(b, n)).collect();
        Self { nc, d, photon, jz, upper, qubit_idx }
    }

    fn diag_sum(&self, rho: &[C64], w: &[f64]) -> f64 {
        (0..self.d).map(|i| w[i] * rho[i * self.d + i].re).sum()
    }

    fn trace(&self, rho: &[C64]) -> C64 {
        (0..self.d).map(|i| rho[i * self.d + i]).sum()
    }

    fn fidelity(&self, rho: &[C64], psi: &[C64]) -> f64 {
        let mut f = C64::new(0.0, 0.0);
        for (a, &ia) in self.qubit_idx.iter().enumerate() {
            if psi[a].norm_sqr() == 0.0 {
                continue;
            }
            for (b, &ib) in self.qubit_idx.iter().enumerate() {
                let mut red = C64::new(0.0, 0.0);
                for k in 0..self.nc {
                    red += rho[(ia * self.nc + k) * self.d + ib * self.nc + k];
                }
                f += psi[a].conj() * red * psi[b];
            }
        }
        f.re
    }

    fn hermiticity(&self, rho: &[C64]) -> f64 {
        let d = self.d;
        let mut m = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                m = m.max((rho[i * d + j] - rho[j * d + i].conj()).norm());
            }
            m = m.max(rho[i * d + i].im.abs());
        }
        m
    }
}

/// Expectation of `J_z = (1/N) Σ σ^z_i` with `σ^z = |0⟩⟨0| − |1⟩⟨1|` on each
/// qutrit; every factor but the last (the resonator) is a qubit.
pub fn collective_jz(rho: &DensityMatrix) -> f64 {
    let space = rho.space();
    let dims = space.factor_dims();
    let n = dims.len().saturating_sub(1).max(1);
    let m = rho.matrix();
    let mut acc = 0.0;
    for i in 0..space.dim() {
        let levels = space.split_index(i);
        let s: f64 = levels[..n]
            .iter()
            .map(|&l| match l {
                0 => 1.0,
                1 => -1.0,
                _ => 0.0,
            })
            .sum();
        acc += s * m[(i, i)].re;
    }
    acc / n as f64
}

/// `⟨Ψ|ρ_q|Ψ⟩` with the resonator (last factor) traced out and the qubit
/// state `Ψ` (length `2^N`) placed on levels {0, 1} of each qubit factor.
pub fn fidelity_observable(rho: &DensityMatrix, psi_ideal: &[C64]) -> Result<f64> {
    let n_factors = rho.space().n_factors();
    if n_factors < 2 {
        return Err(Error::InvalidParameter {
            field: "space",
            reason: "expected qubit factors followed by a resonator".into(),
        });
    }
    let n = n_factors - 1;
    if psi_ideal.len() != 1 << n {
        return Err(shape_err(format!("state of length {}", 1usize << n), psi_ideal.len()));
    }
    let keep: Vec<usize> = (0..n).collect();
    let red = partial_trace(rho, &keep)?;
    let qspace = red.space().clone();
    let idx: Vec<usize> = (0..1usize << n)
        .map(|b| {
            let levels: Vec<usize> = (0..n).map(|k| (b >> (n - 1 - k)) & 1).collect();
            qspace.join_index(&levels)
        })
        .collect();
    let m = red.matrix();
    let mut f = C64::new(0.0, 0.0);
    for (a, &ia) in idx.iter().enumerate() {
        for (b, &ib) in idx.iter().enumerate() {
            f += psi_ideal[a].conj() * m[(ia, ib)] * psi_ideal[b];
        }
    }
    Ok(f.re)
}

/// Stark–Lamb shift magnitude `g_s²/Δ₊` (MHz) for qubit 0, `Δ₊ = ω_r − ω̃₊`.
pub fn dispersive_shift_estimate(config: &SystemConfig) -> Result<f64> {
    let detuning = config.omega_r - *config.omega_plus.get(0);
    if detuning == 0.0 {
        return Err(Error::Singularity("qubit-resonator detuning Δ₊ = 0".into()));
    }
    let g = config.schedules.get(0).schedule.g_s;
    Ok(g * g / (detuning.abs() * 1e3))
}

fn output_times(t_end: f64, output_dt: f64, extra: &[f64]) -> Vec<f64> {
    let n = (t_end / output_dt + 1e-9).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * output_dt).collect();
    ts.push(t_end);
    ts.extend(extra.iter().copied().filter(|&t| t >= 0.0 && t <= t_end));
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    ts
}

/// Fixed-step RK4 from all qutrits in level 0 and resonator vacuum.
pub fn integrate(config: &SystemConfig, t_end: f64, observers: &Observers) -> Result<EvolutionResult> {
    if !(t_end >= 0.0) {
        return Err(Error::Config(format!("t_end = {t_end} must be nonnegative")));
    }
    if !(observers.output_dt > 0.0) {
        return Err(Error::Config(format!("output_dt = {} must be positive", observers.output_dt)));
    }
    let ideal = IdealEvolution::from_ground(&config.ideal_spec()?)?;
    let mut gen = Generator::new(config)?;
    let bound = gen.max_dt().min(observers.output_dt);
    let dt_max = match observers.dt {
        Some(dt) if dt > 0.0 && dt <= bound * (1.0 + 1e-12) => dt,
        Some(dt) => {
            return Err(Error::Config(format!("dt = {dt} ns outside (0, {bound}] ns")));
        }
        None => bound,
    };
    let n = config.n_qubits;
    let nc = config.photon_cutoff;
    let probe = Probe::new(n, nc);
    let d = probe.d;
    let space = config.space()?;

    let mut rho = vec![C64::new(0.0, 0.0); d * d];
    rho[0] = C64::new(1.0, 0.0);
    let mut k1 = vec![C64::new(0.0, 0.0); d * d];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();

    let times = output_times(t_end, observers.output_dt, &observers.snapshot_times);
    let mut result = EvolutionResult::empty(dt_max);
    let jz_ideal = |psi: &[C64]| -> f64 {
        psi.iter()
            .enumerate()
            .map(|(b, c)| {
                let ones = (b as u32).count_ones() as f64;
                c.norm_sqr() * (n as f64 - 2.0 * ones) / n as f64
            })
            .sum()
    };

    let mut t = 0.0;
    for (k, &t_out) in times.iter().enumerate() {
        if k > 0 {
            let span = t_out - t;
            let steps = ((span / dt_max) - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                gen.apply(t, &rho, &mut k1);
                axpy(&mut stage, &rho, 0.5 * h, &k1);
                gen.apply(t + 0.5 * h, &stage, &mut k2);
                axpy(&mut stage, &rho, 0.5 * h, &k2);
                gen.apply(t + 0.5 * h, &stage, &mut k3);
                axpy(&mut stage, &rho, h, &k3);
                gen.apply(t + h, &stage, &mut k4);
                rho.par_iter_mut().enumerate().for_each(|(i, r)| {
                    *r += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
                });
                t += h;
                result.steps += 1;
            }
            t = t_out;
        }
        let psi = ideal.state(t_out);
        let trace_err = (probe.trace(&rho) - 1.0).norm();
        result.t.push(t_out);
        result.fidelity.push(probe.fidelity(&rho, &psi));
        result.photons.push(probe.diag_sum(&rho, &probe.photon));
        result.jz_sim.push(probe.diag_sum(&rho, &probe.jz));
        result.jz_ideal.push(jz_ideal(&psi));
        result.trace_err.push(trace_err);
        result.hermiticity_err.push(probe.hermiticity(&rho));
        result.leakage.push(probe.diag_sum(&rho, &probe.upper));
        if observers.snapshot_times.iter().any(|&s| (s - t_out).abs() < 1e-9) {
            let m = ComplexMatrix::from_vec(d, d, rho.clone())?;
            result.snapshots.push((t_out, DensityMatrix::new(space.clone(), m)?));
        }
        if !(trace_err <= TRACE_GATE) {
            return Err(Error::IntegrationAccuracy {
                t_ns: t_out,
                trace_err,
                partial: Box::new(result),
            });
        }
    }
    Ok(result)
}

fn axpy(out: &mut [C64], x: &[C64], a: f64, y: &[C64]) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = x[i] + y[i] * a);
}
