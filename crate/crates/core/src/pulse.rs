//! Flux-pulse synthesis for a two-tone modulated coupling.
//!
//! The qubit-resonator coupling of a TCQ is proportional to the charge matrix
//! element of its lower mode, which falls monotonically to zero along the
//! constant-`Φ₋` segment. Inverting that curve turns a target
//!
//! ```text
//! g₊(t) = g_s + g_d [cos(ω_g t + φ) + cos(ω'_g t − φ)]
//! ```
//!
//! into a flux trajectory `Φ₊(t)`. The upper mode's coupling `g₋(t)` follows
//! from the same trajectory and is only characterized, not controlled.

use std::io::Write;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::shortest;
use crate::opcore::TWO_PI;
use crate::tcq::{scan_points, TcqParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSchedule {
    /// Static coupling (MHz).
    pub g_s: f64,
    /// Amplitude of each tone (MHz).
    pub g_d: f64,
    /// Blue-sideband tone (GHz).
    pub omega_g: f64,
    /// Red-sideband tone (GHz).
    pub omega_g_prime: f64,
    /// Sideband detuning (MHz).
    pub delta: f64,
    /// Static coupling of the upper mode (MHz).
    pub g_minus_s: f64,
    /// Tone phase offset (rad): `φ = 0` gives a σ^y gate axis, `φ = π/2` gives σ^x.
    #[serde(default)]
    pub phase: f64,
}

impl CouplingSchedule {
    /// Tones placed `δ` below the two sidebands `ω_r ± ω̃₊`.
    pub fn detuned_sidebands(
        g_s: f64,
        g_d: f64,
        delta_mhz: f64,
        omega_r: f64,
        omega_plus: f64,
        g_minus_s: f64,
    ) -> Self {
        let d = delta_mhz * 1e-3;
        Self {
            g_s,
            g_d,
            omega_g: omega_r + omega_plus - d,
            omega_g_prime: omega_r - omega_plus - d,
            delta: delta_mhz,
            g_minus_s,
            phase: 0.0,
        }
    }

    /// `g_s = 40`, `g_d = 20`, `δ = 50` MHz with `ω_r = 10`, `ω̃₊ = 4.5` GHz.
    pub fn reference() -> Self {
        Self::detuned_sidebands(40.0, 20.0, 50.0, 10.0, 4.5, 60.0)
    }

    /// Schedule spanning `[g_min, g_max]`: `g_s = (g^M + g^m)/2`, `g_d = (g^M − g^m)/4`.
    pub fn spanning(g_min: f64, g_max: f64, delta_mhz: f64, omega_r: f64, omega_plus: f64) -> Self {
        Self::detuned_sidebands(
            (g_max + g_min) / 2.0,
            (g_max - g_min) / 4.0,
            delta_mhz,
            omega_r,
            omega_plus,
            0.0,
        )
    }

    /// Target `g₊(t)` in MHz.
    pub fn target(&self, t_ns: f64) -> f64 {
        self.g_s
            + self.g_d
                * ((TWO_PI * self.omega_g * t_ns + self.phase).cos()
                    + (TWO_PI * self.omega_g_prime * t_ns - self.phase).cos())
    }

    /// Complex exponential components `(ν GHz, c MHz)` with `g₊(t) = Σ c e^{2πiνt}`.
    pub fn components(&self) -> Vec<FourierComponent> {
        let mut out = vec![FourierComponent { freq: 0.0, amp: C64::new(self.g_s, 0.0) }];
        if self.g_d != 0.0 {
            for (f, p) in [(self.omega_g, self.phase), (self.omega_g_prime, -self.phase)] {
                let c = C64::from_polar(self.g_d / 2.0, p);
                out.push(FourierComponent { freq: f, amp: c });
                out.push(FourierComponent { freq: -f, amp: c.conj() });
            }
        }
        out
    }

    pub fn max_tone(&self) -> f64 {
        self.omega_g.abs().max(self.omega_g_prime.abs())
    }

    /// Trajectory step resolving the fastest tone eight times per period.
    pub fn default_dt(&self) -> f64 {
        1.0 / (8.0 * self.max_tone())
    }

    /// `ξ = g_d² / 4δ` (MHz).
    pub fn xi(&self) -> f64 {
        self.g_d * self.g_d / (4.0 * self.delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierComponent {
    /// GHz, signed.
    pub freq: f64,
    /// MHz, complex.
    pub amp: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub phi_plus: f64,
    pub g_plus: f64,
    pub g_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCurve {
    pub phi_minus: f64,
    pub samples: Vec<CurveSample>,
    /// MHz per unit charge matrix element.
    pub beta_scale: f64,
}

/// End of the constant-`Φ₋` segment used for the coupling curve.
pub const SEGMENT_END: f64 = 0.4;

/// Samples `Φ₊ ∈ [0, 0.4]` at fixed `Φ₋` and scales matrix elements so that
/// the largest `g₊` equals `g_max_target`. `g₋` uses the upper
/// single-excitation mode.
pub fn tabulate_coupling_curve(
    params: &TcqParams,
    phi_minus: f64,
    n_samples: usize,
    g_max_target: f64,
) -> Result<CouplingCurve> {
    if n_samples < 64 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: format!("{n_samples} < 64"),
        });
    }
    if !(g_max_target > 0.0) {
        return Err(Error::InvalidParameter {
            field: "g_max_target",
            reason: format!("{g_max_target} must be positive"),
        });
    }
    let phis: Vec<f64> = (0..n_samples)
        .map(|i| SEGMENT_END * i as f64 / (n_samples - 1) as f64)
        .collect();
    let scan = scan_points(params, &phis, &[phi_minus])?;
    let n_max = scan.points.iter().map(|(_, s)| s.n01).fold(0.0, f64::max);
    if n_max == 0.0 {
        return Err(Error::Singularity("charge matrix element vanishes on the segment".into()));
    }
    let beta = g_max_target / n_max;
    let samples = scan
        .points
        .iter()
        .map(|(f, s)| CurveSample {
            phi_plus: f.phi_plus,
            g_plus: beta * s.n01,
            g_minus: beta * s.n_upper,
        })
        .collect();
    let curve = CouplingCurve { phi_minus, samples, beta_scale: beta };
    curve.check_monotone()?;
    Ok(curve)
}

impl CouplingCurve {
    pub fn g_max(&self) -> f64 {
        self.samples.iter().map(|s| s.g_plus).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn g_min(&self) -> f64 {
        self.samples.iter().map(|s| s.g_plus).fold(f64::INFINITY, f64::min)
    }

    pub fn phi_range(&self) -> (f64, f64) {
        (self.samples[0].phi_plus, self.samples[self.samples.len() - 1].phi_plus)
    }

    /// `g₊` must be strictly monotone in `Φ₊` for the inversion to exist.
    pub fn check_monotone(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: "fewer than two samples".into(),
            });
        }
        let sign = (self.samples[1].g_plus - self.samples[0].g_plus).signum();
        for w in self.samples.windows(2) {
            let d = w[1].g_plus - w[0].g_plus;
            if sign == 0.0 || d.signum() != sign || w[1].phi_plus <= w[0].phi_plus {
                return Err(Error::NonMonotoneCurve {
                    phi_lo: w[0].phi_plus,
                    phi_hi: w[1].phi_plus,
                });
            }
        }
        Ok(())
    }

    /// Rescales so that `max g₊ = g_max_target`.
    pub fn recalibrate(&self, g_max_target: f64) -> Self {
        let k = g_max_target / self.g_max();
        Self {
            phi_minus: self.phi_minus,
            samples: self
                .samples
                .iter()
                .map(|s| CurveSample {
                    phi_plus: s.phi_plus,
                    g_plus: s.g_plus * k,
                    g_minus: s.g_minus * k,
                })
                .collect(),
            beta_scale: self.beta_scale * k,
        }
    }

    fn phis(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phi_plus).collect()
    }

    pub fn g_plus_interpolant(&self) -> Pchip {
        Pchip::new(self.phis(), self.samples.iter().map(|s| s.g_plus).collect())
            .expect("curve has at least two increasing abscissae")
    }

    pub fn g_minus_interpolant(&self) -> Pchip {
        Pchip::new(self.phis(), self.samples.iter().map(|s| s.g_minus).collect())
            .expect("curve has at least two increasing abscissae")
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: format!("{} abscissae, {} ordinates", n, y.len()),
            });
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: "abscissae not strictly increasing".into(),
            });
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = d[0];
            m[1] = d[0];
        } else {
            for k in 1..n - 1 {
                if d[k - 1] * d[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
                }
            }
            m[0] = end_slope(h[0], h[1], d[0], d[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Ok(Self { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Evaluates at `t`, clamped to the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        let t = t.clamp(lo, hi);
        let k = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.m[k] + h01 * self.y[k + 1] + h11 * h * self.m[k + 1]
    }
}

/// Three-point one-sided end slope, limited to keep monotonicity.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxTrajectory {
    pub t: Vec<f64>,
    pub phi_plus: Vec<f64>,
    pub phi_minus: f64,
    pub dt: f64,
}

/// Solves `g₊(Φ₊(t)) = target(t)` at `t = 0, dt, …` up to `t_span`
/// (inclusive when `t_span` is a multiple of `dt`).
pub fn invert_coupling(
    curve: &CouplingCurve,
    schedule: &CouplingSchedule,
    t_span: f64,
    dt: f64,
) -> Result<FluxTrajectory> {
    if !(dt > 0.0) || !(t_span >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("dt = {dt}, t_span = {t_span}"),
        });
    }
    if schedule.max_tone() > 0.0 && dt > schedule.default_dt() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!(
                "{dt} ns samples the {} GHz tone fewer than 8 times per period",
                schedule.max_tone()
            ),
        });
    }
    curve.check_monotone()?;
    let interp = curve.g_plus_interpolant();
    let (g_lo, g_hi) = (curve.g_min(), curve.g_max());
    let tol = 1e-6 * g_hi.abs().max(g_lo.abs());
    let (phi_a, phi_b) = curve.phi_range();
    let decreasing = curve.samples[1].g_plus < curve.samples[0].g_plus;

    let n = (t_span / dt * (1.0 + 1e-12)).floor() as usize + 1;
    let mut t = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let ti = i as f64 * dt;
        let mut target = schedule.target(ti);
        if target < g_lo - tol || target > g_hi + tol {
            return Err(Error::TargetOutOfRange {
                t_ns: ti,
                target_mhz: target,
                min_mhz: g_lo,
                max_mhz: g_hi,
            });
        }
        target = target.clamp(g_lo, g_hi);
        // bisection on the monotone interpolant
        let (mut a, mut b) = (phi_a, phi_b);
        let mut mid = 0.5 * (a + b);
        for _ in 0..200 {
            mid = 0.5 * (a + b);
            let g = interp.eval(mid);
            if (g - target).abs() < 1e-3 * tol || b - a < 1e-15 {
                break;
            }
            if (g > target) == decreasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        t.push(ti);
        phi.push(mid);
    }
    Ok(FluxTrajectory { t, phi_plus: phi, phi_minus: curve.phi_minus, dt })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedCouplings {
    pub g_plus: Vec<f64>,
    pub g_minus: Vec<f64>,
    /// Time averages (MHz).
    pub g_plus_static: f64,
    pub g_minus_static: f64,
}

pub fn induced_couplings(curve: &CouplingCurve, traj: &FluxTrajectory) -> Result<InducedCouplings> {
    let (lo, hi) = curve.phi_range();
    if let Some(&bad) = traj.phi_plus.iter().find(|&&p| p < lo - 1e-12 || p > hi + 1e-12) {
        return Err(Error::InvalidParameter {
            field: "phi_plus",
            reason: format!("{bad} outside curve domain [{lo}, {hi}]"),
        });
    }
    let gp = curve.g_plus_interpolant();
    let gm = curve.g_minus_interpolant();
    let g_plus: Vec<f64> = traj.phi_plus.iter().map(|&p| gp.eval(p)).collect();
    let g_minus: Vec<f64> = traj.phi_plus.iter().map(|&p| gm.eval(p)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    Ok(InducedCouplings {
        g_plus_static: mean(&g_plus),
        g_minus_static: mean(&g_minus),
        g_plus,
        g_minus,
    })
}

/// Number of samples covering `periods` full periods of `1/δ` at step `dt`,
/// rounded to the nearest integer.
pub fn periodic_window_len(dt: f64, delta_mhz: f64, periods: usize) -> usize {
    (periods as f64 * 1e3 / delta_mhz / dt).round() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    /// GHz, from 0 to Nyquist.
    pub freqs: Vec<f64>,
    /// One-sided power; sums to the mean square of the signal.
    pub power: Vec<f64>,
    /// GHz per bin.
    pub resolution: f64,
}

pub const MIN_SPECTRUM_LEN: usize = 1 << 12;

/// Rectangular-window one-sided power spectrum of a uniformly sampled signal.
pub fn power_spectrum(signal: &[f64], dt: f64) -> Result<PowerSpectrum> {
    let n = signal.len();
    if n < MIN_SPECTRUM_LEN {
        return Err(Error::SignalTooShort { len: n, min: MIN_SPECTRUM_LEN });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter { field: "dt", reason: format!("{dt}") });
    }
    let spec = fft(signal);
    let nf = n as f64;
    let half = n / 2;
    let mut power = Vec::with_capacity(half + 1);
    for (k, x) in spec.iter().enumerate().take(half + 1) {
        let p = x.norm_sqr() / (nf * nf);
        let both_sides = k != 0 && !(n % 2 == 0 && k == half);
        power.push(if both_sides { 2.0 * p } else { p });
    }
    let resolution = 1.0 / (nf * dt);
    Ok(PowerSpectrum {
        freqs: (0..=half).map(|k| k as f64 * resolution).collect(),
        power,
        resolution,
    })
}

/// Checks that sample times are uniform before computing the spectrum.
pub fn power_spectrum_sampled(t: &[f64], signal: &[f64]) -> Result<PowerSpectrum> {
    let dt = uniform_step(t)?;
    if t.len() != signal.len() {
        return Err(crate::error::shape_err(t.len(), signal.len()));
    }
    power_spectrum(signal, dt)
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::SignalTooShort { len: t.len(), min: 2 });
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    for w in t.windows(2) {
        let step = w[1] - w[0];
        if (step - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(Error::NonUniformSampling { step, expected: dt });
        }
    }
    Ok(dt)
}

fn fft(signal: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = signal.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

impl PowerSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn max_power(&self) -> f64 {
        self.power.iter().copied().fold(0.0, f64::max)
    }

    pub fn bin_of(&self, freq: f64) -> usize {
        ((freq / self.resolution).round() as usize).min(self.power.len() - 1)
    }

    /// Local maxima above `threshold_db` relative to the strongest non-DC bin.
    pub fn non_dc_peaks(&self, threshold_db: f64) -> Vec<usize> {
        let reference = self.power[1..].iter().copied().fold(0.0, f64::max);
        if reference == 0.0 {
            return Vec::new();
        }
        let floor = reference * 10f64.powf(threshold_db / 10.0);
        let p = &self.power;
        (1..p.len())
            .filter(|&k| {
                let left = p[k - 1];
                let right = if k + 1 < p.len() { p[k + 1] } else { 0.0 };
                p[k] > floor && p[k] >= left && p[k] >= right && (k > 1 || p[k] > left)
            })
            .collect()
    }

    /// Power summed over bins with `|f − center| ≤ half_width`.
    pub fn band_power(&self, center: f64, half_width: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| (*f - center).abs() <= half_width + 1e-12)
            .map(|(_, p)| p)
            .sum()
    }

    /// `10 log10(p / reference)`, clamped at −400 dB for empty bins.
    pub fn db(p: f64, reference: f64) -> f64 {
        if p <= 0.0 || reference <= 0.0 {
            -400.0
        } else {
            (10.0 * (p / reference).log10()).max(-400.0)
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let reference = self.max_power();
        writeln!(w, "freq_ghz,power_db")?;
        for (f, p) in self.freqs.iter().zip(&self.power) {
            writeln!(w, "{},{}", shortest(*f), shortest(Self::db(*p, reference)))?;
        }
        Ok(())
    }
}

/// Two-sided complex Fourier components `c_k` with `x(t) = Σ c_k e^{2πi f_k t}`
/// over the sampled window; components with `|c_k| < min_amp` are dropped.
pub fn fourier_components(signal: &[f64], dt: f64, min_amp: f64) -> Vec<FourierComponent> {
    let n = signal.len();
    let spec = fft(signal);
    let res = 1.0 / (n as f64 * dt);
    let mut out: Vec<FourierComponent> = spec
        .iter()
        .enumerate()
        .filter_map(|(k, x)| {
            let amp = x / n as f64;
            if amp.norm() < min_amp {
                return None;
            }
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            Some(FourierComponent { freq: kk * res, amp })
        })
        .collect();
    out.sort_by(|a, b| a.freq.total_cmp(&b.freq));
    out
}

/// Amplitude threshold below which Fourier components of `g₋(t)` are dropped (MHz).
pub const COMPONENT_PRUNE_MHZ: f64 = 0.5;

/// Fourier components of `g₋(t)` for the dynamics. With `static_target`
/// the whole series is rescaled so its DC term equals that value (MHz).
pub fn g_minus_components(
    couplings: &InducedCouplings,
    dt: f64,
    static_target: Option<f64>,
) -> Vec<FourierComponent> {
    let mut comps = fourier_components(&couplings.g_minus, dt, 0.0);
    if let Some(target) = static_target {
        let dc = comps.iter().find(|c| c.freq == 0.0).map_or(0.0, |c| c.amp.re);
        if dc != 0.0 {
            let s = target / dc;
            comps.iter_mut().for_each(|c| c.amp *= s);
        }
    }
    comps.retain(|c| c.amp.norm() >= COMPONENT_PRUNE_MHZ);
    comps
}

/// Curve, trajectory and induced couplings for one schedule.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub curve: CouplingCurve,
    pub trajectory: FluxTrajectory,
    pub couplings: InducedCouplings,
}

/// Tabulate the curve at `phi_minus`, invert `schedule` over `periods`
/// detuning periods at its default step and evaluate both couplings.
pub fn synthesize(
    params: &TcqParams,
    schedule: &CouplingSchedule,
    phi_minus: f64,
    n_samples: usize,
    g_max_target: f64,
    periods: usize,
) -> Result<Synthesis> {
    let curve = tabulate_coupling_curve(params, phi_minus, n_samples, g_max_target)?;
    let dt = schedule.default_dt();
    let n = periodic_window_len(dt, schedule.delta, periods);
    let trajectory = invert_coupling(&curve, schedule, (n - 1) as f64 * dt, dt)?;
    let couplings = induced_couplings(&curve, &trajectory)?;
    Ok(Synthesis { curve, trajectory, couplings })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// `g_s² / Δ₊` (MHz).
    pub stark_shift_mhz: f64,
    /// `g_d² / 4δ` (MHz).
    pub xi_mhz: f64,
    /// `Δ₊ / δ`.
    pub detuning_ratio: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Threshold on `Δ₊/δ` below which the sideband terms no longer dominate.
pub const DETUNING_RATIO_MIN: f64 = 16.0;

pub fn validity_check(schedule: &CouplingSchedule, delta_plus_ghz: f64) -> Result<ValidityReport> {
    if schedule.delta == 0.0 {
        return Err(Error::Singularity("sideband detuning δ = 0".into()));
    }
    if delta_plus_ghz == 0.0 {
        return Err(Error::Singularity("qubit-resonator detuning Δ₊ = 0".into()));
    }
    let dp_mhz = delta_plus_ghz * 1e3;
    let ratio = dp_mhz / schedule.delta;
    let mut warnings = Vec::new();
    let pass = ratio.abs() >= DETUNING_RATIO_MIN;
    if !pass {
        warnings.push(format!(
            "Δ₊/δ = {ratio:.3} below {DETUNING_RATIO_MIN}: Jaynes-Cummings terms are not negligible"
        ));
    }
    Ok(ValidityReport {
        stark_shift_mhz: schedule.g_s * schedule.g_s / dp_mhz,
        xi_mhz: schedule.xi(),
        detuning_ratio: ratio,
        pass,
        warnings,
    })
}

/// CSV `t_ns,phi_plus,g_plus_mhz,g_minus_mhz`.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &FluxTrajectory,
    couplings: &InducedCouplings,
) -> std::io::Result<()> {
    writeln!(w, "t_ns,phi_plus,g_plus_mhz,g_minus_mhz")?;
    for i in 0..traj.t.len() {
        writeln!(
            w,
            "{},{},{},{}",
            shortest(traj.t[i]),
            shortest(traj.phi_plus[i]),
            shortest(couplings.g_plus[i]),
            shortest(couplings.g_minus[i])
        )?;
    }
    Ok(())
}
