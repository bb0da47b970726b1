use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tcq_core::dynamics::{integrate, EvolutionResult, Generator, Observers};
use tcq_core::format::shortest;
use tcq_core::gates::{compile_stabilizer, verify_sequence, MAX_VERIFY_QUBITS};
use tcq_core::opcore::DensityMatrix;
use tcq_core::pulse::{
    g_minus_components, power_spectrum, synthesize, validity_check, write_trajectory_csv,
    CouplingSchedule, PowerSpectrum,
};
use tcq_core::tcq::scan_flux_plane;

use crate::config::{CompileConfig, EvolveConfig, ScanConfig, SynthConfig};
use crate::error::{invalid, CliError};

type Res<T> = Result<T, CliError>;

fn create(out: &Path, name: &str) -> Res<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Res<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn scan_spectrum(cfg: &ScanConfig, out: &Path) -> Res<Vec<PathBuf>> {
    cfg.params.validate().map_err(invalid)?;
    for r in [cfg.grid.phi_plus, cfg.grid.phi_minus] {
        for v in [r.start, r.end] {
            if !(0.0..=0.5).contains(&v) {
                return Err(CliError::Config(format!("grid bound {v} outside [0, 0.5]")));
            }
        }
        if r.n < 16 {
            return Err(CliError::Config(format!("grid resolution {} below 16", r.n)));
        }
    }
    let scan = scan_flux_plane(&cfg.params, &cfg.grid)?;
    fs::create_dir_all(out)?;
    let mut w = create(out, "spectrum_grid.csv")?;
    scan.write_csv(&mut w)?;
    w.flush()?;
    Ok(vec![out.join("spectrum_grid.csv")])
}

fn write_spectrum(out: &Path, name: &str, s: &PowerSpectrum) -> Res<()> {
    let mut w = create(out, name)?;
    s.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn synthesize_cmd(cfg: &SynthConfig, out: &Path) -> Res<Vec<PathBuf>> {
    cfg.params.validate().map_err(invalid)?;
    if !(0.0..=0.5).contains(&cfg.phi_minus) {
        return Err(CliError::Config(format!("phi_minus {} outside [0, 0.5]", cfg.phi_minus)));
    }
    if cfg.curve_samples < 64 {
        return Err(CliError::Config(format!("curve_samples {} below 64", cfg.curve_samples)));
    }
    if !(cfg.delta_mhz > 0.0) || cfg.periods == 0 {
        return Err(CliError::Config("delta_mhz and periods must be positive".into()));
    }
    let mut schedule = CouplingSchedule::detuned_sidebands(
        cfg.g_s_mhz,
        cfg.g_d_mhz,
        cfg.delta_mhz,
        cfg.omega_r,
        cfg.omega_plus,
        0.0,
    );
    schedule.phase = cfg.phase;
    let report = validity_check(&schedule, cfg.omega_r - cfg.omega_plus).map_err(invalid)?;
    let syn = synthesize(&cfg.params, &schedule, cfg.phi_minus, cfg.curve_samples, cfg.g_max_mhz, cfg.periods)
        .map_err(CliError::Synthesis)?;
    let dt = syn.trajectory.dt;
    let g_plus = power_spectrum(&syn.couplings.g_plus, dt).map_err(CliError::Synthesis)?;
    let g_minus = power_spectrum(&syn.couplings.g_minus, dt).map_err(CliError::Synthesis)?;
    let phi = power_spectrum(&syn.trajectory.phi_plus, dt).map_err(CliError::Synthesis)?;

    fs::create_dir_all(out)?;
    let mut w = create(out, "curve.csv")?;
    writeln!(w, "phi_plus,g_plus_mhz,g_minus_mhz")?;
    for s in &syn.curve.samples {
        writeln!(w, "{},{},{}", shortest(s.phi_plus), shortest(s.g_plus), shortest(s.g_minus))?;
    }
    w.flush()?;
    let mut w = create(out, "trajectory.csv")?;
    write_trajectory_csv(&mut w, &syn.trajectory, &syn.couplings)?;
    w.flush()?;
    write_spectrum(out, "spectrum_g_plus.csv", &g_plus)?;
    write_spectrum(out, "spectrum_g_minus.csv", &g_minus)?;
    write_spectrum(out, "spectrum_phi_plus.csv", &phi)?;
    write_json(out, "g_minus_components.json", &g_minus_components(&syn.couplings, dt, None))?;
    write_json(out, "validity.json", &report)?;
    Ok(["curve.csv", "trajectory.csv", "spectrum_g_plus.csv", "spectrum_g_minus.csv", "spectrum_phi_plus.csv", "g_minus_components.json", "validity.json"]
        .iter()
        .map(|n| out.join(n))
        .collect())
}

fn write_evolution(out: &Path, result: &EvolutionResult, error: Option<&str>) -> Res<()> {
    let mut w = create(out, "evolution.csv")?;
    result.write_csv(&mut w)?;
    if let Some(msg) = error {
        writeln!(w, "# error: {}", msg.replace('\n', " "))?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshot(out: &Path, t: f64, rho: &DensityMatrix) -> Res<PathBuf> {
    let name = format!("snapshot_t{}.csv", shortest(t));
    let mut w = create(out, &name)?;
    writeln!(w, "row,col,re,im")?;
    let m = rho.matrix();
    for i in 0..m.rows() {
        for (j, z) in m.row(i).iter().enumerate() {
            writeln!(w, "{i},{j},{},{}", shortest(z.re), shortest(z.im))?;
        }
    }
    w.flush()?;
    Ok(out.join(name))
}

pub fn evolve(cfg: &EvolveConfig, out: &Path) -> Res<Vec<PathBuf>> {
    let sys = &cfg.system;
    sys.validate().map_err(invalid)?;
    sys.ideal_spec().map_err(invalid)?;
    Generator::new(sys).map_err(invalid)?;
    if !(cfg.t_end_ns >= 0.0) || !(cfg.output_dt_ns > 0.0) {
        return Err(CliError::Config("t_end_ns must be nonnegative and output_dt_ns positive".into()));
    }
    let observers = Observers {
        output_dt: cfg.output_dt_ns,
        snapshot_times: cfg.snapshot_times_ns.clone(),
        dt: cfg.dt_ns,
    };
    match integrate(sys, cfg.t_end_ns, &observers) {
        Ok(result) => {
            fs::create_dir_all(out)?;
            write_evolution(out, &result, None)?;
            let mut files = vec![out.join("evolution.csv")];
            for (t, rho) in &result.snapshots {
                files.push(write_snapshot(out, *t, rho)?);
            }
            Ok(files)
        }
        Err(e @ tcq_core::Error::IntegrationAccuracy { .. }) => {
            let msg = e.to_string();
            if let tcq_core::Error::IntegrationAccuracy { partial, .. } = e {
                fs::create_dir_all(out)?;
                write_evolution(out, &partial, Some(&msg))?;
            }
            Err(CliError::Integration(msg))
        }
        Err(e @ tcq_core::Error::Config(_)) => Err(invalid(e)),
        Err(e) => Err(CliError::Integration(e.to_string())),
    }
}

#[derive(Serialize)]
struct SkippedVerification {
    n_qubits: usize,
    skipped: bool,
    note: String,
}

pub fn compile(cfg: &CompileConfig, out: &Path) -> Res<Vec<PathBuf>> {
    let compiled = compile_stabilizer(cfg.axis, cfg.n_qubits, cfg.theta).map_err(invalid)?;
    fs::create_dir_all(out)?;
    write_json(out, "sequence.json", &compiled)?;
    if cfg.n_qubits > MAX_VERIFY_QUBITS {
        let note = format!(
            "size limit: dense verification supports at most {MAX_VERIFY_QUBITS} qubits"
        );
        write_json(out, "verification.json", &SkippedVerification { n_qubits: cfg.n_qubits, skipped: true, note })?;
    } else {
        let report = verify_sequence(&compiled.sequence, &compiled.predicted, compiled.theta, compiled.case.label())?;
        write_json(out, "verification.json", &report)?;
    }
    Ok(vec![out.join("sequence.json"), out.join("verification.json")])
}
