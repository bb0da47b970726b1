use tcq_core::pulse::{
    g_minus_components, induced_couplings, invert_coupling, power_spectrum, synthesize,
    tabulate_coupling_curve, validity_check, CouplingSchedule, COMPONENT_PRUNE_MHZ,
};
use tcq_core::tcq::TcqParams;

#[test]
fn calibration_pins_maximum_at_zero_flux() {
    let curve = tabulate_coupling_curve(&TcqParams::reference(), 0.4, 129, 80.0).unwrap();
    assert!((curve.samples[0].g_plus - 80.0).abs() < 1e-12);
    assert!(curve.samples.last().unwrap().g_plus < 0.01 * 80.0);
    let doubled = tabulate_coupling_curve(&TcqParams::reference(), 0.4, 129, 160.0).unwrap();
    for (a, b) in curve.samples.iter().zip(&doubled.samples) {
        assert!((2.0 * a.g_plus - b.g_plus).abs() < 1e-9);
    }
}

#[test]
fn schedule_spanning_full_range() {
    let s = CouplingSchedule::spanning(0.0, 80.0, 50.0, 10.0, 4.5);
    assert_eq!((s.g_s, s.g_d), (40.0, 20.0));
    assert!((s.omega_g - 14.45).abs() < 1e-12 && (s.omega_g_prime - 5.45).abs() < 1e-12);
    assert!((s.xi() - 2.0).abs() < 1e-12);
}

#[test]
fn reference_trajectory_stays_on_segment() {
    let syn = synthesize(&TcqParams::reference(), &CouplingSchedule::reference(), 0.4, 129, 80.0, 5).unwrap();
    assert!(syn.trajectory.phi_plus.iter().all(|&p| (0.0..=0.4).contains(&p)));
    let lo = syn.trajectory.phi_plus.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = syn.trajectory.phi_plus.iter().copied().fold(0.0, f64::max);
    assert!(lo < 0.01 && hi > 0.39, "range [{lo}, {hi}]");
}

#[test]
fn static_upper_coupling_near_sixty_mhz() {
    let syn = synthesize(&TcqParams::reference(), &CouplingSchedule::reference(), 0.4, 129, 80.0, 5).unwrap();
    let g = syn.couplings.g_minus_static;
    assert!((g - 60.0).abs() <= 0.2 * 60.0, "static g- = {g:.2} MHz");
}

#[test]
fn constant_trajectory_gives_constant_couplings() {
    let curve = tabulate_coupling_curve(&TcqParams::reference(), 0.4, 64, 80.0).unwrap();
    let mut s = CouplingSchedule::reference();
    s.g_d = 0.0;
    let traj = invert_coupling(&curve, &s, 10.0, s.default_dt()).unwrap();
    let c = induced_couplings(&curve, &traj).unwrap();
    let spread = |v: &[f64]| {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    assert!(spread(&traj.phi_plus) == 0.0);
    assert!(spread(&c.g_minus) == 0.0);
}

#[test]
fn zero_tone_amplitude_leaves_only_dc() {
    let mut s = CouplingSchedule::reference();
    s.g_d = 0.0;
    let syn = synthesize(&TcqParams::reference(), &s, 0.4, 64, 80.0, 5).unwrap();
    let ps = power_spectrum(&syn.couplings.g_plus, syn.trajectory.dt).unwrap();
    assert!(ps.power[1..].iter().all(|&p| p < 1e-20 * ps.power[0]));
}

#[test]
fn rescaled_components_are_pruned_and_hit_target() {
    let syn = synthesize(&TcqParams::reference(), &CouplingSchedule::reference(), 0.4, 129, 80.0, 5).unwrap();
    let comps = g_minus_components(&syn.couplings, syn.trajectory.dt, Some(60.0));
    let dc = comps.iter().find(|c| c.freq == 0.0).unwrap();
    assert!((dc.amp.re - 60.0).abs() < 1e-9);
    assert!(comps.iter().all(|c| c.amp.norm() >= COMPONENT_PRUNE_MHZ));
    for c in &comps {
        let partner = comps.iter().find(|d| (d.freq + c.freq).abs() < 1e-9).unwrap();
        assert!((partner.amp - c.amp.conj()).norm() < 1e-9);
    }
}

#[test]
fn reference_validity_ratio() {
    let r = validity_check(&CouplingSchedule::reference(), 5.5).unwrap();
    assert!((r.detuning_ratio - 110.0).abs() < 1e-9);
    assert!(r.pass);
}
