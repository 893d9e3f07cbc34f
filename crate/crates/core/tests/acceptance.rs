//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a non-zero status if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use thermocav::beam::{run_experiment, BeamConfig};
use thermocav::casimir::{pressure_spectrum, thermal_pressure_asymptotic, thermal_pressure_integrated};
use thermocav::greens::{cavity_traces, free_space_trace_cgs, scattering_e_traces, scattering_h_traces};
use thermocav::hyperfine::{
    breit_rabi, cavity_rate, diagonalize, free_rate, AtomConstants, StateLabel,
};
use thermocav::special::hurwitz_zeta3;
use thermocav::spectra::{planck_density, spectral_energy_density, thermal_energy_density, universal_te_density};
use thermocav::units::{thermal_length, ZETA3};
use thermocav::{CavitySetup, MaterialModel, Mirror, ModelKind, QuadratureSpec, SpectralFilter};

const HBAR: f64 = 1.054_571_817e-27;
const K_B: f64 = 1.380_649e-16;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

fn within_rel(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

fn gold(a: f64, kind: ModelKind) -> CavitySetup {
    CavitySetup::symmetric(a, MaterialModel::gold().with_kind(kind), 300.0).unwrap()
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn plasma_te_suppression() -> Outcome {
    let u = thermal_energy_density(&gold(2e-6, ModelKind::Plasma), 1e-6, SpectralFilter::te(), &quad()).unwrap();
    let ratio = planck_density(300.0) / u.value;
    outcome(within_factor(ratio, 700.0, 2.0), format!("u_BB/u_TE = {ratio:.0}, want 700 within x2"))
}

fn universal_formula() -> Outcome {
    let q = quad();
    let u = thermal_energy_density(&gold(2e-6, ModelKind::Drude), 1e-6, SpectralFilter::te(), &q).unwrap();
    let ok_real = within_rel(u.value, 1.73e-4, 0.30);
    let thin = MaterialModel {
        omega_p: 2.997_924_58e8 / 2e-9,
        ..MaterialModel::gold()
    };
    let synthetic = CavitySetup::symmetric(2e-6, thin, 300.0).unwrap();
    let s = thermal_energy_density(&synthetic, 1e-6, SpectralFilter::te(), &q).unwrap();
    let uni = universal_te_density(2e-6, 1e-6, 300.0).unwrap();
    let ok_synth = within_rel(s.value, uni, 0.05);
    outcome(
        ok_real && ok_synth,
        format!(
            "Au u_TE = {:.4e} J/m^3 (want 1.73e-4 +-30%); lambda_p/a = 1e-3: ratio {:.4} (want 1 +-5%)",
            u.value,
            s.value / uni
        ),
    )
}

fn hurwitz_identity() -> Outcome {
    let err = (hurwitz_zeta3(0.5) / (7.0 * ZETA3) - 1.0).abs();
    outcome(err < 1e-10, format!("|zeta(3,1/2)/7zeta(3) - 1| = {err:.1e}, want < 1e-10"))
}

fn planck_recovery() -> Outcome {
    let a = 100.0 * thermal_length(300.0);
    let u = thermal_energy_density(&gold(a, ModelKind::Drude), a / 2.0, SpectralFilter::ALL, &quad()).unwrap();
    let r = u.scattering.value.abs() / planck_density(300.0);
    outcome(r < 0.05, format!("|u_sc|/u_BB = {r:.2e} at a = 100 lambda_T, want < 0.05"))
}

/// Half-plateau frequency of the TE spectrum at the centre of a 1 um
/// cavity, and whether the spectrum peaks below it.
fn roll_off(model: MaterialModel) -> (f64, bool) {
    let q = quad();
    let s = CavitySetup::symmetric(1e-6, model, 300.0).unwrap();
    let rho = |w: f64| spectral_energy_density(&s, w, 0.5e-6, SpectralFilter::te(), &q).unwrap().cavity.value;
    let grid: Vec<f64> = (0..=120).map(|k| 10f64.powf(6.0 + 7.0 * k as f64 / 120.0)).collect();
    let values: Vec<f64> = grid.iter().map(|&w| rho(w)).collect();
    let plateau = values[0];
    let k = values.iter().position(|&v| v < 0.5 * plateau).expect("spectrum never halves");
    // log interpolation between the bracketing grid points
    let t = (values[k - 1] / (0.5 * plateau)).ln() / (values[k - 1] / values[k]).ln();
    let w_half = grid[k - 1] * (grid[k] / grid[k - 1]).powf(t);
    let peak = grid[values.iter().enumerate().fold(0, |m, (i, v)| if *v > values[m] { i } else { m })];
    (w_half, peak < w_half)
}

fn spectrum_cutoff() -> Outcome {
    let (au, au_peak) = roll_off(MaterialModel::gold());
    let (pt, pt_peak) = roll_off(MaterialModel::platinum());
    let pass = au_peak && pt_peak && within_factor(au, 6.4e9, 2.0) && within_factor(pt, 4.3e10, 2.0);
    outcome(
        pass,
        format!(
            "half-plateau roll-off Au {au:.2e} rad/s (x{:.1} of 6.4e9), Pt {pt:.2e} rad/s (x{:.1} of 4.3e10), want within x2; peaks below roll-off: {}",
            au / 6.4e9,
            pt / 4.3e10,
            au_peak && pt_peak
        ),
    )
}

fn casimir_consistency() -> Outcome {
    let q = quad();
    let drude = gold(2e-6, ModelKind::Drude);
    let plasma = gold(2e-6, ModelKind::Plasma);
    let p = thermal_pressure_integrated(&drude, &q).unwrap();
    let ok_total = within_rel(p.value, 2.31e-5, 0.15);
    let grid: Vec<f64> = (0..=80).map(|k| 10f64.powf(7.0 + 4.0 * k as f64 / 80.0)).collect();
    let peak = grid
        .iter()
        .map(|&w| pressure_spectrum(&drude, w, None, &q).unwrap().total.value)
        .fold(0.0, f64::max);
    let worst = grid
        .iter()
        .map(|&w| pressure_spectrum(&plasma, w, None, &q).unwrap().total.value.abs())
        .fold(0.0, f64::max);
    let ok_plasma = worst < 1e-6 * peak;
    let asym = thermal_pressure_asymptotic(2e-6, 300.0, MaterialModel::gold().plasma_length()).unwrap();
    outcome(
        ok_total && ok_plasma,
        format!(
            "integrated {:.4e} Pa, ratio {:.3} to 2.31e-5 (want +-15%); TE share alone {:.3} of the closed form; plasma/Drude peak {:.1e} (want < 1e-6)",
            p.value,
            p.value / 2.31e-5,
            p.te.value / asym.value,
            worst / peak
        ),
    )
}

fn free_space_rate() -> Outcome {
    let sys = diagonalize(10.0, PI / 2.0).unwrap();
    let r = free_rate(&sys, 300.0).unwrap().total_rate_of(StateLabel::new(1.5, 1.5)).unwrap();
    outcome(within_rel(r, 1.1e-12, 0.5), format!("total rate out of (3/2,3/2) = {r:.3e} s^-1, want 1.1e-12 +-50%"))
}

fn plasma_cavity_rate() -> Outcome {
    let q = quad();
    let sys = diagonalize(10.0, PI / 2.0).unwrap();
    let l = StateLabel::new(1.5, -0.5);
    let p = cavity_rate(&sys, &gold(2e-6, ModelKind::Plasma), 1e-6, &q).unwrap().total_rate_of(l).unwrap();
    let d = cavity_rate(&sys, &gold(2e-6, ModelKind::Drude), 1e-6, &q).unwrap().total_rate_of(l).unwrap();
    let ratio = if p > 0.0 { d / p } else { f64::INFINITY };
    outcome(
        within_factor(p, 5e-13, 2.0) && ratio > 1e13,
        format!("plasma rate {p:.3e} s^-1 (want 5e-13 within x2); Drude/plasma {ratio:.2e} (want > 1e13)"),
    )
}

fn master_equation(run: &thermocav::beam::ExperimentResult) -> Outcome {
    let table = [
        ((1.5, 1.5), 0.0002),
        ((1.5, 0.5), 0.0184),
        ((1.5, -0.5), 0.949),
        ((1.5, -1.5), 0.0157),
        ((0.5, -0.5), 0.0107),
        ((0.5, 0.5), 0.0057),
    ];
    let mut pass = (run.populations.sum() - 1.0).abs() < 1e-10;
    let mut parts = Vec::new();
    for ((f, m), want) in table {
        let i = run.labels.iter().position(|l| *l == StateLabel::new(f, m)).unwrap();
        let got = run.populations.p[i];
        pass &= within_rel(got, want, 0.30);
        parts.push(format!("{}={:.3}%", run.labels[i], 100.0 * got));
    }
    outcome(
        pass,
        format!("{} (each +-30%); sum - 1 = {:.1e}", parts.join(" "), run.populations.sum() - 1.0),
    )
}

fn beam_channel(run: &thermocav::beam::ExperimentResult) -> Outcome {
    let h = run.channel_width;
    let f = run.survival_fraction;
    outcome(
        within_factor(h, 100e-9, 3.0) && (0.02..=0.10).contains(&f),
        format!("H = {:.1} nm (want 100 within x3), survival {:.2}% (want 2..10%)", h * 1e9, 100.0 * f),
    )
}

fn property_suites() -> Outcome {
    let q = quad();
    let mut failures = Vec::new();

    // detailed balance
    let setup = gold(2e-6, ModelKind::Drude);
    let mut worst_db: f64 = 0.0;
    for b in [10.0, 30.0, 100.0, 300.0, 1000.0] {
        let sys = diagonalize(b, PI / 2.0).unwrap();
        for rates in [free_rate(&sys, 300.0).unwrap(), cavity_rate(&sys, &setup, 1e-6, &q).unwrap()] {
            for i in 0..6 {
                for f in i + 1..6 {
                    let w = sys.frequency(i, f);
                    let (down, up) = (rates.gamma[(f, i)], rates.gamma[(i, f)]);
                    if w.abs() < 1.0 || down.max(up) == 0.0 {
                        continue;
                    }
                    let e = (down / up / (HBAR * w / (K_B * 300.0)).exp() - 1.0).abs();
                    worst_db = worst_db.max(e);
                }
            }
        }
    }
    if !(worst_db < 1e-6) {
        failures.push(format!("detailed balance {worst_db:.1e}"));
    }

    // positivity on 10^4 points
    let mut negative = 0;
    for i in 0..100 {
        let omega = 10f64.powf(9.0 + 5.5 * i as f64 / 99.0);
        let f = free_space_trace_cgs(omega) * 1e6;
        for j in 0..100 {
            let t = cavity_traces(&setup, omega, 2e-6 * (j as f64 + 0.5) / 100.0, &q).unwrap();
            let slack = |e: thermocav::Estimate| e.error + 1e-9 * f;
            if t.h_perp_cav.value < 0.0
                || t.h_par_cav.value < 0.0
                || t.e_perp_sc.value + f < -slack(t.e_perp_sc)
                || t.e_par_sc.value + f < -slack(t.e_par_sc)
            {
                negative += 1;
            }
        }
    }
    if negative > 0 {
        failures.push(format!("{negative} negative traces"));
    }

    // z <-> a - z with the mirrors exchanged
    let mixed = CavitySetup::new(
        2e-6,
        Mirror::semi_infinite(MaterialModel::gold()),
        Mirror::semi_infinite(MaterialModel::platinum()),
        300.0,
    )
    .unwrap();
    let flipped = CavitySetup::new(2e-6, mixed.mirror2.clone(), mixed.mirror1.clone(), 300.0).unwrap();
    let mut worst_sym: f64 = 0.0;
    for omega in [1e10, 1e12, 1e14] {
        for z in [0.1e-6, 0.7e-6, 1.3e-6] {
            let l = cavity_traces(&mixed, omega, z, &q).unwrap();
            let r = cavity_traces(&flipped, omega, 2e-6 - z, &q).unwrap();
            for (x, y) in [(l.e_perp_sc, r.e_perp_sc), (l.h_par_sc, r.h_par_sc), (l.h_perp_sc, r.h_perp_sc)] {
                worst_sym = worst_sym.max((x.value / y.value - 1.0).abs());
            }
        }
    }
    if !(worst_sym < 1e-7) {
        failures.push(format!("mirror symmetry {worst_sym:.1e}"));
    }

    // free-space reduction
    let vacuum = CavitySetup::new(2e-6, Mirror::vacuum(), Mirror::vacuum(), 300.0).unwrap();
    let t = cavity_traces(&vacuum, 1e13, 0.6e-6, &q).unwrap();
    let f = free_space_trace_cgs(1e13) * 1e6;
    let free_err = (t.h_perp_cav.value / f - 1.0).abs().max((t.h_par_cav.value / f - 1.0).abs());
    if !(free_err < 1e-12) {
        failures.push(format!("free-space reduction {free_err:.1e}"));
    }

    // adaptive vs brute force
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..20 {
        let mirror = |rng: &mut StdRng| match rng.random_range(0..3) {
            0 => Mirror::semi_infinite(MaterialModel::gold()),
            1 => Mirror::semi_infinite(MaterialModel::platinum()),
            _ => Mirror::constant(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)),
        };
        let a = 10f64.powf(rng.random_range(-6.3..-5.3));
        let m1 = mirror(&mut rng);
        let m2 = mirror(&mut rng);
        let s = CavitySetup::new(a, m1, m2, 300.0).unwrap();
        let z = a * rng.random_range(0.15..0.85);
        let omega = 10f64.powf(rng.random_range(11.0..14.0));
        let (exx, ezz) = scattering_e_traces(&s, omega, z, &q).unwrap();
        let (hxx, hzz) = scattering_h_traces(&s, omega, z, &q).unwrap();
        let o = common::brute_force_traces(&s, omega, z);
        for (g, w) in [exx, ezz, hxx, hzz].iter().zip(o) {
            worst_oracle = worst_oracle.max((g.value / w - 1.0).abs());
        }
    }
    if !(worst_oracle < 1e-6) {
        failures.push(format!("brute-force oracle {worst_oracle:.1e}"));
    }

    // Breit-Rabi
    let atom = AtomConstants::deuterium();
    let x_per_gauss = (atom.g_electron * 9.274_010_078_3e-21 + atom.g_nuclear * 5.050_783_746_1e-24) / atom.w0();
    let mut worst_br: f64 = 0.0;
    for k in 0..=80 {
        let b = 4.0 * k as f64 / 80.0 / x_per_gauss;
        let sys = diagonalize(b, 0.0).unwrap();
        for (e, l) in sys.energies.iter().zip(&sys.labels) {
            worst_br = worst_br.max((e - breit_rabi(&atom, b, *l)).abs() / atom.w0());
        }
    }
    if !(worst_br < 1e-10) {
        failures.push(format!("Breit-Rabi {worst_br:.1e}"));
    }

    let detail = format!(
        "detailed balance {worst_db:.1e}, 10^4 traces non-negative: {}, symmetry {worst_sym:.1e}, free space {free_err:.1e}, oracle {worst_oracle:.1e}, Breit-Rabi {worst_br:.1e}",
        negative == 0
    );
    outcome(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let run = run_experiment(
        &gold(2e-6, ModelKind::Drude),
        &BeamConfig::default(),
        10.0,
        PI / 2.0,
        StateLabel::new(1.5, -0.5),
        &quad(),
    )
    .unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("plasma TE suppression", Box::new(plasma_te_suppression)),
        ("universal formula", Box::new(universal_formula)),
        ("Hurwitz identity", Box::new(hurwitz_identity)),
        ("Planck recovery", Box::new(planck_recovery)),
        ("spectrum cutoff", Box::new(spectrum_cutoff)),
        ("Casimir consistency", Box::new(casimir_consistency)),
        ("free-space rate", Box::new(free_space_rate)),
        ("plasma cavity rate", Box::new(plasma_cavity_rate)),
        ("master-equation table", Box::new(|| master_equation(&run))),
        ("beam channel", Box::new(|| beam_channel(&run))),
        ("property suites", Box::new(property_suites)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<22} {}  {} [{:.1} s]",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
