use std::f64::consts::PI;

use thermocav::beam::{channel_width, run_experiment, BeamConfig, PotentialTable};
use thermocav::hyperfine::StateLabel;
use thermocav::{CavitySetup, MaterialModel, ModelKind, QuadratureSpec};

fn gold(kind: ModelKind) -> CavitySetup {
    CavitySetup::symmetric(2e-6, MaterialModel::gold().with_kind(kind), 300.0).unwrap()
}

#[test]
fn shorter_mirrors_let_more_atoms_through() {
    let q = QuadratureSpec::default();
    let s = gold(ModelKind::Drude);
    let full = channel_width(&s, &BeamConfig::default(), &q).unwrap();
    let half = channel_width(&s, &BeamConfig { length: 0.5e-2, ..BeamConfig::default() }, &q).unwrap();
    assert!(half > full);
}

#[test]
fn wider_cavity_has_flatter_centre() {
    let q = QuadratureSpec::default();
    let beam = BeamConfig::default();
    let narrow = PotentialTable::build(&gold(ModelKind::Drude), &beam, &q).unwrap();
    let wide =
        PotentialTable::build(&CavitySetup::symmetric(4e-6, MaterialModel::gold(), 300.0).unwrap(), &beam, &q).unwrap();
    assert!(wide.center_curvature().abs() < narrow.center_curvature().abs());
}

#[test]
fn experiment_conserves_probability() {
    let q = QuadratureSpec::default();
    let r = run_experiment(&gold(ModelKind::Drude), &BeamConfig::default(), 10.0, PI / 2.0, StateLabel::new(1.5, -0.5), &q)
        .unwrap();
    assert!((r.populations.sum() - 1.0).abs() < 1e-10);
    assert!(r.transition_probability > 0.01 && r.transition_probability < 0.2);
    assert!((r.flight_time - 5e-4).abs() < 1e-15);
    assert!((r.survival_fraction - r.channel_width / 2e-6).abs() < 1e-15);
}

#[test]
fn plasma_mirrors_cause_no_transitions() {
    let q = QuadratureSpec::default();
    let r = run_experiment(&gold(ModelKind::Plasma), &BeamConfig::default(), 10.0, PI / 2.0, StateLabel::new(1.5, -0.5), &q)
        .unwrap();
    assert!(r.transition_probability < 1e-10, "{}", r.transition_probability);
}
