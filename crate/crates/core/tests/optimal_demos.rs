use kawlab_core::operators::{MeasurementOperator, Transform};
use kawlab_core::optimal::*;

fn assert_all(rep: &DemoReport) {
    for c in rep.verify().unwrap() {
        eprintln!(
            "{:>5} {} ({} vs {})",
            if c.holds { "ok" } else { "FAIL" },
            c.label,
            c.lhs,
            c.rhs
        );
    }
    assert!(rep.all_hold(), "{}", rep.name);
}

#[test]
fn not_optimal_walsh_and_fourier() {
    for t in [Transform::Fourier, Transform::Walsh] {
        let a = MeasurementOperator::unscaled(t, 32, vec![0, 1, 2, 3, 5, 8, 13]).unwrap();
        for seed in 0..3 {
            assert_all(&demo_not_optimal(&a, 5, 0.2, seed).unwrap());
        }
    }
}

#[test]
fn lambda_demo_both_transforms() {
    for t in [Transform::Fourier, Transform::Walsh] {
        let mut cfg = LambdaConfig::new(t, 32, 6, 3);
        cfg.sweep.clear();
        assert_all(&lambda_sensitivity_demo(&cfg).unwrap());
    }
}

#[test]
fn dl_vs_cs_walsh() {
    let rep = dl_vs_cs_demo(&DlVsCsConfig::walsh_default(1).unwrap()).unwrap();
    assert_all(&rep);
}

#[test]
fn destabilize_fourier() {
    let rep = destabilize_demo(&DestabilizeConfig::fourier_default(1).unwrap()).unwrap();
    assert_all(&rep);
}

#[test]
fn report_text_round_trip() {
    let a = MeasurementOperator::unscaled(Transform::Fourier, 16, vec![0, 1, 2, 3]).unwrap();
    let rep = demo_not_optimal(&a, 3, 0.1, 4).unwrap();
    let back = DemoReport::from_text(&rep.to_text()).unwrap();
    assert_eq!(back.to_text(), rep.to_text());
    assert!(back.all_hold());
}
