use leafgrowth::growth::*;
use leafgrowth::stats::{iqr, mean};
use leafgrowth::GAMMA;

#[test]
fn log_mass_ratio_concentrates() {
    let recs = run_replicas(10_000, &[100, 10_000], 200, 31).unwrap();
    let at = |k: usize, n: f64| -> Vec<f64> { recs.iter().map(|r| r[k].log_mass / n.ln()).collect() };
    let small = at(0, 100.0);
    let large = at(1, 10_000.0);
    assert!(iqr(&large) < iqr(&small), "{} vs {}", iqr(&large), iqr(&small));
    assert!((mean(&large) - GAMMA).abs() < 0.08);
}

#[test]
fn grown_leaf_height_scaling() {
    // E[I] = Γ(5/2)/√2; the leaf height is about 2√2 √n E[I].
    let n = 10_000usize;
    let recs = run_replicas(n, &[n], 1000, 32).unwrap();
    let h: Vec<f64> = recs.iter().map(|r| r[0].leaf_height as f64).collect();
    let target = 2.0 * 2f64.sqrt() * (n as f64).sqrt() * 0.939_985_6;
    assert!((mean(&h) / target - 1.0).abs() < 0.05, "{} vs {target}", mean(&h));
}

#[test]
fn mass_concentration_trend() {
    let f3 = mass_concentration_profile(1_000, 200, &[0.05, 0.3, 2.0], 33).unwrap();
    let f4 = mass_concentration_profile(10_000, 100, &[0.05, 0.3], 34).unwrap();
    assert!(f4[1] >= f3[1], "{f3:?} {f4:?}");
    assert!(f3[2] >= f3[1]);
    assert!(f4[0] > 0.0 && f4[0] < 1.0);
    assert!(mass_concentration_profile(FULL_MEASURE_CAP + 1, 1, &[0.1], 0).is_err());
}

#[test]
fn end_states_are_uniform() {
    let counts = end_state_counts(3, 20_000, 35).unwrap();
    let r = leafgrowth::stats::chi_square_gof(&counts, &[0.2; 5]);
    assert!(r.p_value > 1e-3, "{r:?}");
}
