//! End-to-end acceptance checks. Criteria run one after another inside a
//! single test so their wall-clock limits are not skewed by each other; each
//! prints one PASS/FAIL line and the test fails if any criterion does.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use leafgrowth::combinatorics::{best_of_three, c_weight, split_prob_signed, ExactRational};
use leafgrowth::growth::{end_state_counts, mixing_correlation, run_replicas, uniformity_pushforward_exact, MixingStatistic};
use leafgrowth::quadrature::QuadratureConfig;
use leafgrowth::spectrum::*;
use leafgrowth::spine::*;
use leafgrowth::stats::{chi_square_gof, iqr, ks_one_sample, mean};
use leafgrowth::GAMMA;
use num_traits::{One, Zero};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(ok: bool, what: String, notes: &mut Vec<String>, passed: &mut bool) {
    if !ok {
        *passed = false;
    }
    notes.push(format!("{}{what}", if ok { "" } else { "[x] " }));
}

fn criterion(k: u32, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = body();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.passed = false;
            out.detail.push_str(&format!("; [x] took {took:.1?}, limit {limit:?}"));
        }
    }
    println!("{} criterion {k}: {} ({took:.1?})", if out.passed { "PASS" } else { "FAIL" }, out.detail);
    out.passed
}

fn c1() -> Outcome {
    let mut passed = true;
    let mut notes = Vec::new();
    for n in 1..=7 {
        let dev = uniformity_pushforward_exact(n).unwrap();
        check(dev.is_zero(), format!("n={n} deviation {dev}"), &mut notes, &mut passed);
    }
    Outcome { passed, detail: notes.join(", ") }
}

fn c2() -> Outcome {
    let one = ExactRational::one();
    let mut complement = 0;
    let mut recurrence = 0;
    for a in -1i64..=60 {
        for b in -1i64..=60 {
            if a >= 0 && b >= 0 && !(c_weight(a as usize, b as usize) + c_weight(b as usize, a as usize)).is_one() {
                complement += 1;
            }
            if a < 0 && b < 0 {
                continue;
            }
            let mut rhs = ExactRational::zero();
            if a >= 0 {
                rhs += split_prob_signed(a, b + 1) * c_weight(a as usize, (b + 1) as usize);
            }
            if b >= 0 {
                rhs += split_prob_signed(a + 1, b) * (&one - c_weight((a + 1) as usize, b as usize));
            }
            if rhs != split_prob_signed(a + 1, b + 1) {
                recurrence += 1;
            }
        }
    }
    let mut three = 0;
    for a in 0..=40 {
        for b in 0..=40 {
            if best_of_three(a, b) != c_weight(a, b) {
                three += 1;
            }
        }
    }
    Outcome {
        passed: complement + recurrence + three == 0,
        detail: format!("failures: complement {complement}, recurrence {recurrence}, best-of-three {three}"),
    }
}

fn c3() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut passed = true;
    let mut notes = Vec::new();
    for (alpha, target, tol) in [(0.0, 0.0, 1e-9), (-1.0, -1.0, 1e-9), (1.0, (5.0 - 13f64.sqrt()) / 2.0, 1e-8)] {
        let b = beta_of_alpha(alpha, &cfg).unwrap().beta;
        check((b - target).abs() < tol, format!("beta({alpha}) err {:.1e}", (b - target).abs()), &mut notes, &mut passed);
    }
    let i00 = integral_i(0.0, 0.0, &cfg).unwrap().value;
    check(i00.abs() < 1e-10, format!("I(0,0) = {i00:.1e}"), &mut notes, &mut passed);
    let g = gamma_constant(&cfg).ratio;
    let target = 3.0 * (2.0 - 3f64.sqrt());
    check((g - target).abs() < 1e-9, format!("gamma err {:.1e}", (g - target).abs()), &mut notes, &mut passed);
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5, 1.0, 2.0, 3.5] {
        let p = phi(alpha, &cfg).unwrap();
        worst = worst.max((p.quadrature.value / p.closed_form - 1.0).abs());
    }
    check(worst < 1e-8, format!("phi rel err {worst:.1e}"), &mut notes, &mut passed);
    let mut worst = 0.0f64;
    for alpha in [1.0, 2.0, 2.5] {
        let b = beta_function_identity(alpha, &cfg).unwrap();
        worst = worst.max((b.quadrature.value - b.closed_form).abs());
    }
    check(worst < 1e-8, format!("beta-function identity err {worst:.1e}"), &mut notes, &mut passed);
    Outcome { passed, detail: notes.join(", ") }
}

fn c4() -> Outcome {
    let mut passed = true;
    let mut notes = Vec::new();
    let start = Instant::now();
    let table = moment_recursion(1.0, 20_000).unwrap();
    let dp = start.elapsed();
    check(dp < Duration::from_secs(120), format!("DP to 2e4 in {dp:.1?}"), &mut notes, &mut passed);
    let fit = slope_fit(&table, (1 << 10, 1 << 14)).unwrap();
    let est = fit.dyadic_last();
    let target = (5.0 - 13f64.sqrt()) / 2.0;
    check((est - target).abs() < 0.05, format!("dyadic slope {est:.5} (lsq {:.5})", fit.slope), &mut notes, &mut passed);

    let zero = moment_recursion_exact(0, 60).unwrap();
    let minus = moment_recursion_exact(-1, 60).unwrap();
    let analytic = zero.iter().all(|e| e.is_one())
        && minus.iter().enumerate().all(|(n, e)| *e == ExactRational::from_integer((n as i64 + 1).into()));
    check(analytic, "e_n(0) = 1 and e_n(-1) = n+1 for n <= 60".into(), &mut notes, &mut passed);

    let mut mismatches = 0;
    for alpha in [-1i64, 0, 1, 2] {
        let dp = moment_recursion_exact(alpha, 8).unwrap();
        for (n, e) in dp.iter().enumerate() {
            if *e != moment_by_enumeration(alpha, n).unwrap() {
                mismatches += 1;
            }
        }
    }
    check(mismatches == 0, format!("{mismatches} mismatches against enumeration"), &mut notes, &mut passed);
    Outcome { passed, detail: notes.join(", ") }
}

fn c5() -> Outcome {
    let stat = |n: usize, seed: u64| -> Vec<f64> {
        discrete_spine_batch(n, 1000, seed).unwrap().iter().map(|s| s.0 / (n as f64).ln()).collect()
    };
    let small = stat(1_000, 501);
    let large = stat(1_000_000, 502);
    let g = mean(&large);
    let (q_small, q_large) = (iqr(&small), iqr(&large));
    Outcome {
        passed: (g - GAMMA).abs() < 0.05 && q_large < q_small,
        detail: format!("mean {g:.4} vs {GAMMA:.4}, IQR {q_large:.4} at 1e6 vs {q_small:.4} at 1e3"),
    }
}

fn c6() -> Outcome {
    let mut passed = true;
    let mut notes = Vec::new();
    let n = 10_000;
    let recs = run_replicas(n, &[n], 200, 601).unwrap();
    let g = mean(&recs.iter().map(|r| r[0].log_mass / (n as f64).ln()).collect::<Vec<_>>());
    check((g - GAMMA).abs() < 0.08, format!("gamma hat {g:.4}"), &mut notes, &mut passed);
    let counts = end_state_counts(4, 100_000, 602).unwrap();
    let r = chi_square_gof(&counts, &[1.0 / 14.0; 14]);
    check(r.p_value > 1e-3, format!("end states at n=4 chi2 p = {:.3}", r.p_value), &mut notes, &mut passed);
    Outcome { passed, detail: notes.join(", ") }
}

fn c7() -> Outcome {
    let mut passed = true;
    let mut notes = Vec::new();
    let cfg = SpineConfig::default();
    let law = JumpLaw::new(cfg.eps_cut, &cfg.quadrature).unwrap();
    let s = mean_slopes(&law, 10.0, 10_000, 701);
    let mu_t = (2.0 * PI).sqrt();
    let nu_t = GAMMA * mu_t;
    check((s.mu / mu_t - 1.0).abs() < 0.01, format!("mu slope {:.4}", s.mu), &mut notes, &mut passed);
    check((s.nu / nu_t - 1.0).abs() < 0.01, format!("nu slope {:.4}", s.nu), &mut notes, &mut passed);

    let eps = 1e-3;
    let sims = simulate_spines(&law, &cfg, 100_000, &[eps], 702);
    let i: Vec<f64> = sims.iter().map(|s| s.extinction).collect();
    let e1 = mean(&i);
    let e2 = mean(&i.iter().map(|x| x * x).collect::<Vec<_>>());
    check((e1 / 0.939_985_6 - 1.0).abs() < 0.01, format!("E[I] {e1:.5}"), &mut notes, &mut passed);
    check((e2 - 1.0).abs() < 0.01, format!("E[I^2] {e2:.5}"), &mut notes, &mut passed);
    let ks = ks_one_sample(&i, extinction_cdf);
    check(ks.p_value > 1e-3, format!("KS p = {:.3}", ks.p_value), &mut notes, &mut passed);
    let ex = dimension_exponent(&sims, &[eps])[0];
    let target = 2.0 * GAMMA;
    check((ex.nu - target).abs() < 0.15, format!("nu exponent at 1e-3 {:.4} vs {target:.4}", ex.nu), &mut notes, &mut passed);
    Outcome { passed, detail: notes.join(", ") }
}

fn c8() -> Outcome {
    let near = mixing_correlation(200, 400, 2000, MixingStatistic::PathLength, 801).unwrap();
    let far = mixing_correlation(200, 20_000, 2000, MixingStatistic::PathLength, 802).unwrap();
    Outcome {
        passed: far.correlation.abs() < 0.1 && far.correlation.abs() < near.correlation.abs(),
        detail: format!(
            "corr(T_200, T_400) = {:.3}, corr(T_200, T_20000) = {:.3} +- {:.3}, required below 0.1",
            near.correlation, far.correlation, far.std_error
        ),
    }
}

#[test]
fn acceptance() {
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let results = [
        criterion(1, min(1), c1),
        criterion(2, Some(Duration::from_secs(5)), c2),
        criterion(3, Some(Duration::from_secs(10)), c3),
        criterion(4, None, c4),
        criterion(5, min(5), c5),
        criterion(6, min(10), c6),
        criterion(7, min(10), c7),
        criterion(8, None, c8),
    ];
    println!(
        "INFO criterion 9: the n -> infinity limits and the continuum dimension are not measured directly; \
         finite-n concentration (5), exponent trends (7) and cross-module agreement stand in for them"
    );
    let failed: Vec<usize> = results.iter().enumerate().filter(|r| !*r.1).map(|r| r.0 + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
