//! Invariant suites behind `leafgrowth verify`.

use std::f64::consts::PI;

use leafgrowth::combinatorics::{best_of_three, c_weight, split_prob_signed, ExactRational};
use leafgrowth::growth::{uniformity_pushforward_exact, PUSHFORWARD_CAP};
use leafgrowth::measure::{compute_measure, token_game_law_exact};
use leafgrowth::quadrature::QuadratureConfig;
use leafgrowth::spectrum::{beta_function_identity, beta_of_alpha, gamma_constant, integral_i, phi};
use leafgrowth::spine::{
    nu_jump, pi_mu_mean, pi_nu_mean, simulate_spines, transition_probability, JumpLaw, SpineConfig,
};
use leafgrowth::stats::mean;
use leafgrowth::tree::enumerate_all;
use leafgrowth::GAMMA;
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Uniformity,
    Identities,
    Spectrum,
    Spine,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Uniformity => "uniformity",
            Suite::Identities => "identities",
            Suite::Spectrum => "spectrum",
            Suite::Spine => "spine",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn exact(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, value: None, expected: None, tolerance: None, detail }
    }

    fn near(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        let err = (value - expected).abs();
        Check {
            name: name.into(),
            passed: err < tolerance,
            value: Some(value),
            expected: Some(expected),
            tolerance: Some(tolerance),
            detail: format!("|error| = {err:e}"),
        }
    }

    fn relative(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        let rel = if expected == 0.0 { value.abs() } else { (value / expected - 1.0).abs() };
        Check {
            name: name.into(),
            passed: rel < tolerance,
            value: Some(value),
            expected: Some(expected),
            tolerance: Some(tolerance),
            detail: format!("relative error = {rel:e}"),
        }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Check::exact(name, false, err.to_string())
    }
}

pub fn run(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Uniformity => uniformity(),
        Suite::Identities => identities(),
        Suite::Spectrum => spectrum(),
        Suite::Spine => spine(seed),
    }
}

fn uniformity() -> Vec<Check> {
    let mut checks = Vec::new();
    for n in 0..=PUSHFORWARD_CAP {
        checks.push(match uniformity_pushforward_exact(n) {
            Ok(dev) => Check::exact(&format!("pushforward_uniform_n{n}"), dev.is_zero(), format!("max deviation {dev}")),
            Err(e) => Check::failed(&format!("pushforward_uniform_n{n}"), e),
        });
    }
    let mut bad = Vec::new();
    let mut total = 0;
    for n in 0..=6 {
        for t in enumerate_all(n).expect("below the enumeration cap") {
            total += 1;
            let m = compute_measure(&t);
            if m.exact_masses() != Some(token_game_law_exact(&t).as_slice()) {
                bad.push(t.encode());
            }
        }
    }
    checks.push(Check::exact(
        "token_game_law_equals_measure",
        bad.is_empty(),
        format!("{} of {total} trees disagree {:?}", bad.len(), bad),
    ));
    checks
}

fn identities() -> Vec<Check> {
    let mut checks = Vec::new();

    let bad = (0..=60usize)
        .flat_map(|a| (0..=60usize).map(move |b| (a, b)))
        .filter(|&(a, b)| !(c_weight(a, b) + c_weight(b, a)).is_one())
        .count();
    checks.push(Check::exact("complement", bad == 0, format!("{bad} failing pairs with a, b <= 60")));

    let one = ExactRational::one();
    let mut bad = 0;
    for a in -1i64..=60 {
        for b in -1i64..=60 {
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
                bad += 1;
            }
        }
    }
    checks.push(Check::exact("profile_recurrence", bad == 0, format!("{bad} failing pairs with -1 <= a, b <= 60")));

    let bad: Vec<usize> = (1..=60usize)
        .filter(|&m| !(0..m).map(|a| transition_probability(m, a)).sum::<ExactRational>().is_one())
        .collect();
    checks.push(Check::exact("descent_kernel_sums_to_one", bad.is_empty(), format!("failing sizes {bad:?}")));

    let bad = (0..=40usize)
        .flat_map(|a| (0..=40usize).map(move |b| (a, b)))
        .filter(|&(a, b)| best_of_three(a, b) != c_weight(a, b))
        .count();
    checks.push(Check::exact("best_of_three", bad == 0, format!("{bad} failing pairs with a, b <= 40")));
    checks
}

fn spectrum() -> Vec<Check> {
    let cfg = QuadratureConfig::default();
    let mut checks = Vec::new();
    for (alpha, expected, tol) in [(1.0, (5.0 - 13f64.sqrt()) / 2.0, 1e-8), (0.0, 0.0, 1e-9), (-1.0, -1.0, 1e-9)] {
        let name = format!("beta_at_{alpha}");
        checks.push(match beta_of_alpha(alpha, &cfg) {
            Ok(r) => Check::near(&name, r.beta, expected, tol),
            Err(e) => Check::failed(&name, e),
        });
    }
    checks.push(match integral_i(0.0, 0.0, &cfg) {
        Ok(e) => Check::near("integral_at_origin", e.value, 0.0, 1e-10),
        Err(e) => Check::failed("integral_at_origin", e),
    });
    checks.push(Check::near("gamma_ratio", gamma_constant(&cfg).ratio, GAMMA, 1e-9));
    for alpha in [0.25, 0.5, 1.0, 2.0, 3.5] {
        let name = format!("phi_at_{alpha}");
        checks.push(match phi(alpha, &cfg) {
            Ok(p) => Check::relative(&name, p.quadrature.value, p.closed_form, 1e-8),
            Err(e) => Check::failed(&name, e),
        });
    }
    for alpha in [1.0, 2.0, 2.5] {
        let name = format!("beta_function_identity_at_{alpha}");
        checks.push(match beta_function_identity(alpha, &cfg) {
            Ok(b) => Check::near(&name, b.quadrature.value, b.closed_form, 1e-8),
            Err(e) => Check::failed(&name, e),
        });
    }
    checks
}

fn spine(seed: u64) -> Vec<Check> {
    let cfg = SpineConfig::default();
    let mut checks = vec![
        Check::relative("pi_mu_mean", pi_mu_mean(&cfg.quadrature).value, (2.0 * PI).sqrt(), 1e-9),
        Check::relative("pi_nu_mean", pi_nu_mean(&cfg.quadrature).value, GAMMA * (2.0 * PI).sqrt(), 1e-9),
    ];
    let below = (1..1000).map(|i| i as f64 * 1e-3 * std::f64::consts::LN_2).all(|p| nu_jump(p) < p);
    let above = (1..1000).map(|i| std::f64::consts::LN_2 * (1.0 + i as f64 * 1e-2)).all(|p| nu_jump(p) > p);
    checks.push(Check::exact(
        "nu_jump_threshold_log2",
        below && above && (nu_jump(std::f64::consts::LN_2) - std::f64::consts::LN_2).abs() < 1e-15,
        "nu jump below mu jump under log 2, above it beyond".into(),
    ));
    let law = match JumpLaw::new(cfg.eps_cut, &cfg.quadrature) {
        Ok(l) => l,
        Err(e) => {
            checks.push(Check::failed("jump_law", e));
            return checks;
        }
    };
    let sims = simulate_spines(&law, &cfg, 10_000, &[], seed);
    let broken = sims.iter().filter(|s| !s.coupling_ok).count();
    checks.push(Check::exact("coupling_invariant", broken == 0, format!("{broken} of {} paths violate it", sims.len())));
    let flagged = sims.iter().filter(|s| s.flagged).count();
    checks.push(Check::exact("tail_bounds", flagged == 0, format!("{flagged} flagged paths")));
    let i: Vec<f64> = sims.iter().map(|s| s.extinction).collect();
    let i2: Vec<f64> = i.iter().map(|x| x * x).collect();
    // 10⁴ paths put the standard error near 0.35%.
    checks.push(Check::relative("extinction_mean", mean(&i), 0.939_985_6, 0.02));
    checks.push(Check::relative("extinction_second_moment", mean(&i2), 1.0, 0.03));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_suites_pass() {
        for suite in [Suite::Identities, Suite::Uniformity] {
            for c in run(suite, 0) {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
