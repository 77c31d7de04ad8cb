//! The spine towards a `ν`-typical leaf.
//!
//! In the continuum, the `μ`-mass seen along the spine is `exp(−ξ_μ)` for a
//! subordinator `ξ_μ` with Lévy measure `π_μ`, the push-forward of
//! `√(2/π) c(x) p(x) dx` under `x ↦ −log x`. Every jump `p` of `ξ_μ` comes
//! with a jump `−log c(e^{−p})` of the coupled subordinator `ξ_ν`. The
//! Lamperti time change with index 1/2 turns `ξ_μ` into a mass process whose
//! extinction time `I = ∫ exp(−ξ_μ/2)` is the height of the typical leaf.
//!
//! The discrete counterpart is the chain of subtree sizes met by a
//! root-to-leaf descent in a uniform tree.

use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{c_limit, c_weight, c_weight_f, split_prob, ExactRational};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_from_singular, integrate_unit, ln_pair, Estimate, QuadratureConfig};
use crate::rng::{stream, Purpose};
use crate::stats::{mean, std_error};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// `ν`-jump paired with a `μ`-jump `p`: `−log c(e^{−p})`.
pub fn nu_jump(p: f64) -> f64 {
    // c(x) = x²(3 − 2x) = x²(1 + 2(1 − x)).
    2.0 * p - (-2.0 * (-p).exp_m1()).ln_1p()
}

/// CDF of the extinction time, whose density is `8x³ e^{−2x²}`.
pub fn extinction_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = 2.0 * x * x;
    -(-s).exp_m1() - s * (-s).exp()
}

/// `∫ s dπ_μ(s) = √(2/π) ∫_0^1 (−log x) c(x) p(x) dx`.
pub fn pi_mu_mean(cfg: &QuadratureConfig) -> Estimate {
    scaled(integrate_unit(|x, y| -ln_pair(x, y) * c_pair(x, y) * (x * y).powf(-1.5), cfg))
}

/// `∫ s dπ_ν(s) = √(2/π) ∫_0^1 (−log c(x)) c(x) p(x) dx`.
pub fn pi_nu_mean(cfg: &QuadratureConfig) -> Estimate {
    scaled(integrate_unit(|x, y| -ln_c_pair(x, y) * c_pair(x, y) * (x * y).powf(-1.5), cfg))
}

fn scaled(e: Estimate) -> Estimate {
    Estimate { value: SQRT_2_OVER_PI * e.value, error: SQRT_2_OVER_PI * e.error, panels: e.panels }
}

fn c_pair(x: f64, y: f64) -> f64 {
    if x < 0.5 {
        c_limit(x)
    } else {
        1.0 - c_limit(y)
    }
}

fn ln_c_pair(x: f64, y: f64) -> f64 {
    if x < 0.5 {
        2.0 * x.ln() + (3.0 - 2.0 * x).ln()
    } else {
        (-c_limit(y)).ln_1p()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpineConfig {
    /// Jumps below this size are replaced by drift.
    pub eps_cut: f64,
    /// Stop a path once the certified tail of `I` is below this.
    pub tail_tol: f64,
    /// Paths whose tail bound is still above this at `max_horizon` are flagged.
    pub flag_tol: f64,
    pub max_horizon: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for SpineConfig {
    fn default() -> Self {
        SpineConfig {
            eps_cut: 1e-4,
            tail_tol: 1e-6,
            flag_tol: 1e-4,
            max_horizon: 500.0,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// The law of the jumps of `ξ_μ` of size at least `eps_cut`, and the drifts
/// that compensate the smaller ones.
///
/// In the variable `t = (1 − x)^{−1/2}` the jump density is proportional to
/// `h(t) = 2(1 + 2/t²)√(1 − 1/t²)` on `[1, t_0]`. Draws come from the
/// envelope `2(1 + 2/t²)`, whose CDF inverts in closed form, accepted with
/// probability `√(1 − 1/t²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpLaw {
    pub eps_cut: f64,
    t0: f64,
    envelope_mass: f64,
    /// Rate of jumps of size at least `eps_cut`.
    pub rate: f64,
    pub drift_mu: f64,
    pub drift_nu: f64,
    /// Set when the compensated part exceeds 10% of the mean of `ξ_μ`.
    pub warning: Option<String>,
}

impl JumpLaw {
    pub fn new(eps_cut: f64, cfg: &QuadratureConfig) -> Result<Self> {
        if !(eps_cut > 0.0 && eps_cut.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps_cut must be positive, got {eps_cut}")));
        }
        let y0 = -(-eps_cut).exp_m1();
        let t0 = y0.powf(-0.5);
        let h = |t: f64| 2.0 * (1.0 + 2.0 / (t * t)) * (1.0 - 1.0 / (t * t)).max(0.0).sqrt();
        let rate = SQRT_2_OVER_PI * integrate_from_singular(|s| h(1.0 + s), t0 - 1.0, cfg).value;
        // Small jumps: x = 1 − y with y in (0, y0).
        let density = |y: f64| c_limit(1.0 - y).max(1.0 - c_limit(y)) * (y * (1.0 - y)).powf(-1.5);
        let small_mu = integrate_from_singular(|y| -(-y).ln_1p() * density(y), y0, cfg).value;
        let small_nu = integrate_from_singular(|y| -(-c_limit(y)).ln_1p() * density(y), y0, cfg).value;
        let drift_mu = SQRT_2_OVER_PI * small_mu;
        let drift_nu = SQRT_2_OVER_PI * small_nu;
        let total = pi_mu_mean(cfg).value;
        let warning = (drift_mu > 0.1 * total).then(|| {
            format!("eps_cut = {eps_cut} compensates {:.1}% of the mean of xi_mu", 100.0 * drift_mu / total)
        });
        Ok(JumpLaw { eps_cut, t0, envelope_mass: 2.0 * t0 + 2.0 - 4.0 / t0, rate, drift_mu, drift_nu, warning })
    }

    /// A jump of `ξ_μ` of size at least `eps_cut`.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let w = rng.random::<f64>() * self.envelope_mass - 2.0;
            let t = ((w + (w * w + 32.0).sqrt()) / 4.0).clamp(1.0, self.t0);
            let inv = 1.0 / (t * t);
            if rng.random::<f64>() < (1.0 - inv).sqrt() {
                return -(-inv).ln_1p();
            }
        }
    }
}

/// One path of `(ξ_μ, ξ_ν)` up to an adaptive horizon, with its extinction
/// time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinePathSample {
    pub jump_times: Vec<f64>,
    pub mu_jumps: Vec<f64>,
    pub nu_jumps: Vec<f64>,
    pub drift_mu: f64,
    pub drift_nu: f64,
    pub horizon: f64,
    /// `∫_0^horizon exp(−ξ_μ/2)`.
    pub extinction: f64,
    /// Upper bound on `∫_horizon^∞ exp(−ξ_μ/2)` from the drift alone.
    pub tail_bound: f64,
    pub flagged: bool,
}

fn exp_time(rng: &mut (impl Rng + ?Sized), rate: f64) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() / rate
}

/// `∫_0^Δ exp(−(ξ + d s)/2) ds`.
fn segment_integral(xi: f64, d: f64, dt: f64) -> f64 {
    (-0.5 * xi).exp() * (2.0 / d) * -(-0.5 * d * dt).exp_m1()
}

pub fn sample_spine_pair<R: Rng + ?Sized>(law: &JumpLaw, cfg: &SpineConfig, rng: &mut R) -> SpinePathSample {
    let d = law.drift_mu;
    let mut path = SpinePathSample {
        jump_times: Vec::new(),
        mu_jumps: Vec::new(),
        nu_jumps: Vec::new(),
        drift_mu: d,
        drift_nu: law.drift_nu,
        horizon: 0.0,
        extinction: 0.0,
        tail_bound: 2.0 / d,
        flagged: false,
    };
    let (mut t, mut xi) = (0.0f64, 0.0f64);
    loop {
        let tail = (-0.5 * xi).exp() * 2.0 / d;
        if tail < cfg.tail_tol || t >= cfg.max_horizon {
            path.horizon = t;
            path.tail_bound = tail;
            path.flagged = tail > cfg.flag_tol;
            return path;
        }
        let dt = exp_time(rng, law.rate).min(cfg.max_horizon - t);
        path.extinction += segment_integral(xi, d, dt);
        xi += d * dt;
        t += dt;
        if t >= cfg.max_horizon {
            continue;
        }
        let p = law.sample_jump(rng);
        path.jump_times.push(t);
        path.mu_jumps.push(p);
        path.nu_jumps.push(nu_jump(p));
        xi += p;
    }
}

impl SpinePathSample {
    fn value_at(&self, t: f64, drift: f64, jumps: &[f64]) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        drift * t + jumps[..k].iter().sum::<f64>()
    }

    pub fn xi_mu(&self, t: f64) -> f64 {
        self.value_at(t, self.drift_mu, &self.mu_jumps)
    }

    pub fn xi_nu(&self, t: f64) -> f64 {
        self.value_at(t, self.drift_nu, &self.nu_jumps)
    }

    /// Re-checks that every `ν`-jump is `−log c(e^{−p})` of its partner.
    pub fn coupling_holds(&self) -> bool {
        self.mu_jumps.len() == self.nu_jumps.len()
            && self.mu_jumps.iter().zip(&self.nu_jumps).all(|(&p, &q)| q.to_bits() == nu_jump(p).to_bits())
    }

    /// `(θ, ξ_μ(θ), ξ_ν(θ))` at the time `θ` where `∫_θ^∞ exp(−ξ_μ/2) = ε`,
    /// so that `X(I − ε) = exp(−ξ(θ))`.
    pub fn near_extinction(&self, eps: f64) -> Option<(f64, f64, f64)> {
        let target = self.extinction - eps;
        if !(target > 0.0) {
            return None;
        }
        let d = self.drift_mu;
        let (mut s, mut mu, mut nu, mut cum) = (0.0, 0.0, 0.0, 0.0);
        let ends = self.jump_times.iter().copied().chain(std::iter::once(self.horizon));
        for (k, end) in ends.enumerate() {
            let piece = segment_integral(mu, d, end - s);
            if cum + piece >= target {
                let frac = (target - cum) * d / (2.0 * (-0.5 * mu).exp());
                let tau = (-2.0 / d) * (-frac).ln_1p();
                let tau = tau.min(end - s);
                return Some((s + tau, mu + d * tau, nu + self.drift_nu * tau));
            }
            cum += piece;
            mu += d * (end - s);
            nu += self.drift_nu * (end - s);
            if k < self.mu_jumps.len() {
                mu += self.mu_jumps[k];
                nu += self.nu_jumps[k];
            }
            s = end;
        }
        None
    }

    /// `(log X_μ(I − ε)/log ε, log X_ν(I − ε)/log ε)`.
    pub fn exponents(&self, eps: f64) -> Option<(f64, f64)> {
        let (_, mu, nu) = self.near_extinction(eps)?;
        let l = -eps.ln();
        Some((mu / l, nu / l))
    }
}

/// What is kept of a path after it is dropped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpineSummary {
    pub extinction: f64,
    pub tail_bound: f64,
    pub flagged: bool,
    pub jumps: usize,
    pub coupling_ok: bool,
    /// `(ε, μ-exponent, ν-exponent)` for each requested `ε`.
    pub exponents: Vec<(f64, f64, f64)>,
}

/// Simulates `paths` independent spines, keeping summaries only.
pub fn simulate_spines(law: &JumpLaw, cfg: &SpineConfig, paths: usize, eps_grid: &[f64], master_seed: u64) -> Vec<SpineSummary> {
    (0..paths)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(master_seed, r as u64, Purpose::Spine);
            let path = sample_spine_pair(law, cfg, &mut rng);
            let exponents = eps_grid
                .iter()
                .filter_map(|&e| path.exponents(e).map(|(m, n)| (e, m, n)))
                .collect();
            SpineSummary {
                extinction: path.extinction,
                tail_bound: path.tail_bound,
                flagged: path.flagged,
                jumps: path.mu_jumps.len(),
                coupling_ok: path.coupling_holds(),
                exponents,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub eps: f64,
    pub mu: f64,
    pub nu: f64,
    pub ratio: f64,
    pub samples: usize,
}

/// Averages of the near-extinction exponents over paths, per `ε`.
pub fn dimension_exponent(summaries: &[SpineSummary], eps_grid: &[f64]) -> Vec<ExponentEstimate> {
    eps_grid
        .iter()
        .map(|&eps| {
            let hits: Vec<(f64, f64)> = summaries
                .iter()
                .filter_map(|s| s.exponents.iter().find(|e| e.0 == eps).map(|e| (e.1, e.2)))
                .collect();
            let k = hits.len() as f64;
            let mu = hits.iter().map(|h| h.0).sum::<f64>() / k;
            let nu = hits.iter().map(|h| h.1).sum::<f64>() / k;
            ExponentEstimate { eps, mu, nu, ratio: nu / mu, samples: hits.len() }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub mu: f64,
    pub nu: f64,
    pub mu_se: f64,
    pub nu_se: f64,
}

/// Mean of `ξ_μ(t)/t` and `ξ_ν(t)/t` over independent paths.
pub fn mean_slopes(law: &JumpLaw, t: f64, paths: usize, master_seed: u64) -> SlopeEstimate {
    let pairs: Vec<(f64, f64)> = (0..paths)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(master_seed, r as u64, Purpose::Spine);
            let (mut mu, mut nu) = (law.drift_mu * t, law.drift_nu * t);
            let mut s = exp_time(&mut rng, law.rate);
            while s <= t {
                let p = law.sample_jump(&mut rng);
                mu += p;
                nu += nu_jump(p);
                s += exp_time(&mut rng, law.rate);
            }
            (mu / t, nu / t)
        })
        .collect();
    let (mus, nus): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    SlopeEstimate { mu: mean(&mus), nu: mean(&nus), mu_se: std_error(&mus), nu_se: std_error(&nus) }
}

/// Probability `2P(a, m−1−a) C(a, m−1−a)` that the descent moves from a
/// subtree of size `m` into a child subtree of size `a`.
pub fn transition_probability(m: usize, a: usize) -> ExactRational {
    assert!(a < m);
    let b = m - 1 - a;
    split_prob(a, b) * c_weight(a, b) * BigRational::from_integer(2.into())
}

/// Subtree sizes met by one `ν`-descent in a uniform tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteSpineChain {
    /// `n = m_0 > m_1 > … > 0`.
    pub sizes: Vec<usize>,
    /// `−log M_n = −Σ log C` along the descent.
    pub log_mass: f64,
    /// Number of steps, the height of the sampled leaf.
    pub steps: usize,
}

/// Draws the next size from `m`: first the smaller child size `k` from
/// `P(k, m−1−k)` folded over both orders, then the side, entering the size-`k`
/// child with probability `C(k, m−1−k)`. Returns `(next size, ln C)`.
fn spine_step<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (usize, f64) {
    let last = (m - 1) / 2;
    let mut u = rng.random::<f64>();
    let mut b = m - 1;
    // P(0, m − 1) = Cat(m − 1)/Cat(m).
    let mut p = (m + 1) as f64 / (2.0 * (2 * m - 1) as f64);
    let mut k = 0;
    while k < last {
        let w = if k == b { p } else { 2.0 * p };
        if u < w {
            break;
        }
        u -= w;
        // P(k + 1, b − 1) / P(k, b).
        p *= 2.0 * (2 * k + 1) as f64 / (k + 2) as f64 * (b + 1) as f64 / (2.0 * (2 * b - 1) as f64);
        k += 1;
        b -= 1;
    }
    let c = c_weight_f(k, b);
    if rng.random::<f64>() < c {
        (k, c.ln())
    } else {
        (b, c_weight_f(b, k).ln())
    }
}

pub fn discrete_spine<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DiscreteSpineChain> {
    if n < 1 {
        return Err(Error::InvalidArgument("discrete spine needs n >= 1".into()));
    }
    let mut sizes = vec![n];
    let mut log_mass = 0.0;
    let mut m = n;
    while m > 0 {
        let (next, ln_c) = spine_step(m, rng);
        log_mass -= ln_c;
        m = next;
        sizes.push(m);
    }
    Ok(DiscreteSpineChain { steps: sizes.len() - 1, sizes, log_mass })
}

/// `(−log M_n, height)` for independent discrete spines.
pub fn discrete_spine_batch(n: usize, replicas: usize, master_seed: u64) -> Result<Vec<(f64, usize)>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(master_seed, r as u64, Purpose::DiscreteSpine);
            discrete_spine(n, &mut rng).map(|c| (c.log_mass, c.steps))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn extinction_cdf_shape() {
        assert_eq!(extinction_cdf(0.0), 0.0);
        let x: f64 = 0.7;
        let closed = 1.0 - (1.0 + 2.0 * x * x) * (-2.0 * x * x).exp();
        assert!((extinction_cdf(x) - closed).abs() < 1e-15);
        assert!((extinction_cdf(10.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jump_means() {
        let cfg = QuadratureConfig::default();
        let two_pi_sqrt = (2.0 * std::f64::consts::PI).sqrt();
        assert!((pi_mu_mean(&cfg).value - two_pi_sqrt).abs() < 1e-9);
        assert!((pi_nu_mean(&cfg).value - crate::GAMMA * two_pi_sqrt).abs() < 1e-9);
    }

    #[test]
    fn coupled_jump_is_minus_log_c() {
        for &p in &[1e-6, 0.01, 0.5, std::f64::consts::LN_2, 1.0, 5.0, 40.0] {
            let x = (-p).exp();
            let direct = -c_limit(x).ln();
            assert!((nu_jump(p) - direct).abs() <= 1e-15 + 1e-12 * direct, "p = {p}");
        }
        // The ν-jump dominates exactly when the μ-jump is at least log 2.
        for i in 1..400 {
            let p = i as f64 * 0.005;
            assert_eq!(nu_jump(p) >= p, p >= std::f64::consts::LN_2 - 1e-12, "p = {p}");
        }
    }

    #[test]
    fn jump_law_matches_quadrature() {
        let law = JumpLaw::new(1e-4, &QuadratureConfig::default()).unwrap();
        assert!(law.warning.is_none());
        assert!(law.rate > 150.0 && law.rate < 170.0, "{law:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let draws: Vec<f64> = (0..200_000).map(|_| law.sample_jump(&mut rng)).collect();
        assert!(draws.iter().all(|&p| p >= law.eps_cut * (1.0 - 1e-9)));
        let target = (pi_mu_mean(&QuadratureConfig::default()).value - law.drift_mu) / law.rate;
        let m = mean(&draws);
        assert!((m - target).abs() < 4.0 * std_error(&draws), "{m} vs {target}");
        let big = JumpLaw::new(0.5, &QuadratureConfig::default()).unwrap();
        assert!(big.warning.is_some());
        assert!(JumpLaw::new(0.0, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn spine_path_is_consistent() {
        let cfg = SpineConfig::default();
        let law = JumpLaw::new(cfg.eps_cut, &cfg.quadrature).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let path = sample_spine_pair(&law, &cfg, &mut rng);
            assert!(path.coupling_holds());
            assert!(!path.flagged && path.tail_bound < cfg.tail_tol);
            assert!(path.extinction > 0.0 && path.extinction.is_finite());
            assert!(path.jump_times.windows(2).all(|w| w[0] <= w[1]));
            let (theta, mu, nu) = path.near_extinction(1e-3).unwrap();
            assert!((path.xi_mu(theta) - mu).abs() < 1e-9 * mu.max(1.0));
            assert!((path.xi_nu(theta) - nu).abs() < 1e-9 * nu.max(1.0));
            assert!(path.near_extinction(10.0).is_none());
        }
    }

    #[test]
    fn kernel_sums_to_one() {
        for m in 1..=40 {
            let total: ExactRational = (0..m).map(|a| transition_probability(m, a)).sum();
            assert!(total.is_one(), "m = {m}");
        }
        assert_eq!(transition_probability(2, 1), BigRational::new(4.into(), 5.into()));
        assert_eq!(transition_probability(2, 0), BigRational::new(1.into(), 5.into()));
    }

    #[test]
    fn discrete_spine_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = discrete_spine(1, &mut rng).unwrap();
        assert_eq!(c.sizes, vec![1, 0]);
        assert!((c.log_mass - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(discrete_spine(0, &mut rng).is_err());
        // Empirical kernel from m = 7 against the exact one.
        let m = 7;
        let mut counts = vec![0u64; m];
        for _ in 0..100_000 {
            counts[spine_step(m, &mut rng).0] += 1;
        }
        let probs: Vec<f64> = (0..m)
            .map(|a| num_traits::ToPrimitive::to_f64(&transition_probability(m, a)).unwrap())
            .collect();
        assert!(crate::stats::chi_square_gof(&counts, &probs).p_value > 1e-3);
    }

    #[test]
    fn discrete_spine_is_strictly_decreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = discrete_spine(5000, &mut rng).unwrap();
        assert!(c.sizes.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*c.sizes.last().unwrap(), 0);
        assert!(c.log_mass > 0.0);
    }
}
