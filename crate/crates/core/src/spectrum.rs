//! The multifractal spectrum `β(α)`: the singular integral `I(α, β)` whose
//! zero defines it, the leaf-height transform `Φ(α)`, the constant `γ`, and
//! the moment recursion for `e_n(α) = E[Σ_l ν(l)^{α+1}]` over uniform trees.

use num_traits::{One, Zero};
use statrs::function::beta::beta as beta_fn;
use statrs::function::gamma::ln_gamma;

use crate::combinatorics::{c_limit, c_weight, catalan, split_prob, ExactRational, LogWeightTable};
use crate::error::{Error, Result};
use crate::measure::{compute_measure, log_sum_exp};
use crate::quadrature::{integrate_lower_half, integrate_unit, ln_pair, Estimate, QuadratureConfig};
use crate::tree::enumerate_all;

/// Default cap on the moment recursion length.
pub const MOMENT_CAP: usize = 20_000;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// `ln c(x)` given `x` and `1 − x`.
fn ln_c_pair(x: f64, y: f64) -> f64 {
    if x < 0.5 {
        2.0 * x.ln() + (3.0 - 2.0 * x).ln()
    } else {
        (-c_limit(y)).ln_1p()
    }
}

fn p_pair(x: f64, y: f64) -> f64 {
    (x * y).powf(-1.5)
}

/// `I(α, β) = ∫_0^1 (c(x)^{α+1} x^{−β} + c(1−x)^{α+1} (1−x)^{−β} − 1) p(x) dx`,
/// finite exactly when `β < 2α + 3/2`.
pub fn integral_i(alpha: f64, beta: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    let bound = 2.0 * alpha + 1.5;
    if !(beta < bound) {
        return Err(Error::Diverges { beta, bound });
    }
    let a1 = alpha + 1.0;
    // The integrand is symmetric under x ↔ 1 − x.
    let half = integrate_lower_half(
        |x, y| {
            let lc = ln_c_pair(x, y);
            let near = (a1 * lc - beta * x.ln()).exp();
            let far = (a1 * (-c_limit(x)).ln_1p() - beta * (-x).ln_1p()).exp_m1();
            (near + far) * p_pair(x, y)
        },
        cfg,
    );
    Ok(Estimate { value: 2.0 * half.value, error: 2.0 * half.error, panels: half.panels })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumResult {
    pub alpha: f64,
    pub beta: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub residual: f64,
}

/// Root-finder settings for `β(α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootConfig {
    /// Search no lower than `−lower_limit`.
    pub lower_limit: f64,
    pub width: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig { lower_limit: 1e3, width: 1e-12 }
    }
}

/// The unique zero of the increasing map `β ↦ I(α, β)`.
pub fn beta_of_alpha(alpha: f64, cfg: &QuadratureConfig) -> Result<SpectrumResult> {
    beta_of_alpha_with(alpha, cfg, &RootConfig::default())
}

pub fn beta_of_alpha_with(alpha: f64, cfg: &QuadratureConfig, root: &RootConfig) -> Result<SpectrumResult> {
    let bound = 2.0 * alpha + 1.5;
    let eval = |b: f64| integral_i(alpha, b, cfg).map(|e| e.value);
    let mut iterations = 0;

    let mut gap = 0.1;
    let mut hi = bound - gap;
    let mut f_hi = eval(hi)?;
    while f_hi <= 0.0 && gap > 1e-8 {
        gap /= 2.0;
        hi = bound - gap;
        f_hi = eval(hi)?;
        iterations += 1;
    }
    let mut step = 1.0;
    let mut lo = hi - step;
    let mut f_lo = eval(lo)?;
    while f_lo > 0.0 {
        if lo < -root.lower_limit || f_hi <= 0.0 {
            return Err(Error::NoBracket { alpha, lo, hi, f_lo, f_hi });
        }
        hi = lo;
        f_hi = f_lo;
        step *= 2.0;
        lo = hi - step;
        f_lo = eval(lo)?;
        iterations += 1;
    }
    if f_hi < 0.0 {
        return Err(Error::NoBracket { alpha, lo, hi, f_lo, f_hi });
    }
    if f_lo == 0.0 {
        return Ok(SpectrumResult { alpha, beta: lo, bracket: (lo, lo), iterations, residual: 0.0 });
    }

    while hi - lo > root.width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(SpectrumResult { alpha, beta: mid, bracket: (lo, hi), iterations, residual: 0.0 });
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let mut beta = if f_hi.abs() < f_lo.abs() { hi } else { lo };
    let mut residual = f_hi.abs().min(f_lo.abs());
    if f_hi != f_lo {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if secant > lo && secant < hi {
            let r = eval(secant)?.abs();
            iterations += 1;
            if r <= residual {
                beta = secant;
                residual = r;
            }
        }
    }
    Ok(SpectrumResult { alpha, beta, bracket: (lo, hi), iterations, residual })
}

/// `β(α)` over a grid of `α` values.
pub fn spectrum_grid(alphas: &[f64], cfg: &QuadratureConfig) -> Result<Vec<SpectrumResult>> {
    alphas.iter().map(|&a| beta_of_alpha(a, cfg)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiValue {
    pub quadrature: Estimate,
    pub closed_form: f64,
}

/// `Φ(α) = (1/√(2π)) ∫_0^1 (1 − c(x)x^α − c(1−x)(1−x)^α) p(x) dx` by
/// quadrature, next to `2√2 α Γ(3/2 + α) / Γ(2 + α)`.
pub fn phi(alpha: f64, cfg: &QuadratureConfig) -> Result<PhiValue> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("phi needs alpha >= 0, got {alpha}")));
    }
    let half = integrate_lower_half(
        |x, y| {
            let c = c_limit(x);
            // 1 − c x^α − (1 − c)(1 − x)^α, regrouped to avoid cancellation.
            let one_minus_far = -(alpha * (-x).ln_1p()).exp_m1();
            let v = one_minus_far - c * x.powf(alpha) + c * y.powf(alpha);
            v * p_pair(x, y)
        },
        cfg,
    );
    let quadrature = Estimate {
        value: 2.0 * half.value / SQRT_2PI,
        error: 2.0 * half.error / SQRT_2PI,
        panels: half.panels,
    };
    let closed_form = if alpha == 0.0 {
        0.0
    } else {
        2.0 * std::f64::consts::SQRT_2 * alpha * (ln_gamma(1.5 + alpha) - ln_gamma(2.0 + alpha)).exp()
    };
    Ok(PhiValue { quadrature, closed_form })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaConstant {
    /// `∫_0^1 (−log c(x)) c(x) p(x) dx`.
    pub numerator: Estimate,
    /// `∫_0^1 (−log x) c(x) p(x) dx`.
    pub denominator: Estimate,
    pub ratio: f64,
}

/// `γ` as the ratio of the two drift integrals.
pub fn gamma_constant(cfg: &QuadratureConfig) -> GammaConstant {
    let numerator = integrate_unit(|x, y| -ln_c_pair(x, y) * c_of_pair(x, y) * p_pair(x, y), cfg);
    let denominator = integrate_unit(|x, y| -ln_pair(x, y) * c_of_pair(x, y) * p_pair(x, y), cfg);
    GammaConstant { numerator, denominator, ratio: numerator.value / denominator.value }
}

fn c_of_pair(x: f64, y: f64) -> f64 {
    if x < 0.5 {
        c_limit(x)
    } else {
        1.0 - c_limit(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaIdentity {
    pub quadrature: Estimate,
    pub closed_form: f64,
}

/// `∫_0^1 (1 − x^α − (1−x)^α)(x(1−x))^{−3/2} dx` by quadrature, next to
/// `4α(B(α + 1/2, 1/2) − B(3/2, α − 1/2))`. Needs `α > 1/2`.
pub fn beta_function_identity(alpha: f64, cfg: &QuadratureConfig) -> Result<BetaIdentity> {
    if !(alpha > 0.5) {
        return Err(Error::InvalidArgument(format!("identity needs alpha > 1/2, got {alpha}")));
    }
    let half = integrate_lower_half(
        |x, y| (-(alpha * (-x).ln_1p()).exp_m1() - x.powf(alpha)) * p_pair(x, y),
        cfg,
    );
    let quadrature = Estimate { value: 2.0 * half.value, error: 2.0 * half.error, panels: half.panels };
    let closed_form = 4.0 * alpha * (beta_fn(alpha + 0.5, 0.5) - beta_fn(1.5, alpha - 0.5));
    Ok(BetaIdentity { quadrature, closed_form })
}

/// `log e_n(α)` for `n = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    pub alpha: f64,
    pub log_e: Vec<f64>,
}

impl MomentTable {
    pub fn n_max(&self) -> usize {
        self.log_e.len() - 1
    }

    pub fn e(&self, n: usize) -> f64 {
        self.log_e[n].exp()
    }
}

pub fn moment_recursion(alpha: f64, n_max: usize) -> Result<MomentTable> {
    moment_recursion_with_cap(alpha, n_max, MOMENT_CAP)
}

/// `e_0 = 1` and `e_n = 2 Σ_{a<n} P(a, n−1−a) C(a, n−1−a)^{α+1} e_a`, the
/// profile decomposition folded by symmetry, evaluated in the log domain.
pub fn moment_recursion_with_cap(alpha: f64, n_max: usize, cap: usize) -> Result<MomentTable> {
    if n_max > cap {
        return Err(Error::AboveCap { what: "moment recursion length", n: n_max, cap });
    }
    let table = LogWeightTable::new(n_max);
    let ln_int: Vec<f64> = (0..=3 * n_max + 3).map(|k| (k as f64).ln()).collect();
    let a1 = alpha + 1.0;
    let mut log_e = Vec::with_capacity(n_max + 1);
    log_e.push(0.0);
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nf = n as f64;
        let ln_den = (nf * (nf + 1.0) * (2.0 * nf + 1.0)).ln();
        terms.clear();
        for a in 0..n {
            let ln_c = ln_int[a + 1] + ln_int[2 * a + 1] + ln_int[3 * n - 2 * a] - ln_den;
            terms.push(table.ln_split_prob(a, n - 1 - a) + a1 * ln_c + log_e[a]);
        }
        log_e.push(std::f64::consts::LN_2 + log_sum_exp(&terms));
    }
    Ok(MomentTable { alpha, log_e })
}

/// The same recursion in exact rationals, for integer `α ≥ −1`.
pub fn moment_recursion_exact(alpha: i64, n_max: usize) -> Result<Vec<ExactRational>> {
    if alpha < -1 {
        return Err(Error::InvalidArgument(format!("exact moments need alpha >= -1, got {alpha}")));
    }
    let k = (alpha + 1) as u32;
    let mut e = vec![ExactRational::one()];
    for n in 1..=n_max {
        let mut s = ExactRational::zero();
        for (a, ea) in e.iter().enumerate() {
            let b = n - 1 - a;
            s += split_prob(a, b) * num_traits::pow(c_weight(a, b), k as usize) * ea;
        }
        e.push(s * ExactRational::from_integer(2.into()));
    }
    Ok(e)
}

/// `(1/Cat(n)) Σ_{t ∈ T_n} Σ_l ν_t(l)^{α+1}` by enumeration.
pub fn moment_by_enumeration(alpha: i64, n: usize) -> Result<ExactRational> {
    if alpha < -1 {
        return Err(Error::InvalidArgument(format!("exact moments need alpha >= -1, got {alpha}")));
    }
    let k = (alpha + 1) as usize;
    let mut total = ExactRational::zero();
    for t in enumerate_all(n)? {
        let m = compute_measure(&t);
        for mass in m.exact_masses().expect("small trees are exact") {
            total += num_traits::pow(mass.clone(), k);
        }
    }
    Ok(total / catalan(n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub window: (usize, usize),
    /// Least-squares slope of `−log e_n` against `log n`.
    pub slope: f64,
    pub intercept: f64,
    /// `(n, −log(e_{2n}/e_n)/log 2)` for dyadic `n` with `2n` in the window.
    pub dyadic: Vec<(usize, f64)>,
}

impl SlopeFit {
    /// The dyadic estimate from the top of the window.
    pub fn dyadic_last(&self) -> f64 {
        self.dyadic.last().map(|d| d.1).unwrap_or(f64::NAN)
    }
}

pub fn slope_fit(table: &MomentTable, window: (usize, usize)) -> Result<SlopeFit> {
    let (lo, hi) = window;
    if lo < 2 || hi <= lo || hi > table.n_max() {
        return Err(Error::DegenerateWindow { lo, hi, reason: "need 2 <= lo < hi <= table length" });
    }
    let pts: Vec<(f64, f64)> = (lo..=hi).map(|n| ((n as f64).ln(), -table.log_e[n])).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let mut dyadic = Vec::new();
    let mut n = lo;
    while 2 * n <= hi {
        dyadic.push((n, -(table.log_e[2 * n] - table.log_e[n]) / std::f64::consts::LN_2));
        n *= 2;
    }
    Ok(SlopeFit { window, slope, intercept: my - slope * mx, dyadic })
}
