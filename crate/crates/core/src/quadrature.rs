//! Adaptive Gauss–Kronrod (7/15) quadrature with power-law endpoint
//! substitutions for the singular integrals on the unit interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Maximum number of panels in the adaptive subdivision.
    pub max_panels: usize,
    /// Kronrod nodes per panel (fixed rule; informational).
    pub nodes_per_panel: usize,
    /// Exponent `k` of the endpoint substitution `x = u^k`.
    pub substitution_exponent: i32,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            max_panels: 4000,
            nodes_per_panel: 15,
            substitution_exponent: 2,
            abs_tol: 1e-12,
            rel_tol: 1e-14,
        }
    }
}

/// An integral with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

impl Estimate {
    pub fn converged(&self, cfg: &QuadratureConfig) -> bool {
        self.error <= cfg.abs_tol.max(cfg.rel_tol * self.value.abs())
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `∫_a^b f`, bisecting the panel with the largest error until the total
/// error meets the tolerance or the panel budget is spent.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> Estimate {
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let (mut total, mut err) = (value, error);
    while heap.len() < cfg.max_panels && err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated rounding in the running totals.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Estimate { value, error, panels: heap.len() }
}

/// Below this fraction of the substituted range the integrand is replaced
/// by a fitted power law.
const CORE: f64 = 1e-8;

/// `∫_0^u g` for `g(u) ≈ C u^s`, with `s` fitted at `u` and `u/2`.
fn power_law_core(g: &impl Fn(f64) -> f64, u: f64) -> f64 {
    let (f1, f2) = (g(u), g(0.5 * u));
    if f1 == 0.0 {
        return 0.0;
    }
    if f2 / f1 <= 0.0 {
        return f1 * u;
    }
    let s = -(f2 / f1).log2();
    if s <= -1.0 {
        f64::INFINITY.copysign(f1)
    } else {
        f1 * u / (s + 1.0)
    }
}

/// `∫_0^len f(s) ds` for `f` with an integrable power singularity at
/// `s = 0`, via `s = u^k`. The piece next to the singular end is a fitted
/// power law; its error is the drift of that fit over one halving.
pub fn integrate_from_singular(f: impl Fn(f64) -> f64, len: f64, cfg: &QuadratureConfig) -> Estimate {
    let k = cfg.substitution_exponent;
    let kf = k as f64;
    let top = len.powf(1.0 / kf);
    let g = |u: f64| f(u.powi(k)) * kf * u.powi(k - 1);
    let u1 = CORE * top;
    let core = power_law_core(&g, u1);
    let inner = power_law_core(&g, 0.5 * u1);
    let core_error = (core - inner - integrate(g, 0.5 * u1, u1, cfg).value).abs();
    let body = integrate(g, u1, top, cfg);
    Estimate { value: body.value + core, error: body.error + core_error, panels: body.panels + 1 }
}

/// `∫_0^{1/2} f(x, 1 − x) dx` with the substitution at `x = 0`.
pub fn integrate_lower_half(f: impl Fn(f64, f64) -> f64, cfg: &QuadratureConfig) -> Estimate {
    integrate_from_singular(|x| f(x, 1.0 - x), 0.5, cfg)
}

/// `∫_0^1 f(x, 1 − x) dx` for integrands singular at both ends. Each half
/// is substituted from its own endpoint, so `1 − x` is never formed by
/// cancellation near `x = 1`.
pub fn integrate_unit(f: impl Fn(f64, f64) -> f64, cfg: &QuadratureConfig) -> Estimate {
    let lo = integrate_from_singular(|x| f(x, 1.0 - x), 0.5, cfg);
    let hi = integrate_from_singular(|y| f(1.0 - y, y), 0.5, cfg);
    Estimate { value: lo.value + hi.value, error: lo.error + hi.error, panels: lo.panels + hi.panels }
}

/// `ln x` given both `x` and `y = 1 − x`, accurate near either end.
pub fn ln_pair(x: f64, y: f64) -> f64 {
    if x < 0.5 {
        x.ln()
    } else {
        (-y).ln_1p()
    }
}
