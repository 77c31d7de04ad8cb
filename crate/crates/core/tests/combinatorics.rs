use leafgrowth::combinatorics::*;
use leafgrowth::quadrature::{integrate_unit, ln_pair, QuadratureConfig};
use num_traits::One;
use proptest::prelude::*;

#[test]
fn weights_are_complementary() {
    for a in 0..=100 {
        for b in 0..=100 {
            assert!((c_weight(a, b) + c_weight(b, a)).is_one(), "a = {a}, b = {b}");
        }
    }
}

#[test]
fn profile_recurrence() {
    let one = ExactRational::one();
    for a in -1i64..=60 {
        for b in -1i64..=60 {
            if a < 0 && b < 0 {
                // P(0, 0) = 1 is the base case.
                continue;
            }
            let lhs = split_prob_signed(a + 1, b + 1);
            let mut rhs = ExactRational::default();
            if a >= 0 {
                rhs += split_prob_signed(a, b + 1) * c_weight(a as usize, (b + 1) as usize);
            }
            if b >= 0 {
                rhs += split_prob_signed(a + 1, b) * (&one - c_weight((a + 1) as usize, b as usize));
            }
            assert_eq!(lhs, rhs, "a = {a}, b = {b}");
        }
    }
}

#[test]
fn best_of_three_is_the_weight() {
    for a in 0..=40 {
        for b in 0..=40 {
            assert_eq!(best_of_three(a, b), c_weight(a, b));
        }
    }
}

/// `√n Σ_a P(a, n−1−a) C(a, n−1−a)^k (−log(a/n))` against
/// `(1/(4√π)) ∫ c^k (−log x) p`.
#[test]
fn riemann_sums_of_the_profile_law() {
    let n = 100_000usize;
    let table = LogWeightTable::new(n);
    let cfg = QuadratureConfig::default();
    for k in [1, 2] {
        let sum: f64 = (1..n)
            .map(|a| {
                let b = n - 1 - a;
                (table.ln_split_prob(a, b) + k as f64 * ln_c_weight(a, b)).exp() * -(a as f64 / n as f64).ln()
            })
            .sum();
        let lhs = (n as f64).sqrt() * sum;
        let integral = integrate_unit(
            |x, y| {
                let c = if x < 0.5 { c_limit(x) } else { 1.0 - c_limit(y) };
                c.powi(k) * -ln_pair(x, y) * (x * y).powf(-1.5)
            },
            &cfg,
        );
        let rhs = integral.value / (4.0 * std::f64::consts::PI.sqrt());
        assert!((lhs / rhs - 1.0).abs() < 0.01, "k = {k}: {lhs} vs {rhs}");
    }
}

proptest! {
    #[test]
    fn float_weights_match_exact(a in 0usize..400, b in 0usize..400) {
        let exact = num_traits::ToPrimitive::to_f64(&c_weight(a, b)).unwrap();
        prop_assert!((c_weight_f(a, b) - exact).abs() <= 1e-15);
        let p = num_traits::ToPrimitive::to_f64(&split_prob(a, b)).unwrap();
        prop_assert!((split_prob_f(a, b) / p - 1.0).abs() < 1e-11);
    }

    #[test]
    fn limit_approximation(n in 2usize..5000) {
        prop_assert!(approximation_error_scan(n).unwrap() <= 1.0 / n as f64);
    }

    #[test]
    fn weights_lie_in_unit_interval(a in 0usize..1000, b in 0usize..1000) {
        let c = c_weight_f(a, b);
        prop_assert!(c > 0.0 && c < 1.0);
    }
}
