use approx::assert_relative_eq;
use proptest::prelude::*;

use thetacm::kernels::{kernel_h, kernel_rho};
use thetacm::specfun::{digamma, lgamma, EvalPoint};
use thetacm::theta::{identric_mean, theta, theta1, AlphaExponent};

fn p(x: f64) -> EvalPoint {
    EvalPoint::new(x).unwrap()
}

proptest! {
    #[test]
    fn digamma_recurrence(x in 1e-3f64..1e3) {
        let lhs = digamma(p(x + 1.0));
        let rhs = digamma(p(x)) + 1.0 / x;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()));
    }

    #[test]
    fn ln_gamma_recurrence(x in 1e-2f64..1e2) {
        let lhs = lgamma(p(x + 1.0));
        let rhs = lgamma(p(x)) + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn theta1_lies_between_half_and_one(x in 1e-6f64..1e6) {
        let v = theta1(p(x));
        prop_assert!(v > 0.5 && v < 1.0, "theta1({x}) = {v}");
    }

    #[test]
    fn theta1_is_decreasing(x in 1e-3f64..1e3, r in 1.01f64..2.0) {
        prop_assert!(theta1(p(x * r)) < theta1(p(x)));
    }

    #[test]
    fn theta_alpha_is_power_times_theta1(a in -2f64..3.0, x in 1e-2f64..1e2) {
        let v = theta(AlphaExponent::new(a).unwrap(), p(x));
        assert_relative_eq!(v, x.powf(a - 1.0) * theta1(p(x)), max_relative = 1e-13);
    }

    #[test]
    fn kernel_complement(t in -30f64..30.0) {
        prop_assert!((kernel_h(t) + kernel_rho(t) - 1.0).abs() < 4e-16);
    }

    #[test]
    fn identric_mean_is_symmetric_and_between(x in 1e-2f64..1e2, y in 1e-2f64..1e2) {
        prop_assume!((x - y).abs() > 1e-6 * x.max(y));
        let i = identric_mean(p(x), p(y)).unwrap();
        prop_assert_eq!(i, identric_mean(p(y), p(x)).unwrap());
        prop_assert!(i > x.min(y) && i < x.max(y));
    }
}
