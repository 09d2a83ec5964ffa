//! Numerically stable scalar functions.

/// `1 / (1 + e^{-x})`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log(y!)`.
pub fn ln_factorial(y: f64) -> f64 {
    statrs::function::gamma::ln_gamma(y + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_extremes() {
        assert_eq!(softplus(-800.0), 0.0);
        assert_eq!(softplus(800.0), 800.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn logistic_is_symmetric() {
        for x in [-40.0, -3.0, 0.0, 0.5, 12.0] {
            assert!((logistic(x) + logistic(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn log_add_exp_matches_direct() {
        assert!((log_add_exp(0.3, -1.2) - (0.3f64.exp() + (-1.2f64).exp()).ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(1000.0, 0.0), 1000.0);
    }

    #[test]
    fn factorials() {
        assert!((ln_factorial(3.0) - 6f64.ln()).abs() < 1e-12);
        assert!(ln_factorial(0.0).abs() < 1e-15);
    }
}
