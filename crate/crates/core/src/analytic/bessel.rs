//! Modified Bessel function of the first kind, order one.
//!
//! Below [`SWITCHOVER`] the power series is summed with Kahan compensation;
//! above it the Hankel asymptotic expansion is summed until its terms stop
//! contributing (or start to grow). Both routes are public so they can be
//! checked against each other on an overlap window.

/// Argument at which evaluation switches from the series to the expansion.
pub const SWITCHOVER: f64 = 25.0;

/// `I1(x)` by its power series `sum (x/2)^(2k+1) / (k! (k+1)!)`.
pub fn i1_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut k = 0.0f64;
    loop {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        k += 1.0;
        term *= q / (k * (k + 1.0));
        if term < 1e-17 * sum || k > 500.0 {
            break;
        }
    }
    sum
}

/// Sum of the asymptotic series `1 - 3/(8x) - 15/(128x^2) - ...` that
/// multiplies `e^x / sqrt(2 pi x)`.
fn asymptotic_factor(x: f64) -> f64 {
    const MU: f64 = 4.0; // 4 nu^2 with nu = 1
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (MU - odd * odd) / (k * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `I1(x)` by the large-argument expansion. Accurate for `x >= SWITCHOVER`.
pub fn i1_asymptotic(x: f64) -> f64 {
    (x - 0.5 * (2.0 * std::f64::consts::PI * x).ln()).exp() * asymptotic_factor(x)
}

/// `ln I1(x) - x`, finite for every `x > 0`; `-inf` at zero.
pub fn ln_i1_scaled(x: f64) -> f64 {
    if x < SWITCHOVER {
        i1_series(x).ln() - x
    } else {
        asymptotic_factor(x).ln() - 0.5 * (2.0 * std::f64::consts::PI * x).ln()
    }
}

/// `ln I1(x)`.
pub fn ln_i1(x: f64) -> f64 {
    ln_i1_scaled(x) + x
}

/// `I1(x)` for `x >= 0`. Overflows to `inf` beyond roughly `x = 713`; use
/// [`ln_i1`] there.
pub fn bessel_i1(x: f64) -> f64 {
    if x < SWITCHOVER {
        i1_series(x)
    } else {
        i1_asymptotic(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero() {
        assert_eq!(bessel_i1(0.0), 0.0);
        assert_eq!(ln_i1(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn value_at_two() {
        // partial sums of the series to machine precision
        let mut exact = 0.0;
        let mut fact = [1.0f64; 30];
        for k in 1..30 {
            fact[k] = fact[k - 1] * k as f64;
        }
        for k in 0..28 {
            exact += 1.0 / (fact[k] * fact[k + 1]);
        }
        assert!((bessel_i1(2.0) - exact).abs() < 1e-15);
        assert!((bessel_i1(2.0) - 1.590_636_854_637_329).abs() < 1e-14);
    }

    #[test]
    fn overlap_at_thirty() {
        let s = i1_series(30.0);
        let a = i1_asymptotic(30.0);
        assert!(((s - a) / s).abs() <= 1e-6);
    }

    #[test]
    fn switchover_agreement() {
        let s = i1_series(SWITCHOVER);
        let a = i1_asymptotic(SWITCHOVER);
        assert!(((s - a) / s).abs() <= 1e-10, "gap {}", (s - a) / s);
    }

    #[test]
    fn scaled_log_stays_finite() {
        let v = ln_i1_scaled(1.0e6);
        let expect = -0.5 * (2.0 * std::f64::consts::PI * 1.0e6).ln();
        assert!((v - expect).abs() < 1e-6);
        assert!((ln_i1(3.0) - bessel_i1(3.0).ln()).abs() < 1e-14);
    }
}
