//! Log-scale modified Bessel function of the first kind.

use statrs::function::gamma::ln_gamma;

/// `ln I_nu(x)` for `nu >= 0`, `x >= 0`.
///
/// Uses the large-argument expansion when it converges to machine precision
/// and falls back to the ascending power series otherwise. The series has
/// only positive terms, so it is summed with periodic rescaling instead of
/// in linear scale.
pub fn ln_bessel_i(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x > 30.0 && x > nu * nu {
        if let Some(v) = ln_bessel_i_asymptotic(nu, x) {
            return v;
        }
    }
    ln_bessel_i_series(nu, x)
}

fn ln_bessel_i_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut ln_scale = 0.0_f64;
    let mut k = 0.0_f64;
    loop {
        term *= q / ((k + 1.0) * (k + nu + 1.0));
        sum += term;
        k += 1.0;
        if sum > 1e250 {
            term /= 1e250;
            sum /= 1e250;
            ln_scale += 250.0 * std::f64::consts::LN_10;
        }
        // past the peak term, stop once additions are below rounding
        if k * (k + nu) > q && term < sum * 1e-17 {
            break;
        }
    }
    nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) + sum.ln() + ln_scale
}

fn ln_bessel_i_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next == 0.0 {
            break;
        }
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    if sum <= 0.0 {
        return None;
    }
    Some(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_i_half(x: f64) -> f64 {
        // I_{1/2}(x) = sqrt(2 / (pi x)) sinh x
        0.5 * (2.0 / (std::f64::consts::PI * x)).ln() + x + (-(-2.0 * x).exp_m1()).ln() - 2f64.ln()
    }

    #[test]
    fn half_order_matches_closed_form() {
        for x in [1e-6, 0.1, 1.0, 2.0, 10.0, 29.0, 31.0, 100.0, 700.0, 1e4] {
            let got = ln_bessel_i(0.5, x);
            let want = ln_i_half(x);
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn integer_orders_match_reference_values() {
        // I_0(1), I_1(1), I_4(2.5), I_0(50) reference values
        assert!((ln_bessel_i(0.0, 1.0) - 1.266_065_877_752_008_4_f64.ln()).abs() < 1e-14);
        assert!((ln_bessel_i(1.0, 1.0) - 0.565_159_103_992_485_f64.ln()).abs() < 1e-14);
        assert!((ln_bessel_i(4.0, 2.5) - 0.137_977_166_751_878_93_f64.ln()).abs() < 1e-12);
        assert!((ln_bessel_i(0.0, 50.0) - 2.932_553_783_849_335_5e20_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn series_and_asymptotic_agree_at_switch() {
        for nu in [0.0, 0.5, 1.5, 4.0] {
            let a = ln_bessel_i_series(nu, 60.0);
            let b = ln_bessel_i_asymptotic(nu, 60.0).unwrap();
            assert!((a - b).abs() < 1e-12, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn large_order_stays_finite() {
        let v = ln_bessel_i(1142.0, 1e4);
        assert!(v.is_finite() && v > 0.0);
    }
}
