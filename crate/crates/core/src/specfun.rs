//! Real-domain special functions: exponential integrals E1/Ei (plus the
//! generalized E_n in exponentially-scaled form), digamma, and log-gamma.
//!
//! Everything is evaluated for positive real arguments only, which is all the
//! rate expressions need. Split points between series / continued-fraction /
//! asymptotic branches are chosen so truncation stays below 1e-13.

use thiserror::Error;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {got} outside domain of {function} (requires {requirement})")]
    Domain { function: &'static str, got: f64, requirement: &'static str },
}

/// Value together with a conservative absolute-error estimate.
///
/// Within the documented per-function domains (see each `*_bounded` wrapper)
/// the estimate stays below 1e-12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub est_abs_err: f64,
}

fn domain(function: &'static str, got: f64, requirement: &'static str) -> SpecFunError {
    SpecFunError::Domain { function, got, requirement }
}

/// E1(x) = int_x^inf e^-t / t dt for x > 0.
///
/// Power series up to x = 1, modified-Lentz continued fraction beyond.
pub fn exp_integral_e1(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(domain("E1", x, "x > 0"));
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_cf_scaled(x) * (-x).exp())
    }
}

/// e^x E1(x), safe against underflow of e^-x for large x.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(domain("E1", x, "x > 0"));
    }
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(e1_cf_scaled(x))
    }
}

fn e1_series(x: f64) -> f64 {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k * k!)
    let mut term = 1.0; // (-x)^k / k!
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let delta = term / k as f64;
        sum += delta;
        if delta.abs() < 1e-18 * (sum.abs() + 1.0) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_cf_scaled(x: f64) -> f64 {
    // e^x E1(x) = 1 / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..400u32 {
        let a = -((i as f64) * (i as f64));
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// e^x E_n(x) for the generalized exponential integral
/// E_n(x) = int_1^inf e^{-x t} t^{-n} dt, n >= 1, x > 0.
///
/// Each order is evaluated directly (series for x <= 1, continued fraction
/// beyond); the upward recurrence in n would amplify absolute error by x/k
/// per step and is useless at the large x = 1/s this crate needs.
pub fn gen_exp_integral_scaled(n: u32, x: f64) -> Result<f64, SpecFunError> {
    if n == 0 {
        return Err(domain("En", 0.0, "n >= 1"));
    }
    if !(x > 0.0) {
        return Err(domain("En", x, "x > 0"));
    }
    if n == 1 {
        return exp_integral_e1_scaled(x);
    }
    if x <= 1.0 {
        Ok(x.exp() * en_series(n, x))
    } else {
        Ok(en_cf_scaled(n, x))
    }
}

fn en_series(n: u32, x: f64) -> f64 {
    // E_n(x) = [(-x)^(n-1)/(n-1)!] (psi(n) - ln x)
    //          - sum_{i >= 0, i != n-1} (-x)^i / ((i - n + 1) i!)
    let nm1 = (n - 1) as i64;
    let mut psi = -EULER_GAMMA;
    for k in 1..n {
        psi += 1.0 / k as f64;
    }
    let mut pow = 1.0; // (-x)^i / i!
    let mut sum = 0.0;
    let mut lead = 0.0;
    for i in 0..200i64 {
        if i == nm1 {
            lead = pow * (psi - x.ln());
        } else {
            let delta = -pow / (i - nm1) as f64;
            sum += delta;
            if i > nm1 && delta.abs() < 1e-18 * (sum.abs() + lead.abs() + 1e-30) {
                break;
            }
        }
        pow *= -x / (i + 1) as f64;
    }
    lead + sum
}

fn en_cf_scaled(n: u32, x: f64) -> f64 {
    let nm1 = (n - 1) as f64;
    let tiny = 1e-300;
    let mut b = x + n as f64;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..400u32 {
        let a = -(i as f64) * (nm1 + i as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Ei(x) for x > 0 (principal value), via the ascending series
/// Ei(x) = gamma + ln x + sum_{k>=1} x^k / (k * k!).
///
/// Relative accuracy ~1e-14; the absolute error therefore scales with the
/// (rapidly growing) value, staying below 1e-12 for x <= 6.
pub fn exp_integral_ei(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(domain("Ei", x, "x > 0 (use E1 for negative arguments)"));
    }
    if x > 700.0 {
        return Err(domain("Ei", x, "x <= 700 (overflow)"));
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..500 {
        term *= x / k as f64;
        let delta = term / k as f64;
        sum += delta;
        if delta < 1e-17 * sum {
            break;
        }
    }
    Ok(EULER_GAMMA + x.ln() + sum)
}

/// Digamma psi(x) = d/dx ln Gamma(x) for x > 0.
///
/// Recurrence up to x >= 8, then the asymptotic expansion
/// psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k}).
pub fn digamma(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(domain("digamma", x, "x > 0"));
    }
    // B_{2k}/(2k) for k = 1..7.
    const COEFF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut result = 0.0;
    let mut y = x;
    while y < 8.0 {
        result -= 1.0 / y;
        y += 1.0;
    }
    result += y.ln() - 0.5 / y;
    let inv2 = 1.0 / (y * y);
    let mut pow = inv2;
    for c in COEFF {
        result -= c * pow;
        pow *= inv2;
    }
    Ok(result)
}

/// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 coefficients).
pub fn log_gamma(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(domain("log_gamma", x, "x > 0"));
    }
    const LANCZOS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // ln Gamma(x) = ln Gamma(x + 1) - ln x
        return Ok(log_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + 7.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln())
}

// --- wrappers carrying error estimates ---

/// E1 with error estimate; documented domain for the 1e-12 bound: (0, 500].
pub fn e1_bounded(x: f64) -> Result<SpecFunResult, SpecFunError> {
    let value = exp_integral_e1(x)?;
    Ok(SpecFunResult { value, est_abs_err: 4.0 * f64::EPSILON * (value.abs() + 1.0) })
}

/// Ei with error estimate; documented domain for the 1e-12 bound: (0, 6].
pub fn ei_bounded(x: f64) -> Result<SpecFunResult, SpecFunError> {
    let value = exp_integral_ei(x)?;
    let terms = (3.0 * x).max(8.0);
    Ok(SpecFunResult { value, est_abs_err: terms * f64::EPSILON * value.abs().max(1.0) })
}

/// Digamma with error estimate; documented domain for the 1e-12 bound: (0, 1e8].
pub fn digamma_bounded(x: f64) -> Result<SpecFunResult, SpecFunError> {
    let value = digamma(x)?;
    Ok(SpecFunResult { value, est_abs_err: 20.0 * f64::EPSILON * (value.abs() + 1.0) })
}

/// ln Gamma with error estimate; documented domain for the 1e-12 bound: (0, 50].
pub fn log_gamma_bounded(x: f64) -> Result<SpecFunResult, SpecFunError> {
    let value = log_gamma(x)?;
    Ok(SpecFunResult { value, est_abs_err: 8.0 * f64::EPSILON * (value.abs() + 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_reference_points() {
        assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-13);
        let v10 = exp_integral_e1(10.0).unwrap();
        assert!((v10 - 4.156_968_929_685_324e-6).abs() / v10 < 1e-10);
    }

    #[test]
    fn e1_large_argument_asymptote() {
        // x E1(x) e^x -> 1, with the leading correction -1/x.
        let v50 = exp_integral_e1_scaled(50.0).unwrap() * 50.0;
        assert!((v50 - (1.0 - 1.0 / 50.0)).abs() < 1e-3, "{v50}");
        let v100 = exp_integral_e1_scaled(100.0).unwrap() * 100.0;
        assert!((v100 - 1.0).abs() < 0.01, "{v100}");
        assert!((v100 - 1.0).abs() < (v50 - 1.0).abs());
    }

    #[test]
    fn e1_series_and_cf_agree_at_split() {
        let s = 1.0f64.exp() * e1_series(1.0);
        let c = e1_cf_scaled(1.0);
        assert!((s - c).abs() < 1e-13, "series {s} cf {c}");
    }

    #[test]
    fn ei_reference_points() {
        assert!((exp_integral_ei(1.0).unwrap() - 1.895_117_816_355_936_8).abs() < 1e-12);
        assert!((exp_integral_ei(2.0).unwrap() - 4.954_234_356_001_890).abs() < 1e-10);
    }

    #[test]
    fn ei_small_argument_limit() {
        for x in [1e-6, 1e-9, 1e-12] {
            let v = exp_integral_ei(x).unwrap() - x.ln();
            assert!((v - EULER_GAMMA).abs() < 1e-5, "x={x} v={v}");
        }
    }

    #[test]
    fn digamma_reference_points() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-13);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-13);
        // psi(5) = -gamma + 1 + 1/2 + 1/3 + 1/4
        let expect = -EULER_GAMMA + 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
        assert!((digamma(5.0).unwrap() - expect).abs() < 1e-13);
        assert!((expect - 1.506_117_668_431_800_3).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_reference_points() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-13);
        assert!((log_gamma(5.0).unwrap() - 24.0f64.ln()).abs() < 1e-12);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-12);
    }

    #[test]
    fn gen_exp_integral_recurrence_identity() {
        // E_{k+1}(x) = (e^-x - x E_k(x)) / k links the independently
        // computed orders; safe to apply at moderate x.
        for &x in &[0.3, 0.7, 2.0, 5.0] {
            for n in 1..=4u32 {
                let ek = gen_exp_integral_scaled(n, x).unwrap();
                let ek1 = gen_exp_integral_scaled(n + 1, x).unwrap();
                let rec = (1.0 - x * ek) / n as f64;
                assert!((ek1 - rec).abs() < 1e-13, "n={n} x={x}: {ek1} vs {rec}");
            }
        }
    }

    #[test]
    fn gen_exp_integral_bracketed_by_order() {
        // 1/(x+n) < e^x E_n(x) < 1/(x+n-1).
        for &x in &[0.5, 1.0, 3.0, 40.0, 1e6] {
            for n in 1..=6u32 {
                let v = gen_exp_integral_scaled(n, x).unwrap();
                assert!(v > 1.0 / (x + n as f64), "low bound n={n} x={x} v={v}");
                assert!(v < 1.0 / (x + n as f64 - 1.0), "high bound n={n} x={x} v={v}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
        assert!(exp_integral_ei(0.0).is_err());
        assert!(digamma(0.0).is_err());
        assert!(digamma(-3.0).is_err());
        assert!(log_gamma(0.0).is_err());
    }

    #[test]
    fn identity_digamma_recurrence() {
        for x in [0.5, 1.0, 3.7, 10.0] {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((lhs - 1.0 / x).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn identity_gamma_recurrence() {
        for x in [0.5, 1.0, 2.5, 9.0] {
            let lhs = log_gamma(x + 1.0).unwrap().exp();
            let rhs = x * log_gamma(x).unwrap().exp();
            assert!(((lhs - rhs) / rhs).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn error_estimates_within_documented_domains() {
        for x in [1e-6, 0.01, 0.5, 1.0, 2.0, 10.0, 100.0, 500.0] {
            assert!(e1_bounded(x).unwrap().est_abs_err <= 1e-12);
        }
        for x in [1e-6, 0.1, 1.0, 2.0, 6.0] {
            assert!(ei_bounded(x).unwrap().est_abs_err <= 1e-12);
        }
        for x in [0.1, 1.0, 7.5, 1e4, 1e8] {
            assert!(digamma_bounded(x).unwrap().est_abs_err <= 1e-12);
        }
        for x in [0.25, 0.5, 1.0, 5.0, 50.0] {
            assert!(log_gamma_bounded(x).unwrap().est_abs_err <= 1e-12);
        }
    }
}
