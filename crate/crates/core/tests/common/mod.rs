//! Shared oracles for the integration tests. Everything here is independent
//! of the library's computational paths: plain quadrature, low-discrepancy
//! sequences, and textbook distribution formulas.

#![allow(dead_code)]

use rand::Rng;

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let s = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        (s, m)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm) = simpson_rule(f, a, 0.5 * (a + b));
        let _ = lm;
        let (right, _) = simpson_rule(f, 0.5 * (a + b), b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, 0.5 * (a + b), left, 0.5 * tol, depth - 1)
                + recurse(f, 0.5 * (a + b), b, right, 0.5 * tol, depth - 1)
        }
    }
    let (whole, _) = simpson_rule(f, a, b);
    recurse(f, a, b, whole, tol, 40)
}

/// Radical-inverse Halton point, one dimension.
pub fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// CDF of Gamma(shape k integer, scale 1): 1 - e^-x sum_{i<k} x^i/i!.
pub fn erlang_cdf(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..k {
        term *= x / i as f64;
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

/// Gamma(shape k integer, scale 1) draw as a sum of exponentials.
pub fn gamma_int<R: Rng>(rng: &mut R, k: usize) -> f64 {
    let mut acc = 0.0;
    for _ in 0..k {
        let u: f64 = rng.gen_range(1e-300..1.0);
        acc -= u.ln();
    }
    acc
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Least-squares slope of y against x.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}
