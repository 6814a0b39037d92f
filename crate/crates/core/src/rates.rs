//! Deterministic rate evaluators: sensing rate, instantaneous sum
//! communication rate, the closed-form ergodic communication rate for fixed
//! powers over Gamma-distributed effective gains, high-SNR asymptotes, and
//! the frequency-division (FDSAC) rates.

use thiserror::Error;

use crate::allocation::PowerAllocation;
use crate::linalg::CMat;
use crate::model::{SensingCorrelation, SystemConfig};
use crate::specfun::{self, SpecFunError};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("stream power {0} must be positive")]
    NonPositivePower(f64),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// A sensing-rate / communication-rate pair in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTuple {
    pub sr: f64,
    pub cr: f64,
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN2
}

/// Sensing rate of a diagonal-in-eigenbasis precoder:
/// `(N/L) sum log2(1 + L lambda_m s_m)`.
pub fn sensing_rate(powers: &[f64], corr: &SensingCorrelation, cfg: &SystemConfig) -> f64 {
    let l = cfg.l as f64;
    let nats: f64 = corr
        .lambdas()
        .iter()
        .zip(powers)
        .map(|(&lam, &s)| (l * lam * s).ln_1p())
        .sum();
    (cfg.n as f64 / cfg.l as f64) * nats / LN2
}

/// Sensing rate of an arbitrary precoder `W`:
/// `(N/L) log2 det(I + L W^H R W)`. Agrees with [`sensing_rate`] when
/// `W = U diag(powers)^(1/2)`.
pub fn sensing_rate_precoder(w: &CMat, corr: &SensingCorrelation, cfg: &SystemConfig) -> f64 {
    let m = corr.dim();
    let l = cfg.l as f64;
    let inner = w.adjoint().mul(corr.matrix()).mul(w);
    let mut a = CMat::identity(m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] += l * inner[(i, j)];
        }
    }
    let logdet = a.log_det_hpd().expect("I + L W^H R W must be positive definite");
    (cfg.n as f64 / cfg.l as f64) * logdet / LN2
}

/// Instantaneous sum communication rate `sum log2(1 + p_m rho_m)`.
pub fn comm_sum_rate(powers: &[f64], rho: &[f64]) -> f64 {
    powers.iter().zip(rho).map(|(&p, &r)| log2_1p(p * r)).sum()
}

/// Mean of `ln(1 + s X)` in nats for `X ~ Gamma(kprime + 1, 1)`, through the
/// identity `E[ln(1+sX)] = e^(1/s) sum_{i=1..kprime+1} E_i(1/s)` whose terms
/// are all positive (no cancellation).
///
/// An exactly zero power is an inactive stream and contributes zero; only
/// negative powers are a domain error.
fn ecr_single_nats(s: f64, kprime: usize) -> Result<f64, RateError> {
    if s == 0.0 {
        return Ok(0.0);
    }
    if !(s > 0.0) {
        return Err(RateError::NonPositivePower(s));
    }
    if s < 1e-6 {
        // Two-term expansion around s = 0; the truncation error is far below
        // the evaluation noise of the scaled-E_n route at x = 1/s > 1e6.
        let k1 = (kprime + 1) as f64;
        return Ok(s * k1 - 0.5 * s * s * k1 * (k1 + 1.0));
    }
    let x = 1.0 / s;
    let mut acc = 0.0;
    for i in 1..=(kprime as u32 + 1) {
        acc += specfun::gen_exp_integral_scaled(i, x)?;
    }
    Ok(acc)
}

/// Sum ergodic communication rate for fixed per-stream powers `s_star` with
/// effective gains `rho_m ~ Gamma(kprime + 1, 1)`, bits/s/Hz.
pub fn ecr_closed_form(s_star: &[f64], kprime: usize) -> Result<f64, RateError> {
    let mut acc = 0.0;
    for &s in s_star {
        acc += ecr_single_nats(s, kprime)?;
    }
    Ok(acc / LN2)
}

/// The same expectation written as the finite alternating sum
/// `sum_j (-1/s)^j / j! * (e^(1/s) E1(1/s) + sum_{i=1..j} (i-1)! (-s)^i)`.
///
/// Algebraically identical to [`ecr_closed_form`]; kept as an independent
/// checksum route. The alternating terms cancel badly for extreme `s`, so
/// agreement is only asserted for moderate powers.
pub fn ecr_closed_form_alternating(s_star: &[f64], kprime: usize) -> Result<f64, RateError> {
    let mut total = 0.0;
    for &s in s_star {
        if s == 0.0 {
            continue;
        }
        if !(s > 0.0) {
            return Err(RateError::NonPositivePower(s));
        }
        let e1s = specfun::exp_integral_e1_scaled(1.0 / s)?;
        let mut coef = 1.0; // (-1/s)^j / j!
        let mut stream = 0.0;
        for j in 0..=kprime {
            if j > 0 {
                coef *= -1.0 / (s * j as f64);
            }
            let mut inner = e1s;
            let mut fact_pow = 1.0; // (i-1)! (-s)^i
            for i in 1..=j {
                fact_pow *= if i == 1 { -s } else { -(s * (i as f64 - 1.0)) };
                inner += fact_pow;
            }
            stream += coef * inner;
        }
        total += stream;
    }
    Ok(total / LN2)
}

/// High-SNR sensing-rate line: `(NM/L) (log2 p + offset)` with the constant
/// returned by [`sr_asymptote_offset`].
pub fn asymptote_sr(corr: &SensingCorrelation, cfg: &SystemConfig, p: f64) -> f64 {
    (cfg.n as f64 * cfg.m as f64 / cfg.l as f64) * (p.log2() + sr_asymptote_offset(corr, cfg))
}

/// `(1/M) sum log2(L lambda_m / M)`.
pub fn sr_asymptote_offset(corr: &SensingCorrelation, cfg: &SystemConfig) -> f64 {
    let m = cfg.m as f64;
    let l = cfg.l as f64;
    corr.lambdas().iter().map(|&lam| (l * lam / m).log2()).sum::<f64>() / m
}

/// High-SNR ergodic communication rate line:
/// `M (log2 p - log2 M + psi(K'+1)/ln 2)`.
pub fn asymptote_ecr(cfg: &SystemConfig, p: f64) -> f64 {
    let m = cfg.m as f64;
    let psi = specfun::digamma((cfg.kprime() + 1) as f64)
        .expect("kprime + 1 is a positive integer");
    m * (p.log2() - m.log2() + psi / LN2)
}

/// High-SNR FDSAC communication line: slope `kappa M` with the power and
/// band fractions folded into the offset. Zero when either fraction is zero.
pub fn fdsac_asymptote_cr(cfg: &SystemConfig, p: f64, kappa: f64, mu: f64) -> f64 {
    if kappa <= 0.0 || mu <= 0.0 {
        return 0.0;
    }
    let m = cfg.m as f64;
    let psi = specfun::digamma((cfg.kprime() + 1) as f64)
        .expect("kprime + 1 is a positive integer");
    kappa * m * ((mu * p).log2() - (m * kappa).log2() + psi / LN2)
}

/// High-SNR FDSAC sensing line: slope `(1-kappa) NM/L`.
pub fn fdsac_asymptote_sr(
    corr: &SensingCorrelation,
    cfg: &SystemConfig,
    p: f64,
    kappa: f64,
    mu: f64,
) -> f64 {
    if kappa >= 1.0 || mu >= 1.0 {
        return 0.0;
    }
    let m = cfg.m as f64;
    let l = cfg.l as f64;
    let offset = corr
        .lambdas()
        .iter()
        .map(|&lam| (l * lam / ((1.0 - kappa) * m)).log2())
        .sum::<f64>()
        / m;
    (1.0 - kappa) * (cfg.n as f64 * m / l) * (((1.0 - mu) * p).log2() + offset)
}

/// FDSAC rates for one realization: communication over the `kappa` band with
/// powers `a_m`, sensing over the complement with powers `b_m`.
pub fn fdsac_rates(
    comm: &PowerAllocation,
    sense: &PowerAllocation,
    rho: &[f64],
    corr: &SensingCorrelation,
    cfg: &SystemConfig,
    kappa: f64,
) -> RateTuple {
    let cr = if kappa == 0.0 {
        0.0
    } else {
        comm.powers
            .iter()
            .zip(rho)
            .map(|(&a, &r)| kappa * log2_1p(a * r / kappa))
            .sum()
    };
    let sr = if kappa == 1.0 {
        0.0
    } else {
        let l = cfg.l as f64;
        let band = 1.0 - kappa;
        let nats: f64 = sense
            .powers
            .iter()
            .zip(corr.lambdas())
            .map(|(&b, &lam)| (l * lam * b / band).ln_1p())
            .sum();
        (cfg.n as f64 * band / l) * nats / LN2
    };
    RateTuple { sr, cr }
}
