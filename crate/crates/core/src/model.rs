//! System model: dimensions, sensing correlation matrices, Rayleigh channel
//! sampling, and zero-forcing effective gains.
//!
//! The downlink has one base station with `M` transmit and `N` receive
//! antennas, `M` user terminals with `K >= M` receive antennas each, and a
//! frame of `L` symbols. The precoder directions are the eigenvectors `U` of
//! the target-response correlation `R`; each user applies the normalized
//! column of `P_m (P_m^H P_m)^-1` (with `P_m = H_m U`) as equalizer, which
//! nulls inter-user interference and leaves the scalar effective gain
//! `rho_m = |v_m^H h_m|^2`.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, CMat, C64};
use crate::rng::{self, trial_rng, STREAM_CHANNEL, STREAM_TARGET, STREAM_UNITARY};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid system config: {0}")]
    InvalidConfig(String),
    #[error("eigenvalue {value} at index {index} must be positive")]
    NonPositiveEigenvalue { index: usize, value: f64 },
    #[error("correlation matrix is rank deficient: rank {rank} < {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("target scene must contain at least one target")]
    EmptyScene,
    #[error("target strength must be positive, got {0}")]
    NonPositiveStrength(f64),
}

/// Static system dimensions and budgets. Noise variance is normalized to 1,
/// so `p` is the transmit SNR in linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas at the BS = number of user terminals.
    pub m: usize,
    /// Receive antennas at the BS (sensing).
    pub n: usize,
    /// Receive antennas per user terminal.
    pub k: usize,
    /// Frame / pulse length in symbols.
    pub l: usize,
    /// Total transmit power budget (linear SNR).
    pub p: f64,
    /// Target sum communication rate for outage, bits/s/Hz.
    pub r0: f64,
}

impl SystemConfig {
    pub fn new(m: usize, n: usize, k: usize, l: usize, p: f64, r0: f64) -> Result<Self, ModelError> {
        let cfg = Self { m, n, k, l, p, r0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.m < 1 {
            return fail(format!("M must be >= 1, got {}", self.m));
        }
        if self.n < 1 {
            return fail(format!("N must be >= 1, got {}", self.n));
        }
        if self.k < self.m {
            return fail(format!("K must be >= M for zero-forcing, got K={} M={}", self.k, self.m));
        }
        if self.l < self.m {
            return fail(format!("L must be >= M, got L={} M={}", self.l, self.m));
        }
        if !(self.p > 0.0) {
            return fail(format!("p must be positive, got {}", self.p));
        }
        if !(self.r0 >= 0.0) {
            return fail(format!("R0 must be nonnegative, got {}", self.r0));
        }
        Ok(())
    }

    /// Excess receive antennas `K' = K - M`; `rho_m ~ Gamma(K'+1, 1)`.
    pub fn kprime(&self) -> usize {
        self.k - self.m
    }

    pub fn with_power(&self, p: f64) -> Self {
        Self { p, ..*self }
    }
}

/// One point reflector: average strength and direction of arrival (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub sigma2: f64,
    pub theta: f64,
}

/// A set of point targets seen through half-wavelength uniform linear arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScene {
    pub targets: Vec<Target>,
}

impl TargetScene {
    pub fn new(targets: Vec<Target>) -> Result<Self, ModelError> {
        if targets.is_empty() {
            return Err(ModelError::EmptyScene);
        }
        for t in &targets {
            if !(t.sigma2 > 0.0) {
                return Err(ModelError::NonPositiveStrength(t.sigma2));
            }
        }
        Ok(Self { targets })
    }
}

/// Steering vector of a half-wavelength ULA with `n` elements:
/// entry k is exp(i pi k sin theta).
pub fn ula_steering(n: usize, theta: f64) -> Vec<C64> {
    let s = theta.sin();
    (0..n)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 * s))
        .collect()
}

/// Correlation matrix of the target response together with its
/// eigendecomposition `R = U diag(lambda) U^H` (lambda descending, > 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SensingCorrelation {
    r: CMat,
    lambdas: Vec<f64>,
    u: CMat,
}

impl SensingCorrelation {
    /// Synthesizes `R` with the given positive eigenvalues and a seeded
    /// Haar-random eigenvector basis.
    pub fn from_eigenvalues(lambdas: &[f64], seed: u64) -> Result<Self, ModelError> {
        if lambdas.is_empty() {
            return Err(ModelError::InvalidConfig("need at least one eigenvalue".into()));
        }
        for (index, &value) in lambdas.iter().enumerate() {
            if !(value > 0.0) {
                return Err(ModelError::NonPositiveEigenvalue { index, value });
            }
        }
        let m = lambdas.len();
        let mut sorted = lambdas.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut rng = trial_rng(seed, STREAM_UNITARY, 0);
        let u = linalg::haar_unitary(m, &mut rng);
        let mut r = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for (l, &w) in sorted.iter().enumerate() {
                    acc += u[(i, l)] * w * u[(j, l)].conj();
                }
                r[(i, j)] = acc;
            }
        }
        // Force exact Hermitian symmetry against rounding.
        for i in 0..m {
            r[(i, i)] = Complex64::new(r[(i, i)].re, 0.0);
            for j in (i + 1)..m {
                let avg = 0.5 * (r[(i, j)] + r[(j, i)].conj());
                r[(i, j)] = avg;
                r[(j, i)] = avg.conj();
            }
        }
        Ok(Self { r, lambdas: sorted, u })
    }

    /// Builds `R = sum_t sigma_t^2 b(theta_t) b(theta_t)^H` from a target
    /// scene over an `m`-element transmit ULA, then eigendecomposes.
    ///
    /// The analysis requires `R` strictly positive definite, so fewer than
    /// `m` independent steering contributions is an error.
    pub fn from_scene(scene: &TargetScene, m: usize) -> Result<Self, ModelError> {
        if scene.targets.is_empty() {
            return Err(ModelError::EmptyScene);
        }
        let mut r = CMat::zeros(m, m);
        for t in &scene.targets {
            if !(t.sigma2 > 0.0) {
                return Err(ModelError::NonPositiveStrength(t.sigma2));
            }
            let b = ula_steering(m, t.theta);
            for i in 0..m {
                for j in 0..m {
                    r[(i, j)] += t.sigma2 * b[i] * b[j].conj();
                }
            }
        }
        let (lambdas, u) = r.hermitian_eig();
        let rank = lambdas.iter().filter(|&&w| w > 1e-10 * lambdas[0].max(0.0)).count();
        if rank < m {
            return Err(ModelError::RankDeficient { rank, needed: m });
        }
        Ok(Self { r, lambdas, u })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn matrix(&self) -> &CMat {
        &self.r
    }

    /// Eigenvalues in descending order, all positive.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Unitary eigenvector matrix (columns match `lambdas`).
    pub fn eigenvectors(&self) -> &CMat {
        &self.u
    }

    /// Relative Frobenius error of `R - U diag(lambda) U^H`.
    pub fn reconstruction_error(&self) -> f64 {
        let m = self.dim();
        let rec = CMat::from_fn(m, m, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &w) in self.lambdas.iter().enumerate() {
                acc += self.u[(i, l)] * w * self.u[(j, l)].conj();
            }
            acc
        });
        rec.sub(&self.r).frobenius_norm() / self.r.frobenius_norm()
    }

    pub fn unitarity_error(&self) -> f64 {
        linalg::unitarity_error(&self.u)
    }
}

/// One channel realization: the raw per-user matrices and the zero-forcing
/// effective gains derived from them.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// Per-user K x M channel matrices with i.i.d. CN(0,1) entries.
    pub h: Vec<CMat>,
    /// Effective gains rho_m = |v_m^H h_m|^2.
    pub rho: Vec<f64>,
    pub seed: u64,
    pub trial: u64,
}

impl ChannelDraw {
    /// Recomputes user `m`'s unit-norm equalizer from the stored channel:
    /// the normalized m-th column of `P_m (P_m^H P_m)^-1`, `P_m = H_m U`.
    pub fn equalizer(&self, u: &CMat, m: usize) -> Vec<C64> {
        let b = self.h[m].mul(u);
        let gram = b.adjoint().mul(&b);
        let mut flat = gram.as_slice().to_vec();
        let dim = gram.rows();
        assert!(linalg::cholesky_in_place(&mut flat, dim), "singular effective channel");
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        linalg::cholesky_solve_unit(&flat, dim, m, &mut y);
        let q = b.mul_vec(&y);
        let nq = linalg::norm(&q);
        q.into_iter().map(|z| z / nq).collect()
    }
}

static RESAMPLE_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of singular-Gram resample events observed process-wide.
pub fn resample_events() -> u64 {
    RESAMPLE_EVENTS.load(Ordering::Relaxed)
}

/// Reusable buffers for the per-trial channel computation.
#[derive(Debug, Clone)]
pub struct ChannelScratch {
    h: Vec<C64>,
    b: Vec<C64>,
    gram: Vec<C64>,
    y: Vec<C64>,
    q: Vec<C64>,
}

impl ChannelScratch {
    pub fn new(m: usize, k: usize) -> Self {
        Self {
            h: vec![Complex64::new(0.0, 0.0); k * m],
            b: vec![Complex64::new(0.0, 0.0); k * m],
            gram: vec![Complex64::new(0.0, 0.0); m * m],
            y: vec![Complex64::new(0.0, 0.0); m],
            q: vec![Complex64::new(0.0, 0.0); k],
        }
    }
}

/// Samples user channels and zero-forcing gains. Each trial is a pure
/// function of `(seed, trial)`, so streams can be consumed in any order.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    m: usize,
    k: usize,
    u: Vec<C64>,
}

impl ChannelSampler {
    pub fn new(cfg: &SystemConfig, corr: &SensingCorrelation) -> Self {
        assert_eq!(cfg.m, corr.dim(), "config M must match correlation dimension");
        Self { m: cfg.m, k: cfg.k, u: corr.eigenvectors().as_slice().to_vec() }
    }

    pub fn scratch(&self) -> ChannelScratch {
        ChannelScratch::new(self.m, self.k)
    }

    /// Effective gains for one trial, appended to `out` (cleared first).
    pub fn rho_into(
        &self,
        seed: u64,
        trial: u64,
        scratch: &mut ChannelScratch,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        let mut rng = trial_rng(seed, STREAM_CHANNEL, trial);
        for user in 0..self.m {
            let rho = self.sample_user(&mut rng, user, scratch, None);
            out.push(rho);
        }
    }

    /// Stream of `count` independent draws. Each item is a pure function of
    /// `(seed, trial index)`, so the stream can be consumed in any order or
    /// re-derived piecewise.
    pub fn sample_channels(
        &self,
        seed: u64,
        count: u64,
    ) -> impl Iterator<Item = ChannelDraw> + '_ {
        (0..count).map(move |trial| self.draw(seed, trial))
    }

    /// Full draw with the channel matrices materialized.
    pub fn draw(&self, seed: u64, trial: u64) -> ChannelDraw {
        let mut scratch = self.scratch();
        let mut rng = trial_rng(seed, STREAM_CHANNEL, trial);
        let mut h = Vec::with_capacity(self.m);
        let mut rho = Vec::with_capacity(self.m);
        for user in 0..self.m {
            let mut keep = CMat::zeros(self.k, self.m);
            let r = self.sample_user(&mut rng, user, &mut scratch, Some(&mut keep));
            h.push(keep);
            rho.push(r);
        }
        ChannelDraw { h, rho, seed, trial }
    }

    fn sample_user(
        &self,
        rng: &mut rand_chacha::ChaCha8Rng,
        user: usize,
        s: &mut ChannelScratch,
        mut keep_h: Option<&mut CMat>,
    ) -> f64 {
        let (m, k) = (self.m, self.k);
        for attempt in 0.. {
            rng::fill_standard_complex(rng, &mut s.h);
            linalg::mat_mul_into(&s.h, &self.u, &mut s.b, k, m, m);
            linalg::gram_into(&s.b, &mut s.gram, k, m);
            if linalg::cholesky_in_place(&mut s.gram, m) {
                break;
            }
            // Probability-zero event; redraw from the same per-trial stream
            // keeps the result a pure function of (seed, trial).
            RESAMPLE_EVENTS.fetch_add(1, Ordering::Relaxed);
            eprintln!("warning: singular effective channel, resampling (attempt {attempt})");
            assert!(attempt < 16, "persistent singular effective channel");
        }
        if let Some(keep) = keep_h.as_mut() {
            for i in 0..k {
                for j in 0..m {
                    keep[(i, j)] = s.h[i * m + j];
                }
            }
        }
        linalg::cholesky_solve_unit(&s.gram, m, user, &mut s.y);
        for i in 0..k {
            let row = &s.b[i * m..(i + 1) * m];
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, y) in s.y.iter().enumerate() {
                acc += row[j] * y;
            }
            s.q[i] = acc;
        }
        let nq2: f64 = s.q.iter().map(|z| z.norm_sqr()).sum();
        // h_m is the user-th column of H_m U; rho = |v^H h_m|^2 with v = q/|q|.
        let mut dot = Complex64::new(0.0, 0.0);
        for i in 0..k {
            dot += s.q[i].conj() * s.b[i * m + user];
        }
        dot.norm_sqr() / nq2
    }
}

/// Draws an `n_rows x M` target-response matrix whose rows are independent
/// CN(0, R), via `g = U diag(sqrt(lambda)) w` with `w` standard complex.
pub fn sample_target_response(corr: &SensingCorrelation, n_rows: usize, seed: u64) -> CMat {
    let m = corr.dim();
    let u = corr.eigenvectors();
    let sqrt_l: Vec<f64> = corr.lambdas().iter().map(|w| w.sqrt()).collect();
    let mut g = CMat::zeros(n_rows, m);
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    for row in 0..n_rows {
        let mut rng = trial_rng(seed, STREAM_TARGET, row as u64);
        rng::fill_standard_complex(&mut rng, &mut w);
        for i in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += u[(i, j)] * sqrt_l[j] * w[j];
            }
            // Row of G is the plain transpose of g (no conjugation).
            g[(row, i)] = acc;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv_corr() -> SensingCorrelation {
        SensingCorrelation::from_eigenvalues(&[1.0, 0.1, 0.05, 0.01], 7).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(4, 5, 4, 30, 10.0, 2.0).is_ok());
        assert!(SystemConfig::new(0, 5, 4, 30, 10.0, 2.0).is_err());
        assert!(SystemConfig::new(4, 5, 3, 30, 10.0, 2.0).is_err());
        assert!(SystemConfig::new(4, 5, 4, 3, 10.0, 2.0).is_err());
        assert!(SystemConfig::new(4, 5, 4, 30, 0.0, 2.0).is_err());
        assert!(SystemConfig::new(4, 5, 4, 30, 10.0, -1.0).is_err());
        assert_eq!(SystemConfig::new(2, 5, 4, 30, 1.0, 0.0).unwrap().kprime(), 2);
    }

    #[test]
    fn correlation_from_eigenvalues_exact_spectrum() {
        let corr = sv_corr();
        let (w, _) = corr.matrix().hermitian_eig();
        let expect = [1.0, 0.1, 0.05, 0.01];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!(corr.reconstruction_error() < 1e-10);
        assert!(corr.unitarity_error() < 1e-10);
        assert!(corr.matrix().hermitian_error() < 1e-12);
        // Deterministic in the seed.
        assert_eq!(corr, sv_corr());
        assert_ne!(corr, SensingCorrelation::from_eigenvalues(&[1.0, 0.1, 0.05, 0.01], 8).unwrap());
    }

    #[test]
    fn correlation_scalar_and_degenerate() {
        let one = SensingCorrelation::from_eigenvalues(&[1.0], 3).unwrap();
        assert!((one.matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((one.eigenvectors()[(0, 0)].norm() - 1.0).abs() < 1e-14);

        // A flat spectrum forces R = 2 I regardless of the basis.
        let flat = SensingCorrelation::from_eigenvalues(&[2.0, 2.0], 11).unwrap();
        let expect = CMat::from_fn(2, 2, |i, j| {
            Complex64::new(if i == j { 2.0 } else { 0.0 }, 0.0)
        });
        assert!(flat.matrix().sub(&expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn correlation_rejects_nonpositive_eigenvalue() {
        let err = SensingCorrelation::from_eigenvalues(&[1.0, 0.0], 1).unwrap_err();
        assert!(matches!(err, ModelError::NonPositiveEigenvalue { index: 1, .. }));
    }

    #[test]
    fn scene_single_antenna() {
        let scene = TargetScene::new(vec![Target { sigma2: 1.0, theta: 0.3 }]).unwrap();
        let corr = SensingCorrelation::from_scene(&scene, 1).unwrap();
        assert!((corr.matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn scene_trace_is_total_power_times_m() {
        let scene = TargetScene::new(vec![
            Target { sigma2: 1.0, theta: 0.0 },
            Target { sigma2: 1.0, theta: std::f64::consts::FRAC_PI_2 },
        ])
        .unwrap();
        let corr = SensingCorrelation::from_scene(&scene, 2).unwrap();
        let trace: f64 = (0..2).map(|i| corr.matrix()[(i, i)].re).sum();
        assert!((trace - 4.0).abs() < 1e-12, "trace {trace}");
        // Direct evaluation of b(0) b(0)^H + b(pi/2) b(pi/2)^H.
        let b0 = ula_steering(2, 0.0);
        let b1 = ula_steering(2, std::f64::consts::FRAC_PI_2);
        let direct = CMat::from_fn(2, 2, |i, j| b0[i] * b0[j].conj() + b1[i] * b1[j].conj());
        assert!(corr.matrix().sub(&direct).frobenius_norm() < 1e-12);
    }

    #[test]
    fn scene_rank_deficiency_reported() {
        let scene = TargetScene::new(vec![Target { sigma2: 1.0, theta: 0.5 }]).unwrap();
        let err = SensingCorrelation::from_scene(&scene, 4).unwrap_err();
        assert_eq!(err, ModelError::RankDeficient { rank: 1, needed: 4 });
    }

    #[test]
    fn scene_validation() {
        assert!(TargetScene::new(vec![]).is_err());
        assert!(TargetScene::new(vec![Target { sigma2: 0.0, theta: 0.0 }]).is_err());
    }

    #[test]
    fn zero_forcing_property() {
        let cfg = SystemConfig::new(4, 5, 4, 30, 10.0, 2.0).unwrap();
        let corr = sv_corr();
        let sampler = ChannelSampler::new(&cfg, &corr);
        for trial in 0..20 {
            let draw = sampler.draw(99, trial);
            for m in 0..cfg.m {
                let v = draw.equalizer(corr.eigenvectors(), m);
                assert!((linalg::norm(&v) - 1.0).abs() < 1e-12);
                let b = draw.h[m].mul(corr.eigenvectors());
                for other in 0..cfg.m {
                    let col = b.col(other);
                    let proj = linalg::dot_conj(&v, &col);
                    if other == m {
                        assert!((proj.norm_sqr() - draw.rho[m]).abs() < 1e-9 * (1.0 + draw.rho[m]));
                    } else {
                        assert!(proj.norm() < 1e-9, "interference leak {}", proj.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn rho_matches_between_fast_and_full_paths() {
        let cfg = SystemConfig::new(3, 5, 4, 30, 10.0, 2.0).unwrap();
        let corr = SensingCorrelation::from_eigenvalues(&[1.0, 0.2, 0.04], 5).unwrap();
        let sampler = ChannelSampler::new(&cfg, &corr);
        let mut scratch = sampler.scratch();
        let mut rho = Vec::new();
        for trial in 0..50 {
            sampler.rho_into(31, trial, &mut scratch, &mut rho);
            let draw = sampler.draw(31, trial);
            assert_eq!(rho, draw.rho);
        }
    }

    #[test]
    fn stream_order_does_not_matter() {
        let cfg = SystemConfig::new(2, 2, 3, 4, 1.0, 0.0).unwrap();
        let corr = SensingCorrelation::from_eigenvalues(&[1.0, 0.4], 2).unwrap();
        let sampler = ChannelSampler::new(&cfg, &corr);
        let forward: Vec<ChannelDraw> = sampler.sample_channels(5, 8).collect();
        for (trial, draw) in forward.iter().enumerate().rev() {
            let again = sampler.draw(5, trial as u64);
            assert_eq!(draw.rho, again.rho);
        }
    }

    #[test]
    fn single_antenna_rho_is_exponential() {
        // M = K = 1: v = h/|h|, rho = |h|^2 ~ Exp(1).
        let cfg = SystemConfig::new(1, 1, 1, 1, 1.0, 0.0).unwrap();
        let corr = SensingCorrelation::from_eigenvalues(&[1.0], 1).unwrap();
        let sampler = ChannelSampler::new(&cfg, &corr);
        let mut scratch = sampler.scratch();
        let mut rho = Vec::new();
        let trials = 100_000u64;
        let mut sum = 0.0;
        for t in 0..trials {
            sampler.rho_into(17, t, &mut scratch, &mut rho);
            sum += rho[0];
        }
        let mean = sum / trials as f64;
        assert!((mean - 1.0).abs() < 0.015, "mean {mean}");
    }

    #[test]
    fn target_response_white_covariance() {
        let corr = SensingCorrelation::from_eigenvalues(&[1.0, 1.0], 2).unwrap();
        let n = 100_000;
        let g = sample_target_response(&corr, n, 8);
        let mut cov = [[Complex64::new(0.0, 0.0); 2]; 2];
        for row in 0..n {
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += g[(row, i)] * g[(row, j)].conj();
                }
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                err += (cov[i][j] / n as f64 - Complex64::new(target, 0.0)).norm_sqr();
            }
        }
        assert!(err.sqrt() < 0.02, "cov error {}", err.sqrt());
    }

    #[test]
    fn target_response_single_row_finite() {
        let corr = sv_corr();
        let g = sample_target_response(&corr, 1, 3);
        assert_eq!((g.rows(), g.cols()), (1, 4));
        for z in g.as_slice() {
            assert!(z.re.is_finite() && z.im.is_finite());
        }
    }
}
