//! Power-allocation solvers.
//!
//! Everything here maximizes sums of `log2(1 + gain * power)` terms under a
//! total power budget:
//!
//! - [`waterfill`]: the exact single-objective kernel (active-set water
//!   level, no iteration);
//! - [`sensing_waterfill`] / [`comm_waterfill`]: the sensing-only and
//!   communication-only instances;
//! - [`fdsac_allocate`]: independent water-filling over the two sub-bands of
//!   a frequency-division split;
//! - [`pareto_allocate`]: the rate-profile point `max R` subject to
//!   `R_s >= alpha R` and `R_c >= (1-alpha) R`, solved as a minimax over a
//!   scalar weight whose inner problem is a two-gain water-filling with
//!   closed-form per-stream solutions.

use thiserror::Error;

use crate::model::{SensingCorrelation, SystemConfig};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error("budget must be positive, got {0}")]
    InvalidBudget(f64),
    #[error("all effective gains are zero")]
    DegenerateGains,
    #[error("rate-profile parameter must lie in [0,1], got {0}")]
    InvalidAlpha(f64),
    #[error("band/power fractions must lie in [0,1], got kappa={kappa} mu={mu}")]
    InvalidFraction { kappa: f64, mu: f64 },
    #[error(
        "pareto solver did not converge after {iterations} iterations \
         (best scale {best_scale}, rate residual {residual})"
    )]
    Convergence { iterations: usize, best_scale: f64, residual: f64 },
}

/// Which precoding design produced an allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    SensingCentric,
    CommCentric,
    Pareto { alpha: f64 },
    FdsacComm { kappa: f64, mu: f64 },
    FdsacSense { kappa: f64, mu: f64 },
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Design::SensingCentric => write!(f, "sc"),
            Design::CommCentric => write!(f, "cc"),
            Design::Pareto { .. } => write!(f, "pareto"),
            Design::FdsacComm { .. } | Design::FdsacSense { .. } => write!(f, "fdsac"),
        }
    }
}

/// Per-stream powers plus the water level (the common level `1/nu` that
/// active streams fill to, or the dual multiplier for the Pareto solver).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub design: Design,
    pub water_level: Option<f64>,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    fn zeros(n: usize, design: Design) -> Self {
        Self { powers: vec![0.0; n], design, water_level: None }
    }
}

/// Solution of the rate-profile problem for one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub alpha: f64,
    /// Achieved common scale `R`.
    pub scale: f64,
    pub allocation: PowerAllocation,
    /// Sensing rate at the optimal powers, bits/s/Hz.
    pub sr: f64,
    /// Sum communication rate at the optimal powers, bits/s/Hz.
    pub cr: f64,
}

/// Index/inverse-gain scratch so hot loops avoid reallocating. Also carries
/// the rate-profile solver's bracket-endpoint power buffers.
#[derive(Debug, Clone, Default)]
pub struct WaterfillScratch {
    order: Vec<usize>,
    inv: Vec<f64>,
    side_lo: Vec<f64>,
    side_hi: Vec<f64>,
}

/// Exact water-filling: maximize `sum log2(1 + g_m x_m)` with `sum x_m <= budget`.
///
/// Zero gains are allowed and receive zero power; returns the water level
/// when at least one stream is active. The active set is found by scanning
/// candidate levels over the sorted gains, so the budget is met to machine
/// precision with no iteration.
pub fn waterfill_into(
    gains: &[f64],
    budget: f64,
    out: &mut Vec<f64>,
    scratch: &mut WaterfillScratch,
) -> Option<f64> {
    out.clear();
    out.resize(gains.len(), 0.0);
    if !(budget > 0.0) {
        return None;
    }
    scratch.order.clear();
    scratch.order.extend((0..gains.len()).filter(|&i| gains[i] > 0.0));
    if scratch.order.is_empty() {
        return None;
    }
    scratch.order.sort_unstable_by(|&i, &j| gains[j].partial_cmp(&gains[i]).unwrap());
    scratch.inv.clear();
    scratch.inv.extend(scratch.order.iter().map(|&i| 1.0 / gains[i]));

    let n = scratch.order.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + scratch.inv[i];
    }
    let mut active = 1;
    let mut level = budget + prefix[1];
    for k in (1..=n).rev() {
        let candidate = (budget + prefix[k]) / k as f64;
        if candidate > scratch.inv[k - 1] {
            active = k;
            level = candidate;
            break;
        }
    }
    for i in 0..active {
        out[scratch.order[i]] = level - scratch.inv[i];
    }
    Some(level)
}

/// Water-filling over strictly positive gains (validates inputs).
pub fn waterfill(gains: &[f64], budget: f64) -> Result<PowerAllocation, AllocError> {
    if gains.is_empty() {
        return Err(AllocError::InvalidGains("no streams".into()));
    }
    if let Some(&bad) = gains.iter().find(|&&g| !(g > 0.0)) {
        return Err(AllocError::InvalidGains(format!("gain {bad} is not positive")));
    }
    if !(budget > 0.0) {
        return Err(AllocError::InvalidBudget(budget));
    }
    let mut powers = Vec::new();
    let mut scratch = WaterfillScratch::default();
    let level = waterfill_into(gains, budget, &mut powers, &mut scratch);
    Ok(PowerAllocation { powers, design: Design::SensingCentric, water_level: level })
}

/// Sensing-optimal powers: water-filling over the gains `L * lambda_m`.
pub fn sensing_waterfill(
    corr: &SensingCorrelation,
    cfg: &SystemConfig,
) -> Result<PowerAllocation, AllocError> {
    let gains: Vec<f64> = corr.lambdas().iter().map(|&w| cfg.l as f64 * w).collect();
    let mut alloc = waterfill(&gains, cfg.p)?;
    alloc.design = Design::SensingCentric;
    Ok(alloc)
}

/// Communication-optimal powers for one realization: water-filling over the
/// effective gains. Streams with zero gain receive zero power; all-zero
/// gains are an error.
pub fn comm_waterfill(rho: &[f64], budget: f64) -> Result<PowerAllocation, AllocError> {
    if rho.is_empty() {
        return Err(AllocError::InvalidGains("no streams".into()));
    }
    if let Some(&bad) = rho.iter().find(|&&g| !(g >= 0.0)) {
        return Err(AllocError::InvalidGains(format!("gain {bad} is negative")));
    }
    if !(budget > 0.0) {
        return Err(AllocError::InvalidBudget(budget));
    }
    if rho.iter().all(|&g| g == 0.0) {
        return Err(AllocError::DegenerateGains);
    }
    let mut powers = Vec::new();
    let mut scratch = WaterfillScratch::default();
    let level = waterfill_into(rho, budget, &mut powers, &mut scratch);
    Ok(PowerAllocation { powers, design: Design::CommCentric, water_level: level })
}

/// Frequency-division allocation: a fraction `kappa` of the band and `mu` of
/// the power go to communication, the complements to sensing. Each side is
/// an independent water-filling; the edge values `kappa`/`mu` in {0, 1} use
/// the continuous extension (zero allocation on the starved side).
pub fn fdsac_allocate(
    rho: &[f64],
    corr: &SensingCorrelation,
    cfg: &SystemConfig,
    kappa: f64,
    mu: f64,
) -> Result<(PowerAllocation, PowerAllocation), AllocError> {
    if !(0.0..=1.0).contains(&kappa) || !(0.0..=1.0).contains(&mu) {
        return Err(AllocError::InvalidFraction { kappa, mu });
    }
    let m = corr.dim();
    let mut scratch = WaterfillScratch::default();

    let comm = if kappa == 0.0 || mu == 0.0 {
        PowerAllocation::zeros(m, Design::FdsacComm { kappa, mu })
    } else {
        let gains: Vec<f64> = rho.iter().map(|&r| r / kappa).collect();
        let mut powers = Vec::new();
        let level = waterfill_into(&gains, mu * cfg.p, &mut powers, &mut scratch);
        PowerAllocation { powers, design: Design::FdsacComm { kappa, mu }, water_level: level }
    };

    let sense = if kappa == 1.0 || mu == 1.0 {
        PowerAllocation::zeros(m, Design::FdsacSense { kappa, mu })
    } else {
        let gains: Vec<f64> =
            corr.lambdas().iter().map(|&w| cfg.l as f64 * w / (1.0 - kappa)).collect();
        let mut powers = Vec::new();
        let level = waterfill_into(&gains, (1.0 - mu) * cfg.p, &mut powers, &mut scratch);
        PowerAllocation { powers, design: Design::FdsacSense { kappa, mu }, water_level: level }
    };

    Ok((comm, sense))
}

/// Max KKT residual of a water-filling solution, normalized by the dual
/// variable: active streams should have `g/(1+gx)` equal to it, inactive
/// streams should sit below it.
pub fn waterfill_kkt_residual(gains: &[f64], alloc: &PowerAllocation) -> f64 {
    let Some(level) = alloc.water_level else {
        return 0.0;
    };
    let dual = 1.0 / level;
    let mut worst: f64 = 0.0;
    for (&g, &x) in gains.iter().zip(&alloc.powers) {
        let r = if x > 0.0 {
            (g / (1.0 + g * x) - dual).abs() / dual
        } else {
            ((g - dual) / dual).max(0.0)
        };
        worst = worst.max(r);
    }
    worst
}

// --- rate-profile (Pareto boundary) solver ---

#[derive(Debug, Clone, Copy)]
pub(crate) struct ParetoSolution {
    pub scale: f64,
    pub sr: f64,
    pub cr: f64,
    pub dual: Option<f64>,
}

#[inline]
fn rate_bits(prefactor: f64, gains: &[f64], powers: &[f64]) -> f64 {
    let nats: f64 = gains.iter().zip(powers).map(|(&g, &x)| (g * x).ln_1p()).sum();
    prefactor * nats / LN2
}

/// Per-stream optimum of `aw ln(1+a x) + bw ln(1+b x) - eta x` over `x >= 0`,
/// and its derivative with respect to `eta`. Closed form: the stationarity
/// condition is a quadratic in `x`.
#[inline]
fn stream_power(aw: f64, bw: f64, a: f64, b: f64, eta: f64) -> (f64, f64) {
    let g0 = aw * a + bw * b;
    if g0 <= eta {
        return (0.0, 0.0);
    }
    let x = if b == 0.0 || bw == 0.0 {
        aw / eta - 1.0 / a
    } else if aw == 0.0 {
        bw / eta - 1.0 / b
    } else {
        let ab = a * b;
        let b2 = eta * (a + b) - (aw + bw) * ab;
        let c2 = eta - g0;
        let disc = (b2 * b2 - 4.0 * eta * ab * c2).sqrt();
        if b2 <= 0.0 {
            (-b2 + disc) / (2.0 * eta * ab)
        } else {
            -2.0 * c2 / (b2 + disc)
        }
    };
    let ta = 1.0 + a * x;
    let tb = 1.0 + b * x;
    let gprime = -(aw * a * a / (ta * ta) + bw * b * b / (tb * tb));
    (x, 1.0 / gprime)
}

/// Maximizes `aw * sum ln(1+a_m x_m) + bw * sum ln(1+b_m x_m)` over the
/// budget simplex. Safeguarded Newton on the shared multiplier `eta`.
pub(crate) fn weighted_waterfill(
    aw: f64,
    bw: f64,
    a: &[f64],
    b: &[f64],
    budget: f64,
    out: &mut [f64],
) -> f64 {
    let sum_at = |eta: f64| -> (f64, f64) {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&ai, &bi) in a.iter().zip(b) {
            let (x, dx) = stream_power(aw, bw, ai, bi, eta);
            s += x;
            ds += dx;
        }
        (s, ds)
    };

    let mut hi = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| aw * ai + bw * bi)
        .fold(0.0f64, f64::max);
    let mut lo = hi;
    for _ in 0..4000 {
        lo *= 0.5;
        if sum_at(lo).0 >= budget || lo < 1e-300 {
            break;
        }
    }

    let mut eta = (lo + hi) * 0.5;
    for _ in 0..200 {
        let (s, ds) = sum_at(eta);
        let h = s - budget;
        if h.abs() <= 1e-13 * budget.max(1.0) {
            break;
        }
        if h > 0.0 {
            lo = eta;
        } else {
            hi = eta;
        }
        let newton = if ds != 0.0 { eta - h / ds } else { f64::NAN };
        eta = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        out[i] = stream_power(aw, bw, ai, bi, eta).0;
    }
    eta
}

/// Rate-profile solve on raw gains. `a` are the sensing gains `L lambda_m`
/// with bits prefactor `nl = N/L`; `rho` are the communication gains.
pub(crate) fn pareto_solve(
    a: &[f64],
    nl: f64,
    rho: &[f64],
    budget: f64,
    alpha: f64,
    powers: &mut Vec<f64>,
    scratch: &mut WaterfillScratch,
) -> Result<ParetoSolution, AllocError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(AllocError::InvalidAlpha(alpha));
    }
    if !(budget > 0.0) {
        return Err(AllocError::InvalidBudget(budget));
    }
    if alpha == 1.0 {
        let level = waterfill_into(a, budget, powers, scratch);
        let sr = rate_bits(nl, a, powers);
        let cr = rate_bits(1.0, rho, powers);
        return Ok(ParetoSolution { scale: sr, sr, cr, dual: level });
    }
    if rho.iter().all(|&g| g == 0.0) {
        return Err(AllocError::DegenerateGains);
    }
    if alpha == 0.0 {
        let level = waterfill_into(rho, budget, powers, scratch);
        let sr = rate_bits(nl, a, powers);
        let cr = rate_bits(1.0, rho, powers);
        return Ok(ParetoSolution { scale: cr, sr, cr, dual: level });
    }

    let abar = 1.0 - alpha;
    powers.clear();
    powers.resize(a.len(), 0.0);

    // Profile deficit at weight w: positive once the sensing side overshoots.
    let eval = |w: f64, powers: &mut [f64]| -> (f64, f64, f64, f64) {
        let aw = w * nl / (alpha * LN2);
        let bw = (1.0 - w) / (abar * LN2);
        let eta = weighted_waterfill(aw, bw, a, rho, budget, powers);
        let f1 = rate_bits(nl, a, powers) / alpha;
        let f2 = rate_bits(1.0, rho, powers) / abar;
        (f1 - f2, f1, f2, eta)
    };

    // Corner cases: one objective's unconstrained optimum already satisfies
    // the other profile share. The bracket endpoints' power vectors are
    // retained for the pattern-jump blend below.
    let (d0, f1_0, f2_0, eta0) = eval(0.0, powers);
    if d0 >= 0.0 {
        let sr = f1_0 * alpha;
        let cr = f2_0 * abar;
        return Ok(ParetoSolution { scale: f2_0, sr, cr, dual: Some(eta0) });
    }
    scratch.side_lo.clear();
    scratch.side_lo.extend_from_slice(powers);
    let (d1, f1_1, f2_1, eta1) = eval(1.0, powers);
    if d1 <= 0.0 {
        let sr = f1_1 * alpha;
        let cr = f2_1 * abar;
        return Ok(ParetoSolution { scale: f1_1, sr, cr, dual: Some(eta1) });
    }
    scratch.side_hi.clear();
    scratch.side_hi.extend_from_slice(powers);

    // Illinois regula falsi on the increasing function d(w). If the active
    // pattern jumps and d(w) steps over zero, the optimum lies on the
    // segment between the two plateau solutions (the optimal face of the
    // tied weighted problem) and is recovered by the blend below.
    let (mut wl, mut dl) = (0.0, d0);
    let (mut wh, mut dh) = (1.0, d1);
    let mut side = 0i32;
    let mut last_eta = eta1;
    const MAX_ITER: usize = 100;
    for _ in 0..MAX_ITER {
        let mut w = (wl * dh - wh * dl) / (dh - dl);
        if !w.is_finite() || w <= wl || w >= wh {
            w = 0.5 * (wl + wh);
        }
        let (d, f1, f2, eta) = eval(w, powers);
        last_eta = eta;
        let scale = f1.min(f2);
        let tol = 1e-9 * (1.0 + scale.abs());
        if d.abs() <= tol {
            let sr = f1 * alpha;
            let cr = f2 * abar;
            return Ok(ParetoSolution { scale, sr, cr, dual: Some(eta) });
        }
        if d > 0.0 {
            wh = w;
            dh = d;
            scratch.side_hi.copy_from_slice(powers);
            if side == 1 {
                dl *= 0.5;
            }
            side = 1;
        } else {
            wl = w;
            dl = d;
            scratch.side_lo.copy_from_slice(powers);
            if side == -1 {
                dh *= 0.5;
            }
            side = -1;
        }
        if wh - wl < 1e-13 {
            break;
        }
    }

    // Blend across the pattern jump: f1 - f2 changes sign along the segment
    // between the bracket solutions, and both rate functions are concave on
    // it, so the crossing attains the minimax value.
    let blend_rates = |theta: f64, powers: &mut Vec<f64>| -> (f64, f64) {
        powers.clear();
        powers.extend(
            scratch
                .side_lo
                .iter()
                .zip(&scratch.side_hi)
                .map(|(&lo, &hi)| (1.0 - theta) * lo + theta * hi),
        );
        let f1 = rate_bits(nl, a, powers) / alpha;
        let f2 = rate_bits(1.0, rho, powers) / abar;
        (f1, f2)
    };
    let (mut t_lo, mut t_hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let t = 0.5 * (t_lo + t_hi);
        let (f1, f2) = blend_rates(t, powers);
        if f1 - f2 > 0.0 {
            t_hi = t;
        } else {
            t_lo = t;
        }
    }
    let t = 0.5 * (t_lo + t_hi);
    let (f1, f2) = blend_rates(t, powers);
    let scale = f1.min(f2);
    let residual = (f1 - f2).abs();
    if !scale.is_finite() || residual > 1e-6 * (1.0 + scale.abs()) {
        return Err(AllocError::Convergence { iterations: MAX_ITER, best_scale: scale, residual });
    }
    Ok(ParetoSolution { scale, sr: f1 * alpha, cr: f2 * abar, dual: Some(last_eta) })
}

/// Pareto-boundary point for rate-profile parameter `alpha` on one channel
/// realization. `alpha = 1` reproduces [`sensing_waterfill`] exactly and
/// `alpha = 0` reproduces [`comm_waterfill`].
pub fn pareto_allocate(
    rho: &[f64],
    corr: &SensingCorrelation,
    cfg: &SystemConfig,
    alpha: f64,
) -> Result<ParetoPoint, AllocError> {
    let a: Vec<f64> = corr.lambdas().iter().map(|&w| cfg.l as f64 * w).collect();
    let nl = cfg.n as f64 / cfg.l as f64;
    let mut powers = Vec::new();
    let mut scratch = WaterfillScratch::default();
    let sol = pareto_solve(&a, nl, rho, cfg.p, alpha, &mut powers, &mut scratch)?;
    debug_assert!(sol.sr >= alpha * sol.scale - 1e-6);
    debug_assert!(sol.cr >= (1.0 - alpha) * sol.scale - 1e-6);
    Ok(ParetoPoint {
        alpha,
        scale: sol.scale,
        allocation: PowerAllocation {
            powers,
            design: Design::Pareto { alpha },
            water_level: sol.dual,
        },
        sr: sol.sr,
        cr: sol.cr,
    })
}
