//! Sensing-communication rate-region boundaries and containment checks.
//!
//! The integrated-system boundary comes from sweeping the rate-profile
//! parameter; the frequency-division region from a grid over its band and
//! power fractions. Containment is checked point-by-point against a
//! piecewise-linear interpolation of the covering boundary, with a tolerance
//! coupling the Monte Carlo standard errors of both sides. Two auxiliary
//! power-split constructions sandwich the frequency-division region inside
//! the integrated one.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::allocation::{self, WaterfillScratch};
use crate::model::{ChannelSampler, ChannelScratch, SensingCorrelation, SystemConfig};
use crate::montecarlo::{self, McDesign, McError};

const LN2: f64 = std::f64::consts::LN_2;
const ABS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("alpha grid must lie in [0,1] and include both endpoints")]
    BadAlphaGrid,
    #[error("kappa/mu grids must lie in [0,1] and include both endpoints")]
    BadFractionGrid,
    #[error("epsilon grid must lie in [0,1] and be nonempty")]
    BadEpsilonGrid,
    #[error("rate-profile solve failed at alpha={alpha}: {source}")]
    Solver { alpha: f64, source: McError },
    #[error(transparent)]
    Mc(#[from] McError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionLabel {
    Isac,
    Fdsac,
    /// Full-band power split between the two functions (first auxiliary region).
    AuxPowerSplit,
    /// Integrated transmission reusing the split's summed powers (second auxiliary region).
    AuxCombined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepParam {
    Alpha(f64),
    KappaMu { kappa: f64, mu: f64 },
    Epsilon(f64),
}

/// One averaged boundary point with its Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub sr: f64,
    pub sr_std_err: f64,
    pub cr: f64,
    pub cr_std_err: f64,
    pub param: SweepParam,
}

/// Boundary points sorted by descending sensing rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBoundary {
    pub label: RegionLabel,
    pub points: Vec<BoundaryPoint>,
}

impl RegionBoundary {
    fn sort(mut points: Vec<BoundaryPoint>, label: RegionLabel) -> Self {
        points.sort_by(|a, b| b.sr.partial_cmp(&a.sr).unwrap());
        Self { label, points }
    }

    /// Upper communication-rate bound of the region at sensing rate `sr`:
    /// linear interpolation between boundary points, clamped to the
    /// maximum-cr endpoint below the swept span. `None` above the span.
    pub fn cr_bound_at(&self, sr: f64) -> Option<(f64, f64, bool)> {
        let pts = &self.points;
        let first = pts.first()?;
        if sr > first.sr {
            return None;
        }
        let last = pts.last().unwrap();
        if sr <= last.sr {
            return Some((last.cr, last.cr_std_err, true));
        }
        let mut i = 0;
        while i + 1 < pts.len() && pts[i + 1].sr >= sr {
            i += 1;
        }
        let (hi, lo) = (&pts[i], &pts[i + 1]);
        let span = hi.sr - lo.sr;
        let t = if span > 0.0 { (hi.sr - sr) / span } else { 0.0 };
        let cr = hi.cr + t * (lo.cr - hi.cr);
        let se = hi.cr_std_err.max(lo.cr_std_err);
        Some((cr, se, false))
    }
}

/// FDSAC sweep output: the Pareto-dominant boundary plus every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FdsacRegion {
    pub boundary: RegionBoundary,
    pub grid: Vec<BoundaryPoint>,
}

/// Integrated-system boundary over a rate-profile grid. The grid must cover
/// both endpoints so the sweep reaches the sensing-only and
/// communication-only corner points.
///
/// Each interior point is the Pareto-optimal pair of *averaged* rates: the
/// per-draw powers maximize a weighted sum of the two rate functions, and
/// the weight is calibrated so the averaged rates sit on the profile ray
/// `(alpha, 1-alpha)`. Averaging per-draw max-min solves at fixed alpha
/// instead would trace a strictly smaller curve that provably fails the
/// containment chain, because the weighted-sum scalarization commutes with
/// the expectation while max-min does not.
pub fn isac_boundary(
    cfg: &SystemConfig,
    corr: &SensingCorrelation,
    alphas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<RegionBoundary, RegionError> {
    let ok = !alphas.is_empty()
        && alphas.iter().all(|a| (0.0..=1.0).contains(a))
        && alphas.contains(&0.0)
        && alphas.contains(&1.0);
    if !ok {
        return Err(RegionError::BadAlphaGrid);
    }
    let solver = FrontierSolver::new(cfg, corr, trials, seed);
    let mut points = Vec::with_capacity(alphas.len() + FRONTIER_REFINE);
    for &alpha in alphas {
        let point = if alpha == 0.0 || alpha == 1.0 {
            // Endpoint designs; the per-draw solve already degenerates to
            // the matching water-filling.
            let ((sr, sr_se), (cr, cr_se)) =
                montecarlo::design_rate_pair(McDesign::Pareto { alpha }, cfg, corr, trials, seed)
                    .map_err(|source| RegionError::Solver { alpha, source })?;
            BoundaryPoint {
                sr,
                sr_std_err: sr_se,
                cr,
                cr_std_err: cr_se,
                param: SweepParam::Alpha(alpha),
            }
        } else {
            solver
                .profile_point(alpha)
                .map_err(|source| RegionError::Solver { alpha, source })?
        };
        points.push(point);
    }
    // A profile grid parametrizes the frontier by ray angle, which samples
    // flat corner stretches heavily and can leave the curved band coarse.
    // Refine with supported points from a uniform scalarization-weight
    // sweep whenever the grid asks for interior points at all.
    if alphas.iter().any(|&a| a > 0.0 && a < 1.0) {
        for i in 1..=FRONTIER_REFINE {
            let theta = i as f64 / (FRONTIER_REFINE + 1) as f64;
            let stats = solver
                .eval_weights(theta * solver.nl / LN2, (1.0 - theta) / LN2)
                .map_err(|source| RegionError::Solver { alpha: theta, source })?;
            let [(sr, sr_se), (cr, cr_se)] = stats;
            let implied_alpha = if sr + cr > 0.0 { sr / (sr + cr) } else { 0.5 };
            points.push(BoundaryPoint {
                sr,
                sr_std_err: sr_se,
                cr,
                cr_std_err: cr_se,
                param: SweepParam::Alpha(implied_alpha),
            });
        }
    }
    Ok(RegionBoundary::sort(points, RegionLabel::Isac))
}

/// Extra supported points added to an integrated boundary sweep.
const FRONTIER_REFINE: usize = 32;

struct ProfileCtx {
    scratch: ChannelScratch,
    rho: Vec<f64>,
    powers: Vec<f64>,
}

/// Traces the Pareto frontier of the achievable averaged-rate pairs: for a
/// scalarization weight pair, each draw maximizes the weighted rate sum, and
/// the averaged optimum is a supported frontier point.
struct FrontierSolver<'c> {
    cfg: &'c SystemConfig,
    sampler: ChannelSampler,
    a: Vec<f64>,
    nl: f64,
    trials: u64,
    seed: u64,
}

impl<'c> FrontierSolver<'c> {
    fn new(cfg: &'c SystemConfig, corr: &SensingCorrelation, trials: u64, seed: u64) -> Self {
        Self {
            cfg,
            sampler: ChannelSampler::new(cfg, corr),
            a: corr.lambdas().iter().map(|&w| cfg.l as f64 * w).collect(),
            nl: cfg.n as f64 / cfg.l as f64,
            trials,
            seed,
        }
    }

    /// Averaged (sr, cr) with standard errors under per-draw maximization of
    /// `aw sum ln(1+a x) + bw sum ln(1+rho x)`.
    fn eval_weights(&self, aw: f64, bw: f64) -> Result<[(f64, f64); 2], McError> {
        montecarlo::moments_nd(
            self.trials,
            || ProfileCtx {
                scratch: self.sampler.scratch(),
                rho: Vec::with_capacity(self.cfg.m),
                powers: vec![0.0; self.cfg.m],
            },
            |ctx: &mut ProfileCtx, t: u64| -> Result<[f64; 2], McError> {
                self.sampler.rho_into(self.seed, t, &mut ctx.scratch, &mut ctx.rho);
                allocation::weighted_waterfill(
                    aw,
                    bw,
                    &self.a,
                    &ctx.rho,
                    self.cfg.p,
                    &mut ctx.powers,
                );
                let mut sr = 0.0;
                let mut cr = 0.0;
                for m in 0..ctx.rho.len() {
                    sr += (self.a[m] * ctx.powers[m]).ln_1p();
                    cr += (ctx.rho[m] * ctx.powers[m]).ln_1p();
                }
                Ok([self.nl * sr / LN2, cr / LN2])
            },
        )
    }

    /// Frontier point on the profile ray `(alpha, 1-alpha)`: root-find the
    /// weight so the averaged rates are profile-balanced. The deficit is
    /// increasing in the weight and continuous (the expectation smooths the
    /// per-draw activation jumps).
    fn profile_point(&self, alpha: f64) -> Result<BoundaryPoint, McError> {
        let abar = 1.0 - alpha;
        let eval = |w: f64| -> Result<[(f64, f64); 2], McError> {
            self.eval_weights(w * self.nl / (alpha * LN2), (1.0 - w) / (abar * LN2))
        };
        let to_point = |stats: [(f64, f64); 2]| BoundaryPoint {
            sr: stats[0].0,
            sr_std_err: stats[0].1,
            cr: stats[1].0,
            cr_std_err: stats[1].1,
            param: SweepParam::Alpha(alpha),
        };
        let deficit = |s: &[(f64, f64); 2]| s[0].0 / alpha - s[1].0 / abar;

        let s0 = eval(0.0)?;
        let d0 = deficit(&s0);
        if d0 >= 0.0 {
            return Ok(to_point(s0));
        }
        let s1 = eval(1.0)?;
        let d1 = deficit(&s1);
        if d1 <= 0.0 {
            return Ok(to_point(s1));
        }

        let (mut wl, mut dl) = (0.0, d0);
        let (mut wh, mut dh) = (1.0, d1);
        let mut side = 0i32;
        let mut stats = s1;
        for _ in 0..60 {
            let mut w = (wl * dh - wh * dl) / (dh - dl);
            if !w.is_finite() || w <= wl || w >= wh {
                w = 0.5 * (wl + wh);
            }
            stats = eval(w)?;
            let d = deficit(&stats);
            let scale = (stats[0].0 / alpha).min(stats[1].0 / abar);
            if d.abs() <= 1e-9 * (1.0 + scale.abs()) || wh - wl < 1e-12 {
                break;
            }
            if d > 0.0 {
                wh = w;
                dh = d;
                if side == 1 {
                    dl *= 0.5;
                }
                side = 1;
            } else {
                wl = w;
                dl = d;
                if side == -1 {
                    dh *= 0.5;
                }
                side = -1;
            }
        }
        Ok(to_point(stats))
    }
}

/// Frequency-division sweep over `(kappa, mu)` grids.
pub fn fdsac_boundary(
    cfg: &SystemConfig,
    corr: &SensingCorrelation,
    kappa_grid: &[f64],
    mu_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<FdsacRegion, RegionError> {
    for grid in [kappa_grid, mu_grid] {
        let ok = !grid.is_empty()
            && grid.iter().all(|v| (0.0..=1.0).contains(v))
            && grid.contains(&0.0)
            && grid.contains(&1.0);
        if !ok {
            return Err(RegionError::BadFractionGrid);
        }
    }
    let mut grid = Vec::with_capacity(kappa_grid.len() * mu_grid.len());
    for &kappa in kappa_grid {
        for &mu in mu_grid {
            let ((sr, sr_se), (cr, cr_se)) = montecarlo::design_rate_pair(
                McDesign::Fdsac { kappa, mu },
                cfg,
                corr,
                trials,
                seed,
            )?;
            grid.push(BoundaryPoint {
                sr,
                sr_std_err: sr_se,
                cr,
                cr_std_err: cr_se,
                param: SweepParam::KappaMu { kappa, mu },
            });
        }
    }
    let dominant: Vec<BoundaryPoint> = grid
        .iter()
        .filter(|p| {
            !grid.iter().any(|q| {
                q.sr >= p.sr && q.cr >= p.cr && (q.sr > p.sr || q.cr > p.cr)
            })
        })
        .copied()
        .collect();
    Ok(FdsacRegion {
        boundary: RegionBoundary::sort(dominant, RegionLabel::Fdsac),
        grid,
    })
}

/// Per-point result of a containment check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainmentEntry {
    pub param: SweepParam,
    pub sr: f64,
    pub cr: f64,
    /// Interpolated communication-rate bound of the covering region at `sr`.
    pub bound_cr: f64,
    pub margin: f64,
    pub tol: f64,
    /// The point sat below the covering sweep's sensing span.
    pub clamped: bool,
    /// The covering boundary reaches this point's sensing rate at all.
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub entries: Vec<ContainmentEntry>,
    pub violations: usize,
}

impl ContainmentReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that every `inner` boundary point lies inside the region described
/// by the `outer` boundary, within `3 sigma + 1e-6`.
pub fn check_containment(inner: &RegionBoundary, outer: &RegionBoundary) -> ContainmentReport {
    let mut entries = Vec::with_capacity(inner.points.len());
    let mut violations = 0;
    let outer_max_sr = outer.points.first().map(|p| (p.sr, p.sr_std_err));
    for p in &inner.points {
        let entry = match outer.cr_bound_at(p.sr) {
            Some((bound_cr, bound_se, clamped)) => {
                let tol = 3.0 * (bound_se.hypot(p.cr_std_err)) + ABS_TOL;
                let margin = bound_cr - p.cr;
                ContainmentEntry {
                    param: p.param,
                    sr: p.sr,
                    cr: p.cr,
                    bound_cr,
                    margin,
                    tol,
                    clamped,
                    covered: true,
                }
            }
            None => {
                // Above the covering span: tolerate only statistical overshoot
                // of the maximum sensing endpoint.
                let (max_sr, max_sr_se) = outer_max_sr.unwrap_or((f64::NEG_INFINITY, 0.0));
                let sr_tol = 3.0 * max_sr_se.hypot(p.sr_std_err) + ABS_TOL;
                let within = p.sr <= max_sr + sr_tol;
                let first = outer.points.first();
                let bound_cr = first.map(|q| q.cr).unwrap_or(f64::NEG_INFINITY);
                let bound_se = first.map(|q| q.cr_std_err).unwrap_or(0.0);
                let tol = 3.0 * (bound_se.hypot(p.cr_std_err)) + ABS_TOL;
                let margin = if within { bound_cr - p.cr } else { f64::NEG_INFINITY };
                ContainmentEntry {
                    param: p.param,
                    sr: p.sr,
                    cr: p.cr,
                    bound_cr,
                    margin,
                    tol,
                    clamped: true,
                    covered: within,
                }
            }
        };
        if !entry.covered || entry.margin < -entry.tol {
            violations += 1;
        }
        entries.push(entry);
    }
    ContainmentReport { entries, violations }
}

/// One matched-parameter comparison between the two auxiliary sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationEntry {
    pub epsilon: f64,
    pub sr_split: f64,
    pub cr_split: f64,
    pub sr_combined: f64,
    pub cr_combined: f64,
    pub sr_margin: f64,
    pub cr_margin: f64,
    pub ok: bool,
}

/// Numerical realization of the region sandwich
/// `fdsac ⊆ power-split ⊆ combined ⊆ isac`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub power_split: RegionBoundary,
    pub combined: RegionBoundary,
    pub fdsac_in_split: ContainmentReport,
    pub split_in_combined: Vec<DominationEntry>,
    pub split_in_combined_violations: usize,
    pub combined_in_isac: ContainmentReport,
    /// Largest observed `sum(k+u) - p` over all draws (should be <= 0).
    pub max_power_residual: f64,
}

impl SandwichReport {
    pub fn ok(&self) -> bool {
        self.fdsac_in_split.ok()
            && self.split_in_combined_violations == 0
            && self.combined_in_isac.ok()
            && self.max_power_residual <= 1e-9
    }
}

/// Order-independent maximum of nonnegative floats across threads.
struct AtomicMax(AtomicU64);

impl AtomicMax {
    fn new() -> Self {
        Self(AtomicU64::new(0f64.to_bits()))
    }
    fn update(&self, v: f64) {
        let v = v.max(0.0);
        let mut cur = self.0.load(Ordering::Relaxed);
        while v > f64::from_bits(cur) {
            match self.0.compare_exchange_weak(
                cur,
                v.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => break,
                Err(actual) => cur = actual,
            }
        }
    }
    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

struct SandwichCtx {
    scratch: ChannelScratch,
    rho: Vec<f64>,
    u_powers: Vec<f64>,
    wf: WaterfillScratch,
}

/// Builds the two auxiliary boundaries over `eps_grid` and checks the full
/// containment chain against the supplied FDSAC and integrated boundaries.
pub fn verify_sandwich(
    cfg: &SystemConfig,
    corr: &SensingCorrelation,
    eps_grid: &[f64],
    isac: &RegionBoundary,
    fdsac: &RegionBoundary,
    trials: u64,
    seed: u64,
) -> Result<SandwichReport, RegionError> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(RegionError::BadEpsilonGrid);
    }
    let sampler = ChannelSampler::new(cfg, corr);
    let a: Vec<f64> = corr.lambdas().iter().map(|&w| cfg.l as f64 * w).collect();
    let nl = cfg.n as f64 / cfg.l as f64;
    let residual = AtomicMax::new();

    let mut split_pts = Vec::with_capacity(eps_grid.len());
    let mut combined_pts = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        // Sensing side of the split: deterministic water-filling.
        let mut k = vec![0.0; cfg.m];
        let mut wf = WaterfillScratch::default();
        allocation::waterfill_into(&a, (1.0 - eps) * cfg.p, &mut k, &mut wf);
        let sr_split: f64 =
            nl * a.iter().zip(&k).map(|(&g, &x)| (g * x).ln_1p()).sum::<f64>() / LN2;

        let comm_budget = eps * cfg.p;
        let stats = montecarlo::moments_nd(
            trials,
            || SandwichCtx {
                scratch: sampler.scratch(),
                rho: Vec::with_capacity(cfg.m),
                u_powers: vec![0.0; cfg.m],
                wf: WaterfillScratch::default(),
            },
            |ctx: &mut SandwichCtx, t: u64| -> Result<[f64; 3], McError> {
                sampler.rho_into(seed, t, &mut ctx.scratch, &mut ctx.rho);
                allocation::waterfill_into(&ctx.rho, comm_budget, &mut ctx.u_powers, &mut ctx.wf);
                let mut cr_split = 0.0;
                let mut sr_comb = 0.0;
                let mut cr_comb = 0.0;
                let mut total = 0.0;
                for m in 0..ctx.rho.len() {
                    let u = ctx.u_powers[m];
                    let combined = k[m] + u;
                    cr_split += (ctx.rho[m] * u).ln_1p();
                    sr_comb += (a[m] * combined).ln_1p();
                    cr_comb += (ctx.rho[m] * combined).ln_1p();
                    total += combined;
                }
                residual.update(total - cfg.p);
                Ok([cr_split / LN2, nl * sr_comb / LN2, cr_comb / LN2])
            },
        )?;
        let [(cr1, cr1_se), (sr2, sr2_se), (cr2, cr2_se)] = stats;
        split_pts.push(BoundaryPoint {
            sr: sr_split,
            sr_std_err: 0.0,
            cr: cr1,
            cr_std_err: cr1_se,
            param: SweepParam::Epsilon(eps),
        });
        combined_pts.push(BoundaryPoint {
            sr: sr2,
            sr_std_err: sr2_se,
            cr: cr2,
            cr_std_err: cr2_se,
            param: SweepParam::Epsilon(eps),
        });
    }

    // Matched-epsilon domination: adding the other side's powers can only
    // raise both rates.
    let mut dominations = Vec::with_capacity(split_pts.len());
    let mut dom_violations = 0;
    for (s, c) in split_pts.iter().zip(&combined_pts) {
        let SweepParam::Epsilon(eps) = s.param else { unreachable!() };
        let sr_tol = 3.0 * c.sr_std_err + ABS_TOL;
        let cr_tol = 3.0 * c.cr_std_err.hypot(s.cr_std_err) + ABS_TOL;
        let sr_margin = c.sr - s.sr;
        let cr_margin = c.cr - s.cr;
        let ok = sr_margin >= -sr_tol && cr_margin >= -cr_tol;
        if !ok {
            dom_violations += 1;
        }
        dominations.push(DominationEntry {
            epsilon: eps,
            sr_split: s.sr,
            cr_split: s.cr,
            sr_combined: c.sr,
            cr_combined: c.cr,
            sr_margin,
            cr_margin,
            ok,
        });
    }

    let power_split = RegionBoundary::sort(split_pts, RegionLabel::AuxPowerSplit);
    let combined = RegionBoundary::sort(combined_pts, RegionLabel::AuxCombined);
    let fdsac_in_split = check_containment(fdsac, &power_split);
    let combined_in_isac = check_containment(&combined, isac);

    Ok(SandwichReport {
        power_split,
        combined,
        fdsac_in_split,
        split_in_combined: dominations,
        split_in_combined_violations: dom_violations,
        combined_in_isac,
        max_power_residual: residual.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates;

    fn tiny_point(sr: f64, cr: f64) -> BoundaryPoint {
        BoundaryPoint { sr, sr_std_err: 0.0, cr, cr_std_err: 0.0, param: SweepParam::Alpha(0.5) }
    }

    #[test]
    fn interpolation_and_clamping() {
        let outer = RegionBoundary {
            label: RegionLabel::Isac,
            points: vec![tiny_point(4.0, 1.0), tiny_point(2.0, 3.0), tiny_point(1.0, 3.5)],
        };
        let (cr, _, clamped) = outer.cr_bound_at(3.0).unwrap();
        assert!((cr - 2.0).abs() < 1e-12);
        assert!(!clamped);
        let (cr_lo, _, clamped_lo) = outer.cr_bound_at(0.2).unwrap();
        assert_eq!(cr_lo, 3.5);
        assert!(clamped_lo);
        assert!(outer.cr_bound_at(4.5).is_none());
    }

    #[test]
    fn self_containment_is_clean() {
        let b = RegionBoundary {
            label: RegionLabel::Fdsac,
            points: vec![tiny_point(4.0, 1.0), tiny_point(2.0, 3.0), tiny_point(0.5, 3.2)],
        };
        let report = check_containment(&b, &b);
        assert_eq!(report.violations, 0);
        for e in &report.entries {
            assert!(e.margin >= -1e-12);
        }
    }

    #[test]
    fn containment_flags_outliers() {
        let outer = RegionBoundary {
            label: RegionLabel::Isac,
            points: vec![tiny_point(4.0, 1.0), tiny_point(1.0, 3.0)],
        };
        let inner = RegionBoundary {
            label: RegionLabel::Fdsac,
            points: vec![tiny_point(3.0, 2.5), tiny_point(5.0, 0.5)],
        };
        let report = check_containment(&inner, &outer);
        // (3.0, 2.5) sits above the chord value 1.667; (5.0, ...) is uncovered.
        assert_eq!(report.violations, 2);
    }

    #[test]
    fn grid_validation() {
        let corr = SensingCorrelation::from_eigenvalues(&[1.0, 0.1], 3).unwrap();
        let cfg = SystemConfig::new(2, 2, 2, 4, 2.0, 1.0).unwrap();
        assert!(matches!(
            isac_boundary(&cfg, &corr, &[0.2, 0.8], 200, 1),
            Err(RegionError::BadAlphaGrid)
        ));
        assert!(matches!(
            fdsac_boundary(&cfg, &corr, &[0.0, 0.5], &[0.0, 1.0], 200, 1),
            Err(RegionError::BadFractionGrid)
        ));
    }

    #[test]
    fn two_point_isac_boundary_matches_endpoint_designs() {
        let corr = SensingCorrelation::from_eigenvalues(&[1.0, 0.1], 3).unwrap();
        let cfg = SystemConfig::new(2, 3, 3, 6, 4.0, 1.0).unwrap();
        let boundary = isac_boundary(&cfg, &corr, &[0.0, 1.0], 4000, 11).unwrap();
        assert_eq!(boundary.points.len(), 2);
        // alpha = 1 comes first (max sensing rate) and is deterministic.
        let s = allocation::sensing_waterfill(&corr, &cfg).unwrap();
        let sr_expect = rates::sensing_rate(&s.powers, &corr, &cfg);
        assert!((boundary.points[0].sr - sr_expect).abs() < 1e-12);
        assert_eq!(boundary.points[0].sr_std_err, 0.0);
        assert!(boundary.points[1].cr > boundary.points[0].cr);
    }
}
