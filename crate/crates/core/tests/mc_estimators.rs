//! Monte Carlo estimators against closed forms, a quasi-Monte-Carlo outage
//! oracle, and their own statistical contracts.

mod common;

use common::halton;
use isac_core::allocation::sensing_waterfill;
use isac_core::model::{SensingCorrelation, SystemConfig};
use isac_core::montecarlo::{estimate_avg_sr, estimate_ecr, estimate_op, McDesign};
use isac_core::rates::{asymptote_sr, ecr_closed_form};

fn sv_corr() -> SensingCorrelation {
    SensingCorrelation::from_eigenvalues(&[1.0, 0.1, 0.05, 0.01], 7).unwrap()
}

fn sv_cfg(p: f64) -> SystemConfig {
    SystemConfig::new(4, 5, 4, 30, p, 2.0).unwrap()
}

#[test]
fn ecr_estimate_matches_closed_form_at_ten_db() {
    let cfg = sv_cfg(10.0);
    let corr = sv_corr();
    let est = estimate_ecr(McDesign::SensingCentric, &cfg, &corr, 400_000, 0xA1).unwrap();
    let s = sensing_waterfill(&corr, &cfg).unwrap();
    let closed = ecr_closed_form(&s.powers, cfg.kprime()).unwrap();
    assert!(
        (est.mean - closed).abs() <= 3.0 * est.std_err,
        "mc {} closed {closed} se {}",
        est.mean,
        est.std_err
    );
}

#[test]
fn rates_vanish_at_low_power() {
    let cfg = sv_cfg(1e-4);
    let corr = sv_corr();
    for design in [
        McDesign::SensingCentric,
        McDesign::CommCentric,
        McDesign::Pareto { alpha: 0.5 },
        McDesign::Fdsac { kappa: 0.5, mu: 0.5 },
    ] {
        let est = estimate_ecr(design, &cfg, &corr, 20_000, 3).unwrap();
        assert!(est.mean >= 0.0 && est.mean < 3.0 * est.std_err + 1e-3, "{design:?}");
        let sr = estimate_avg_sr(design, &cfg, &corr, 20_000, 3).unwrap();
        assert!(sr.mean >= 0.0 && sr.mean < 3.0 * sr.std_err + 1e-3, "{design:?}");
    }
}

#[test]
fn closed_form_matches_full_channel_path_with_excess_antennas() {
    // End-to-end Gamma-shape check at K' = 3: the closed form assumes
    // rho ~ Gamma(K'+1, 1), the estimator draws rho through the zero-forcing
    // channel computation.
    let corr = SensingCorrelation::from_eigenvalues(&[1.0, 0.25], 3).unwrap();
    let cfg = SystemConfig::new(2, 3, 5, 6, 4.0, 1.0).unwrap();
    assert_eq!(cfg.kprime(), 3);
    let s = sensing_waterfill(&corr, &cfg).unwrap();
    let closed = ecr_closed_form(&s.powers, cfg.kprime()).unwrap();
    let est = estimate_ecr(McDesign::SensingCentric, &cfg, &corr, 300_000, 0xE6).unwrap();
    assert!(
        (est.mean - closed).abs() <= 3.0 * est.std_err,
        "mc {} closed {closed} se {}",
        est.mean,
        est.std_err
    );
}

#[test]
fn comm_centric_tracks_sensing_centric_at_forty_db() {
    let cfg = sv_cfg(1e4);
    let corr = sv_corr();
    let cc = estimate_ecr(McDesign::CommCentric, &cfg, &corr, 150_000, 0xB2).unwrap();
    let sc = estimate_ecr(McDesign::SensingCentric, &cfg, &corr, 150_000, 0xB2).unwrap();
    let gap = cc.mean - sc.mean;
    assert!(gap >= -3.0 * cc.std_err.hypot(sc.std_err), "optimality violated: {gap}");
    assert!(gap.abs() <= 0.3, "high-SNR gap {gap}");
}

#[test]
fn comm_centric_avg_sr_tracks_asymptote_at_forty_db() {
    let cfg = sv_cfg(1e4);
    let corr = sv_corr();
    let est = estimate_avg_sr(McDesign::CommCentric, &cfg, &corr, 150_000, 0xC3).unwrap();
    let asym = asymptote_sr(&corr, &cfg, cfg.p);
    assert!((est.mean - asym).abs() <= 0.3, "avg sr {} asym {asym}", est.mean);
}

#[test]
fn outage_matches_quasi_monte_carlo_oracle() {
    // Sensing-centric outage at 10 dB against a 4-D Halton evaluation of
    // Pr(sum log2(1 + s_m rho_m) < R0) with rho_m ~ Exp(1).
    let cfg = sv_cfg(10.0);
    let corr = sv_corr();
    let s = sensing_waterfill(&corr, &cfg).unwrap();
    let bases = [2u64, 3, 5, 7];
    let n = 2_000_000u64;
    let mut hits = 0u64;
    for i in 1..=n {
        let mut cr = 0.0;
        for (d, &s_m) in s.powers.iter().enumerate() {
            let u = halton(i, bases[d]);
            let rho = -(1.0 - u).max(1e-300).ln();
            cr += (s_m * rho).ln_1p() / std::f64::consts::LN_2;
        }
        if cr < cfg.r0 {
            hits += 1;
        }
    }
    let qmc = hits as f64 / n as f64;

    let est = estimate_op(McDesign::SensingCentric, &cfg, &corr, cfg.r0, 500_000, 0xD4).unwrap();
    let tol = 3.0 * est.std_err + 2e-3;
    assert!((est.mean - qmc).abs() <= tol, "mc {} qmc {qmc} tol {tol}", est.mean);
}

#[test]
fn outage_nonincreasing_in_power() {
    let corr = sv_corr();
    let mut last = f64::INFINITY;
    let mut last_se = 0.0f64;
    for &db in &[0.0, 5.0, 10.0, 15.0] {
        let cfg = sv_cfg(10f64.powf(db / 10.0));
        let est =
            estimate_op(McDesign::SensingCentric, &cfg, &corr, 2.0, 100_000, 0xE5).unwrap();
        assert!(
            est.mean <= last + 2.0 * est.std_err.hypot(last_se),
            "OP rose at {db} dB"
        );
        last = est.mean;
        last_se = est.std_err;
    }
}

#[test]
fn std_err_shrinks_like_sqrt_of_trials() {
    let cfg = sv_cfg(10.0);
    let corr = sv_corr();
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        let small = estimate_ecr(McDesign::CommCentric, &cfg, &corr, 2_000, seed).unwrap();
        let large = estimate_ecr(McDesign::CommCentric, &cfg, &corr, 4_000, seed).unwrap();
        ratios.push(small.std_err / large.std_err);
    }
    let mean_ratio: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let expect = std::f64::consts::SQRT_2;
    assert!(
        (mean_ratio - expect).abs() <= 0.1 * expect,
        "mean ratio {mean_ratio} expect {expect}"
    );
}
