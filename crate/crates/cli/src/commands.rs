//! The four experiment drivers. Each reads the resolved spec, sweeps the
//! SNR grid (or the region grids), and writes one CSV per table plus a JSON
//! report embedding the full spec for provenance.

use std::path::Path;

use isac_core::allocation::sensing_waterfill;
use isac_core::montecarlo::{estimate_avg_sr, estimate_ecr, estimate_op, McDesign};
use isac_core::rates::{
    asymptote_ecr, asymptote_sr, ecr_closed_form, fdsac_asymptote_cr, fdsac_asymptote_sr,
};
use isac_core::region::{
    check_containment, fdsac_boundary, isac_boundary, verify_sandwich, BoundaryPoint,
    ContainmentReport, RegionBoundary, SweepParam,
};
use serde::Serialize;

use crate::output::{opt_cell, write_csv, write_json};
use crate::spec::ExperimentSpec;
use crate::CliError;

fn designs(spec: &ExperimentSpec) -> Vec<(&'static str, McDesign)> {
    vec![
        ("sc", McDesign::SensingCentric),
        ("cc", McDesign::CommCentric),
        ("pareto", McDesign::Pareto { alpha: spec.alpha }),
        ("fdsac", McDesign::Fdsac { kappa: spec.kappa, mu: spec.mu }),
    ]
}

#[derive(Serialize)]
struct Report<R: Serialize> {
    spec: ExperimentSpec,
    rows: Vec<R>,
}

#[derive(Serialize, Clone)]
struct OpRow {
    p_db: f64,
    design: String,
    op: f64,
    std_err: f64,
    upper95: Option<f64>,
    trials: u64,
    ref_diversity: f64,
}

/// Outage-probability table over the SNR grid, all four designs, with the
/// reference diversity curve `p^(-M(K-M+1))` for overlay.
pub fn cmd_op(spec: &ExperimentSpec, out: &Path) -> Result<(), CliError> {
    let corr = spec.build_correlation()?;
    let diversity = (spec.m * (spec.k - spec.m + 1)) as i32;
    let mut rows = Vec::new();
    for &db in &spec.snr_grid_db {
        let cfg = spec.config_at_db(db)?;
        for (label, design) in designs(spec) {
            let est = estimate_op(design, &cfg, &corr, spec.r0, spec.trials, spec.seed)?;
            rows.push(OpRow {
                p_db: db,
                design: label.to_string(),
                op: est.mean,
                std_err: est.std_err,
                upper95: est.upper95,
                trials: est.trials,
                ref_diversity: cfg.p.powi(-diversity),
            });
        }
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.p_db,
                r.design,
                r.op,
                r.std_err,
                opt_cell(r.upper95),
                r.trials,
                r.ref_diversity
            )
        })
        .collect();
    write_csv(&out.join("op.csv"), "p_db,design,op,std_err,upper95,trials,ref_diversity", &csv)?;
    write_json(&out.join("op.json"), &Report { spec: spec.clone(), rows })
}

#[derive(Serialize, Clone)]
struct EcrRow {
    p_db: f64,
    design: String,
    ecr: f64,
    std_err: f64,
    closed_form: Option<f64>,
    asymptote: f64,
}

/// Ergodic communication rate table: Monte Carlo column for every design,
/// the closed form for the fixed sensing-optimal powers, and the high-SNR
/// lines.
pub fn cmd_ecr(spec: &ExperimentSpec, out: &Path) -> Result<(), CliError> {
    let corr = spec.build_correlation()?;
    let mut rows = Vec::new();
    for &db in &spec.snr_grid_db {
        let cfg = spec.config_at_db(db)?;
        let s_star = sensing_waterfill(&corr, &cfg)?;
        let sc_closed = ecr_closed_form(&s_star.powers, cfg.kprime())?;
        for (label, design) in designs(spec) {
            let est = estimate_ecr(design, &cfg, &corr, spec.trials, spec.seed)?;
            let closed_form = (label == "sc").then_some(sc_closed);
            let asymptote = match design {
                McDesign::Fdsac { kappa, mu } => fdsac_asymptote_cr(&cfg, cfg.p, kappa, mu),
                _ => asymptote_ecr(&cfg, cfg.p),
            };
            rows.push(EcrRow {
                p_db: db,
                design: label.to_string(),
                ecr: est.mean,
                std_err: est.std_err,
                closed_form,
                asymptote,
            });
        }
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.p_db,
                r.design,
                r.ecr,
                r.std_err,
                opt_cell(r.closed_form),
                r.asymptote
            )
        })
        .collect();
    write_csv(&out.join("ecr.csv"), "p_db,design,ecr,std_err,closed_form,asymptote", &csv)?;
    write_json(&out.join("ecr.json"), &Report { spec: spec.clone(), rows })
}

#[derive(Serialize, Clone)]
struct SrRow {
    p_db: f64,
    design: String,
    sr: f64,
    std_err: f64,
    asymptote: f64,
}

/// Sensing-rate table: deterministic for the sensing-optimal and FDSAC
/// designs, averaged for the adaptive ones, plus the high-SNR lines.
pub fn cmd_sr(spec: &ExperimentSpec, out: &Path) -> Result<(), CliError> {
    let corr = spec.build_correlation()?;
    let mut rows = Vec::new();
    for &db in &spec.snr_grid_db {
        let cfg = spec.config_at_db(db)?;
        for (label, design) in designs(spec) {
            let est = estimate_avg_sr(design, &cfg, &corr, spec.trials, spec.seed)?;
            let asymptote = match design {
                McDesign::Fdsac { kappa, mu } => {
                    fdsac_asymptote_sr(&corr, &cfg, cfg.p, kappa, mu)
                }
                _ => asymptote_sr(&corr, &cfg, cfg.p),
            };
            rows.push(SrRow {
                p_db: db,
                design: label.to_string(),
                sr: est.mean,
                std_err: est.std_err,
                asymptote,
            });
        }
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{},{},{}", r.p_db, r.design, r.sr, r.std_err, r.asymptote))
        .collect();
    write_csv(&out.join("sr.csv"), "p_db,design,sr,std_err,asymptote", &csv)?;
    write_json(&out.join("sr.json"), &Report { spec: spec.clone(), rows })
}

fn param_label(p: &SweepParam) -> String {
    match p {
        SweepParam::Alpha(a) => format!("alpha={a}"),
        SweepParam::KappaMu { kappa, mu } => format!("kappa={kappa},mu={mu}"),
        SweepParam::Epsilon(e) => format!("eps={e}"),
    }
}

#[derive(Serialize)]
struct ContainmentEntryJson {
    param: String,
    sr: f64,
    cr: f64,
    bound_cr: f64,
    margin: f64,
    tol: f64,
    clamped: bool,
    covered: bool,
}

#[derive(Serialize)]
struct ContainmentJson {
    violations: usize,
    ok: bool,
    entries: Vec<ContainmentEntryJson>,
}

fn containment_json(report: &ContainmentReport) -> ContainmentJson {
    ContainmentJson {
        violations: report.violations,
        ok: report.ok(),
        entries: report
            .entries
            .iter()
            .map(|e| ContainmentEntryJson {
                param: param_label(&e.param),
                sr: e.sr,
                cr: e.cr,
                bound_cr: e.bound_cr,
                margin: e.margin,
                tol: e.tol,
                clamped: e.clamped,
                covered: e.covered,
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct DominationJson {
    epsilon: f64,
    sr_split: f64,
    cr_split: f64,
    sr_combined: f64,
    cr_combined: f64,
    sr_margin: f64,
    cr_margin: f64,
    ok: bool,
}

#[derive(Serialize)]
struct SandwichJson {
    fdsac_in_split: ContainmentJson,
    split_in_combined: Vec<DominationJson>,
    split_in_combined_violations: usize,
    combined_in_isac: ContainmentJson,
    max_power_residual: f64,
    ok: bool,
}

#[derive(Serialize)]
struct EndpointJson {
    sr: f64,
    cr: f64,
}

#[derive(Serialize)]
struct RegionReport {
    spec: ExperimentSpec,
    p_db: f64,
    sensing_endpoint: EndpointJson,
    comm_endpoint: EndpointJson,
    fdsac_in_isac: ContainmentJson,
    sandwich: SandwichJson,
    ok: bool,
}

fn boundary_csv(points: &[BoundaryPoint], head: &str) -> (String, Vec<String>) {
    let rows = points
        .iter()
        .map(|p| {
            let param = match p.param {
                SweepParam::Alpha(a) => a.to_string(),
                SweepParam::KappaMu { kappa, mu } => format!("{kappa},{mu}"),
                SweepParam::Epsilon(e) => e.to_string(),
            };
            format!("{},{},{},{},{}", param, p.sr, p.sr_std_err, p.cr, p.cr_std_err)
        })
        .collect();
    (format!("{head},sr,sr_std_err,cr,cr_std_err"), rows)
}

fn endpoint(boundary: &RegionBoundary, alpha: f64) -> Result<EndpointJson, CliError> {
    boundary
        .points
        .iter()
        .find(|p| matches!(p.param, SweepParam::Alpha(a) if a == alpha))
        .map(|p| EndpointJson { sr: p.sr, cr: p.cr })
        .ok_or_else(|| {
            CliError::Numerical(format!("boundary missing the alpha={alpha} endpoint"))
        })
}

/// Rate-region computation at `region_snr_db`: integrated and
/// frequency-division boundaries, containment check, and the auxiliary
/// region sandwich, written as four CSVs plus `containment.json`.
pub fn cmd_region(spec: &ExperimentSpec, out: &Path) -> Result<(), CliError> {
    let corr = spec.build_correlation()?;
    let cfg = spec.config_at_db(spec.region_snr_db)?;

    let isac = isac_boundary(&cfg, &corr, &spec.alpha_grid, spec.trials, spec.seed)?;
    let fdsac =
        fdsac_boundary(&cfg, &corr, &spec.kappa_grid, &spec.mu_grid, spec.trials, spec.seed)?;
    let containment = check_containment(&fdsac.boundary, &isac);
    let sandwich = verify_sandwich(
        &cfg,
        &corr,
        &spec.epsilon_grid,
        &isac,
        &fdsac.boundary,
        spec.trials,
        spec.seed,
    )?;

    let (head, rows) = boundary_csv(&isac.points, "alpha");
    write_csv(&out.join("region_isac.csv"), &head, &rows)?;
    let (head, rows) = boundary_csv(&fdsac.boundary.points, "kappa,mu");
    write_csv(&out.join("region_fdsac.csv"), &head, &rows)?;
    let (head, rows) = boundary_csv(&fdsac.grid, "kappa,mu");
    write_csv(&out.join("region_fdsac_grid.csv"), &head, &rows)?;
    let (head, rows) = boundary_csv(&sandwich.power_split.points, "epsilon");
    write_csv(&out.join("region_aux_split.csv"), &head, &rows)?;
    let (head, rows) = boundary_csv(&sandwich.combined.points, "epsilon");
    write_csv(&out.join("region_aux_combined.csv"), &head, &rows)?;

    let report = RegionReport {
        spec: spec.clone(),
        p_db: spec.region_snr_db,
        sensing_endpoint: endpoint(&isac, 1.0)?,
        comm_endpoint: endpoint(&isac, 0.0)?,
        ok: containment.ok() && sandwich.ok(),
        fdsac_in_isac: containment_json(&containment),
        sandwich: SandwichJson {
            fdsac_in_split: containment_json(&sandwich.fdsac_in_split),
            split_in_combined: sandwich
                .split_in_combined
                .iter()
                .map(|d| DominationJson {
                    epsilon: d.epsilon,
                    sr_split: d.sr_split,
                    cr_split: d.cr_split,
                    sr_combined: d.sr_combined,
                    cr_combined: d.cr_combined,
                    sr_margin: d.sr_margin,
                    cr_margin: d.cr_margin,
                    ok: d.ok,
                })
                .collect(),
            split_in_combined_violations: sandwich.split_in_combined_violations,
            combined_in_isac: containment_json(&sandwich.combined_in_isac),
            max_power_residual: sandwich.max_power_residual,
            ok: sandwich.ok(),
        },
    };
    write_json(&out.join("containment.json"), &report)
}
