//! Plain-text experiment specification: `key = value` lines, `#` comments,
//! comma-separated lists. Every field is validated before any computation
//! so a bad file fails fast with the offending line or field named.

use std::collections::BTreeMap;
use std::path::Path;

use isac_core::model::{SensingCorrelation, SystemConfig, Target, TargetScene};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationSpec {
    /// Synthetic correlation with the given spectrum and a seeded random basis.
    Eigenvalues { lambdas: Vec<f64>, corr_seed: u64 },
    /// Correlation built from point targets seen through a half-wavelength ULA.
    Scene { sigma2: Vec<f64>, theta: Vec<f64> },
}

/// Fully resolved experiment description; serialized into every JSON report
/// for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub r0: f64,
    pub correlation: CorrelationSpec,
    pub snr_grid_db: Vec<f64>,
    /// Power point for the region command (dB).
    pub region_snr_db: f64,
    pub trials: u64,
    pub seed: u64,
    /// Rate-profile parameter for the tabulated Pareto design.
    pub alpha: f64,
    /// FDSAC band fraction for the tabulated design.
    pub kappa: f64,
    /// FDSAC power fraction for the tabulated design.
    pub mu: f64,
    pub alpha_grid: Vec<f64>,
    pub kappa_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

struct RawSpec {
    entries: BTreeMap<String, (usize, String)>,
    consumed: Vec<String>,
}

impl RawSpec {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(validation(format!(
                    "line {line_no}: expected `key = value`, got `{line}`"
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(validation(format!("line {line_no}: empty key")));
            }
            if let Some((first_line, _)) = entries.get(&key) {
                return Err(validation(format!(
                    "line {line_no}: duplicate key `{key}` (first set on line {first_line})"
                )));
            }
            entries.insert(key, (line_no, value));
        }
        Ok(Self { entries, consumed: Vec::new() })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.consumed.push(key.to_string());
        self.entries.remove(key)
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            return Err(validation(format!(
                "line {line}: unknown field `{key}` (known fields: {})",
                self.consumed.join(", ")
            )));
        }
        Ok(())
    }
}

fn parse_scalar<T: std::str::FromStr>(
    raw: &mut RawSpec,
    key: &str,
    what: &str,
) -> Result<Option<T>, CliError> {
    match raw.take(key) {
        None => Ok(None),
        Some((line, value)) => value.parse::<T>().map(Some).map_err(|_| {
            validation(format!("line {line}: field `{key}` must be {what}, got `{value}`"))
        }),
    }
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| validation(format!("missing required field `{key}`")))
}

fn parse_list(raw: &mut RawSpec, key: &str) -> Result<Option<Vec<f64>>, CliError> {
    match raw.take(key) {
        None => Ok(None),
        Some((line, value)) => {
            let mut out = Vec::new();
            for item in value.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                out.push(item.parse::<f64>().map_err(|_| {
                    validation(format!(
                        "line {line}: field `{key}` has non-numeric entry `{item}`"
                    ))
                })?);
            }
            if out.is_empty() {
                return Err(validation(format!("line {line}: field `{key}` is an empty list")));
            }
            Ok(Some(out))
        }
    }
}

fn unit_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

fn check_unit_grid(grid: &[f64], key: &str, need_endpoints: bool) -> Result<(), CliError> {
    if grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(validation(format!("field `{key}` must lie within [0, 1]")));
    }
    if need_endpoints && (!grid.contains(&0.0) || !grid.contains(&1.0)) {
        return Err(validation(format!("field `{key}` must include both 0 and 1")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            validation(format!("cannot read spec file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawSpec::parse(text)?;

        let m: usize = require(parse_scalar(&mut raw, "M", "a positive integer")?, "M")?;
        let n: usize = require(parse_scalar(&mut raw, "N", "a positive integer")?, "N")?;
        let k: usize = require(parse_scalar(&mut raw, "K", "a positive integer")?, "K")?;
        let l: usize = require(parse_scalar(&mut raw, "L", "a positive integer")?, "L")?;
        let r0: f64 = parse_scalar(&mut raw, "R0", "a number")?.unwrap_or(0.0);

        let lambdas = parse_list(&mut raw, "lambdas")?;
        let corr_seed: u64 =
            parse_scalar(&mut raw, "corr_seed", "an unsigned integer")?.unwrap_or(1);
        let sigma2 = parse_list(&mut raw, "scene_sigma2")?;
        let theta = parse_list(&mut raw, "scene_theta")?;
        let correlation = match (lambdas, sigma2, theta) {
            (Some(lambdas), None, None) => {
                if lambdas.len() != m {
                    return Err(validation(format!(
                        "field `lambdas` must have M = {m} entries, got {}",
                        lambdas.len()
                    )));
                }
                CorrelationSpec::Eigenvalues { lambdas, corr_seed }
            }
            (None, Some(sigma2), Some(theta)) => {
                if sigma2.len() != theta.len() {
                    return Err(validation(
                        "fields `scene_sigma2` and `scene_theta` must have equal length",
                    ));
                }
                CorrelationSpec::Scene { sigma2, theta }
            }
            (None, None, None) => {
                return Err(validation(
                    "missing correlation: set `lambdas` or both `scene_sigma2` and `scene_theta`",
                ))
            }
            _ => {
                return Err(validation(
                    "set either `lambdas` or the `scene_*` pair, not a mixture",
                ))
            }
        };

        let snr_grid_db =
            require(parse_list(&mut raw, "snr_grid_db")?, "snr_grid_db")?;
        let region_snr_db: f64 = parse_scalar(&mut raw, "region_snr_db", "a number")?
            .unwrap_or(snr_grid_db[0]);
        let trials: u64 =
            require(parse_scalar(&mut raw, "trials", "an unsigned integer")?, "trials")?;
        let seed: u64 = require(parse_scalar(&mut raw, "seed", "an unsigned integer")?, "seed")?;
        let alpha: f64 = parse_scalar(&mut raw, "alpha", "a number in [0,1]")?.unwrap_or(0.5);
        let kappa: f64 = parse_scalar(&mut raw, "kappa", "a number in [0,1]")?.unwrap_or(0.5);
        let mu: f64 = parse_scalar(&mut raw, "mu", "a number in [0,1]")?.unwrap_or(0.5);
        let alpha_grid = parse_list(&mut raw, "alpha_grid")?.unwrap_or_else(|| unit_grid(21));
        let kappa_grid = parse_list(&mut raw, "kappa_grid")?.unwrap_or_else(|| unit_grid(21));
        let mu_grid = parse_list(&mut raw, "mu_grid")?.unwrap_or_else(|| unit_grid(21));
        let epsilon_grid =
            parse_list(&mut raw, "epsilon_grid")?.unwrap_or_else(|| unit_grid(11));
        raw.finish()?;

        for (value, key) in [(alpha, "alpha"), (kappa, "kappa"), (mu, "mu")] {
            if !(0.0..=1.0).contains(&value) {
                return Err(validation(format!("field `{key}` must lie within [0, 1]")));
            }
        }
        check_unit_grid(&alpha_grid, "alpha_grid", true)?;
        check_unit_grid(&kappa_grid, "kappa_grid", true)?;
        check_unit_grid(&mu_grid, "mu_grid", true)?;
        check_unit_grid(&epsilon_grid, "epsilon_grid", false)?;

        let spec = Self {
            m,
            n,
            k,
            l,
            r0,
            correlation,
            snr_grid_db,
            region_snr_db,
            trials,
            seed,
            alpha,
            kappa,
            mu,
            alpha_grid,
            kappa_grid,
            mu_grid,
            epsilon_grid,
        };
        // Surface dimension/power problems now, not at the first sweep point.
        spec.config_at_db(spec.snr_grid_db[0])?;
        spec.build_correlation()?;
        Ok(spec)
    }

    pub fn config_at_db(&self, snr_db: f64) -> Result<SystemConfig, CliError> {
        let p = 10f64.powf(snr_db / 10.0);
        SystemConfig::new(self.m, self.n, self.k, self.l, p, self.r0)
            .map_err(|e| validation(e.to_string()))
    }

    pub fn build_correlation(&self) -> Result<SensingCorrelation, CliError> {
        match &self.correlation {
            CorrelationSpec::Eigenvalues { lambdas, corr_seed } => {
                SensingCorrelation::from_eigenvalues(lambdas, *corr_seed)
                    .map_err(|e| validation(e.to_string()))
            }
            CorrelationSpec::Scene { sigma2, theta } => {
                let targets: Vec<Target> = sigma2
                    .iter()
                    .zip(theta)
                    .map(|(&sigma2, &theta)| Target { sigma2, theta })
                    .collect();
                let scene = TargetScene::new(targets).map_err(|e| validation(e.to_string()))?;
                SensingCorrelation::from_scene(&scene, self.m)
                    .map_err(|e| validation(e.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
M = 2
N = 2
K = 2
L = 4
lambdas = 1, 0.5
snr_grid_db = 0, 10
trials = 1000
seed = 7
";

    #[test]
    fn parses_minimal_spec_with_defaults() {
        let spec = ExperimentSpec::parse(MINIMAL).unwrap();
        assert_eq!(spec.m, 2);
        assert_eq!(spec.alpha, 0.5);
        assert_eq!(spec.alpha_grid.len(), 21);
        assert_eq!(spec.epsilon_grid.len(), 11);
        assert_eq!(spec.region_snr_db, 0.0);
        assert_eq!(spec.r0, 0.0);
    }

    #[test]
    fn rejects_missing_required_field() {
        let text = MINIMAL.replace("M = 2\n", "");
        let err = ExperimentSpec::parse(&text).unwrap_err();
        assert!(err.to_string().contains("missing required field `M`"), "{err}");
    }

    #[test]
    fn rejects_unknown_field_with_line() {
        let text = format!("{MINIMAL}bogus = 3\n");
        let err = ExperimentSpec::parse(&text).unwrap_err();
        assert!(err.to_string().contains("unknown field `bogus`"), "{err}");
        assert!(err.to_string().contains("line 9"), "{err}");
    }

    #[test]
    fn rejects_bad_numbers_and_duplicates() {
        let text = MINIMAL.replace("trials = 1000", "trials = soon");
        let err = ExperimentSpec::parse(&text).unwrap_err();
        assert!(err.to_string().contains("`trials`"), "{err}");

        let text = format!("{MINIMAL}M = 3\n");
        let err = ExperimentSpec::parse(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate key `M`"), "{err}");
    }

    #[test]
    fn rejects_wrong_lambda_count_and_bad_dims() {
        let text = MINIMAL.replace("lambdas = 1, 0.5", "lambdas = 1");
        assert!(ExperimentSpec::parse(&text).is_err());
        // K < M fails system validation at parse time.
        let text = MINIMAL.replace("K = 2", "K = 1");
        assert!(ExperimentSpec::parse(&text).is_err());
    }

    #[test]
    fn accepts_scene_correlation() {
        let text = MINIMAL.replace(
            "lambdas = 1, 0.5",
            "scene_sigma2 = 1, 1\nscene_theta = 0, 1.5707963",
        );
        let spec = ExperimentSpec::parse(&text).unwrap();
        assert!(matches!(spec.correlation, CorrelationSpec::Scene { .. }));
        spec.build_correlation().unwrap();
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = format!("# header\n\n{MINIMAL}# trailing\n");
        assert!(ExperimentSpec::parse(&text).is_ok());
    }
}
