//! Experiment configuration file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wasn_deploy::density::{build_grid, read_density_csv};
use wasn_deploy::optimize::{InitPolicy, DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS, DEFAULT_RBF_TRIALS};
use wasn_deploy::{DensityGrid, DensitySpec, OptimizerConfig, PhysicalParams, Region};

/// Environment variable consulted when the config names no output directory.
pub const OUTPUT_DIR_ENV: &str = "WASN_DEPLOY_OUT";
pub const FALLBACK_OUTPUT_DIR: &str = "wasn-deploy-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rl,
    Rbf,
    Lbf,
    Cl,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rl => "rl",
            Algorithm::Rbf => "rbf",
            Algorithm::Lbf => "lbf",
            Algorithm::Cl => "cl",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambdas {
    One(f64),
    Many(Vec<f64>),
}

impl Lambdas {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Lambdas::One(l) => vec![*l],
            Lambdas::Many(ls) => ls.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityConfig {
    Uniform,
    /// Grid of samples read from a CSV, resolution taken from the file.
    Table { path: PathBuf, #[serde(default = "yes")] normalize: bool },
}

fn yes() -> bool {
    true
}

/// One JSON document describing a batch of runs. Every field is optional
/// and defaults to the standard setup: 40 sensors, 4 fusion centers,
/// uniform density on a 10 x 10 square sampled at 100 x 100.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub density: DensityConfig,
    pub n_sensors: usize,
    pub n_fcs: usize,
    pub lambda: Lambdas,
    pub beta: f64,
    pub rho: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub rbf_trials: usize,
    pub init: InitPolicy,
    pub output_dir: Option<PathBuf>,
    /// Write every `snapshot_stride`-th iterate to `snapshots.jsonl`; 0 disables.
    pub snapshot_stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let params = PhysicalParams::default();
        Self {
            region: Region { x_min: 0.0, x_max: 10.0, y_min: 0.0, y_max: 10.0 },
            nx: 100,
            ny: 100,
            density: DensityConfig::Uniform,
            n_sensors: 40,
            n_fcs: 4,
            lambda: Lambdas::One(0.25),
            beta: params.beta,
            rho: params.rho,
            kappa: params.kappa,
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seeds: vec![0],
            algorithms: vec![Algorithm::Rl],
            rbf_trials: DEFAULT_RBF_TRIALS,
            init: InitPolicy::Lloyd,
            output_dir: None,
            snapshot_stride: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.validate().with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    /// Field-level checks; the first offending field is named in the error.
    pub fn validate(&self) -> Result<()> {
        self.region.validate().context("field `region`")?;
        if self.nx == 0 || self.ny == 0 {
            bail!("fields `nx`/`ny`: resolution must be positive, got {} x {}", self.nx, self.ny);
        }
        if self.n_sensors == 0 {
            bail!("field `n_sensors`: must be >= 1");
        }
        if self.n_fcs == 0 {
            bail!("field `n_fcs`: must be >= 1");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            bail!("field `epsilon`: must be finite and > 0, got {}", self.epsilon);
        }
        if self.max_iterations == 0 {
            bail!("field `max_iterations`: must be >= 1");
        }
        if self.seeds.is_empty() {
            bail!("field `seeds`: at least one seed is required");
        }
        if self.algorithms.is_empty() {
            bail!("field `algorithms`: at least one algorithm is required");
        }
        let lambdas = self.lambda.values();
        if lambdas.is_empty() {
            bail!("field `lambda`: at least one value is required");
        }
        if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            bail!("field `lambda`: values must be finite and >= 0, got {l}");
        }
        if self.algorithms.contains(&Algorithm::Rbf) && self.rbf_trials == 0 {
            bail!("field `rbf_trials`: must be >= 1");
        }
        PhysicalParams::new(self.beta, self.rho, self.kappa).context("fields `beta`/`rho`/`kappa`")?;
        for &lambda in &lambdas {
            self.optimizer(lambda, self.seeds[0]).validate().context("optimizer fields")?;
        }
        Ok(())
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams { beta: self.beta, rho: self.rho, kappa: self.kappa }
    }

    pub fn optimizer(&self, lambda: f64, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            n_sensors: self.n_sensors,
            n_fcs: self.n_fcs,
            lambda,
            params: self.params(),
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            seed,
            init: self.init,
        }
    }

    /// Relative table paths resolve against `base`, normally the config's directory.
    pub fn grid(&self, base: &Path) -> Result<DensityGrid> {
        let grid = match &self.density {
            DensityConfig::Uniform => build_grid(self.region, self.nx, self.ny, &DensitySpec::Uniform)?,
            DensityConfig::Table { path, normalize } => {
                let path = base.join(path);
                let (nx, ny, values) =
                    read_density_csv(&path).with_context(|| format!("reading density table {}", path.display()))?;
                let spec = DensitySpec::Table { values, normalize: *normalize };
                build_grid(self.region, nx, ny, &spec).context("field `density`")?
            }
        };
        Ok(grid)
    }

    /// Config value, then the environment, then a fixed fallback.
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_standard_setup() {
        let c: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!((c.n_sensors, c.n_fcs, c.nx, c.ny), (40, 4, 100, 100));
        assert_eq!((c.beta, c.rho, c.kappa, c.epsilon), (1.0, 0.1, 1.0, 1e-6));
        c.validate().unwrap();
    }

    #[test]
    fn lambda_accepts_scalar_or_list() {
        let one: ExperimentConfig = serde_json::from_str(r#"{"lambda": 2}"#).unwrap();
        assert_eq!(one.lambda.values(), [2.0]);
        let many: ExperimentConfig = serde_json::from_str(r#"{"lambda": [0, 0.5]}"#).unwrap();
        assert_eq!(many.lambda.values(), [0.0, 0.5]);
    }

    #[test]
    fn table_density_resolves_against_base() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("f.csv"), "1,1\n3,3\n").unwrap();
        let c: ExperimentConfig = serde_json::from_str(r#"{"density": {"table": {"path": "f.csv"}}}"#).unwrap();
        let grid = c.grid(dir.path()).unwrap();
        assert_eq!((grid.nx(), grid.ny()), (2, 2));
        assert!((grid.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_output_dir_wins() {
        let c = ExperimentConfig { output_dir: Some("here".into()), ..Default::default() };
        assert_eq!(c.resolve_output_dir(), PathBuf::from("here"));
    }
}
