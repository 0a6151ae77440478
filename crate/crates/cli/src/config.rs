//! Run configuration: strict JSON, resolved into a Hamiltonian, an initial
//! frame, a section rule and a grid.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use subspace_holonomy::codec::{self, MatrixSeries};
use subspace_holonomy::dynamics::{Hamiltonian, SampledHamiltonian};
use subspace_holonomy::lambda::{case_setup, LambdaCase};
use subspace_holonomy::{
    random, ComplexMatrix, FramePath, HamiltonianSpec, LambdaParams, SectionRule, TimeGrid,
    Tolerances,
};

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub subspace: SubspaceConfig,
    #[serde(default)]
    pub section: Option<SectionConfig>,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Lambda(LambdaParams),
    /// Path to a [`MatrixSeries`] of N x N samples.
    Sampled(PathBuf),
    Constant(#[serde(with = "codec::matrix")] ComplexMatrix),
    Driven {
        #[serde(with = "codec::matrix")]
        static_part: ComplexMatrix,
        #[serde(with = "codec::matrix")]
        drive: ComplexMatrix,
        frequency: f64,
    },
    /// `H₀ + cos(t) H₁` with Gaussian Hermitian parts drawn from the seed.
    RandomDriven { dimension: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SubspaceConfig {
    LambdaCase(LambdaCase),
    Matrix(#[serde(with = "codec::matrix")] ComplexMatrix),
    /// Random orthonormal frame drawn from the seed after the system.
    Random { columns: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SectionConfig {
    Fixed,
    PhaseAnchored,
    /// Path to a [`MatrixSeries`] of N x M frames on the run grid.
    Custom(PathBuf),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub tau: Option<f64>,
    pub steps: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
}

/// Everything a command needs, validated.
pub struct Prepared {
    pub spec: HamiltonianSpec,
    pub psi0: ComplexMatrix,
    pub rule: SectionRule,
    pub grid: TimeGrid,
    pub tol: Tolerances,
}

fn config_error(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn read_series(base: &Path, rel: &Path) -> Result<MatrixSeries, Failure> {
    let path = base.join(rel);
    let text = fs::read_to_string(&path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let series: MatrixSeries = serde_json::from_str(&text)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    if series.times.len() != series.matrices.len() {
        return Err(config_error(format!(
            "{}: {} times but {} matrices",
            path.display(),
            series.times.len(),
            series.matrices.len()
        )));
    }
    if series.matrices.iter().any(|m| m.nrows() != series.dimension) {
        return Err(config_error(format!(
            "{}: matrices do not have {} rows",
            path.display(),
            series.dimension
        )));
    }
    Ok(series)
}

pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Resolves descriptors relative to `base` (the config file's directory).
    pub fn prepare(&self, base: &Path, overrides: Overrides) -> Result<Prepared, Failure> {
        let tol = self.tolerances;
        tol.validate().map_err(config_error)?;
        let seed = overrides.seed.or(self.seed).unwrap_or(0);
        let mut rng = random::rng(seed);

        let spec = match &self.system {
            SystemConfig::Lambda(p) => p.spec(tol.structure_tol).map_err(config_error)?,
            SystemConfig::Sampled(rel) => {
                let series = read_series(base, rel)?;
                let grid = TimeGrid::new(series.times).map_err(config_error)?;
                let sampled = SampledHamiltonian::new(grid, series.matrices, tol.structure_tol)
                    .map_err(config_error)?;
                HamiltonianSpec::Sampled(sampled)
            }
            SystemConfig::Constant(h) => {
                HamiltonianSpec::constant(h.clone(), tol.structure_tol).map_err(config_error)?
            }
            SystemConfig::Driven {
                static_part,
                drive,
                frequency,
            } => HamiltonianSpec::driven(
                static_part.clone(),
                drive.clone(),
                *frequency,
                tol.structure_tol,
            )
            .map_err(config_error)?,
            SystemConfig::RandomDriven { dimension } => {
                if *dimension < 2 {
                    return Err(config_error("random_driven needs dimension >= 2"));
                }
                let h0 = random::hermitian(&mut rng, *dimension, 1.0);
                let h1 = random::hermitian(&mut rng, *dimension, 1.0);
                HamiltonianSpec::driven(h0, h1, 1.0, tol.structure_tol).map_err(config_error)?
            }
        };
        let n = spec.dimension();

        let tau = overrides
            .tau
            .or(self.grid.tau)
            .or(match &self.system {
                SystemConfig::Lambda(p) => Some(p.tau),
                _ => None,
            })
            .ok_or_else(|| config_error("grid.tau is required for this system"))?;
        let steps = overrides.steps.unwrap_or(self.grid.steps);
        if steps < 2 {
            return Err(config_error(format!("steps must be at least 2, got {steps}")));
        }
        let grid = TimeGrid::uniform(tau, steps).map_err(config_error)?;

        let (psi0, case_rule) = match &self.subspace {
            SubspaceConfig::LambdaCase(which) => {
                let SystemConfig::Lambda(p) = &self.system else {
                    return Err(config_error("lambda_case subspace requires a lambda system"));
                };
                let setup = case_setup(*which, p, tol.structure_tol).map_err(config_error)?;
                (setup.psi0, Some(setup.rule))
            }
            SubspaceConfig::Matrix(m) => (m.clone(), None),
            SubspaceConfig::Random { columns } => {
                if *columns == 0 || *columns > n {
                    return Err(config_error(format!(
                        "random subspace needs 1..={n} columns, got {columns}"
                    )));
                }
                (random::frame(&mut rng, n, *columns), None)
            }
        };
        if psi0.nrows() != n {
            return Err(config_error(format!(
                "initial frame has {} rows, system dimension is {n}",
                psi0.nrows()
            )));
        }

        let rule = match (&self.section, case_rule) {
            (None, Some(rule)) => rule,
            (None, None) | (Some(SectionConfig::PhaseAnchored), _) => SectionRule::PhaseAnchored,
            (Some(SectionConfig::Fixed), _) => SectionRule::Fixed(psi0.clone()),
            (Some(SectionConfig::Custom(rel)), _) => {
                let series = read_series(base, rel)?;
                let custom_grid = TimeGrid::new(series.times).map_err(config_error)?;
                if !custom_grid.same_as(&grid) {
                    return Err(config_error(
                        "custom section times do not match the run grid",
                    ));
                }
                let path =
                    FramePath::new(custom_grid, series.matrices, &tol).map_err(config_error)?;
                SectionRule::Custom(path)
            }
        };

        Ok(Prepared {
            spec,
            psi0,
            rule,
            grid,
            tol,
        })
    }
}
