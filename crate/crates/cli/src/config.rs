//! The experiment configuration file: one TOML document capturing every
//! knob of a reproducible run.

use anyhow::{bail, Context, Result};
use contextsim::apparatus::ApparatusConfig;
use contextsim::nchv::{ExpressionTerm, LinearExpression};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Pipeline stages selectable in the config; `full` executes the listed
/// stages in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Theory,
    Simulate,
    Analyze,
}

fn default_stages() -> Vec<Stage> {
    vec![Stage::Theory, Stage::Simulate, Stage::Analyze]
}

fn default_repetitions() -> u32 {
    3
}

fn default_chi_points() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    pub out_dir: PathBuf,
    /// RNG seed; mandatory whenever the simulate stage runs.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default = "default_chi_points")]
    pub chi_points: usize,
}

/// A named inequality expression evaluated by the theory stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedExpression {
    pub name: String,
    #[serde(default)]
    pub constant: f64,
    pub terms: Vec<ExpressionTerm>,
}

impl NamedExpression {
    pub fn to_expression(&self) -> LinearExpression {
        LinearExpression {
            terms: self.terms.clone(),
            constant: self.constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run: RunSection,
    pub apparatus: ApparatusConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expressions: Vec<NamedExpression>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config `{}`", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config `{}`", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.apparatus
            .validate()
            .context("apparatus section is out of range")?;
        if self.run.repetitions < 1 {
            bail!("run.repetitions must be at least 1");
        }
        if self.run.chi_points < 8 {
            bail!("run.chi_points must be at least 8 for fit identifiability");
        }
        if self.run.stages.contains(&Stage::Simulate) && self.run.seed.is_none() {
            bail!("run.seed is mandatory when the simulate stage is enabled");
        }
        Ok(())
    }

    /// The apparatus block with the run seed folded in.
    pub fn apparatus_with_seed(&self, seed: u64) -> ApparatusConfig {
        ApparatusConfig {
            rng_seed: seed,
            ..self.apparatus
        }
    }
}
