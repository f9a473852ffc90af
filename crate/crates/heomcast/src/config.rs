//! System and bath configuration files (TOML).
//!
//! ```toml
//! sites = 2
//! epsilon = [100.0, 0.0]      # cm⁻¹
//! J = [50.0]                  # chain list, or a full sites × sites matrix
//! lambda = 35.0               # scalar or per-site list
//! gamma = 53.0
//! temperature_K = 300.0
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use heomcast_core::{BathSpec, SystemSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Couplings {
    Matrix(Vec<Vec<f64>>),
    Chain(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerSite {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerSite {
    fn expand(&self, n: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            PerSite::Scalar(v) => Ok(vec![*v; n]),
            PerSite::List(v) if v.len() == n => Ok(v.clone()),
            PerSite::List(v) => bail!("{name} lists {} values for {n} sites", v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub sites: usize,
    pub epsilon: Vec<f64>,
    #[serde(rename = "J")]
    pub couplings: Couplings,
    pub lambda: PerSite,
    pub gamma: PerSite,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

impl SystemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn system(&self) -> Result<SystemSpec> {
        let n = self.sites;
        if self.epsilon.len() != n {
            bail!("epsilon lists {} values for {n} sites", self.epsilon.len());
        }
        let spec = match &self.couplings {
            Couplings::Chain(chain) => SystemSpec::linear_chain(self.epsilon.clone(), chain)?,
            Couplings::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    bail!("J must be a {n}x{n} matrix");
                }
                SystemSpec::new(self.epsilon.clone(), rows.concat())?
            }
        };
        Ok(spec)
    }

    pub fn bath(&self) -> Result<BathSpec> {
        let lambdas = self.lambda.expand(self.sites, "lambda")?;
        let gammas = self.gamma.expand(self.sites, "gamma")?;
        Ok(BathSpec::new(lambdas, gammas, self.temperature_k)?)
    }
}
