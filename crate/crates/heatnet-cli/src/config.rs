//! TOML experiment configuration.
//!
//! Unknown keys are hard errors everywhere: a typo in a config should never
//! silently fall back to a default.

use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use heatnet::covariance::Statistics;
use heatnet::{Boundary, Cutoff, HarmonicNetwork, LatticeSpec, ReservoirSet};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: Option<LatticeConfig>,
    pub matrices: Option<MatricesConfig>,
    pub reservoirs: Option<ReservoirConfig>,
    pub scaling: Option<ScalingConfig>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dim: usize,
    pub n: usize,
    pub k0: f64,
    #[serde(default = "one")]
    pub mass_mean: f64,
    #[serde(default)]
    pub mass_spread: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub realization: u64,
    #[serde(default = "fixed")]
    pub boundary: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatricesConfig {
    /// Diagonal masses, one per site.
    pub masses: Vec<f64>,
    /// Path to the potential matrix in the plain-text matrix format,
    /// relative to the config file.
    pub potential: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    /// Site groups; defaults to the two lattice faces when absent.
    pub contacts: Option<Vec<Vec<usize>>>,
    pub temperatures: Vec<f64>,
    pub gamma0: f64,
    /// `"infinite"` or a positive cutoff frequency.
    pub cutoff: toml::Value,
    #[serde(default = "quantum")]
    pub statistics: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub gamma0: Vec<f64>,
    pub realizations: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "verify_tol")]
    pub rel_tol: f64,
    #[serde(default = "quad_tol")]
    pub quadrature_rel_tol: f64,
}

fn one() -> f64 {
    1.0
}
fn fixed() -> String {
    "fixed".into()
}
fn quantum() -> String {
    "quantum".into()
}
fn verify_tol() -> f64 {
    1e-6
}
fn quad_tol() -> f64 {
    1e-10
}

pub fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(cfg)
}

pub fn parse_boundary(s: &str) -> anyhow::Result<Boundary> {
    match s {
        "fixed" => Ok(Boundary::Fixed),
        "free" => Ok(Boundary::Free),
        other => bail!("boundary must be \"fixed\" or \"free\", got {other:?}"),
    }
}

pub fn parse_statistics(s: &str) -> anyhow::Result<Statistics> {
    match s {
        "quantum" => Ok(Statistics::Quantum),
        "classical" => Ok(Statistics::Classical),
        other => bail!("statistics must be \"quantum\" or \"classical\", got {other:?}"),
    }
}

pub fn parse_cutoff(v: &toml::Value) -> anyhow::Result<Cutoff> {
    match v {
        toml::Value::String(s) if s == "infinite" => Ok(Cutoff::Infinite),
        toml::Value::Float(f) if *f > 0.0 => Ok(Cutoff::Finite(*f)),
        toml::Value::Integer(i) if *i > 0 => Ok(Cutoff::Finite(*i as f64)),
        other => bail!("cutoff must be \"infinite\" or a positive number, got {other:?}"),
    }
}

impl LatticeConfig {
    pub fn to_spec(&self) -> anyhow::Result<LatticeSpec> {
        Ok(LatticeSpec {
            dim: self.dim,
            n: self.n,
            k0: self.k0,
            mass_mean: self.mass_mean,
            mass_spread: self.mass_spread,
            seed: self.seed,
            boundary: parse_boundary(&self.boundary)?,
        })
    }
}

/// Builds the network and reservoirs for the single-solve verbs.
pub fn build_problem(
    cfg: &ExperimentConfig,
    config_dir: &Path,
) -> anyhow::Result<(HarmonicNetwork, ReservoirSet, Statistics)> {
    let res_cfg = cfg
        .reservoirs
        .as_ref()
        .context("config needs a [reservoirs] section")?;

    let (network, default_contacts) = match (&cfg.lattice, &cfg.matrices) {
        (Some(lat), None) => {
            let spec = lat.to_spec()?;
            let (network, _) = heatnet::build_lattice(&spec, lat.realization)?;
            (network, Some(heatnet::contacts_for_lattice(&spec)))
        }
        (None, Some(mats)) => {
            let path = config_dir.join(&mats.potential);
            let file = std::fs::File::open(&path)
                .with_context(|| format!("opening {}", path.display()))?;
            let potential = heatnet::io::read_matrix(&mut std::io::BufReader::new(file))?;
            let network = HarmonicNetwork::with_diagonal_mass(&mats.masses, potential)?;
            (network, None)
        }
        (Some(_), Some(_)) => bail!("config has both [lattice] and [matrices]; pick one"),
        (None, None) => bail!("config needs a [lattice] or [matrices] section"),
    };

    let contacts = match (&res_cfg.contacts, default_contacts) {
        (Some(c), _) => c.clone(),
        (None, Some(c)) => c,
        (None, None) => bail!("[reservoirs] needs explicit contacts without a lattice"),
    };
    let reservoirs = ReservoirSet::new(
        contacts,
        res_cfg.temperatures.clone(),
        res_cfg.gamma0,
        parse_cutoff(&res_cfg.cutoff)?,
    )?;
    reservoirs.check_sites(network.size())?;
    let stats = parse_statistics(&res_cfg.statistics)?;
    Ok((network, reservoirs, stats))
}
