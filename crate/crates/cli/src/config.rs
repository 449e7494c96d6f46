//! JSON run configuration.
//!
//! A single document drives every subcommand; unknown keys are rejected so a
//! typo cannot silently fall back to a default. Defaults reproduce the
//! reference operating point (10 dB primary SINR, unit noise, 20 betas,
//! 100 realizations). The resolved configuration echoed into the run manifest
//! parses back into this same schema, so a manifest reproduces its run.

use serde::{Deserialize, Serialize};

use cogpower_core::{
    ChannelModel, FadingParams, LinkBudget, PacketCount, PolicyKind, SimConfig,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Cg,
    Arq,
    Nocsi,
}

impl From<PolicyName> for PolicyKind {
    fn from(p: PolicyName) -> Self {
        match p {
            PolicyName::Cg => PolicyKind::Cg,
            PolicyName::Arq => PolicyKind::Arq,
            PolicyName::Nocsi => PolicyKind::NoCsi,
        }
    }
}

impl std::fmt::Display for PolicyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolicyName::Cg => "cg",
            PolicyName::Arq => "arq",
            PolicyName::Nocsi => "nocsi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Ar1,
    Jakes,
}

impl From<ModelName> for ChannelModel {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::Ar1 => ChannelModel::Ar1,
            ModelName::Jakes => ChannelModel::Jakes,
        }
    }
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelName::Ar1 => "ar1",
            ModelName::Jakes => "jakes",
        })
    }
}

/// `"auto"` or an explicit packet count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PacketsField {
    Count(u64),
    Mode(String),
}

impl PacketsField {
    fn resolve(&self) -> Result<PacketCount, CliError> {
        match self {
            PacketsField::Count(n) => Ok(PacketCount::Fixed(*n as usize)),
            PacketsField::Mode(s) if s == "auto" => Ok(PacketCount::Auto),
            PacketsField::Mode(s) => {
                Err(CliError::Config(format!("packets must be \"auto\" or a count, got {s:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "defaults::p_p")]
    pub p_p: f64,
    #[serde(default = "defaults::p_max")]
    pub p_max: f64,
    #[serde(default = "defaults::g21")]
    pub g21: f64,
    #[serde(default = "defaults::g22")]
    pub g22: f64,
    #[serde(default = "defaults::sigma")]
    pub sigma_p2: f64,
    #[serde(default = "defaults::sigma")]
    pub sigma_s2: f64,
    #[serde(default = "defaults::r_o")]
    pub r_o: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all budget fields have defaults")
    }
}

mod defaults {
    pub fn p_p() -> f64 {
        95.0
    }
    pub fn p_max() -> f64 {
        20.0
    }
    pub fn g21() -> f64 {
        1.0
    }
    pub fn g22() -> f64 {
        2.0
    }
    pub fn sigma() -> f64 {
        1.0
    }
    pub fn r_o() -> f64 {
        11.0f64.ln()
    }
    pub fn alpha() -> f64 {
        0.1
    }
    pub fn beta() -> f64 {
        0.5
    }
    pub fn policy() -> super::PolicyName {
        super::PolicyName::Arq
    }
    pub fn policies() -> Vec<super::PolicyName> {
        vec![super::PolicyName::Cg, super::PolicyName::Arq]
    }
    pub fn model() -> super::ModelName {
        super::ModelName::Ar1
    }
    pub fn realizations() -> usize {
        100
    }
    pub fn packets() -> super::PacketsField {
        super::PacketsField::Mode("auto".into())
    }
    pub fn master_seed() -> u64 {
        1
    }
    pub fn gamma_max() -> f64 {
        8.0
    }
    pub fn gamma_nodes() -> usize {
        801
    }
    pub fn power_nodes() -> usize {
        201
    }
}

/// The on-disk configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub budget: BudgetConfig,
    /// Correlation parameter for single-alpha commands.
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    /// Sweep alphas; defaults to `[alpha]`.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Outage cap for `cg-policy` (required there, unused elsewhere).
    #[serde(default)]
    pub p_out: Option<f64>,
    /// Weight for `trace`.
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    /// Sweep betas; defaults to 20 uniform values on [0, 0.99].
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    /// Policy for `trace`.
    #[serde(default = "defaults::policy")]
    pub policy: PolicyName,
    /// Sweep policies; defaults to `["cg", "arq"]`.
    #[serde(default = "defaults::policies")]
    pub policies: Vec<PolicyName>,
    /// Channel model for `trace`.
    #[serde(default = "defaults::model")]
    pub model: ModelName,
    /// Sweep models; defaults to `[model]`.
    #[serde(default)]
    pub models: Option<Vec<ModelName>>,
    #[serde(default = "defaults::realizations")]
    pub realizations: usize,
    #[serde(default = "defaults::packets")]
    pub packets: PacketsField,
    #[serde(default = "defaults::master_seed")]
    pub master_seed: u64,
    #[serde(default = "defaults::gamma_max")]
    pub gamma_max: f64,
    #[serde(default = "defaults::gamma_nodes")]
    pub gamma_nodes: usize,
    #[serde(default = "defaults::power_nodes")]
    pub power_nodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Apply a command-line seed override and fill every optional list, so
    /// the echoed configuration reproduces the run without re-resolution.
    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Self, CliError> {
        if let Some(seed) = seed_override {
            self.master_seed = seed;
        }
        if self.alphas.is_none() {
            self.alphas = Some(vec![self.alpha]);
        }
        if self.betas.is_none() {
            self.betas = Some(SimConfig::default_betas());
        }
        if self.models.is_none() {
            self.models = Some(vec![self.model]);
        }
        self.packets.resolve()?;
        self.link_budget()?;
        Ok(self)
    }

    pub fn link_budget(&self) -> Result<LinkBudget, CliError> {
        let b = &self.budget;
        LinkBudget::new(b.p_p, b.p_max, b.g21, b.g22, b.sigma_p2, b.sigma_s2, b.r_o)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn sim_config(
        &self,
        alpha: f64,
        policy: PolicyName,
        model: ModelName,
    ) -> Result<SimConfig, CliError> {
        let fading =
            FadingParams::new(alpha).map_err(|e| CliError::Config(e.to_string()))?;
        let cfg = SimConfig {
            budget: self.link_budget()?,
            fading,
            betas: self.betas.clone().unwrap_or_else(SimConfig::default_betas),
            realizations: self.realizations,
            packets: self.packets.resolve()?,
            master_seed: self.master_seed,
            policy: policy.into(),
            model: model.into(),
            grid: cogpower_core::sim::GridSpec {
                gamma_max: self.gamma_max,
                gamma_nodes: self.gamma_nodes,
                power_nodes: self.power_nodes,
            },
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}
