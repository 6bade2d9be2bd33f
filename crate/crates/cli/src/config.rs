//! Experiment sweeps are declared in a TOML file. Minimal example:
//!
//! ```toml
//! base_seed = 20260801
//! drops = 200
//! users = 3
//! subcarriers = 64
//! servers = [3, 4, 5, 6, 7, 8, 9]
//! strategies = ["eejs", "mdoa", "roa", "aas", "local"]
//! ```
//!
//! Optional extras: `timing = true` fills the wall_ms column (at the cost
//! of byte-reproducible output), `[[profiles]]` blocks sweep fixed
//! deadlines (each profile writes its own CSV), and `[hyper]` overrides
//! individual solver knobs.

use anyhow::{bail, Context, Result};
use mecsim_core::lower_level::{AlphaInit, LowerHyper};
use mecsim_core::outcome::Strategy;
use mecsim_core::scenario::Span;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    base_seed: u64,
    drops: usize,
    users: usize,
    subcarriers: usize,
    servers: Vec<usize>,
    strategies: Vec<String>,
    #[serde(default)]
    timing: bool,
    #[serde(default)]
    profiles: Vec<RawProfile>,
    #[serde(default)]
    hyper: HyperOverride,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    name: String,
    tau_ms: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperOverride {
    step_alpha: Option<f64>,
    step_beta: Option<f64>,
    epsilon_rel: Option<f64>,
    max_iterations: Option<usize>,
    alpha_init: Option<AlphaInit>,
}

/// A deadline profile: a fixed deadline replacing the default draw range.
/// `name` is None for the implicit profile of a config without `[[profiles]]`
/// blocks, which keeps the output at the exact requested path.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub name: Option<String>,
    pub deadline_s: Option<Span>,
}

/// A validated experiment plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub base_seed: u64,
    pub drops: usize,
    pub users: usize,
    pub subcarriers: usize,
    pub servers: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub timing: bool,
    pub profiles: Vec<Profile>,
    pub hyper: LowerHyper,
}

impl Experiment {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("invalid experiment config")?;
        if raw.drops == 0 {
            bail!("drops must be at least 1");
        }
        if raw.users == 0 {
            bail!("users must be at least 1");
        }
        if raw.subcarriers == 0 {
            bail!("subcarriers must be at least 1");
        }
        if raw.servers.is_empty() {
            bail!("servers must list at least one server count");
        }
        if raw.servers.iter().any(|&k| k == 0) {
            bail!("server counts must be at least 1");
        }
        if raw.strategies.is_empty() {
            bail!("strategies must list at least one strategy");
        }
        let strategies = raw
            .strategies
            .iter()
            .map(|s| s.parse::<Strategy>())
            .collect::<Result<Vec<_>, _>>()?;

        let profiles = if raw.profiles.is_empty() {
            vec![Profile {
                name: None,
                deadline_s: None,
            }]
        } else {
            let mut names = std::collections::HashSet::new();
            for p in &raw.profiles {
                if p.name.is_empty() {
                    bail!("profile names must be nonempty");
                }
                if !names.insert(&p.name) {
                    bail!("duplicate profile name `{}`", p.name);
                }
                if !(p.tau_ms > 0.0) {
                    bail!("profile `{}`: tau_ms must be positive", p.name);
                }
            }
            raw.profiles
                .iter()
                .map(|p| Profile {
                    name: Some(p.name.clone()),
                    // Divide rather than scale by 1e-3: a single correctly
                    // rounded operation, so tau_ms = 9.0 lands exactly on the
                    // 9e-3 literal used elsewhere.
                    deadline_s: Some(Span::new(p.tau_ms / 1e3, p.tau_ms / 1e3)),
                })
                .collect()
        };

        let mut hyper = LowerHyper::default();
        if let Some(v) = raw.hyper.step_alpha {
            hyper.step_alpha = v;
        }
        if let Some(v) = raw.hyper.step_beta {
            hyper.step_beta = v;
        }
        if let Some(v) = raw.hyper.epsilon_rel {
            hyper.epsilon_rel = v;
        }
        if let Some(v) = raw.hyper.max_iterations {
            hyper.max_iterations = v;
        }
        if let Some(v) = raw.hyper.alpha_init {
            hyper.alpha_init = v;
        }

        Ok(Experiment {
            base_seed: raw.base_seed,
            drops: raw.drops,
            users: raw.users,
            subcarriers: raw.subcarriers,
            servers: raw.servers,
            strategies,
            timing: raw.timing,
            profiles,
            hyper,
        })
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in config {}", path.display()))
    }
}
