use std::path::{Path, PathBuf};

use hamchain_core::baselines::SaParams;
use hamchain_core::gdsim::GdParams;
use hamchain_core::ledger::{ChainParams, VerifyMode};
use hamchain_core::pow::DifficultyTarget;
use hamchain_core::problem::InstanceSpec;
use serde::{Deserialize, Serialize};

use crate::Usage;

/// Defaults for every subcommand, read from a JSON file. Unknown keys are
/// rejected at every level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub instance: InstanceSpec,
    pub gd: GdParams,
    pub sa: SaParams,
    pub target: DifficultyTarget,
    pub chain: ChainConfig,
    /// Scenario file used by `simulate` when none is given on the command line.
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub target_interval: f64,
    pub window: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        let p = ChainParams::default();
        Self {
            target_interval: p.target_interval,
            window: p.window,
        }
    }
}

impl Config {
    /// Loads `path` if given, then applies a `--seed` override to every
    /// seeded component.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> anyhow::Result<Self> {
        let mut cfg = match path {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Usage(format!("cannot read config {}: {e}", p.display())))?;
                let mut cfg: Config = serde_json::from_str(&text)
                    .map_err(|e| Usage(format!("invalid config {}: {e}", p.display())))?;
                // Relative scenario paths are relative to the config file.
                if let (Some(s), Some(dir)) = (cfg.scenario.as_mut(), p.parent()) {
                    if s.is_relative() {
                        *s = dir.join(&*s);
                    }
                }
                cfg
            }
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.instance.seed = cfg.seed;
        cfg.gd.seed = cfg.seed;
        cfg.sa.seed = cfg.seed;
        cfg.target
            .validate()
            .map_err(|e| Usage(format!("config target: {e}")))?;
        Ok(cfg)
    }

    pub fn chain_params(&self) -> ChainParams {
        ChainParams {
            genesis_target: self.target.clone(),
            target_interval: self.chain.target_interval,
            window: self.chain.window,
            verify: VerifyMode::Full,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected_at_depth() {
        assert!(serde_json::from_str::<Config>(r#"{"seed": 1}"#).is_ok());
        assert!(serde_json::from_str::<Config>(r#"{"sed": 1}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"sa": {"sweps": 3}}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"chain": {"window": 3, "x": 0}}"#).is_err());
    }

    #[test]
    fn seed_override_reaches_components() {
        let c = Config::load(None, Some(42)).unwrap();
        assert_eq!((c.instance.seed, c.gd.seed, c.sa.seed), (42, 42, 42));
    }
}
