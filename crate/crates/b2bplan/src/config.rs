//! Planning configuration: a single JSON file with full defaulting.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::siting::SitingConfig;
use crate::sizing::EconomicParams;
use crate::transfer::SavingsMode;

/// Size grid specification, expanded to `min, min+step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizeGrid {
    pub min_kva: f64,
    pub max_kva: f64,
    pub step_kva: f64,
}

impl Default for SizeGrid {
    fn default() -> Self {
        Self {
            min_kva: 50.0,
            max_kva: 1500.0,
            step_kva: 50.0,
        }
    }
}

impl SizeGrid {
    pub fn expand(&self) -> Result<Vec<f64>> {
        if !self.step_kva.is_finite() || self.step_kva <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "step_kva must be positive, got {}",
                self.step_kva
            )));
        }
        if !self.min_kva.is_finite() || !self.max_kva.is_finite() || self.min_kva < 0.0 || self.max_kva < self.min_kva {
            return Err(Error::InvalidGrid(format!(
                "need 0 <= min_kva <= max_kva, got [{}, {}]",
                self.min_kva, self.max_kva
            )));
        }
        // Relative slack keeps a max that is an exact multiple of the step
        // on the grid even when the division rounds just below an integer.
        let ratio = (self.max_kva - self.min_kva) / self.step_kva;
        let count = (ratio + 1e-9 * ratio.max(1.0)).floor() as usize + 1;
        let sizes: Vec<f64> = (0..count)
            .map(|i| self.min_kva + i as f64 * self.step_kva)
            .collect();
        if sizes.len() < 4 {
            return Err(Error::InvalidGrid(format!(
                "size grid needs at least 4 points for the derivative analysis, got {}",
                sizes.len()
            )));
        }
        Ok(sizes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConverterConfig {
    pub efficiency: f64,
    pub size_grid: SizeGrid,
}

impl Default for ConverterConfig {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            size_grid: SizeGrid::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BackfeedLimits {
    pub feeder1_kw: f64,
    pub feeder2_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairingConfig {
    pub reference_size_kva: f64,
    pub seed: u64,
}

impl Default for PairingConfig {
    fn default() -> Self {
        Self {
            reference_size_kva: 500.0,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VlsmConfig {
    pub delta_p_kw: f64,
    pub delta_q_kvar: f64,
}

impl Default for VlsmConfig {
    fn default() -> Self {
        Self {
            delta_p_kw: crate::network::DEFAULT_DELTA_P_KW,
            delta_q_kvar: crate::network::DEFAULT_DELTA_Q_KVAR,
        }
    }
}

/// Aggregated planning configuration. Every field has a default, so `{}` is a
/// valid config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    pub economics: EconomicParams,
    pub converter: ConverterConfig,
    pub backfeed_limits: BackfeedLimits,
    pub siting: SitingConfig,
    pub pairing: PairingConfig,
    pub vlsm: VlsmConfig,
    pub savings_mode: SavingsMode,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            economics: EconomicParams::default(),
            converter: ConverterConfig::default(),
            backfeed_limits: BackfeedLimits::default(),
            siting: SitingConfig::default(),
            pairing: PairingConfig::default(),
            vlsm: VlsmConfig::default(),
            savings_mode: SavingsMode::LiteralClamp,
        }
    }
}

impl PlanConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PlanConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.economics.validate()?;
        let eff = self.converter.efficiency;
        if eff.is_nan() || eff <= 0.0 || eff > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "efficiency must be in (0, 1], got {}",
                self.converter.efficiency
            )));
        }
        self.converter.size_grid.expand()?;
        if self.backfeed_limits.feeder1_kw < 0.0 || self.backfeed_limits.feeder2_kw < 0.0 {
            return Err(Error::InvalidConfig("backfeed limits must be nonnegative".into()));
        }
        let (dp, dq) = (self.vlsm.delta_p_kw, self.vlsm.delta_q_kvar);
        if !dp.is_finite() || dp <= 0.0 || !dq.is_finite() || dq <= 0.0 {
            return Err(Error::InvalidConfig("vlsm perturbations must be positive".into()));
        }
        // Siting weights are validated where siting runs; a config used only
        // for sizing may leave them at defaults.
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_full_default() {
        let cfg: PlanConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, PlanConfig::default());
        assert_eq!(cfg.economics.lambda_pv, 0.1);
        assert_eq!(cfg.economics.lambda_c, 100.0);
        assert_eq!(cfg.economics.n_yr, 10.0);
        assert_eq!(cfg.economics.p1_limit, 0.8);
        assert_eq!(cfg.converter.efficiency, 1.0);
        assert_eq!(cfg.siting.alpha, 0.5);
        assert_eq!(cfg.siting.beta, 0.5);
    }

    #[test]
    fn grid_expansion() {
        let grid = SizeGrid { min_kva: 200.0, max_kva: 400.0, step_kva: 50.0 };
        assert_eq!(grid.expand().unwrap(), vec![200.0, 250.0, 300.0, 350.0, 400.0]);

        let too_few = SizeGrid { min_kva: 100.0, max_kva: 200.0, step_kva: 100.0 };
        assert!(too_few.expand().is_err());

        let bad_step = SizeGrid { min_kva: 100.0, max_kva: 200.0, step_kva: 0.0 };
        assert!(bad_step.expand().is_err());
    }

    #[test]
    fn grid_expansion_keeps_max_despite_rounding() {
        // 1.0 / 0.1 rounds to just below 10 in f64; the endpoint must not
        // fall off the grid.
        let grid = SizeGrid { min_kva: 0.0, max_kva: 1.0, step_kva: 0.1 };
        let sizes = grid.expand().unwrap();
        assert_eq!(sizes.len(), 11);
        assert!((sizes.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg: PlanConfig =
            serde_json::from_str(r#"{ "economics": { "lambda_pv": 0.25 } }"#).unwrap();
        assert_eq!(cfg.economics.lambda_pv, 0.25);
        // untouched siblings fall back to their defaults
        assert_eq!(cfg.economics.lambda_c, 100.0);
        assert_eq!(cfg.converter.size_grid.step_kva, 50.0);
    }
}
