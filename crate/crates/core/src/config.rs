//! JSON run configuration shared by the command-line subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::WssusStats;
use crate::covariance::CovarianceOptions;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pulse::PulseKind;
use crate::sweep::SweepConfig;

/// Covariance study settings. Missing fields take the covariance-analysis
/// defaults (8x8 grid, 8 WSSUS paths, 15 dB, 1000 realisations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceRun {
    pub grid: GridSpec,
    pub pulse: PulseKind,
    /// Defaults to the grid-relative spreads of [`WssusStats::covariance_default`].
    pub stats: Option<WssusStats>,
    pub options: CovarianceOptions,
    pub snr_db: f64,
    /// Realisations for Monte Carlo checks.
    pub realizations: usize,
    pub seed: u64,
}

impl Default for CovarianceRun {
    fn default() -> Self {
        Self {
            grid: GridSpec::covariance_default(),
            pulse: PulseKind::Sgp,
            stats: None,
            options: CovarianceOptions::default(),
            snr_db: 15.0,
            realizations: 1000,
            seed: 2025,
        }
    }
}

impl CovarianceRun {
    pub fn stats(&self) -> WssusStats {
        self.stats.unwrap_or_else(|| WssusStats::covariance_default(&self.grid))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.pulse.validate()?;
        self.stats().validate()?;
        if !self.snr_db.is_finite() {
            return Err(Error::Config("covariance.snr_db must be finite".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("covariance.realizations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed applied to every section when present.
    pub seed: Option<u64>,
    pub covariance: CovarianceRun,
    pub isac: SweepConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        if let Some(seed) = cfg.seed {
            cfg.set_seed(seed);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.covariance.seed = seed;
        self.isac.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.covariance.validate()?;
        self.isac.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::Normalization;

    #[test]
    fn empty_document_gives_study_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.covariance.grid.m, 8);
        assert_eq!(cfg.covariance.stats(), WssusStats::covariance_default(&cfg.covariance.grid));
        assert_eq!((cfg.isac.comm_grid.m, cfg.isac.sensing_grid.n), (16, 256));
        assert_eq!(cfg.isac.realizations, 160);
        assert_eq!(cfg.isac.grid.len(), 8000);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = RunConfig::from_json("{\n  \"isac\": {\"realisations\": 3}\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("realisations") && msg.contains("line 2"), "{msg}");
        assert!(RunConfig::from_json(r#"{"covariance": {"grid": {"m": 8}}}"#).is_err());
    }

    #[test]
    fn master_seed_propagates() {
        let cfg =
            RunConfig::from_json(r#"{"seed": 9, "isac": {"seed": 1, "normalization": "unit_frobenius"}}"#).unwrap();
        assert_eq!((cfg.covariance.seed, cfg.isac.seed), (9, 9));
        assert_eq!(cfg.isac.normalization, Normalization::UnitFrobenius);
    }

    #[test]
    fn roundtrip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
