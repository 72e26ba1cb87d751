//! Scenario files: one TOML document aggregating every model and search
//! parameter, with units spelled out in the field names.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sslr_core::optics::CavityGeometry;
use sslr_core::optimize::OptimizerConfig;
use sslr_core::power::{LossTable, MaterialTable};
use sslr_core::receiver::{PDParams, PVParams};

use crate::error::CliError;

/// Fixed cavity structure used by the functional, trade-off and sweep experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub l1_m: f64,
    pub f1_m: f64,
    pub l2_m: f64,
    pub f2_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            l1_m: 0.05027,
            f1_m: 0.05,
            l2_m: 0.05041,
            f2_m: 0.05,
        }
    }
}

impl GeometryConfig {
    pub fn at(&self, d: f64) -> Result<CavityGeometry, CliError> {
        CavityGeometry::new(self.l1_m, self.f1_m, self.l2_m, self.f2_m, d).map_err(CliError::config_model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityRunConfig {
    /// Independent searches, seeded `seed, seed + 1, ...`.
    pub runs: u32,
    /// Distances of the emitted mode profiles.
    pub profile_distances_m: [f64; 6],
    pub profile_samples: usize,
}

impl Default for CavityRunConfig {
    fn default() -> Self {
        Self {
            runs: 1,
            profile_distances_m: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            profile_samples: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    pub f1_set_m: f64,
    pub f2_set_m: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            f1_set_m: 0.05,
            f2_set_m: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionalConfig {
    pub l_s_m: f64,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self { l_s_m: 0.75e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffConfig {
    pub l_s_list_m: Vec<f64>,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            l_s_list_m: sslr_core::optimize::thickness_grid(0.25e-3, 4.5e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub d_start_m: f64,
    pub d_stop_m: f64,
    pub d_step_m: f64,
    /// Also evaluate the symmetric reference design.
    pub baseline: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_start_m: 0.01,
            d_stop_m: 6.0,
            d_step_m: 0.01,
            baseline: true,
        }
    }
}

impl SweepConfig {
    pub fn distances(&self) -> Vec<f64> {
        let n = ((self.d_stop_m - self.d_start_m) / self.d_step_m + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                // decimal grid: round away accumulated binary error
                let d = self.d_start_m + k as f64 * self.d_step_m;
                (d * 1e9).round() / 1e9
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub p_in_w: f64,
    /// Not part of the config hash.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub material: MaterialTable,
    pub loss: LossTable,
    pub pv: PVParams,
    pub pd: PDParams,
    pub optimizer: OptimizerConfig,
    pub geometry: GeometryConfig,
    pub cavity: CavityRunConfig,
    pub placement: PlacementConfig,
    pub functional: FunctionalConfig,
    pub tradeoff: TradeoffConfig,
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            p_in_w: 60.0,
            output_dir: None,
            material: MaterialTable::default(),
            loss: LossTable::default(),
            pv: PVParams::default(),
            pd: PDParams::default(),
            optimizer: OptimizerConfig::default(),
            geometry: GeometryConfig::default(),
            cavity: CavityRunConfig::default(),
            placement: PlacementConfig::default(),
            functional: FunctionalConfig::default(),
            tradeoff: TradeoffConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let ctx = |section: &'static str| move |e: sslr_core::Error| CliError::Config(format!("[{section}] {e}"));
        if !(self.p_in_w >= 0.0) || !self.p_in_w.is_finite() {
            return Err(CliError::Config(format!(
                "p_in_w: must be finite and >= 0, got {}",
                self.p_in_w
            )));
        }
        self.material.validate().map_err(ctx("material"))?;
        self.loss.validate().map_err(ctx("loss"))?;
        self.pv.validate().map_err(ctx("pv"))?;
        self.pd.validate().map_err(ctx("pd"))?;
        self.optimizer.validate().map_err(ctx("optimizer"))?;
        self.geometry
            .at(0.0)
            .map_err(|e| CliError::Config(format!("[geometry] {e}")))?;
        if self.cavity.runs == 0 {
            return Err(CliError::Config("[cavity] runs: must be >= 1".into()));
        }
        if !(self.placement.f1_set_m > 0.0 && self.placement.f2_set_m > 0.0) {
            return Err(CliError::Config("[placement] focal lengths must be > 0".into()));
        }
        if !(self.functional.l_s_m >= 0.0) {
            return Err(CliError::Config("[functional] l_s_m: must be >= 0".into()));
        }
        if self.tradeoff.l_s_list_m.is_empty() || self.tradeoff.l_s_list_m.iter().any(|v| !(*v >= 0.0)) {
            return Err(CliError::Config(
                "[tradeoff] l_s_list_m: need a non-empty list of values >= 0".into(),
            ));
        }
        let s = &self.sweep;
        if !(s.d_start_m >= 0.0 && s.d_start_m <= s.d_stop_m && s.d_step_m > 0.0) {
            return Err(CliError::Config(
                "[sweep] need 0 <= d_start_m <= d_stop_m and d_step_m > 0".into(),
            ));
        }
        Ok(())
    }

    /// Stable serialization: JSON with keys in sorted order.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(ScenarioConfig::from_toml("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ScenarioConfig::from_toml("p_in = 60.0").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        let err = ScenarioConfig::from_toml("[loss]\ngamma_l9 = 0.9").unwrap_err();
        assert!(err.to_string().contains("gamma_l9"), "{err}");
    }

    #[test]
    fn validation_names_the_section() {
        let err = ScenarioConfig::from_toml("[optimizer]\nalpha_sc = 1.5").unwrap_err();
        assert!(err.to_string().contains("[optimizer]"), "{err}");
    }

    #[test]
    fn hash_ignores_layout_but_not_values() {
        let a = ScenarioConfig::from_toml("p_in_w = 60.0\n[pv]\nideality = 1.48\ncells = 1.0").unwrap();
        let b = ScenarioConfig::from_toml("[pv]\ncells   = 1.0\nideality=1.48\n\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ScenarioConfig::from_toml("[pv]\nideality = 1.5").unwrap();
        assert_ne!(a.hash(), c.hash());
        let d = ScenarioConfig::from_toml("output_dir = \"elsewhere\"").unwrap();
        assert_eq!(a.hash(), d.hash());
    }

    #[test]
    fn shipped_file_spells_out_the_defaults() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
        assert_eq!(ScenarioConfig::load(&path).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn sweep_grid_is_decimal() {
        let d = SweepConfig::default().distances();
        assert_eq!(d.len(), 600);
        assert_eq!(d[431], 4.32);
        assert_eq!(*d.last().unwrap(), 6.0);
    }
}
