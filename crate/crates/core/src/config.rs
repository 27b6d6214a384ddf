//! Run configuration file: radio, traffic, clustering and planner sections.
//!
//! ```json
//! {
//!   "radio": {
//!     "link_budget": { "tx_power_dbm": 33, "rx_sensitivity_dbm": -104, ... },
//!     "propagation": { "band": "GSM900", "coeff_c": 0 },
//!     "cell_geometry": "circle",
//!     "cell_range_km": 0.5
//!   },
//!   "traffic": { "calls_per_hour": 2, "avg_call_s": 90, "gos": 0.02, ... },
//!   "pam": { "seed": 7 },
//!   "planner": { "method": "method2", "max_total_clusters": 400 }
//! }
//! ```

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::DigitalMap;
use crate::pam::PamConfig;
use crate::planner::{Method, PlanningContext, SplitRule};
use crate::radio::{
    coverage_plan, coverage_with_range, Band, CellGeometry, CoverageResult, HataParams,
    LinkBudgetParams, RadioError,
};
use crate::traffic::{capacity_plan, CapacityResult, TrafficError, TrafficModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("radio: {0}")]
    Radio(#[from] RadioError),
    #[error("traffic: {0}")]
    Traffic(#[from] TrafficError),
    #[error("planner.max_total_clusters must be at least 1")]
    ZeroClusterCap,
}

fn default_band() -> Band {
    Band::Gsm900
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    #[serde(default = "default_band")]
    pub band: Band,
    /// Overrides the band's A coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_a: Option<f64>,
    /// Overrides the band's B coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_b: Option<f64>,
    #[serde(default)]
    pub coeff_c: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            band: default_band(),
            coeff_a: None,
            coeff_b: None,
            coeff_c: 0.0,
        }
    }
}

impl PropagationConfig {
    pub fn hata(&self) -> HataParams {
        let mut h = HataParams::for_band(self.band, self.coeff_c);
        if let Some(a) = self.coeff_a {
            h.coeff_a = a;
        }
        if let Some(b) = self.coeff_b {
            h.coeff_b = b;
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub link_budget: LinkBudgetParams,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub cell_geometry: CellGeometry,
    /// Fixed cell range; skips the path-loss model when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_range_km: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_clusters: Option<usize>,
    #[serde(default)]
    pub split_rule: SplitRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub radio: RadioConfig,
    pub traffic: TrafficModel,
    #[serde(default)]
    pub pam: PamConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
}

impl RunConfig {
    pub fn load<R: Read>(source: R) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_reader(source)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.radio.link_budget.validate()?;
        self.radio.propagation.hata().validate()?;
        if let Some(r) = self.radio.cell_range_km {
            if !(r > 0.0 && r.is_finite()) {
                return Err(RadioError::NonPositiveRange(r).into());
            }
        }
        self.traffic.validate()?;
        if self.planner.max_total_clusters == Some(0) {
            return Err(ConfigError::ZeroClusterCap);
        }
        Ok(())
    }

    /// Coverage from the link budget, or from a fixed range when one is
    /// given here or in the config.
    pub fn coverage(&self, range_override_km: Option<f64>) -> Result<CoverageResult, ConfigError> {
        let radio = &self.radio;
        Ok(match range_override_km.or(radio.cell_range_km) {
            Some(r) => coverage_with_range(&radio.link_budget, r, radio.cell_geometry)?,
            None => coverage_plan(
                &radio.link_budget,
                &radio.propagation.hata(),
                radio.cell_geometry,
            )?,
        })
    }

    pub fn capacity(&self) -> Result<CapacityResult, ConfigError> {
        Ok(capacity_plan(&self.traffic)?)
    }

    pub fn context(
        &self,
        map: DigitalMap,
        method: Method,
        range_override_km: Option<f64>,
    ) -> Result<PlanningContext, ConfigError> {
        let mut ctx = PlanningContext::new(
            map,
            self.coverage(range_override_km)?,
            self.capacity()?,
            method,
        );
        ctx.pam_cfg = self.pam.clone();
        ctx.split_rule = self.planner.split_rule;
        if let Some(cap) = self.planner.max_total_clusters {
            ctx.max_total_clusters = cap;
        }
        Ok(ctx)
    }
}

/// A typical urban GSM900 setup; used by the examples and tests.
pub fn example_config() -> RunConfig {
    RunConfig {
        radio: RadioConfig {
            link_budget: LinkBudgetParams {
                tx_power_dbm: 33.0,
                tx_cable_loss_db: 0.0,
                tx_body_loss_db: 3.0,
                tx_antenna_gain_dbi: 0.0,
                rx_sensitivity_dbm: -104.0,
                rx_cable_loss_db: 3.0,
                rx_body_loss_db: 0.0,
                rx_antenna_gain_dbi: 18.0,
                fading_margin_db: 8.0,
                interference_margin_db: 2.0,
                penetration_margin_db: 20.0,
                other_margin_db: 3.0,
            },
            propagation: PropagationConfig {
                coeff_c: 40.0,
                ..PropagationConfig::default()
            },
            cell_geometry: CellGeometry::Circle,
            cell_range_km: None,
        },
        traffic: TrafficModel {
            calls_per_hour: 2.0,
            avg_call_s: 90.0,
            gos: 0.02,
            available_frequencies: 24,
            cells_per_pattern: 4,
            channels_per_carrier: 8,
            control_channels_per_cell: 2,
        },
        pam: PamConfig::default(),
        planner: PlannerConfig::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips() {
        let cfg = example_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::load(text.as_bytes()).unwrap(), cfg);
    }

    #[test]
    fn override_skips_hata() {
        let cfg = example_config();
        let derived = cfg.coverage(None).unwrap();
        assert!(!derived.range_overridden);
        let fixed = cfg.coverage(Some(1.5)).unwrap();
        assert!(fixed.range_overridden);
        assert_eq!(fixed.cell_range_km, 1.5);
        assert_eq!(fixed.max_path_loss_db, derived.max_path_loss_db);
    }

    #[test]
    fn band_override() {
        let p = PropagationConfig {
            band: Band::Gsm1800,
            coeff_b: Some(30.0),
            ..PropagationConfig::default()
        };
        let h = p.hata();
        assert_eq!((h.coeff_a, h.coeff_b), (46.3, 30.0));
    }

    #[test]
    fn rejects_unknown_sections_and_bad_values() {
        let mut v = serde_json::to_value(example_config()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(
            RunConfig::load(v.to_string().as_bytes()),
            Err(ConfigError::Parse(_))
        ));
        let mut v = serde_json::to_value(example_config()).unwrap();
        v["traffic"]["gos"] = serde_json::json!(0.0);
        assert!(matches!(
            RunConfig::load(v.to_string().as_bytes()),
            Err(ConfigError::Traffic(_))
        ));
        let mut v = serde_json::to_value(example_config()).unwrap();
        v["radio"]["cell_range_km"] = serde_json::json!(-1.0);
        assert!(matches!(
            RunConfig::load(v.to_string().as_bytes()),
            Err(ConfigError::Radio(_))
        ));
    }
}
