//! Coverage dimensioning: link budget, simplified Okumura-Hata path loss,
//! cell range and cell area.
//!
//! All power quantities are in the dB domain. The maximum allowed path loss
//! (MAPL) is
//!
//! ```text
//! MAPL = EIRP + (G_rx - L_rx_cable - L_rx_body) - S_rx - margins
//! ```
//!
//! where `S_rx` is the (negative, in dBm) receiver sensitivity. Inverting
//! `A + B log10(d) + C = MAPL` gives the cell range `d` in km.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("cell range must be positive, got {0} km")]
    NonPositiveRange(f64),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("{0} must be non-negative")]
    Negative(&'static str),
    #[error("Hata slope coefficient B must be positive, got {0}")]
    NonPositiveSlope(f64),
}

/// Transmit, receive and margin terms of a link budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetParams {
    pub tx_power_dbm: f64,
    #[serde(default)]
    pub tx_cable_loss_db: f64,
    #[serde(default)]
    pub tx_body_loss_db: f64,
    #[serde(default)]
    pub tx_antenna_gain_dbi: f64,
    pub rx_sensitivity_dbm: f64,
    #[serde(default)]
    pub rx_cable_loss_db: f64,
    #[serde(default)]
    pub rx_body_loss_db: f64,
    #[serde(default)]
    pub rx_antenna_gain_dbi: f64,
    #[serde(default)]
    pub fading_margin_db: f64,
    #[serde(default)]
    pub interference_margin_db: f64,
    #[serde(default)]
    pub penetration_margin_db: f64,
    #[serde(default)]
    pub other_margin_db: f64,
}

impl LinkBudgetParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        let all = [
            ("tx_power_dbm", self.tx_power_dbm),
            ("tx_antenna_gain_dbi", self.tx_antenna_gain_dbi),
            ("rx_sensitivity_dbm", self.rx_sensitivity_dbm),
            ("rx_antenna_gain_dbi", self.rx_antenna_gain_dbi),
        ];
        let non_negative = [
            ("tx_cable_loss_db", self.tx_cable_loss_db),
            ("tx_body_loss_db", self.tx_body_loss_db),
            ("rx_cable_loss_db", self.rx_cable_loss_db),
            ("rx_body_loss_db", self.rx_body_loss_db),
            ("fading_margin_db", self.fading_margin_db),
            ("interference_margin_db", self.interference_margin_db),
            ("penetration_margin_db", self.penetration_margin_db),
            ("other_margin_db", self.other_margin_db),
        ];
        for (name, v) in all.iter().chain(non_negative.iter()) {
            if !v.is_finite() {
                return Err(RadioError::NonFinite(name));
            }
        }
        for (name, v) in non_negative {
            if v < 0.0 {
                return Err(RadioError::Negative(name));
            }
        }
        Ok(())
    }
}

/// Effective isotropic radiated power, dBm.
pub fn eirp(p: &LinkBudgetParams) -> f64 {
    p.tx_power_dbm - (p.tx_cable_loss_db + p.tx_body_loss_db) + p.tx_antenna_gain_dbi
}

/// Receiver sensitivity referred to the antenna port, dBm.
pub fn effective_rx_sensibility(p: &LinkBudgetParams) -> f64 {
    p.rx_sensitivity_dbm - (p.rx_cable_loss_db + p.rx_body_loss_db) + p.rx_antenna_gain_dbi
}

pub fn total_margin(p: &LinkBudgetParams) -> f64 {
    p.fading_margin_db + p.interference_margin_db + p.penetration_margin_db + p.other_margin_db
}

/// Maximum allowed path loss, dB.
pub fn max_allowed_path_loss(p: &LinkBudgetParams) -> f64 {
    let rx_gains = p.rx_antenna_gain_dbi - p.rx_cable_loss_db - p.rx_body_loss_db;
    eirp(p) + rx_gains - p.rx_sensitivity_dbm - total_margin(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "GSM900")]
    Gsm900,
    #[serde(rename = "GSM1800")]
    Gsm1800,
}

impl Band {
    /// Fitted (A, B) coefficients of the simplified Hata model.
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            Band::Gsm900 => (69.55, 26.16),
            Band::Gsm1800 => (46.3, 33.9),
        }
    }
}

/// Coefficients of `A + B log10(d) + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HataParams {
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub coeff_c: f64,
    pub band: Band,
}

impl HataParams {
    /// Band coefficients with terrain correction `coeff_c`.
    pub fn for_band(band: Band, coeff_c: f64) -> Self {
        let (coeff_a, coeff_b) = band.coefficients();
        Self {
            coeff_a,
            coeff_b,
            coeff_c,
            band,
        }
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        for (name, v) in [
            ("coeff_a", self.coeff_a),
            ("coeff_b", self.coeff_b),
            ("coeff_c", self.coeff_c),
        ] {
            if !v.is_finite() {
                return Err(RadioError::NonFinite(name));
            }
        }
        if self.coeff_b <= 0.0 {
            return Err(RadioError::NonPositiveSlope(self.coeff_b));
        }
        Ok(())
    }
}

/// Recommended distance range of the model, km.
pub const HATA_VALID_RANGE_KM: (f64, f64) = (1.0, 20.0);

pub fn hata_path_loss(h: &HataParams, d_km: f64) -> Result<f64, RadioError> {
    if d_km.is_nan() || d_km <= 0.0 {
        return Err(RadioError::NonPositiveDistance(d_km));
    }
    Ok(h.coeff_a + h.coeff_b * d_km.log10() + h.coeff_c)
}

/// Cell range obtained by inverting the path-loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRange {
    pub range_km: f64,
    /// Set when the range falls outside [`HATA_VALID_RANGE_KM`].
    pub outside_validity: bool,
}

impl CellRange {
    pub fn warning(&self) -> Option<String> {
        self.outside_validity.then(|| {
            format!(
                "cell range {:.3} km is outside the recommended Hata range {}-{} km",
                self.range_km, HATA_VALID_RANGE_KM.0, HATA_VALID_RANGE_KM.1
            )
        })
    }
}

pub fn hata_max_range(h: &HataParams, max_loss_db: f64) -> CellRange {
    let range_km = 10f64.powf((max_loss_db - h.coeff_a - h.coeff_c) / h.coeff_b);
    let (lo, hi) = HATA_VALID_RANGE_KM;
    CellRange {
        range_km,
        outside_validity: !(lo..=hi).contains(&range_km),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellGeometry {
    #[default]
    Circle,
    Hexagon,
}

/// Area served by one cell of the given range, m².
pub fn cell_area(range_km: f64, geometry: CellGeometry) -> Result<f64, RadioError> {
    if !(range_km > 0.0 && range_km.is_finite()) {
        return Err(RadioError::NonPositiveRange(range_km));
    }
    let r_m = range_km * 1000.0;
    Ok(match geometry {
        CellGeometry::Circle => PI * r_m * r_m,
        CellGeometry::Hexagon => 1.5 * 3f64.sqrt() * r_m * r_m,
    })
}

/// Raw number of cells needed to cover `area_m2`.
pub fn cells_by_coverage(area_m2: f64, cell_area_m2: f64) -> f64 {
    area_m2 / cell_area_m2
}

/// Link-budget outcome and the cell footprint derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub eirp_dbm: f64,
    pub total_margin_db: f64,
    pub max_path_loss_db: f64,
    pub cell_range_km: f64,
    pub cell_area_m2: f64,
    pub geometry: CellGeometry,
    /// True when the range was supplied directly instead of derived.
    pub range_overridden: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Full coverage chain: link budget, Hata inversion, cell area.
pub fn coverage_plan(
    p: &LinkBudgetParams,
    h: &HataParams,
    geometry: CellGeometry,
) -> Result<CoverageResult, RadioError> {
    p.validate()?;
    h.validate()?;
    let mapl = max_allowed_path_loss(p);
    let range = hata_max_range(h, mapl);
    Ok(CoverageResult {
        eirp_dbm: eirp(p),
        total_margin_db: total_margin(p),
        max_path_loss_db: mapl,
        cell_range_km: range.range_km,
        cell_area_m2: cell_area(range.range_km, geometry)?,
        geometry,
        range_overridden: false,
        warnings: range.warning().into_iter().collect(),
    })
}

/// Coverage with a fixed cell range; the link budget is still evaluated
/// for reporting but the path-loss model is skipped.
pub fn coverage_with_range(
    p: &LinkBudgetParams,
    range_km: f64,
    geometry: CellGeometry,
) -> Result<CoverageResult, RadioError> {
    p.validate()?;
    Ok(CoverageResult {
        eirp_dbm: eirp(p),
        total_margin_db: total_margin(p),
        max_path_loss_db: max_allowed_path_loss(p),
        cell_range_km: range_km,
        cell_area_m2: cell_area(range_km, geometry)?,
        geometry,
        range_overridden: true,
        warnings: Vec::new(),
    })
}
