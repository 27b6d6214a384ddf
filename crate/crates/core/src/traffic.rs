//! Capacity dimensioning with Erlang-B.
//!
//! The chain is: per-subscriber traffic, carriers per cell from the reuse
//! pattern, traffic channels per cell, carried traffic per cell at the
//! target grade of service, and finally subscribers per cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrafficError {
    #[error("infeasible plan: no carrier per cell ({available} frequencies over {pattern} cells per pattern)")]
    NoCarrierPerCell { available: u32, pattern: u32 },
    #[error("infeasible plan: {0} traffic channels per cell")]
    NoTrafficChannels(i64),
    #[error("zero per-subscriber traffic")]
    ZeroSubscriberTraffic,
    #[error("invalid traffic model: {0}")]
    Invalid(&'static str),
}

/// Subscriber behaviour and frequency-plan scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficModel {
    /// Busy-hour calls per subscriber.
    pub calls_per_hour: f64,
    /// Mean call holding time, seconds.
    pub avg_call_s: f64,
    /// Target blocking probability.
    pub gos: f64,
    pub available_frequencies: u32,
    pub cells_per_pattern: u32,
    pub channels_per_carrier: u32,
    pub control_channels_per_cell: u32,
}

impl TrafficModel {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if !(self.calls_per_hour.is_finite() && self.calls_per_hour >= 0.0) {
            return Err(TrafficError::Invalid("calls_per_hour must be >= 0"));
        }
        if !(self.avg_call_s.is_finite() && self.avg_call_s >= 0.0) {
            return Err(TrafficError::Invalid("avg_call_s must be >= 0"));
        }
        if !(self.gos > 0.0 && self.gos < 1.0) {
            return Err(TrafficError::Invalid("gos must lie in (0, 1)"));
        }
        if self.available_frequencies == 0 {
            return Err(TrafficError::Invalid(
                "available_frequencies must be positive",
            ));
        }
        if self.cells_per_pattern == 0 {
            return Err(TrafficError::Invalid("cells_per_pattern must be positive"));
        }
        if self.channels_per_carrier == 0 {
            return Err(TrafficError::Invalid(
                "channels_per_carrier must be positive",
            ));
        }
        Ok(())
    }
}

/// Offered traffic of `n` calls per hour lasting `t_s` seconds, Erlang.
pub fn erlang_traffic(n: f64, t_s: f64) -> f64 {
    n * t_s / 3600.0
}

/// Erlang-B blocking probability of `channels` servers offered `offered_e`
/// Erlang, by the stable recursion `B(m) = A B(m-1) / (m + A B(m-1))`.
pub fn erlang_b(offered_e: f64, channels: u32) -> f64 {
    if offered_e <= 0.0 {
        return if channels == 0 { 1.0 } else { 0.0 };
    }
    let mut b = 1.0;
    for m in 1..=channels {
        let ab = offered_e * b;
        b = ab / (f64::from(m) + ab);
    }
    b
}

/// Blocking tolerance of [`erlang_b_inverse`].
pub const INVERSE_TOLERANCE: f64 = 1e-9;

/// Offered traffic at which `channels` servers block with probability `gos`.
///
/// Bisection on `[0, 10 m]`, widened if the target lies above it.
pub fn erlang_b_inverse(channels: u32, gos: f64) -> f64 {
    assert!(channels >= 1, "erlang_b_inverse needs at least one channel");
    assert!(gos > 0.0 && gos < 1.0, "gos must lie in (0, 1)");
    let mut lo = 0.0;
    let mut hi = 10.0 * f64::from(channels);
    while erlang_b(hi, channels) < gos {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let b = erlang_b(mid, channels);
        // run the bracket down to adjacent floats; B is Lipschitz in A so
        // this lands far inside INVERSE_TOLERANCE
        if b == gos || mid == lo || mid == hi {
            return mid;
        }
        if b < gos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn frequencies_per_cell(m: &TrafficModel) -> Result<u32, TrafficError> {
    let f = m.available_frequencies / m.cells_per_pattern;
    if f == 0 {
        return Err(TrafficError::NoCarrierPerCell {
            available: m.available_frequencies,
            pattern: m.cells_per_pattern,
        });
    }
    Ok(f)
}

pub fn traffic_channels_per_cell(m: &TrafficModel) -> Result<u32, TrafficError> {
    let total = i64::from(frequencies_per_cell(m)?) * i64::from(m.channels_per_carrier)
        - i64::from(m.control_channels_per_cell);
    if total < 1 {
        return Err(TrafficError::NoTrafficChannels(total));
    }
    Ok(total as u32)
}

/// Every intermediate value of the capacity chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub traffic_per_subscriber_e: f64,
    pub frequencies_per_cell: u32,
    pub traffic_channels_per_cell: u32,
    pub traffic_per_cell_e: f64,
    pub subscribers_per_cell: f64,
}

pub fn capacity_plan(m: &TrafficModel) -> Result<CapacityResult, TrafficError> {
    m.validate()?;
    let tsub = erlang_traffic(m.calls_per_hour, m.avg_call_s);
    if tsub <= 0.0 {
        return Err(TrafficError::ZeroSubscriberTraffic);
    }
    let frequencies = frequencies_per_cell(m)?;
    let channels = traffic_channels_per_cell(m)?;
    let per_cell = erlang_b_inverse(channels, m.gos);
    Ok(CapacityResult {
        traffic_per_subscriber_e: tsub,
        frequencies_per_cell: frequencies,
        traffic_channels_per_cell: channels,
        traffic_per_cell_e: per_cell,
        subscribers_per_cell: per_cell / tsub,
    })
}

/// Raw number of cells needed to carry `total_subscribers`.
pub fn cells_by_capacity(total_subscribers: f64, subscribers_per_cell: f64) -> f64 {
    total_subscribers / subscribers_per_cell
}
