//! Base station placement for GSM networks by k-medoids clustering.
//!
//! The planner partitions a weighted street map into clusters, one base
//! station per cluster, located at the cluster medoid. The number of
//! clusters starts from classical radio dimensioning (link budget with
//! Okumura-Hata for coverage, Erlang-B for capacity) and is raised until
//! every cluster can be served by a single cell.
//!
//! ```
//! use mpam::geo::load_map;
//! use mpam::planner::{plan, Method, PlanningContext};
//! use mpam::radio::{coverage_with_range, CellGeometry, LinkBudgetParams};
//! use mpam::traffic::{capacity_plan, TrafficModel};
//!
//! let map = load_map(r#"{"name":"demo","nodes":[
//!     {"id":1,"name":"a","x_m":0,"y_m":0,"subscribers":300},
//!     {"id":2,"name":"b","x_m":50,"y_m":0,"subscribers":300},
//!     {"id":3,"name":"c","x_m":900,"y_m":0,"subscribers":300}]}"#.as_bytes()).unwrap();
//! let budget = LinkBudgetParams {
//!     tx_power_dbm: 33.0, tx_cable_loss_db: 0.0, tx_body_loss_db: 3.0,
//!     tx_antenna_gain_dbi: 0.0, rx_sensitivity_dbm: -104.0, rx_cable_loss_db: 3.0,
//!     rx_body_loss_db: 0.0, rx_antenna_gain_dbi: 18.0, fading_margin_db: 8.0,
//!     interference_margin_db: 2.0, penetration_margin_db: 0.0, other_margin_db: 0.0,
//! };
//! let coverage = coverage_with_range(&budget, 0.5, CellGeometry::Circle).unwrap();
//! let capacity = capacity_plan(&TrafficModel {
//!     calls_per_hour: 2.0, avg_call_s: 90.0, gos: 0.02, available_frequencies: 24,
//!     cells_per_pattern: 4, channels_per_carrier: 8, control_channels_per_cell: 2,
//! }).unwrap();
//! let ctx = PlanningContext::new(map, coverage, capacity, Method::LocalSplit);
//! let result = plan(&ctx);
//! assert!(result.feasible);
//! assert_eq!(result.final_k, 2);
//! ```
//!
//! The `book/` directory at the repository root walks through each stage
//! in more depth; its code samples run as doc-tests of this crate.

pub mod compare;
pub mod config;
pub mod geo;
pub mod pam;
pub mod planner;
pub mod radio;
pub mod render;
pub mod synth;
pub mod traffic;

// Book chapters are compiled as doc-tests so the guide cannot drift.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/maps.md")]
    pub mod maps {}
    #[doc = include_str!("../../../book/src/coverage.md")]
    pub mod coverage {}
    #[doc = include_str!("../../../book/src/capacity.md")]
    pub mod capacity {}
    #[doc = include_str!("../../../book/src/pam.md")]
    pub mod pam {}
    #[doc = include_str!("../../../book/src/planner.md")]
    pub mod planner {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
