//! Side-by-side runs of both adjustment methods and fixed-k PAM over a set
//! of maps and cell ranges.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::geo::{total_subscribers, DigitalMap};
use crate::pam::pam;
use crate::planner::{initial_k, plan, Method, PlanResult};

/// CSV column order.
pub const CSV_HEADER: [&str; 11] = [
    "dataset",
    "nodes",
    "subscribers",
    "cell_range_km",
    "method1_bs",
    "method2_bs",
    "pam_bs",
    "method1_ms",
    "method2_ms",
    "pam_ms",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dataset: String,
    pub nodes: usize,
    pub subscribers: f64,
    pub cell_range_km: f64,
    #[serde(rename = "method1_bs")]
    pub bs_count_method1: usize,
    #[serde(rename = "method2_bs")]
    pub bs_count_method2: usize,
    #[serde(rename = "pam_bs")]
    pub bs_count_pam_fixed_k: usize,
    pub method1_ms: f64,
    pub method2_ms: f64,
    pub pam_ms: f64,
    /// `ok`, `infeasible` or `error: <reason>`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub cell_ranges_km: Vec<f64>,
    /// k for the plain PAM baseline; the radio-derived initial k otherwise.
    pub baseline_k: Option<usize>,
    /// Runtimes are the median over this many runs.
    pub repeat: usize,
    pub parallel: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn timed<T>(repeat: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut times = Vec::with_capacity(repeat.max(1));
    let mut last = None;
    for _ in 0..repeat.max(1) {
        let t = Instant::now();
        last = Some(f());
        // microsecond resolution is plenty for wall-clock timings
        times.push((t.elapsed().as_secs_f64() * 1e6).round() / 1e3);
    }
    (last.expect("at least one run"), median(times))
}

/// Plans of both methods for one (map, range) pair, with runtimes.
pub struct RowRun {
    pub row: ComparisonRow,
    pub method1: Option<PlanResult>,
    pub method2: Option<PlanResult>,
}

pub fn compare_one(
    map: &DigitalMap,
    cfg: &RunConfig,
    range_km: f64,
    opts: &CompareOptions,
) -> RowRun {
    let mut row = ComparisonRow {
        dataset: map.name.clone(),
        nodes: map.nodes.len(),
        subscribers: total_subscribers(&map.nodes),
        cell_range_km: range_km,
        bs_count_method1: 0,
        bs_count_method2: 0,
        bs_count_pam_fixed_k: 0,
        method1_ms: 0.0,
        method2_ms: 0.0,
        pam_ms: 0.0,
        status: String::new(),
    };
    let ctx = match cfg.context(map.clone(), Method::GlobalRecluster, Some(range_km)) {
        Ok(ctx) => ctx,
        Err(e) => {
            row.status = format!("error: {e}");
            return RowRun {
                row,
                method1: None,
                method2: None,
            };
        }
    };
    let (m1, m1_ms) = timed(opts.repeat, || plan(&ctx));
    let ctx2 = crate::planner::PlanningContext {
        method: Method::LocalSplit,
        ..ctx.clone()
    };
    let (m2, m2_ms) = timed(opts.repeat, || plan(&ctx2));
    let k = opts
        .baseline_k
        .unwrap_or_else(|| initial_k(&ctx.map, &ctx.coverage, &ctx.capacity).k);
    let (baseline, pam_ms) = timed(opts.repeat, || pam(&ctx.map.nodes, k, &ctx.pam_cfg));

    row.bs_count_method1 = m1.final_k;
    row.bs_count_method2 = m2.final_k;
    row.method1_ms = m1_ms;
    row.method2_ms = m2_ms;
    row.pam_ms = pam_ms;
    row.status = match baseline {
        Err(e) => format!("error: baseline {e}"),
        Ok(c) => {
            row.bs_count_pam_fixed_k = c.k();
            if m1.feasible && m2.feasible {
                "ok".to_string()
            } else {
                "infeasible".to_string()
            }
        }
    };
    RowRun {
        row,
        method1: Some(m1),
        method2: Some(m2),
    }
}

/// One row per (map, range), maps outermost.
pub fn compare(maps: &[DigitalMap], cfg: &RunConfig, opts: &CompareOptions) -> Vec<ComparisonRow> {
    let jobs: Vec<(&DigitalMap, f64)> = maps
        .iter()
        .flat_map(|m| opts.cell_ranges_km.iter().map(move |&r| (m, r)))
        .collect();
    let run = |&(m, r): &(&DigitalMap, f64)| compare_one(m, cfg, r, opts).row;
    if opts.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::example_config;
    use crate::synth::{generate, GenSpec};

    fn small_map() -> DigitalMap {
        generate(&GenSpec {
            name: "small".into(),
            nodes: 40,
            area_m2: 200_000.0,
            subscribers: 2500,
            seed: 3,
            clumps: None,
        })
        .unwrap()
    }

    #[test]
    fn row_count_is_maps_times_ranges() {
        let opts = CompareOptions {
            cell_ranges_km: vec![0.5, 1.5, 5.0],
            baseline_k: None,
            repeat: 1,
            parallel: false,
        };
        let rows = compare(&[small_map()], &example_config(), &opts);
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!(r.status, "ok");
            assert!(r.bs_count_method1 >= 1 && r.bs_count_method2 >= 1);
            assert_eq!(r.subscribers, 2500.0);
        }
    }

    #[test]
    fn bad_baseline_k_is_recorded() {
        let opts = CompareOptions {
            cell_ranges_km: vec![0.5],
            baseline_k: Some(1000),
            repeat: 1,
            parallel: false,
        };
        let rows = compare(&[small_map()], &example_config(), &opts);
        assert!(rows[0].status.starts_with("error"), "{}", rows[0].status);
    }

    #[test]
    fn parallel_matches_sequential_counts() {
        let mut opts = CompareOptions {
            cell_ranges_km: vec![0.5, 5.0],
            baseline_k: Some(3),
            repeat: 1,
            parallel: false,
        };
        let seq = compare(&[small_map()], &example_config(), &opts);
        opts.parallel = true;
        let par = compare(&[small_map()], &example_config(), &opts);
        let counts = |rows: &[ComparisonRow]| {
            rows.iter()
                .map(|r| {
                    (
                        r.bs_count_method1,
                        r.bs_count_method2,
                        r.bs_count_pam_fixed_k,
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(counts(&seq), counts(&par));
    }

    #[test]
    fn median_of_runs() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
    }
}
