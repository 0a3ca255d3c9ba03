//! Benchmark sweep rows, per-instance aggregates, and cumulative
//! gap/time series in manifest order.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RunRow {
    pub instance: String,
    pub variant: String,
    pub seed: u64,
    pub best_length: i64,
    /// 100 * (result - BKS) / BKS; absent when no BKS is known.
    pub gap_percent: Option<f64>,
    pub generations: u64,
    pub q_lkh_calls: u64,
    pub wall_time_s: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct InstanceAggregate {
    pub instance: String,
    pub variant: String,
    pub bks: Option<i64>,
    pub runs: usize,
    pub best_length: i64,
    pub average_length: f64,
    pub gap_best_percent: Option<f64>,
    pub gap_average_percent: Option<f64>,
    pub mean_wall_time_s: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CumulativeSeries {
    pub variant: String,
    /// Manifest-ordered instances that carry a BKS value.
    pub instances: Vec<String>,
    /// Running sum of the mean run gap (percent) per instance.
    pub cumulative_gap_percent: Vec<f64>,
    /// Running sum of the mean wall time per instance.
    pub cumulative_time_s: Vec<f64>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<InstanceAggregate>,
    pub cumulative: Vec<CumulativeSeries>,
    /// Mean over BKS-bearing instances of the best-run gap.
    pub mean_gap_best_percent: Option<f64>,
    /// Mean over BKS-bearing instances of the average-run gap.
    pub mean_gap_average_percent: Option<f64>,
}

pub fn gap_percent(length: i64, bks: Option<i64>) -> Option<f64> {
    bks.map(|b| 100.0 * (length - b) as f64 / b as f64)
}

/// Builds the aggregate report from per-run rows. `manifest` carries the
/// instance names in manifest order with their BKS values; rows are matched
/// by (instance, variant).
pub fn aggregate(
    rows: &[RunRow],
    manifest: &[(String, Option<i64>)],
    variants: &[String],
) -> BenchReport {
    let mut aggregates = Vec::new();
    let mut cumulative = Vec::new();
    for variant in variants {
        let mut cum_instances = Vec::new();
        let mut cum_gap = Vec::new();
        let mut cum_time = Vec::new();
        let mut gap_sum = 0.0;
        let mut time_sum = 0.0;
        for (name, bks) in manifest {
            let runs: Vec<&RunRow> = rows
                .iter()
                .filter(|r| &r.instance == name && &r.variant == variant)
                .collect();
            if runs.is_empty() {
                continue;
            }
            let best = runs.iter().map(|r| r.best_length).min().unwrap();
            let avg = runs.iter().map(|r| r.best_length as f64).sum::<f64>() / runs.len() as f64;
            let mean_time =
                runs.iter().map(|r| r.wall_time_s).sum::<f64>() / runs.len() as f64;
            let gap_best = gap_percent(best, *bks);
            let gap_avg = bks.map(|b| 100.0 * (avg - b as f64) / b as f64);
            aggregates.push(InstanceAggregate {
                instance: name.clone(),
                variant: variant.clone(),
                bks: *bks,
                runs: runs.len(),
                best_length: best,
                average_length: avg,
                gap_best_percent: gap_best,
                gap_average_percent: gap_avg,
                mean_wall_time_s: mean_time,
            });
            if let Some(g) = gap_avg {
                gap_sum += g;
                time_sum += mean_time;
                cum_instances.push(name.clone());
                cum_gap.push(gap_sum);
                cum_time.push(time_sum);
            }
        }
        cumulative.push(CumulativeSeries {
            variant: variant.clone(),
            instances: cum_instances,
            cumulative_gap_percent: cum_gap,
            cumulative_time_s: cum_time,
        });
    }
    let with_gap: Vec<&InstanceAggregate> =
        aggregates.iter().filter(|a| a.gap_best_percent.is_some()).collect();
    let (mean_best, mean_avg) = if with_gap.is_empty() {
        (None, None)
    } else {
        let n = with_gap.len() as f64;
        (
            Some(with_gap.iter().map(|a| a.gap_best_percent.unwrap()).sum::<f64>() / n),
            Some(with_gap.iter().map(|a| a.gap_average_percent.unwrap()).sum::<f64>() / n),
        )
    };
    BenchReport {
        rows: rows.to_vec(),
        aggregates,
        cumulative,
        mean_gap_best_percent: mean_best,
        mean_gap_average_percent: mean_avg,
    }
}

/// CSV mirror of the deterministic row columns. Wall time is excluded so
/// identical (manifest, seeds, variants) inputs give byte-identical output.
pub fn rows_to_csv(rows: &[RunRow]) -> String {
    let mut out = String::from(
        "instance,variant,seed,best_length,gap_percent,generations,q_lkh_calls\n",
    );
    for r in rows {
        let gap = r
            .gap_percent
            .map(|g| format!("{g:.4}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.instance, r.variant, r.seed, r.best_length, gap, r.generations, r.q_lkh_calls
        );
    }
    out
}
