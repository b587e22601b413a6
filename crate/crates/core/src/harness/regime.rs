//! Regime labels and stability onset from replicate TI trajectories.
//!
//! A sample is "ordered" when the cross-replicate median TI is below 0.45 and
//! the cross-replicate IQR is below 0.05. Both rules here are pure functions of
//! stored trajectories, so they can be re-run offline from `trajectories.csv`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::stats::{median, summarize, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    ConsistentDecrease,
    Rebound,
    NoChange,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeLabel::ConsistentDecrease => "ConsistentDecrease",
            RegimeLabel::Rebound => "Rebound",
            RegimeLabel::NoChange => "NoChange",
        })
    }
}

impl FromStr for RegimeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ConsistentDecrease" => Ok(RegimeLabel::ConsistentDecrease),
            "Rebound" => Ok(RegimeLabel::Rebound),
            "NoChange" => Ok(RegimeLabel::NoChange),
            other => Err(format!("unknown regime label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub median_below: f64,
    pub iqr_below: f64,
    pub rebound_margin: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            median_below: 0.45,
            iqr_below: 0.05,
            rebound_margin: 0.05,
        }
    }
}

impl RegimeThresholds {
    pub fn ordered(&self, s: &Summary<f64>) -> bool {
        s.median < self.median_below && s.iqr < self.iqr_below
    }
}

/// Defined TI values of every replicate at sample `k`.
pub fn cross_section(trajectories: &[&Trajectory], k: usize) -> Vec<f64> {
    trajectories.iter().filter_map(|t| t.ti.get(k).copied().flatten()).collect()
}

fn sample_count(trajectories: &[&Trajectory]) -> usize {
    trajectories.iter().map(|t| t.len()).max().unwrap_or(0)
}

/// Sample time of index `k`, taken from the first replicate that has it.
fn sample_time(trajectories: &[&Trajectory], k: usize) -> Option<u64> {
    trajectories.iter().find_map(|t| t.times.get(k).copied())
}

/// Cross-replicate median at each sample; `None` where no replicate is defined.
pub fn median_trajectory(trajectories: &[&Trajectory]) -> Vec<(u64, Option<f64>)> {
    (0..sample_count(trajectories))
        .filter_map(|k| Some((sample_time(trajectories, k)?, median(&cross_section(trajectories, k)))))
        .collect()
}

/// The label rule on already aggregated numbers. `median_path` holds the
/// defined points of the ensemble median trajectory in time order.
///
/// A dip only counts once the median has been at or above the band edge: the
/// first few samples see a nearly empty ledger, which is trivially coherent.
pub fn classify_summary(finals: Option<&Summary<f64>>, median_path: &[f64], th: &RegimeThresholds) -> RegimeLabel {
    let Some(finals) = finals else {
        return RegimeLabel::NoChange;
    };
    if th.ordered(finals) {
        return RegimeLabel::ConsistentDecrease;
    }
    let risen = median_path
        .iter()
        .position(|&m| m >= th.median_below)
        .unwrap_or(median_path.len());
    let dipped = median_path[risen..].iter().any(|&m| m < th.median_below);
    let relapsed = median_path
        .last()
        .is_some_and(|&m| m > th.median_below + th.rebound_margin);
    if dipped && relapsed {
        RegimeLabel::Rebound
    } else {
        RegimeLabel::NoChange
    }
}

/// Regime of one cell. A cell whose replicates all went extinct is `NoChange`.
pub fn classify_regime(trajectories: &[&Trajectory], th: &RegimeThresholds) -> RegimeLabel {
    let finals: Vec<f64> = trajectories.iter().filter_map(|t| t.final_ti()).collect();
    let path: Vec<f64> = median_trajectory(trajectories).into_iter().filter_map(|(_, m)| m).collect();
    classify_summary(summarize(&finals).as_ref(), &path, th)
}

/// First sample time from which the ordered criteria hold for at least
/// `window` consecutive samples.
pub fn stability_onset(trajectories: &[&Trajectory], th: &RegimeThresholds, window: usize) -> Option<u64> {
    let window = window.max(1);
    let mut run_start: Option<usize> = None;
    for k in 0..sample_count(trajectories) {
        let ok = summarize(&cross_section(trajectories, k)).is_some_and(|s| th.ordered(&s));
        if !ok {
            run_start = None;
            continue;
        }
        let start = *run_start.get_or_insert(k);
        if k + 1 - start >= window {
            return sample_time(trajectories, start);
        }
    }
    None
}
