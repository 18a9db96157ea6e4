use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HarnessError, RunRecord};

/// Descriptive statistics of one quantity over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Stats {
    /// Statistics of a nonempty sample, reduced in the given order.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            mean,
            std,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            q10: quantile(&sorted, 0.1),
            q50: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
        })
    }
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary of one (instance, variant, T) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub instance_label: String,
    pub variant_label: String,
    pub horizon: u64,
    pub n_seeds: usize,
    pub avg_regret: Stats,
    pub gamma_regret: Stats,
    pub var_star_mean: f64,
    pub episodes_mean: f64,
}

/// Summarizes records of a single cell; records are sorted by seed first.
pub fn summarize_cell(records: &[&RunRecord]) -> Result<CellSummary, HarnessError> {
    let first = records.first().ok_or(HarnessError::EmptyCell)?;
    let mut sorted: Vec<&RunRecord> = records.to_vec();
    sorted.sort_by_key(|r| r.seed);
    let pick = |f: fn(&RunRecord) -> f64| -> Vec<f64> { sorted.iter().map(|r| f(r)).collect() };
    let n = sorted.len() as f64;
    Ok(CellSummary {
        instance_label: first.instance_label.clone(),
        variant_label: first.variant_label.clone(),
        horizon: first.horizon,
        n_seeds: sorted.len(),
        avg_regret: Stats::of(&pick(|r| r.avg_regret)).ok_or(HarnessError::EmptyCell)?,
        gamma_regret: Stats::of(&pick(|r| r.gamma_regret)).ok_or(HarnessError::EmptyCell)?,
        var_star_mean: pick(|r| r.var_star).iter().sum::<f64>() / n,
        episodes_mean: pick(|r| r.episodes as f64).iter().sum::<f64>() / n,
    })
}

/// Groups records by (instance, variant, T) and summarizes each cell, in
/// sorted key order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<CellSummary>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyCell);
    }
    let mut cells: BTreeMap<(&str, &str, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((&r.instance_label, &r.variant_label, r.horizon)).or_default().push(r);
    }
    cells.values().map(|cell| summarize_cell(cell)).collect()
}

/// Least-squares line through `(ln T, ln regret)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_loglog_slope(horizons: &[f64], regrets: &[f64]) -> Result<LogLogFit, HarnessError> {
    if horizons.len() != regrets.len() || horizons.len() < 3 {
        return Err(HarnessError::TooFewPoints(horizons.len().min(regrets.len())));
    }
    for (i, (&t, &r)) in horizons.iter().zip(regrets).enumerate() {
        if !(r > 0.0) {
            return Err(HarnessError::NonpositiveRegret { index: i, value: r });
        }
        if !(t > 0.0) {
            return Err(HarnessError::NonpositiveRegret { index: i, value: t });
        }
    }
    let xs: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = regrets.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    Ok(LogLogFit { slope, intercept: my - slope * mx })
}
