//! Delay (return) maps of burst peaks and of the raw outlet series.

use super::bursts::BurstEventSet;
use crate::error::{Error, Result};

/// Consecutive burst peak pairs `(peak_k, peak_{k+1})`.
pub fn burst_delay_map(events: &BurstEventSet) -> Result<Vec<(f64, f64)>> {
    if events.events.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: events.events.len(),
        });
    }
    let peaks: Vec<f64> = events.events.iter().map(|e| e.peak_theta).collect();
    Ok(delay_map(&peaks))
}

/// Pairs `(x_k, x_{k+1})` over a whole series.
pub fn delay_map(values: &[f64]) -> Vec<(f64, f64)> {
    values.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Number of distinct pairs after rounding both coordinates to `resolution`.
pub fn distinct_points(pairs: &[(f64, f64)], resolution: f64) -> usize {
    let mut keys: Vec<(i64, i64)> = pairs
        .iter()
        .map(|&(a, b)| ((a / resolution).round() as i64, (b / resolution).round() as i64))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}
