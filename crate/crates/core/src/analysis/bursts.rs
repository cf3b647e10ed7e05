//! Burst detection on the outlet temperature series and inter-burst interval
//! statistics.

use crate::dynamics::OrbitSeries;
use crate::error::{Error, Result};

/// Minimum series length accepted by [`detect_bursts`].
pub const MIN_SERIES_LEN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstConfig {
    /// Fixed threshold; when `None` it is `median + mad_multiplier * MAD`.
    pub threshold: Option<f64>,
    pub mad_multiplier: f64,
    /// Runs above threshold separated by fewer than this many passes are one burst.
    pub merge_gap: usize,
}

impl Default for BurstConfig {
    fn default() -> Self {
        BurstConfig {
            threshold: None,
            mad_multiplier: 6.0,
            merge_gap: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstEvent {
    /// Pass index of the highest sample in the burst.
    pub k_peak: usize,
    pub peak_theta: f64,
    /// Passes from the first to the last sample above threshold.
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurstEventSet {
    pub threshold_used: f64,
    pub events: Vec<BurstEvent>,
    /// Gaps between consecutive peaks; `events.len() - 1` entries.
    pub intervals: Vec<usize>,
    /// Coefficient of variation of `intervals`; NaN with fewer than two intervals.
    pub cv: f64,
}

impl BurstEventSet {
    pub fn mean_interval(&self) -> f64 {
        if self.intervals.is_empty() {
            return f64::NAN;
        }
        self.intervals.iter().sum::<usize>() as f64 / self.intervals.len() as f64
    }

    pub fn median_interval(&self) -> f64 {
        if self.intervals.is_empty() {
            return f64::NAN;
        }
        median(&self.intervals.iter().map(|&d| d as f64).collect::<Vec<_>>())
    }

    /// Most frequent interval; the smallest one on ties.
    pub fn modal_interval(&self) -> Option<usize> {
        let mut sorted = self.intervals.clone();
        sorted.sort_unstable();
        let mut best: Option<(usize, usize)> = None;
        for run in sorted.chunk_by(|a, b| a == b) {
            if best.is_none_or(|(_, c)| run.len() > c) {
                best = Some((run[0], run.len()));
            }
        }
        best.map(|(d, _)| d)
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Median of a non-empty slice.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about the median (unscaled).
pub fn mad(xs: &[f64]) -> f64 {
    let m = median(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m).abs()).collect();
    median(&dev)
}

/// `median + multiplier * MAD`.
pub fn mad_threshold(xs: &[f64], multiplier: f64) -> f64 {
    median(xs) + multiplier * mad(xs)
}

/// Bursts in the outlet temperature of an orbit.
pub fn detect_bursts(series: &OrbitSeries, config: &BurstConfig) -> Result<BurstEventSet> {
    let ks: Vec<usize> = series.samples.iter().map(|s| s.k).collect();
    detect_bursts_in(&ks, &series.thetas(), config)
}

/// Bursts in an arbitrary series `values[i]` observed at pass `ks[i]`.
pub fn detect_bursts_in(ks: &[usize], values: &[f64], config: &BurstConfig) -> Result<BurstEventSet> {
    assert_eq!(ks.len(), values.len(), "pass indices and values must align");
    if values.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_SERIES_LEN,
            got: values.len(),
        });
    }
    let threshold = config
        .threshold
        .unwrap_or_else(|| mad_threshold(values, config.mad_multiplier));

    // maximal runs above threshold as [first, last] sample positions
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < values.len() {
        if values[i] > threshold {
            let start = i;
            while i + 1 < values.len() && values[i + 1] > threshold {
                i += 1;
            }
            match runs.last_mut() {
                Some(last) if ks[start] - ks[last.1] < config.merge_gap => last.1 = i,
                _ => runs.push((start, i)),
            }
        }
        i += 1;
    }

    let events: Vec<BurstEvent> = runs
        .iter()
        .map(|&(a, b)| {
            let peak = (a..=b)
                .max_by(|&x, &y| values[x].total_cmp(&values[y]).then(y.cmp(&x)))
                .expect("non-empty run");
            BurstEvent {
                k_peak: ks[peak],
                peak_theta: values[peak],
                width: ks[b] - ks[a] + 1,
            }
        })
        .collect();

    let intervals: Vec<usize> = events.windows(2).map(|w| w[1].k_peak - w[0].k_peak).collect();
    let cv = coefficient_of_variation(&intervals);
    Ok(BurstEventSet {
        threshold_used: threshold,
        events,
        intervals,
        cv,
    })
}

/// Population standard deviation over mean; NaN for fewer than two values.
fn coefficient_of_variation(xs: &[usize]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<usize>() as f64 / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spikes(n: usize, at: &[usize], height: f64) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for &k in at {
            v[k] = height;
        }
        v
    }

    #[test]
    fn three_spikes() {
        let v = spikes(1000, &[100, 300, 500], 1.0);
        let ks: Vec<usize> = (0..1000).collect();
        let b = detect_bursts_in(&ks, &v, &BurstConfig::default()).unwrap();
        assert_eq!(
            b.events.iter().map(|e| e.k_peak).collect::<Vec<_>>(),
            vec![100, 300, 500]
        );
        assert_eq!(b.intervals, vec![200, 200]);
        assert_eq!(b.cv, 0.0);
        assert_eq!(b.mean_interval(), 200.0);
        assert_eq!(b.median_interval(), 200.0);
        assert_eq!(b.modal_interval(), Some(200));
        assert!(b
            .events
            .iter()
            .all(|e| e.peak_theta >= b.threshold_used && e.width == 1));
    }

    #[test]
    fn close_runs_merge() {
        let mut v = vec![0.0; 1200];
        v[100] = 1.0;
        v[103] = 2.0; // gap of 3 < 5: merged, peak at 103
        v[200] = 1.0;
        v[205] = 1.0; // gap of 5: separate
        let ks: Vec<usize> = (0..1200).collect();
        let b = detect_bursts_in(&ks, &v, &BurstConfig::default()).unwrap();
        let peaks: Vec<_> = b.events.iter().map(|e| (e.k_peak, e.width)).collect();
        assert_eq!(peaks, vec![(103, 4), (200, 1), (205, 1)]);
    }

    #[test]
    fn no_bursts_gives_empty_set() {
        let ks: Vec<usize> = (0..1000).collect();
        let b = detect_bursts_in(&ks, &[0.5; 1000], &BurstConfig::default()).unwrap();
        assert!(b.is_empty());
        assert!(b.intervals.is_empty());
        assert!(b.cv.is_nan());
        assert!(b.mean_interval().is_nan());
        assert_eq!(b.modal_interval(), None);
    }

    #[test]
    fn short_series_rejected() {
        let ks: Vec<usize> = (0..10).collect();
        assert!(matches!(
            detect_bursts_in(&ks, &[0.0; 10], &BurstConfig::default()),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn interval_statistics() {
        let ks: Vec<usize> = (0..2000).collect();
        let v = spikes(2000, &[100, 580, 1059, 1538, 1600, 1700], 1.0);
        let b = detect_bursts_in(&ks, &v, &BurstConfig::default()).unwrap();
        assert_eq!(b.intervals, vec![480, 479, 479, 62, 100]);
        assert_eq!(b.modal_interval(), Some(479));
        assert_eq!(b.median_interval(), 479.0);
    }

    #[test]
    fn median_and_mad() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mad(&[1.0, 1.0, 2.0, 2.0, 4.0, 6.0, 9.0]), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn detects_every_spike_and_nothing_else(
                gaps in proptest::collection::vec(10usize..200, 3..30),
                noise_seed in 0u64..1000,
                height in 1.0f64..5.0,
            ) {
                // noise amplitude <= 0.1 keeps SNR >= 10
                let mut at = Vec::new();
                let mut k = 20;
                for g in &gaps {
                    at.push(k);
                    k += g;
                }
                let n = (k + 20).max(MIN_SERIES_LEN);
                let mut x = noise_seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let mut v: Vec<f64> = (0..n).map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    0.1 * ((x >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                }).collect();
                for &a in &at {
                    v[a] += height;
                }
                let ks: Vec<usize> = (0..n).collect();
                let b = detect_bursts_in(&ks, &v, &BurstConfig::default()).unwrap();
                let found: Vec<usize> = b.events.iter().map(|e| e.k_peak).collect();
                prop_assert_eq!(found, at);
                prop_assert_eq!(b.intervals.len(), b.events.len() - 1);
                prop_assert!(b.cv >= 0.0);
            }
        }
    }
}
