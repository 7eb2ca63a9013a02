//! Frequency-matched amplitude rank correlation of two cycles.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

pub const MIN_LENGTH: usize = 16;
/// Amplitudes at or below this fraction of the series maximum count as zero.
const AMPLITUDE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleTransform {
    /// Period-on-period growth rates `x_t / x_{t-1} - 1`; levels must be positive.
    Growth,
    /// Use the series as given.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleCorrelation {
    /// Pearson correlation of the transformed series.
    pub pearson: f64,
    /// Spearman correlation of amplitude ranks matched by frequency.
    pub amplitude_rank: f64,
    /// Frequencies entering the rank statistic.
    pub frequencies: usize,
}

fn growth(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = x.iter().find(|v| !(**v > 0.0)) {
        return Err(ModelError::Domain(format!("growth transform needs positive levels, got {v}")));
    }
    Ok(x.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

/// Amplitudes `|X_f|` at the positive frequencies `1..=n/2`.
pub fn positive_amplitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[1..=n / 2].iter().map(|c| c.norm()).collect()
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; `NaN` if either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

pub fn cycle_rank_correlation(a: &[f64], b: &[f64], transform: CycleTransform) -> Result<CycleCorrelation> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < MIN_LENGTH {
        return Err(ModelError::InsufficientSample { needed: MIN_LENGTH, have: a.len() });
    }
    let (a, b) = match transform {
        CycleTransform::Growth => (growth(a)?, growth(b)?),
        CycleTransform::Level => (a.to_vec(), b.to_vec()),
    };
    let amp_a = positive_amplitudes(&a);
    let amp_b = positive_amplitudes(&b);
    let floor_a = AMPLITUDE_FLOOR * amp_a.iter().copied().fold(0.0, f64::max);
    let floor_b = AMPLITUDE_FLOOR * amp_b.iter().copied().fold(0.0, f64::max);
    let (kept_a, kept_b): (Vec<f64>, Vec<f64>) = amp_a
        .iter()
        .zip(&amp_b)
        .filter(|(x, y)| **x > floor_a && **y > floor_b)
        .map(|(x, y)| (*x, *y))
        .unzip();
    if kept_a.len() < 2 {
        return Err(ModelError::InsufficientSample { needed: 2, have: kept_a.len() });
    }
    Ok(CycleCorrelation {
        pearson: pearson(&a, &b),
        amplitude_rank: pearson(&average_ranks(&kept_a), &average_ranks(&kept_b)),
        frequencies: kept_a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn identical_series_correlate_exactly() {
        let a: Vec<f64> = (0..64).map(|t| 2.0 + (0.3 * t as f64).sin() + 0.1 * (t as f64 * 1.7).cos()).collect();
        let c = cycle_rank_correlation(&a, &a, CycleTransform::Growth).unwrap();
        assert_eq!(c.amplitude_rank, 1.0);
        assert_eq!(c.pearson, 1.0);
    }

    #[test]
    fn phase_shift_keeps_amplitude_ranks() {
        let n = 128;
        let f = 8.0;
        let w = |t: usize| 2.0 * PI * f * t as f64 / n as f64;
        let a: Vec<f64> = (0..n).map(|t| w(t).sin() + 0.5 * (3.0 * w(t)).sin()).collect();
        let b: Vec<f64> = (0..n).map(|t| (w(t) + PI / 2.0).sin() + 0.5 * (3.0 * w(t) + 1.1).sin()).collect();
        let c = cycle_rank_correlation(&a, &b, CycleTransform::Level).unwrap();
        assert!((c.amplitude_rank - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = vec![1.0; 20];
        assert!(cycle_rank_correlation(&a, &a[..19], CycleTransform::Level).is_err());
        assert!(cycle_rank_correlation(&a[..8], &a[..8], CycleTransform::Level).is_err());
        let mut b = a.clone();
        b[3] = 0.0;
        assert!(matches!(
            cycle_rank_correlation(&a, &b, CycleTransform::Growth),
            Err(ModelError::Domain(_))
        ));
    }
}
