use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight descriptive statistics computed over a value sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsBlock {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub mean_std_ratio: f64,
    pub entropy: f64,
}

impl StatsBlock {
    pub fn to_array(&self) -> [f64; 8] {
        [self.min, self.max, self.mean, self.std, self.skewness, self.kurtosis, self.mean_std_ratio, self.entropy]
    }
}

/// Population moments, Fisher skewness, excess kurtosis, mean/std and the
/// base-2 Shannon entropy of the values normalized to a distribution.
///
/// Statistics that divide by the standard deviation are 0 when it is 0.
/// Negative values are clamped to 0 before the entropy normalization; an
/// all-zero sequence has entropy 0.
pub fn stats_block(values: &[f64]) -> Result<StatsBlock> {
    if values.is_empty() {
        return Err(Error::validation("stats_block of an empty sequence"));
    }
    // Sorting first makes every accumulated sum independent of input order.
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let min = v[0];
    let max = v[v.len() - 1];
    let mean = (v.iter().sum::<f64>() / n).clamp(min, max);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in &v {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let std = m2.sqrt();
    let degenerate = std == 0.0 || min == max;
    let (skewness, kurtosis, mean_std_ratio) =
        if degenerate { (0.0, 0.0, 0.0) } else { (m3 / (m2 * std), m4 / (m2 * m2) - 3.0, mean / std) };
    Ok(StatsBlock {
        min,
        max,
        mean,
        std: if degenerate { 0.0 } else { std },
        skewness,
        kurtosis,
        mean_std_ratio,
        entropy: entropy_bits(&v),
    })
}

/// Shannon entropy (bits) of non-negative weights normalized to sum 1.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = weights.iter().map(|w| w.max(0.0) / total).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    h.max(0.0)
}
