//! Multiscale price increments, lagged-pair diagrams, binned quadrant
//! regression and scenario classification.
//!
//! Increments are forward differences of consecutive non-overlapping bin
//! means (later minus earlier), so a rising price gives a positive delta.

use serde::{Deserialize, Serialize};

use crate::fit::linear_fit;
use crate::{CoreError, PriceSeries};

pub const MIN_BIN_OCCUPANCY: usize = 10;
pub const MIN_QUADRANT_BINS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    pub scale_n: usize,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSet {
    /// (preceding increment, current increment), consecutively overlapping.
    pub pairs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantSlope {
    pub slope: f64,
    pub slope_err: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub prev_bin_centers: Vec<f64>,
    /// Mean preceding increment of the pairs inside each bin; the quadrant
    /// slopes are fitted against this so an exact linear relation between
    /// increments yields an exact slope.
    pub mean_prev: Vec<f64>,
    pub mean_curr: Vec<f64>,
    pub count: Vec<usize>,
    /// Slope over bins with positive center and negative mean response
    /// (rise followed by fall).
    pub q4_slope: Option<QuadrantSlope>,
    /// Slope over bins with positive center and positive mean response.
    pub q1_slope: Option<QuadrantSlope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCounts {
    /// Rise then fall (anti-persistent).
    pub scenario_i: usize,
    /// Stable then rise.
    pub scenario_ii: usize,
    /// Fall then stable.
    pub scenario_iii: usize,
    /// Continuing rise (persistent).
    pub scenario_iv: usize,
    pub unclassified: usize,
    pub epsilon: f64,
}

impl ScenarioCounts {
    pub fn total(&self) -> usize {
        self.scenario_i + self.scenario_ii + self.scenario_iii + self.scenario_iv + self.unclassified
    }

    pub fn classified(&self) -> usize {
        self.scenario_i + self.scenario_ii + self.scenario_iii + self.scenario_iv
    }
}

/// Differences of consecutive n-hour bin means. At n = 1 these are plain
/// first differences of the hourly prices.
pub fn multiscale_increments(
    series: &PriceSeries,
    scale_n: usize,
) -> Result<IncrementSeries, CoreError> {
    let n_total = series.len();
    if scale_n < 1 || scale_n > n_total / 4 {
        return Err(CoreError::ScaleOutOfRange {
            scale: scale_n,
            lo: 1,
            hi: n_total / 4,
        });
    }
    let agg = series.aggregate(scale_n)?;
    if agg.bin_means.len() < 3 {
        return Err(CoreError::InsufficientBoxes {
            scale: scale_n,
            boxes: agg.bin_means.len(),
            min: 3,
        });
    }
    let deltas = agg.bin_means.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(IncrementSeries { scale_n, deltas })
}

pub fn lag_pairs(incs: &IncrementSeries) -> Result<PairSet, CoreError> {
    if incs.deltas.len() < 2 {
        return Err(CoreError::TooFewPairs {
            found: incs.deltas.len().saturating_sub(1),
            need: 1,
        });
    }
    let pairs = incs.deltas.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(PairSet { pairs })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

/// Average the current increment over uniform bins of the preceding
/// increment and fit per-quadrant slopes. The bin grid spans the symmetric
/// 99.5th-percentile range so single extreme spikes do not stretch it.
pub fn binned_regression(pairs: &PairSet, bin_count: usize) -> Result<BinnedCurve, CoreError> {
    if pairs.pairs.len() < 100 {
        return Err(CoreError::TooFewPairs {
            found: pairs.pairs.len(),
            need: 100,
        });
    }
    if bin_count < 10 {
        return Err(CoreError::InvalidParameter(
            "bin_count must be at least 10".into(),
        ));
    }
    let mut abs_prev: Vec<f64> = pairs.pairs.iter().map(|(p, _)| p.abs()).collect();
    abs_prev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let limit = percentile(&abs_prev, 0.995);
    if limit <= 0.0 {
        return Err(CoreError::DegenerateFit(
            "preceding increments are all zero".into(),
        ));
    }
    let width = 2.0 * limit / bin_count as f64;
    let mut curr_sums = vec![0.0f64; bin_count];
    let mut prev_sums = vec![0.0f64; bin_count];
    let mut counts = vec![0usize; bin_count];
    for &(prev, curr) in &pairs.pairs {
        if prev < -limit || prev > limit {
            continue;
        }
        let b = (((prev + limit) / width) as usize).min(bin_count - 1);
        curr_sums[b] += curr;
        prev_sums[b] += prev;
        counts[b] += 1;
    }
    let mut prev_bin_centers = Vec::new();
    let mut mean_prev = Vec::new();
    let mut mean_curr = Vec::new();
    let mut count = Vec::new();
    for b in 0..bin_count {
        if counts[b] >= MIN_BIN_OCCUPANCY {
            prev_bin_centers.push(-limit + (b as f64 + 0.5) * width);
            mean_prev.push(prev_sums[b] / counts[b] as f64);
            mean_curr.push(curr_sums[b] / counts[b] as f64);
            count.push(counts[b]);
        }
    }
    let quadrant = |keep: &dyn Fn(f64, f64) -> bool| -> Option<QuadrantSlope> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..mean_prev.len() {
            if keep(mean_prev[i], mean_curr[i]) {
                xs.push(mean_prev[i]);
                ys.push(mean_curr[i]);
            }
        }
        if xs.len() < MIN_QUADRANT_BINS {
            return None;
        }
        let fit = linear_fit(&xs, &ys).ok()?;
        Some(QuadrantSlope {
            slope: fit.slope,
            slope_err: fit.slope_err,
            bins: xs.len(),
        })
    };
    let q4_slope = quadrant(&|c, m| c > 0.0 && m < 0.0);
    let q1_slope = quadrant(&|c, m| c > 0.0 && m > 0.0);
    Ok(BinnedCurve {
        prev_bin_centers,
        mean_prev,
        mean_curr,
        count,
        q4_slope,
        q1_slope,
    })
}

/// Classify each pair into one of the four movement scenarios.
///
/// I: rise then fall; II: stable then rise; III: fall then stable;
/// IV: continuing rise. Anything else is unclassified.
pub fn classify_scenarios(pairs: &PairSet, epsilon: f64) -> Result<ScenarioCounts, CoreError> {
    if epsilon <= 0.0 {
        return Err(CoreError::InvalidParameter("epsilon must be > 0".into()));
    }
    let mut counts = ScenarioCounts {
        scenario_i: 0,
        scenario_ii: 0,
        scenario_iii: 0,
        scenario_iv: 0,
        unclassified: 0,
        epsilon,
    };
    for &(prev, curr) in &pairs.pairs {
        if prev > epsilon && curr < -epsilon {
            counts.scenario_i += 1;
        } else if prev.abs() <= epsilon && curr > epsilon {
            counts.scenario_ii += 1;
        } else if prev < -epsilon && curr.abs() <= epsilon {
            counts.scenario_iii += 1;
        } else if prev > epsilon && curr > epsilon {
            counts.scenario_iv += 1;
        } else {
            counts.unclassified += 1;
        }
    }
    Ok(counts)
}

/// Data-driven stability threshold: half the median absolute deviation of
/// the increments at the working scale.
pub fn default_epsilon(incs: &IncrementSeries) -> f64 {
    let mut sorted = incs.deltas.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let mut dev: Vec<f64> = incs.deltas.iter().map(|d| (d - median).abs()).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mad = dev[dev.len() / 2];
    if mad > 0.0 {
        0.5 * mad
    } else {
        // degenerate distribution; fall back to a small absolute threshold
        f64::EPSILON.sqrt()
    }
}
