//! Normalized price histograms, Pareto tail-index fitting on the log-log
//! scale, and moment-stability classification.

use serde::{Deserialize, Serialize};

use crate::fit::linear_fit;
use crate::{CoreError, PriceSeries};

pub const MIN_FIT_BINS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    /// Probability mass per unit price, normalized over in-range samples.
    pub density: Vec<f64>,
    pub total_count: usize,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        (self.bin_edges[i] + self.bin_edges[i + 1]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoEstimate {
    pub gamma: f64,
    pub gamma_err: f64,
    pub price_range: (f64, f64),
    pub bins_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentStabilityClass {
    /// gamma <= 1: neither mean nor standard deviation is defined.
    NoMean,
    /// 1 < gamma <= 2: mean exists, standard deviation does not.
    MeanOnly,
    /// gamma > 2: both first and second moments are stable.
    MeanAndVariance,
}

/// Uniform-bin histogram over `range`; samples outside the range are
/// excluded from the normalization.
pub fn histogram(
    series: &PriceSeries,
    bin_width: f64,
    range: (f64, f64),
) -> Result<Histogram, CoreError> {
    let (lo, hi) = range;
    if bin_width <= 0.0 {
        return Err(CoreError::InvalidParameter("bin width must be > 0".into()));
    }
    if lo < 0.0 || hi <= lo {
        return Err(CoreError::InvalidParameter(format!(
            "bad price range [{lo}, {hi}]"
        )));
    }
    let nbins = ((hi - lo) / bin_width).ceil() as usize;
    let mut counts = vec![0usize; nbins];
    let mut total = 0usize;
    for &x in &series.values {
        if x < lo || x >= hi {
            continue;
        }
        let b = (((x - lo) / bin_width) as usize).min(nbins - 1);
        counts[b] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(CoreError::EmptyPriceRange { lo, hi });
    }
    let density = counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * bin_width))
        .collect();
    let bin_edges = (0..=nbins).map(|i| lo + i as f64 * bin_width).collect();
    Ok(Histogram {
        bin_edges,
        density,
        total_count: total,
    })
}

/// Fit N(x) ~ x^-(gamma+1) by OLS on (log bin-center, log density) over the
/// nonzero bins whose centers fall inside `range`.
pub fn pareto_fit(hist: &Histogram, range: (f64, f64)) -> Result<ParetoEstimate, CoreError> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for i in 0..hist.density.len() {
        let center = hist.bin_center(i);
        let d = hist.density[i];
        if d > 0.0 && center > 0.0 && center >= range.0 && center <= range.1 {
            lx.push(center.log10());
            ly.push(d.log10());
        }
    }
    if lx.len() < MIN_FIT_BINS {
        return Err(CoreError::InsufficientBins {
            found: lx.len(),
            need: MIN_FIT_BINS,
        });
    }
    let fit = linear_fit(&lx, &ly)?;
    Ok(ParetoEstimate {
        gamma: -fit.slope - 1.0,
        gamma_err: fit.slope_err,
        price_range: range,
        bins_used: lx.len(),
    })
}

/// Boundary values gamma = 1 and gamma = 2 fall in the lower class.
pub fn classify_moments(est: &ParetoEstimate) -> MomentStabilityClass {
    classify_gamma(est.gamma)
}

pub fn classify_gamma(gamma: f64) -> MomentStabilityClass {
    if gamma <= 1.0 {
        MomentStabilityClass::NoMean
    } else if gamma <= 2.0 {
        MomentStabilityClass::MeanOnly
    } else {
        MomentStabilityClass::MeanAndVariance
    }
}

/// Independent Pareto fits over two price ranges. An estimate is absent when
/// its range has too few populated bins, which is a value and not an error.
pub fn two_range_report(
    series: &PriceSeries,
    ranges: ((f64, f64), (f64, f64)),
    bin_width: f64,
) -> Result<(Option<ParetoEstimate>, Option<ParetoEstimate>), CoreError> {
    let (lower, upper) = ranges;
    if lower.0 >= upper.0 || lower.1 > upper.0 {
        return Err(CoreError::InvalidParameter(
            "ranges must be ascending and disjoint or adjacent".into(),
        ));
    }
    let fit_one = |range: (f64, f64)| -> Option<ParetoEstimate> {
        let hist = histogram(series, bin_width, range).ok()?;
        pareto_fit(&hist, range).ok()
    };
    Ok((fit_one(lower), fit_one(upper)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn series(values: Vec<f64>) -> PriceSeries {
        PriceSeries::new(
            "t",
            NaiveDate::from_ymd_opt(2002, 5, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            values,
        )
        .unwrap()
    }

    /// Inverse-CDF Pareto sampler: x = x_min * u^(-1/gamma).
    pub(crate) fn pareto_samples(gamma: f64, x_min: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(f64::EPSILON..1.0);
                x_min * u.powf(-1.0 / gamma)
            })
            .collect()
    }

    #[test]
    fn single_bin_mass() {
        let hist = histogram(&series(vec![2.5; 100]), 5.0, (0.0, 10.0)).unwrap();
        assert_eq!(hist.density, vec![0.2, 0.0]);
        assert_eq!(hist.total_count, 100);
    }

    #[test]
    fn uniform_samples_flat_density() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let vals: Vec<f64> = (0..100_000).map(|_| rng.gen_range(0.0..10.0)).collect();
        let hist = histogram(&series(vals), 5.0, (0.0, 10.0)).unwrap();
        assert!((hist.density[0] - 0.1).abs() < 0.005);
        assert!((hist.density[1] - 0.1).abs() < 0.005);
    }

    #[test]
    fn out_of_range_samples_excluded() {
        let hist = histogram(&series(vec![-3.0, 2.0, 5.0, 20.0]), 5.0, (0.0, 10.0)).unwrap();
        assert_eq!(hist.total_count, 2);
    }

    #[test]
    fn normalization_invariant() {
        let vals = pareto_samples(2.0, 1.0, 50_000, 3);
        let hist = histogram(&series(vals), 2.0, (1.0, 101.0)).unwrap();
        let mass: f64 = hist.density.iter().sum::<f64>() * hist.bin_width();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-9);
    }

    fn exact_density_hist(gamma: f64, lo: f64, hi: f64, width: f64) -> Histogram {
        let nbins = ((hi - lo) / width).ceil() as usize;
        let bin_edges: Vec<f64> = (0..=nbins).map(|i| lo + i as f64 * width).collect();
        let density = (0..nbins)
            .map(|i| {
                let c = (bin_edges[i] + bin_edges[i + 1]) / 2.0;
                c.powf(-(gamma + 1.0))
            })
            .collect();
        Histogram {
            bin_edges,
            density,
            total_count: 1,
        }
    }

    #[test]
    fn idealized_power_law_density() {
        // a pure x^-3.072 density must return gamma = 2.072 exactly
        let hist = exact_density_hist(2.072, 1.0, 200.0, 5.0);
        let est = pareto_fit(&hist, (1.0, 200.0)).unwrap();
        assert!((est.gamma - 2.072).abs() < 1e-9, "gamma {}", est.gamma);
        assert!(est.gamma_err < 1e-9);
    }

    #[test]
    fn inverse_square_density() {
        let hist = exact_density_hist(1.0, 1.0, 100.0, 1.0);
        let est = pareto_fit(&hist, (1.0, 100.0)).unwrap();
        assert_relative_eq!(est.gamma, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sampled_pareto_recovery() {
        // bin width 2 keeps tail bins populated enough that skipping the
        // empty ones does not flatten the fitted slope
        let mut total = 0.0;
        for seed in 0..10 {
            let vals = pareto_samples(2.5, 1.0, 100_000, seed);
            let hist = histogram(&series(vals), 2.0, (1.0, 51.0)).unwrap();
            let est = pareto_fit(&hist, (1.0, 51.0)).unwrap();
            total += est.gamma;
        }
        let mean = total / 10.0;
        assert!((2.4..=2.6).contains(&mean), "gamma {mean}");
    }

    #[test]
    fn zero_density_bins_are_skipped() {
        let mut hist = exact_density_hist(2.0, 1.0, 100.0, 1.0);
        hist.density[10] = 0.0;
        hist.density[40] = 0.0;
        let est = pareto_fit(&hist, (1.0, 100.0)).unwrap();
        assert!((est.gamma - 2.0).abs() < 0.01);
        assert_eq!(est.bins_used, 97);
    }

    #[test]
    fn insufficient_bins_is_error() {
        let hist = exact_density_hist(2.0, 1.0, 100.0, 1.0);
        assert!(matches!(
            pareto_fit(&hist, (1.0, 4.0)),
            Err(CoreError::InsufficientBins { .. })
        ));
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify_gamma(0.5), MomentStabilityClass::NoMean);
        assert_eq!(classify_gamma(1.0), MomentStabilityClass::NoMean);
        assert_eq!(classify_gamma(1.318), MomentStabilityClass::MeanOnly);
        assert_eq!(classify_gamma(2.0), MomentStabilityClass::MeanOnly);
        assert_eq!(classify_gamma(3.016), MomentStabilityClass::MeanAndVariance);
    }

    #[test]
    fn low_volatility_series_has_absent_upper_estimate() {
        // prices never exceed 200, so the upper range cannot be fit
        let vals = pareto_samples(4.3, 1.0, 100_000, 5)
            .into_iter()
            .filter(|&x| x < 200.0)
            .collect();
        let (lower, upper) =
            two_range_report(&series(vals), ((1.0, 200.0), (200.0, 1000.0)), 1.0).unwrap();
        assert!(lower.is_some());
        assert!(upper.is_none());
    }

    /// Two-regime sampler: mass `1 - upper_weight` from a truncated Pareto
    /// on [x_min, split) and `upper_weight` from a Pareto starting at split.
    fn piecewise_pareto_samples(
        gamma_lo: f64,
        gamma_hi: f64,
        split: f64,
        upper_weight: f64,
        n: usize,
        seed: u64,
    ) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let trunc_mass = 1.0 - split.powf(-gamma_lo);
        (0..n)
            .map(|_| {
                let v: f64 = rng.gen_range(f64::EPSILON..1.0);
                if rng.gen::<f64>() < upper_weight {
                    split * v.powf(-1.0 / gamma_hi)
                } else {
                    (1.0 - v * trunc_mass).powf(-1.0 / gamma_lo)
                }
            })
            .collect()
    }

    #[test]
    fn two_regime_density_recovered_per_range() {
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        for seed in 0..10 {
            let vals = piecewise_pareto_samples(2.1, 1.3, 200.0, 0.3, 200_000, seed);
            let (lower, upper) =
                two_range_report(&series(vals), ((1.0, 200.0), (200.0, 1000.0)), 5.0).unwrap();
            lo_sum += lower.unwrap().gamma;
            hi_sum += upper.unwrap().gamma;
        }
        let (lo, hi) = (lo_sum / 10.0, hi_sum / 10.0);
        assert!((lo - 2.1).abs() < 0.15, "lower gamma {lo}");
        assert!((hi - 1.3).abs() < 0.15, "upper gamma {hi}");
    }

    #[test]
    fn single_regime_consistent_across_ranges() {
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        for seed in 0..10 {
            let vals = pareto_samples(4.3, 100.0, 400_000, seed);
            let (lower, upper) =
                two_range_report(&series(vals), ((100.0, 200.0), (200.0, 600.0)), 5.0).unwrap();
            lo_sum += lower.unwrap().gamma;
            hi_sum += upper.unwrap().gamma;
        }
        let (lo, hi) = (lo_sum / 10.0, hi_sum / 10.0);
        assert!(
            (lo - hi).abs() < 0.2,
            "ranges disagree: lower {lo} upper {hi}"
        );
    }

    #[test]
    fn currency_rescaling_preserves_gamma() {
        let vals = pareto_samples(2.1, 1.0, 100_000, 7);
        let scaled: Vec<f64> = vals.iter().map(|x| x * 3.0).collect();
        let h1 = histogram(&series(vals), 0.5, (1.0, 50.0)).unwrap();
        let h2 = histogram(&series(scaled), 1.5, (3.0, 150.0)).unwrap();
        let e1 = pareto_fit(&h1, (1.0, 50.0)).unwrap();
        let e2 = pareto_fit(&h2, (3.0, 150.0)).unwrap();
        assert_relative_eq!(e1.gamma, e2.gamma, epsilon = 1e-9);
        assert_eq!(classify_moments(&e1), classify_moments(&e2));
    }

    #[test]
    fn tail_start_does_not_shift_gamma() {
        let vals = pareto_samples(2.5, 1.0, 200_000, 13);
        let s = series(vals);
        let h1 = histogram(&s, 0.5, (1.0, 50.0)).unwrap();
        let e1 = pareto_fit(&h1, (1.0, 50.0)).unwrap();
        let h2 = histogram(&s, 0.5, (2.0, 50.0)).unwrap();
        let e2 = pareto_fit(&h2, (2.0, 50.0)).unwrap();
        assert!(
            (e1.gamma - e2.gamma).abs() < 2.0 * (e1.gamma_err + e2.gamma_err) + 0.05,
            "gamma moved from {} to {}",
            e1.gamma,
            e2.gamma
        );
    }
}
