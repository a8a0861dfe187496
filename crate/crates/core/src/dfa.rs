//! Detrended fluctuation analysis with scale-dependent local exponents.
//!
//! The fluctuation function is computed from the integrated, mean-subtracted
//! series: boxes of length `n` are linearly detrended and the RMS residual is
//! averaged over boxes. Local exponents are log-log slopes of F(n) inside
//! narrow logarithmic scale bins, so a series mixing cycles, spikes and noise
//! is characterized per scale instead of by one global exponent.

use serde::{Deserialize, Serialize};

use crate::fit::linear_fit;
use crate::{CoreError, PriceSeries};

/// Cumulative sum of mean-subtracted prices.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub values: Vec<f64>,
    pub source_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationCurve {
    pub scales: Vec<usize>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleExponentCurve {
    pub bin_centers: Vec<f64>,
    pub alpha_local: Vec<f64>,
    pub alpha_err: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaSummary {
    pub alpha_mean: f64,
    /// Standard deviation of the local exponents across bins.
    pub alpha_mean_err: f64,
    pub alpha_max: f64,
    /// Per-bin fit error of the maximal exponent.
    pub alpha_max_err: f64,
}

pub fn integrate_profile(series: &PriceSeries) -> Result<Profile, CoreError> {
    let n = series.len();
    if n < 8 {
        return Err(CoreError::SeriesTooShort { len: n, min: 8 });
    }
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let mut acc = 0.0;
    let values = series
        .values
        .iter()
        .map(|x| {
            acc += x - mean;
            acc
        })
        .collect();
    Ok(Profile {
        values,
        source_mean: mean,
    })
}

/// 60 logarithmically spaced integer scales in [4, min(720, N/4)].
pub fn default_scale_grid(series_len: usize) -> Vec<usize> {
    let lo = 4usize;
    let hi = 720.min(series_len / 4).max(lo);
    log_scale_grid(lo, hi, 60)
}

pub fn log_scale_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut scales: Vec<usize> = (0..count)
        .map(|i| {
            let t = if count == 1 {
                0.0
            } else {
                i as f64 / (count - 1) as f64
            };
            (llo + t * (lhi - llo)).exp().round() as usize
        })
        .collect();
    scales.sort_unstable();
    scales.dedup();
    scales
}

/// F(n) over the given scale grid. Boxes start at the series head; trailing
/// samples that do not fill a box are ignored.
pub fn fluctuation_function(
    profile: &Profile,
    scales: &[usize],
) -> Result<FluctuationCurve, CoreError> {
    let n_total = profile.values.len();
    let mut out_scales = Vec::with_capacity(scales.len());
    let mut out_f = Vec::with_capacity(scales.len());
    let mut prev = 0usize;
    for &n in scales {
        if n <= prev {
            return Err(CoreError::InvalidParameter(
                "scale grid must be strictly increasing".into(),
            ));
        }
        prev = n;
        if n < 4 || n > n_total / 4 {
            return Err(CoreError::ScaleOutOfRange {
                scale: n,
                lo: 4,
                hi: n_total / 4,
            });
        }
        let boxes = n_total / n;
        if boxes < 4 {
            return Err(CoreError::InsufficientBoxes {
                scale: n,
                boxes,
                min: 4,
            });
        }
        out_scales.push(n);
        out_f.push(fluctuation_at_scale(&profile.values, n, boxes));
    }
    Ok(FluctuationCurve {
        scales: out_scales,
        f: out_f,
    })
}

fn fluctuation_at_scale(y: &[f64], n: usize, boxes: usize) -> f64 {
    let mut total_ms = 0.0;
    for m in 0..boxes {
        let seg = &y[m * n..(m + 1) * n];
        total_ms += box_residual_mean_square(seg);
    }
    (total_ms / boxes as f64).sqrt()
}

/// Mean squared residual of a least-squares line through one box, using
/// closed-form regression sums over the local index 0..n.
fn box_residual_mean_square(seg: &[f64]) -> f64 {
    let n = seg.len() as f64;
    let mean_k = (n - 1.0) / 2.0;
    let mean_y = seg.iter().sum::<f64>() / n;
    let mut skk = 0.0;
    let mut sky = 0.0;
    let mut syy = 0.0;
    for (k, &v) in seg.iter().enumerate() {
        let dk = k as f64 - mean_k;
        let dy = v - mean_y;
        skk += dk * dk;
        sky += dk * dy;
        syy += dy * dy;
    }
    let ssr = syy - sky * sky / skk;
    ssr.max(0.0) / n
}

/// Local exponents over logarithmic scale bins. Bins with fewer than 3 curve
/// points are merged into the next bin to the right; a deficient final bin
/// merges leftward.
pub fn local_exponents(
    curve: &FluctuationCurve,
    bins_per_decade: usize,
) -> Result<ScaleExponentCurve, CoreError> {
    if bins_per_decade < 2 {
        return Err(CoreError::InvalidParameter(
            "bins_per_decade must be at least 2".into(),
        ));
    }
    let points: Vec<(f64, f64)> = curve
        .scales
        .iter()
        .zip(&curve.f)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&s, &f)| ((s as f64).log10(), f.log10()))
        .collect();
    if points.len() < 3 {
        return Err(CoreError::DegenerateFit(
            "fewer than 3 positive fluctuation points".into(),
        ));
    }
    let width = 1.0 / bins_per_decade as f64;
    let log_min = points[0].0;
    let log_max = points[points.len() - 1].0;
    let nbins = (((log_max - log_min) / width).floor() as usize) + 1;
    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); nbins];
    for &p in &points {
        let b = (((p.0 - log_min) / width) as usize).min(nbins - 1);
        groups[b].push(p);
    }
    // merge deficient bins rightward
    let mut merged: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut carry: Vec<(f64, f64)> = Vec::new();
    for g in groups {
        carry.extend(g);
        if carry.len() >= 3 {
            merged.push(std::mem::take(&mut carry));
        }
    }
    if !carry.is_empty() {
        match merged.last_mut() {
            Some(last) => last.extend(carry),
            None => {
                return Err(CoreError::DegenerateFit(
                    "not enough points for a single bin".into(),
                ))
            }
        }
    }

    let mut bin_centers = Vec::with_capacity(merged.len());
    let mut alpha_local = Vec::with_capacity(merged.len());
    let mut alpha_err = Vec::with_capacity(merged.len());
    for group in &merged {
        let xs: Vec<f64> = group.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = group.iter().map(|p| p.1).collect();
        let fit = linear_fit(&xs, &ys)?;
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        bin_centers.push(10f64.powf((lo + hi) / 2.0));
        alpha_local.push(fit.slope);
        alpha_err.push(fit.slope_err);
    }
    Ok(ScaleExponentCurve {
        bin_centers,
        alpha_local,
        alpha_err,
    })
}

pub fn summary_exponents(curve: &ScaleExponentCurve) -> Result<DfaSummary, CoreError> {
    let k = curve.alpha_local.len();
    if k < 2 {
        return Err(CoreError::DegenerateFit(
            "need at least 2 exponent bins".into(),
        ));
    }
    let mean = curve.alpha_local.iter().sum::<f64>() / k as f64;
    let var = curve
        .alpha_local
        .iter()
        .map(|a| (a - mean).powi(2))
        .sum::<f64>()
        / (k - 1) as f64;
    let (max_idx, &alpha_max) = curve
        .alpha_local
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    Ok(DfaSummary {
        alpha_mean: mean,
        alpha_mean_err: var.sqrt(),
        alpha_max,
        alpha_max_err: curve.alpha_err[max_idx],
    })
}

/// Full pipeline: profile, F(n) on `scales`, local exponents, summary.
pub fn analyze(
    series: &PriceSeries,
    scales: &[usize],
    bins_per_decade: usize,
) -> Result<(FluctuationCurve, ScaleExponentCurve, DfaSummary), CoreError> {
    let profile = integrate_profile(series)?;
    let curve = fluctuation_function(&profile, scales)?;
    let local = local_exponents(&curve, bins_per_decade)?;
    let summary = summary_exponents(&local)?;
    Ok((curve, local, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen, GeneratorSpec, ProcessKind};
    use approx::assert_relative_eq;
    use chrono::NaiveDate;

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

    #[test]
    fn constant_series_gives_zero_profile() {
        let p = integrate_profile(&series(vec![5.0; 8])).unwrap();
        assert!(p.values.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn two_sample_arithmetic() {
        // mean of [1,3] is 2, cumulative sums are [-1, 0]
        let s = series(vec![1.0, 3.0, 1.0, 3.0, 1.0, 3.0, 1.0, 3.0]);
        let p = integrate_profile(&s).unwrap();
        assert_relative_eq!(p.values[0], -1.0);
        assert_relative_eq!(p.values[1], 0.0);
    }

    #[test]
    fn alternating_profile_is_bounded() {
        let vals: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 }).collect();
        let p = integrate_profile(&series(vals)).unwrap();
        assert!(p.values.iter().all(|&v| v.abs() <= 1.0 + 1e-12));
        assert!(p.values.last().unwrap().abs() < 1e-9);
    }

    #[test]
    fn too_short_rejected() {
        assert!(integrate_profile(&series(vec![1.0; 7])).is_err());
    }

    #[test]
    fn linear_profile_has_zero_fluctuation() {
        let profile = Profile {
            values: (0..64).map(|k| 3.0 * k as f64 + 1.0).collect(),
            source_mean: 0.0,
        };
        let curve = fluctuation_function(&profile, &[4, 8, 16]).unwrap();
        assert!(curve.f.iter().all(|&f| f < 1e-9));
    }

    // direct transcription of the double-sum definition, kept naive on purpose
    fn naive_fluctuation(y: &[f64], n: usize) -> f64 {
        let boxes = y.len() / n;
        let mut acc = 0.0;
        for m in 0..boxes {
            let ks: Vec<f64> = (m * n..(m + 1) * n).map(|k| k as f64).collect();
            let ys: Vec<f64> = ks.iter().map(|&k| y[k as usize]).collect();
            let fit = linear_fit(&ks, &ys).unwrap();
            let ss: f64 = ks
                .iter()
                .zip(&ys)
                .map(|(&k, &yv)| {
                    let r = yv - (fit.slope * k + fit.intercept);
                    r * r
                })
                .sum();
            acc += ss / n as f64;
        }
        (acc / boxes as f64).sqrt()
    }

    #[test]
    fn matches_naive_definition() {
        let spec = GeneratorSpec {
            kind: ProcessKind::RandomWalk { sigma: 1.0 },
            seed: 7,
            length: 64,
        };
        let s = gen(&spec).unwrap();
        let profile = integrate_profile(&s).unwrap();
        for n in [4usize, 8] {
            let curve = fluctuation_function(&profile, &[n]).unwrap();
            let expected = naive_fluctuation(&profile.values, n);
            assert_relative_eq!(curve.f[0], expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn random_walk_slope_near_three_halves() {
        let spec = GeneratorSpec {
            kind: ProcessKind::RandomWalk { sigma: 1.0 },
            seed: 42,
            length: 1 << 14,
        };
        let s = gen(&spec).unwrap();
        let profile = integrate_profile(&s).unwrap();
        let scales = log_scale_grid(4, s.len() / 4, 40);
        let curve = fluctuation_function(&profile, &scales).unwrap();
        let lx: Vec<f64> = curve.scales.iter().map(|&n| (n as f64).log10()).collect();
        let ly: Vec<f64> = curve.f.iter().map(|f| f.log10()).collect();
        let fit = linear_fit(&lx, &ly).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn fbm_low_hurst_slope() {
        let spec = GeneratorSpec {
            kind: ProcessKind::Fbm {
                hurst: 0.3,
                sigma: 1.0,
            },
            seed: 11,
            length: 1 << 14,
        };
        let s = gen(&spec).unwrap();
        let profile = integrate_profile(&s).unwrap();
        let scales = log_scale_grid(4, 512, 40);
        let curve = fluctuation_function(&profile, &scales).unwrap();
        let lx: Vec<f64> = curve.scales.iter().map(|&n| (n as f64).log10()).collect();
        let ly: Vec<f64> = curve.f.iter().map(|f| f.log10()).collect();
        let fit = linear_fit(&lx, &ly).unwrap();
        assert!((fit.slope - 1.3).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn exact_power_law_local_exponents() {
        let scales: Vec<usize> = log_scale_grid(4, 720, 60);
        let f: Vec<f64> = scales.iter().map(|&n| 2.0 * (n as f64).powf(0.9)).collect();
        let curve = FluctuationCurve {
            scales: scales.clone(),
            f,
        };
        let local = local_exponents(&curve, 8).unwrap();
        for (a, e) in local.alpha_local.iter().zip(&local.alpha_err) {
            assert_relative_eq!(*a, 0.9, epsilon = 1e-9);
            assert!(*e < 1e-9);
        }
    }

    #[test]
    fn exact_linear_curve() {
        let scales: Vec<usize> = log_scale_grid(4, 720, 60);
        let f: Vec<f64> = scales.iter().map(|&n| n as f64).collect();
        let curve = FluctuationCurve { scales, f };
        let local = local_exponents(&curve, 8).unwrap();
        for a in &local.alpha_local {
            assert_relative_eq!(*a, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn piecewise_power_law_detected_per_bin() {
        let scales: Vec<usize> = log_scale_grid(4, 720, 120);
        let knee = 24.0;
        let f: Vec<f64> = scales
            .iter()
            .map(|&n| {
                let n = n as f64;
                if n <= knee {
                    n.powf(1.5)
                } else {
                    // continuous at the knee
                    knee.powf(1.5 - 0.8) * n.powf(0.8)
                }
            })
            .collect();
        let curve = FluctuationCurve { scales, f };
        let local = local_exponents(&curve, 8).unwrap();
        for (c, a) in local.bin_centers.iter().zip(&local.alpha_local) {
            if *c < 18.0 {
                assert!((a - 1.5).abs() < 0.02, "center {c}: alpha {a}");
            } else if *c > 34.0 {
                assert!((a - 0.8).abs() < 0.02, "center {c}: alpha {a}");
            }
        }
    }

    #[test]
    fn summary_basics() {
        let curve = ScaleExponentCurve {
            bin_centers: vec![10.0, 100.0],
            alpha_local: vec![0.8, 1.0],
            alpha_err: vec![0.01, 0.02],
        };
        let s = summary_exponents(&curve).unwrap();
        assert_relative_eq!(s.alpha_mean, 0.9);
        assert_relative_eq!(s.alpha_max, 1.0);
        assert_relative_eq!(s.alpha_max_err, 0.02);
    }

    #[test]
    fn summary_constant_bins() {
        let curve = ScaleExponentCurve {
            bin_centers: vec![10.0, 30.0, 100.0],
            alpha_local: vec![1.17, 1.17, 1.17],
            alpha_err: vec![0.0, 0.0, 0.0],
        };
        let s = summary_exponents(&curve).unwrap();
        assert_relative_eq!(s.alpha_mean, 1.17);
        assert_relative_eq!(s.alpha_mean_err, 0.0);
    }

    #[test]
    fn high_hurst_fbm_summary_lands_near_h_plus_one() {
        let spec = GeneratorSpec {
            kind: ProcessKind::Fbm {
                hurst: 0.9,
                sigma: 1.0,
            },
            seed: 3,
            length: 1 << 14,
        };
        let s = gen(&spec).unwrap();
        let scales = log_scale_grid(16, s.len() / 8, 40);
        let (_, _, summary) = analyze(&s, &scales, 8).unwrap();
        assert!(
            (summary.alpha_mean - 1.9).abs() < 0.1,
            "alpha_mean {}",
            summary.alpha_mean
        );
    }
}
