//! Periodogram estimation, spectral exponent fitting and cycle detection.
//!
//! The spectrum is one-sided and scaled so that the power integrated over
//! frequency equals the variance of the mean-removed input. Exponent fitting
//! works on log-binned averages because raw periodogram ordinates are
//! exponentially distributed.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::fit::{linear_fit, log_bin_average};
use crate::{CoreError, PriceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Cycles per hour, positive frequencies only.
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    /// Record length T in hours after truncation to a power of two.
    pub record_length: f64,
    /// Samples actually transformed.
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub beta: f64,
    pub beta_err: f64,
    pub fit_range: (f64, f64),
    pub alpha_theor: f64,
    pub alpha_theor_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub period_hours: f64,
    pub peak_power: f64,
    pub background_power: f64,
    pub significance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub entries: Vec<CycleEntry>,
}

pub fn periodogram(series: &PriceSeries) -> Result<Spectrum, CoreError> {
    periodogram_windowed(series, Window::Rectangular)
}

/// One-sided power spectrum. Input longer than a power of two is truncated
/// to the largest power of two that fits.
pub fn periodogram_windowed(series: &PriceSeries, window: Window) -> Result<Spectrum, CoreError> {
    let total = series.len();
    if total < 64 {
        return Err(CoreError::SeriesTooShort {
            len: total,
            min: 64,
        });
    }
    let n = if total.is_power_of_two() {
        total
    } else {
        total.next_power_of_two() / 2
    };
    let dt = series.cadence_hours as f64;
    let data = &series.values[..n];
    let mean = data.iter().sum::<f64>() / n as f64;

    let mut buf: Vec<Complex<f64>> = match window {
        Window::Rectangular => data
            .iter()
            .map(|x| Complex::new(x - mean, 0.0))
            .collect(),
        Window::Hann => {
            let norm = (3.0f64 / 8.0).sqrt(); // RMS of the Hann taper
            data.iter()
                .enumerate()
                .map(|(t, x)| {
                    let w = 0.5
                        * (1.0
                            - (2.0 * std::f64::consts::PI * t as f64 / n as f64).cos());
                    Complex::new((x - mean) * w / norm, 0.0)
                })
                .collect()
        }
    };
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let mut frequencies = Vec::with_capacity(half);
    let mut power = Vec::with_capacity(half);
    for k in 1..=half {
        let factor = if k == half { 1.0 } else { 2.0 };
        frequencies.push(k as f64 / (n as f64 * dt));
        power.push(factor * dt * buf[k].norm_sqr() / n as f64);
    }
    Ok(Spectrum {
        frequencies,
        power,
        record_length: n as f64 * dt,
        samples_used: n,
    })
}

/// Sum of S(f) * df; equals the variance of the transformed segment for the
/// rectangular window.
pub fn integrated_power(spec: &Spectrum) -> f64 {
    let df = 1.0 / spec.record_length;
    spec.power.iter().sum::<f64>() * df
}

/// Fit S(f) ~ f^-beta over `fit_range`, excluding narrow bands around each
/// excluded period and its first three harmonics.
pub fn spectral_exponent(
    spec: &Spectrum,
    fit_range: (f64, f64),
    excluded_periods: &[f64],
) -> Result<BetaEstimate, CoreError> {
    let (f_lo, f_hi) = fit_range;
    if f_lo <= 0.0 || f_hi <= f_lo {
        return Err(CoreError::InvalidParameter(format!(
            "bad fit range ({f_lo}, {f_hi})"
        )));
    }
    let excluded = |f: f64| {
        excluded_periods.iter().any(|&p| {
            (1..=4).any(|m| {
                let f0 = m as f64 / p;
                (f - f0).abs() <= 0.05 * f0
            })
        })
    };
    let mut fs = Vec::new();
    let mut ps = Vec::new();
    for (&f, &s) in spec.frequencies.iter().zip(&spec.power) {
        if f >= f_lo && f <= f_hi && s > 0.0 && !excluded(f) {
            fs.push(f);
            ps.push(s);
        }
    }
    let binned = log_bin_average(&fs, &ps, 8);
    if binned.len() < 10 {
        return Err(CoreError::EmptyFitRange);
    }
    let lx: Vec<f64> = binned.iter().map(|(f, _)| f.log10()).collect();
    let ly: Vec<f64> = binned.iter().map(|(_, s)| s.log10()).collect();
    let fit = linear_fit(&lx, &ly)?;
    let beta = -fit.slope;
    let beta_err = fit.slope_err;
    Ok(BetaEstimate {
        beta,
        beta_err,
        fit_range,
        alpha_theor: (beta + 1.0) / 2.0,
        alpha_theor_err: beta_err / 2.0,
    })
}

/// Default frequency range for the exponent fit: from the record frequency
/// up to a quarter of the Nyquist frequency, where the discrete-time spectrum
/// still tracks the continuous power law.
pub fn default_fit_range(spec: &Spectrum) -> (f64, f64) {
    let nyquist = *spec.frequencies.last().unwrap();
    (1.0 / spec.record_length, nyquist / 4.0)
}

/// Peak-to-background significance for each candidate period. The peak is
/// the maximum power within 2% of the candidate frequency; the background is
/// the median power in the surrounding 20% band with the peak window removed.
pub fn detect_cycles(spec: &Spectrum, candidate_periods: &[f64]) -> Result<CycleReport, CoreError> {
    let t = spec.record_length;
    let mut entries = Vec::with_capacity(candidate_periods.len());
    for &p in candidate_periods {
        if !(p > 2.0 && p < t / 2.0) {
            return Err(CoreError::PeriodOutOfRange {
                period: p,
                max: t / 2.0,
            });
        }
        let f0 = 1.0 / p;
        let in_peak = |f: f64| (f - f0).abs() <= 0.02 * f0;
        let in_band = |f: f64| f >= f0 / 1.2 && f <= f0 * 1.2;

        let mut peak = f64::NEG_INFINITY;
        let mut background = Vec::new();
        let mut nearest = (f64::INFINITY, 0.0);
        for (&f, &s) in spec.frequencies.iter().zip(&spec.power) {
            if in_peak(f) {
                peak = peak.max(s);
            } else if in_band(f) {
                background.push(s);
            }
            let d = (f - f0).abs();
            if d < nearest.0 {
                nearest = (d, s);
            }
        }
        if !peak.is_finite() {
            // window narrower than the frequency resolution
            peak = nearest.1;
        }
        background.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bg = if background.is_empty() {
            peak
        } else {
            background[background.len() / 2]
        };
        let significance = if bg > 0.0 { peak / bg } else { 0.0 };
        entries.push(CycleEntry {
            period_hours: p,
            peak_power: peak,
            background_power: bg,
            significance,
        });
    }
    Ok(CycleReport { entries })
}
