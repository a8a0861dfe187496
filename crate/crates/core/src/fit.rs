//! Ordinary least-squares line fitting shared by the estimator modules.

use crate::CoreError;

/// Result of fitting y = slope * x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when the fit is exact or has no
    /// residual degrees of freedom.
    pub slope_err: f64,
}

/// OLS fit of y against x. Requires at least two distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit, CoreError> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Err(CoreError::DegenerateFit(format!(
            "{n} point(s), need at least 2"
        )));
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (y[i] - mean_y);
    }
    if sxx == 0.0 {
        return Err(CoreError::DegenerateFit(
            "all abscissae identical".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let slope_err = if n > 2 {
        let ssr: f64 = (0..n)
            .map(|i| {
                let r = y[i] - (slope * x[i] + intercept);
                r * r
            })
            .sum();
        (ssr.max(0.0) / ((nf - 2.0) * sxx)).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_err,
    })
}

/// Average (x, y) samples in logarithmically spaced x-bins and return the
/// geometric bin center together with the mean y per occupied bin.
pub fn log_bin_average(x: &[f64], y: &[f64], bins_per_decade: usize) -> Vec<(f64, f64)> {
    assert_eq!(x.len(), y.len());
    assert!(bins_per_decade >= 1);
    let valid: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&xi, _)| xi > 0.0)
        .map(|(&xi, &yi)| (xi, yi))
        .collect();
    if valid.is_empty() {
        return Vec::new();
    }
    let width = 1.0 / bins_per_decade as f64;
    let log_min = valid
        .iter()
        .map(|(xi, _)| xi.log10())
        .fold(f64::INFINITY, f64::min);
    let log_max = valid
        .iter()
        .map(|(xi, _)| xi.log10())
        .fold(f64::NEG_INFINITY, f64::max);
    let nbins = (((log_max - log_min) / width).floor() as usize) + 1;
    let mut sums = vec![(0.0f64, 0usize); nbins];
    for (xi, yi) in &valid {
        let b = (((xi.log10() - log_min) / width) as usize).min(nbins - 1);
        sums[b].0 += yi;
        sums[b].1 += 1;
    }
    sums.iter()
        .enumerate()
        .filter(|(_, (_, c))| *c > 0)
        .map(|(b, (s, c))| {
            let lo = log_min + b as f64 * width;
            let center = 10f64.powf(lo + width / 2.0);
            (center, s / *c as f64)
        })
        .collect()
}
