//! The `analyze` pipeline: ingestion, peak split, four analyses per series,
//! artifact CSVs, and report assembly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use priceflux_core::PriceSeries;
use priceflux_core::{dfa, increments, pareto, spectral};

use crate::config::AnalysisConfig;
use crate::report::{ParetoBlock, Report, ScaleBlock, SeriesBlock, SpectralBlock, SCHEMA_VERSION};

pub fn cmd_analyze(cfg: &AnalysisConfig) -> Result<Report> {
    let schema = cfg.csv.to_schema();
    let raw = priceflux_core::timeseries::load_csv(&cfg.input, &schema).with_context(|| {
        format!(
            "[timeseries-core] {}: ingestion failed (hint: check column names and delimiter in [csv])",
            cfg.input.display()
        )
    })?;
    let cleaned = raw.clean(cfg.gap_policy).with_context(|| {
        format!(
            "[timeseries-core] {}: gap handling failed (hint: switch gap_policy to \
             linear-interpolate or carry-forward, or repair the input)",
            raw.market_id
        )
    })?;

    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;

    let mut jobs: Vec<(String, PriceSeries)> = vec![("all-hours".into(), cleaned.clone())];
    if cfg.peak.enabled {
        let cal = cfg.peak.to_calendar()?;
        let (on, off) = cleaned.split_peak(&cal);
        jobs.push(("on-peak".into(), on));
        jobs.push(("off-peak".into(), off));
    }

    let mut series = Vec::new();
    for (label, s) in &jobs {
        series.push(analyze_one(label, s, cfg)?);
    }

    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        generated_at: chrono::Utc::now().to_rfc3339(),
        market_id: cleaned.market_id.clone(),
        config: cfg.clone(),
        series,
    };
    report.save(&cfg.output_dir.join("report.json"))?;
    Ok(report)
}

fn analyze_one(label: &str, series: &PriceSeries, cfg: &AnalysisConfig) -> Result<SeriesBlock> {
    let out = &cfg.output_dir;

    // DFA
    let hi = cfg.dfa.scale_max.min(series.len() / 4).max(cfg.dfa.scale_min + 1);
    let scales = dfa::log_scale_grid(cfg.dfa.scale_min, hi, cfg.dfa.scale_count);
    let (curve, local, summary) = dfa::analyze(series, &scales, cfg.dfa.bins_per_decade)
        .with_context(|| {
            format!(
                "[dfa] {label}: fluctuation analysis failed (hint: the series may be too \
                 short for the configured scale grid; lower [dfa] scale_max)"
            )
        })?;
    let mut text = String::from("n,f\n");
    for (n, f) in curve.scales.iter().zip(&curve.f) {
        let _ = writeln!(text, "{n},{f:.12e}");
    }
    write_artifact(out, label, "fluctuation", &text)?;
    text = String::from("bin_center,alpha,alpha_err\n");
    for ((c, a), e) in local
        .bin_centers
        .iter()
        .zip(&local.alpha_local)
        .zip(&local.alpha_err)
    {
        let _ = writeln!(text, "{c:.6},{a:.6},{e:.6}");
    }
    write_artifact(out, label, "alpha", &text)?;

    // Spectrum
    let window = if cfg.spectral.hann_window {
        spectral::Window::Hann
    } else {
        spectral::Window::Rectangular
    };
    let sp = spectral::periodogram_windowed(series, window).with_context(|| {
        format!("[spectral] {label}: periodogram failed (hint: at least 64 samples are needed)")
    })?;
    let default_range = spectral::default_fit_range(&sp);
    let fit_range = (
        cfg.spectral.fit_min_freq.unwrap_or(default_range.0),
        cfg.spectral.fit_max_freq.unwrap_or(default_range.1),
    );
    let beta = spectral::spectral_exponent(&sp, fit_range, &cfg.spectral.excluded_periods)
        .with_context(|| {
            format!(
                "[spectral] {label}: exponent fit failed (hint: widen the fit range or \
                 drop exclusions in [spectral])"
            )
        })?;
    let cycles = spectral::detect_cycles(&sp, &cfg.spectral.cycle_periods).with_context(|| {
        format!(
            "[spectral] {label}: cycle detection failed (hint: candidate periods must \
             sit inside the resolved frequency band)"
        )
    })?;
    // range-choice sensitivity, reported next to the OLS error
    let split = (fit_range.0 * fit_range.1).sqrt();
    let lo_half = spectral::spectral_exponent(&sp, (fit_range.0, split), &cfg.spectral.excluded_periods);
    let hi_half = spectral::spectral_exponent(&sp, (split, fit_range.1), &cfg.spectral.excluded_periods);
    let alpha_theor_spread = match (lo_half, hi_half) {
        (Ok(a), Ok(b)) => Some((a.beta - b.beta).abs() / 4.0),
        _ => None,
    };
    text = String::from("frequency,power\n");
    for (f, p) in sp.frequencies.iter().zip(&sp.power) {
        let _ = writeln!(text, "{f:.10e},{p:.10e}");
    }
    write_artifact(out, label, "spectrum", &text)?;

    // Pareto tails
    let (lower, upper) = pareto::two_range_report(
        series,
        (cfg.pareto.lower_range, cfg.pareto.upper_range),
        cfg.pareto.bin_width,
    )
    .with_context(|| {
        format!(
            "[pareto] {label}: tail fit setup failed (hint: [pareto] ranges must be \
             ascending and non-overlapping)"
        )
    })?;
    let full_range = (cfg.pareto.lower_range.0, cfg.pareto.upper_range.1);
    if let Ok(hist) = pareto::histogram(series, cfg.pareto.bin_width, full_range) {
        text = String::from("bin_center,density\n");
        for i in 0..hist.density.len() {
            let _ = writeln!(text, "{:.6},{:.10e}", hist.bin_center(i), hist.density[i]);
        }
        write_artifact(out, label, "histogram", &text)?;
    }
    let pareto_block = ParetoBlock {
        lower_class: lower.as_ref().map(pareto::classify_moments),
        upper_class: upper.as_ref().map(pareto::classify_moments),
        lower,
        upper,
    };

    // Multiscale increments
    let mut scale_blocks = Vec::new();
    for &n in &cfg.increments.scales {
        if n == 0 || n > series.len() / 4 {
            continue;
        }
        let incs = match increments::multiscale_increments(series, n) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let pairs = match increments::lag_pairs(&incs) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let epsilon = cfg
            .increments
            .epsilon
            .unwrap_or_else(|| increments::default_epsilon(&incs));
        let scenarios = increments::classify_scenarios(&pairs, epsilon).with_context(|| {
            format!("[increments] {label}: scenario classification failed at n={n}")
        })?;
        let binned = increments::binned_regression(&pairs, cfg.increments.bin_count).ok();

        text = String::from("prev,curr\n");
        for (p, c) in &pairs.pairs {
            let _ = writeln!(text, "{p:.10e},{c:.10e}");
        }
        write_artifact(out, label, &format!("pairs_n{n}"), &text)?;
        if let Some(b) = &binned {
            text = String::from("bin_center,mean_prev,mean_curr,count\n");
            for i in 0..b.prev_bin_centers.len() {
                let _ = writeln!(
                    text,
                    "{:.10e},{:.10e},{:.10e},{}",
                    b.prev_bin_centers[i], b.mean_prev[i], b.mean_curr[i], b.count[i]
                );
            }
            write_artifact(out, label, &format!("binned_n{n}"), &text)?;
        }
        scale_blocks.push(ScaleBlock {
            scale_n: n,
            pair_count: pairs.pairs.len(),
            q4_slope: binned.as_ref().and_then(|b| b.q4_slope),
            q1_slope: binned.as_ref().and_then(|b| b.q1_slope),
            scenarios,
        });
    }

    Ok(SeriesBlock {
        label: label.to_string(),
        samples: series.len(),
        dfa: summary,
        spectral: SpectralBlock {
            beta,
            alpha_theor_spread,
            cycles,
        },
        pareto: pareto_block,
        increments: scale_blocks,
    })
}

fn write_artifact(dir: &Path, label: &str, analysis: &str, text: &str) -> Result<()> {
    let path = dir.join(format!("{label}_{analysis}.csv"));
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}
