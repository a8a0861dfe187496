//! Analysis configuration: TOML file with full defaults, overridable from
//! the command line.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use priceflux_core::timeseries::{CsvSchema, PeakCalendar};
use priceflux_core::GapPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Input CSV path.
    pub input: PathBuf,
    /// Directory receiving report.json and the CSV artifacts.
    pub output_dir: PathBuf,
    pub gap_policy: GapPolicy,
    pub csv: CsvConfig,
    pub peak: PeakConfig,
    pub dfa: DfaConfig,
    pub spectral: SpectralConfig,
    pub pareto: ParetoConfig,
    pub increments: IncrementsConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::from("prices.csv"),
            output_dir: PathBuf::from("out"),
            gap_policy: GapPolicy::LinearInterpolate,
            csv: CsvConfig::default(),
            peak: PeakConfig::default(),
            dfa: DfaConfig::default(),
            spectral: SpectralConfig::default(),
            pareto: ParetoConfig::default(),
            increments: IncrementsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvConfig {
    pub timestamp_column: String,
    pub price_column: String,
    pub delimiter: char,
}

impl Default for CsvConfig {
    fn default() -> Self {
        let s = CsvSchema::default();
        Self {
            timestamp_column: s.timestamp_column,
            price_column: s.price_column,
            delimiter: s.delimiter,
        }
    }
}

impl CsvConfig {
    pub fn to_schema(&self) -> CsvSchema {
        CsvSchema {
            timestamp_column: self.timestamp_column.clone(),
            price_column: self.price_column.clone(),
            delimiter: self.delimiter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakConfig {
    /// When false the report contains the all-hours block only.
    pub enabled: bool,
    pub on_peak_hours: Vec<u8>,
    /// Monday = 0.
    pub on_peak_weekdays: Vec<u8>,
    pub timezone_offset: i8,
}

impl Default for PeakConfig {
    fn default() -> Self {
        let cal = PeakCalendar::north_american_default();
        Self {
            enabled: true,
            on_peak_hours: cal.on_peak_hours.into_iter().collect(),
            on_peak_weekdays: cal.on_peak_weekdays.into_iter().collect(),
            timezone_offset: cal.timezone_offset,
        }
    }
}

impl PeakConfig {
    pub fn to_calendar(&self) -> Result<PeakCalendar> {
        let hours: BTreeSet<u8> = self.on_peak_hours.iter().copied().collect();
        let days: BTreeSet<u8> = self.on_peak_weekdays.iter().copied().collect();
        PeakCalendar::new(hours, days, self.timezone_offset)
            .context("[timeseries-core] invalid peak calendar")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfaConfig {
    pub scale_min: usize,
    pub scale_max: usize,
    pub scale_count: usize,
    pub bins_per_decade: usize,
}

impl Default for DfaConfig {
    fn default() -> Self {
        Self {
            scale_min: 4,
            scale_max: 720,
            scale_count: 60,
            bins_per_decade: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    /// Optional explicit fit range in cycles/hour; otherwise from the record
    /// frequency up to a quarter of Nyquist.
    pub fit_min_freq: Option<f64>,
    pub fit_max_freq: Option<f64>,
    /// Periods (hours) excluded from the exponent fit together with their
    /// first three harmonics.
    pub excluded_periods: Vec<f64>,
    pub cycle_periods: Vec<f64>,
    pub hann_window: bool,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            fit_min_freq: None,
            fit_max_freq: None,
            excluded_periods: vec![24.0, 168.0],
            cycle_periods: vec![24.0, 168.0],
            hann_window: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParetoConfig {
    pub bin_width: f64,
    pub lower_range: (f64, f64),
    pub upper_range: (f64, f64),
}

impl Default for ParetoConfig {
    fn default() -> Self {
        Self {
            bin_width: 5.0,
            lower_range: (1.0, 200.0),
            upper_range: (200.0, 1000.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncrementsConfig {
    pub scales: Vec<usize>,
    pub bin_count: usize,
    /// Fixed stability threshold; when absent, half the median absolute
    /// deviation of the increments at each scale is used.
    pub epsilon: Option<f64>,
}

impl Default for IncrementsConfig {
    fn default() -> Self {
        Self {
            scales: vec![1, 12, 24, 168, 720],
            bin_count: 40,
            epsilon: None,
        }
    }
}

impl AnalysisConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}
