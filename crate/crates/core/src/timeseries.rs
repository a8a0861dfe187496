//! Ingestion, cleaning and partitioning of uniformly sampled hourly price
//! series, plus the temporal aggregation used by the downstream analyses.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Longest gap (in samples) the interpolating policies will fill. Longer
/// outages are an error regardless of policy.
pub const MAX_FILL_GAP_HOURS: usize = 6;

/// Uniformly sampled price series. Timestamps are implicit:
/// `start_time + i * cadence_hours`. Gaps from ingestion are stored as NaN
/// samples and tracked in `gaps` until [`clean`](PriceSeries::clean) runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub market_id: String,
    pub start_time: NaiveDateTime,
    pub values: Vec<f64>,
    pub cadence_hours: u32,
    /// Indices of missing samples awaiting `clean`.
    pub gaps: Vec<usize>,
}

impl PriceSeries {
    pub fn new(
        market_id: impl Into<String>,
        start_time: NaiveDateTime,
        values: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if values.len() < 2 {
            return Err(CoreError::SeriesTooShort {
                len: values.len(),
                min: 2,
            });
        }
        let gaps = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_finite())
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            market_id: market_id.into(),
            start_time,
            values,
            cadence_hours: 1,
            gaps,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.start_time + Duration::hours(index as i64 * self.cadence_hours as i64)
    }

    /// Fill any recorded gaps according to `policy`.
    ///
    /// Interpolated values are convex combinations of the bracketing samples;
    /// `CarryForward` repeats the last real sample. Gaps touching either
    /// boundary, and gaps longer than [`MAX_FILL_GAP_HOURS`], are errors.
    pub fn clean(&self, policy: GapPolicy) -> Result<PriceSeries, CoreError> {
        if self.gaps.is_empty() {
            return Ok(self.clone());
        }
        if policy == GapPolicy::Fail {
            return Err(CoreError::GapsPresent {
                count: self.gaps.len(),
            });
        }
        let mut values = self.values.clone();
        let n = values.len();
        let mut i = 0;
        while i < n {
            if values[i].is_finite() {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < n && !values[i].is_finite() {
                i += 1;
            }
            let run_len = i - run_start;
            if run_start == 0 || i == n {
                return Err(CoreError::BoundaryGap);
            }
            if run_len > MAX_FILL_GAP_HOURS {
                return Err(CoreError::GapTooLong {
                    hours: run_len,
                    max: MAX_FILL_GAP_HOURS,
                });
            }
            let left = values[run_start - 1];
            let right = values[i];
            for (j, slot) in (0..run_len).zip(run_start..i) {
                values[slot] = match policy {
                    GapPolicy::LinearInterpolate => {
                        let w = (j + 1) as f64 / (run_len + 1) as f64;
                        left * (1.0 - w) + right * w
                    }
                    GapPolicy::CarryForward => left,
                    GapPolicy::Fail => unreachable!(),
                };
            }
        }
        Ok(PriceSeries {
            market_id: self.market_id.clone(),
            start_time: self.start_time,
            values,
            cadence_hours: self.cadence_hours,
            gaps: Vec::new(),
        })
    }

    /// Partition into on-peak and off-peak subseries. Each output is
    /// re-indexed as a contiguous uniformly sampled series starting at the
    /// timestamp of its first retained sample.
    pub fn split_peak(&self, cal: &PeakCalendar) -> (PriceSeries, PriceSeries) {
        let mut on = Vec::new();
        let mut off = Vec::new();
        let mut on_start = None;
        let mut off_start = None;
        for i in 0..self.len() {
            let ts = self.timestamp(i) + Duration::hours(cal.timezone_offset as i64);
            if cal.is_on_peak(ts) {
                on_start.get_or_insert(self.timestamp(i));
                on.push(self.values[i]);
            } else {
                off_start.get_or_insert(self.timestamp(i));
                off.push(self.values[i]);
            }
        }
        let make = |label: &str, start: Option<NaiveDateTime>, values: Vec<f64>| PriceSeries {
            market_id: format!("{}:{label}", self.market_id),
            start_time: start.unwrap_or(self.start_time),
            values,
            cadence_hours: self.cadence_hours,
            gaps: Vec::new(),
        };
        (
            make("on-peak", on_start, on),
            make("off-peak", off_start, off),
        )
    }

    /// Mean prices over non-overlapping bins of `scale_n` samples. Trailing
    /// remainder samples are discarded.
    pub fn aggregate(&self, scale_n: usize) -> Result<AggregatedSeries, CoreError> {
        let n = self.len();
        if scale_n < 1 || scale_n > n / 2 {
            return Err(CoreError::ScaleOutOfRange {
                scale: scale_n,
                lo: 1,
                hi: n / 2,
            });
        }
        let bins = n / scale_n;
        let bin_means = (0..bins)
            .map(|m| {
                let slice = &self.values[m * scale_n..(m + 1) * scale_n];
                slice.iter().sum::<f64>() / scale_n as f64
            })
            .collect();
        Ok(AggregatedSeries {
            market_id: self.market_id.clone(),
            scale_n,
            bin_means,
        })
    }

    /// Write in the same CSV schema `load_csv` reads (timestamp, price).
    pub fn write_csv(&self, path: &Path) -> Result<(), CoreError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CoreError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        let io_err = |e: csv::Error| CoreError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        };
        w.write_record(["timestamp", "price"]).map_err(io_err)?;
        for i in 0..self.len() {
            w.write_record([
                self.timestamp(i).format("%Y-%m-%dT%H:%M:%S").to_string(),
                format!("{:.10}", self.values[i]),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| CoreError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    LinearInterpolate,
    CarryForward,
    Fail,
}

/// On-peak hour definition. Hours are hour-of-day at the start of the
/// delivery interval; weekdays use Monday = 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakCalendar {
    pub on_peak_hours: BTreeSet<u8>,
    pub on_peak_weekdays: BTreeSet<u8>,
    pub timezone_offset: i8,
}

impl PeakCalendar {
    pub fn new(
        on_peak_hours: BTreeSet<u8>,
        on_peak_weekdays: BTreeSet<u8>,
        timezone_offset: i8,
    ) -> Result<Self, CoreError> {
        if on_peak_hours.is_empty() {
            return Err(CoreError::InvalidCalendar("empty on-peak hour set".into()));
        }
        if on_peak_hours.len() >= 24 || on_peak_hours.iter().any(|&h| h > 23) {
            return Err(CoreError::InvalidCalendar(
                "on-peak hours must be a strict subset of 0..=23".into(),
            ));
        }
        if on_peak_weekdays.iter().any(|&d| d > 6) {
            return Err(CoreError::InvalidCalendar(
                "weekday indices must be 0..=6".into(),
            ));
        }
        Ok(Self {
            on_peak_hours,
            on_peak_weekdays,
            timezone_offset,
        })
    }

    /// Hours beginning 07:00 through 22:00 (hour-ending 8 through 23),
    /// Monday to Friday, no timezone shift.
    pub fn north_american_default() -> Self {
        Self {
            on_peak_hours: (7..=22).collect(),
            on_peak_weekdays: (0..=4).collect(),
            timezone_offset: 0,
        }
    }

    fn is_on_peak(&self, ts: NaiveDateTime) -> bool {
        let weekday = ts.weekday().num_days_from_monday() as u8;
        self.on_peak_hours.contains(&(ts.hour() as u8))
            && self.on_peak_weekdays.contains(&weekday)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedSeries {
    pub market_id: String,
    pub scale_n: usize,
    pub bin_means: Vec<f64>,
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub timestamp_column: String,
    pub price_column: String,
    pub delimiter: char,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp_column: "timestamp".into(),
            price_column: "price".into(),
            delimiter: ',',
        }
    }
}

fn parse_timestamp(raw: &str, row: usize) -> Result<NaiveDateTime, CoreError> {
    if let Ok(epoch) = raw.parse::<i64>() {
        return DateTime::<Utc>::from_timestamp(epoch, 0)
            .map(|dt| dt.naive_utc())
            .ok_or_else(|| CoreError::UnparsableRow {
                row,
                reason: format!("epoch timestamp {raw} out of range"),
            });
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(dt);
        }
    }
    Err(CoreError::UnparsableRow {
        row,
        reason: format!("unrecognized timestamp {raw:?}"),
    })
}

/// Load an hourly price series from CSV. Rows are sorted by timestamp,
/// duplicates are rejected, and gaps become NaN samples recorded for `clean`.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<PriceSeries, CoreError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .from_path(path)
        .map_err(|e| CoreError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CoreError::UnparsableRow {
            row: 0,
            reason: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CoreError::UnparsableRow {
                row: 0,
                reason: format!("missing column {name:?}"),
            })
    };
    let ts_idx = col(&schema.timestamp_column)?;
    let price_idx = col(&schema.price_column)?;

    let mut rows: Vec<(NaiveDateTime, f64, usize)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header
        let record = record.map_err(|e| CoreError::UnparsableRow {
            row,
            reason: e.to_string(),
        })?;
        let ts = parse_timestamp(record.get(ts_idx).unwrap_or("").trim(), row)?;
        let price: f64 = record
            .get(price_idx)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| CoreError::UnparsableRow {
                row,
                reason: format!("unparsable price {:?}", record.get(price_idx)),
            })?;
        rows.push((ts, price, row));
    }
    if rows.len() < 2 {
        return Err(CoreError::SeriesTooShort {
            len: rows.len(),
            min: 2,
        });
    }
    rows.sort_by_key(|(ts, _, _)| *ts);

    let start = rows[0].0;
    let mut values = Vec::with_capacity(rows.len());
    let mut expected = start;
    for (ts, price, row) in &rows {
        if *ts == expected {
            values.push(*price);
            expected += Duration::hours(1);
            continue;
        }
        if *ts < expected {
            return Err(CoreError::DuplicateTimestamp { row: *row });
        }
        let gap_hours = (*ts - expected).num_hours();
        if (*ts - expected).num_minutes() % 60 != 0 {
            return Err(CoreError::NonHourlyCadence {
                row: *row,
                hours: (*ts - expected).num_minutes() as f64 / 60.0,
            });
        }
        for _ in 0..gap_hours {
            values.push(f64::NAN);
        }
        values.push(*price);
        expected = *ts + Duration::hours(1);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "series".into());
    PriceSeries::new(stem, start, values)
}
