//! Versioned JSON report and the side-by-side comparison tables.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use priceflux_core::dfa::DfaSummary;
use priceflux_core::increments::{QuadrantSlope, ScenarioCounts};
use priceflux_core::pareto::{MomentStabilityClass, ParetoEstimate};
use priceflux_core::spectral::{BetaEstimate, CycleReport};

use crate::config::AnalysisConfig;

/// Bump on any change to the report structure.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    /// Timestamp metadata only; excluded from reproducibility comparisons.
    pub generated_at: String,
    pub market_id: String,
    pub config: AnalysisConfig,
    pub series: Vec<SeriesBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBlock {
    pub label: String,
    pub samples: usize,
    pub dfa: DfaSummary,
    pub spectral: SpectralBlock,
    pub pareto: ParetoBlock,
    pub increments: Vec<ScaleBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBlock {
    pub beta: BetaEstimate,
    /// Half-range sensitivity of alpha_theor to the fit-range choice:
    /// |beta(upper half) - beta(lower half)| / 4. Reported alongside the OLS
    /// error because published spreads for this quantity are much wider than
    /// per-fit errors.
    pub alpha_theor_spread: Option<f64>,
    pub cycles: CycleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoBlock {
    pub lower: Option<ParetoEstimate>,
    pub lower_class: Option<MomentStabilityClass>,
    pub upper: Option<ParetoEstimate>,
    pub upper_class: Option<MomentStabilityClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleBlock {
    pub scale_n: usize,
    pub pair_count: usize,
    pub q4_slope: Option<QuadrantSlope>,
    pub q1_slope: Option<QuadrantSlope>,
    pub scenarios: ScenarioCounts,
}

impl Report {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read report {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("{} is not a valid report", path.display()))
    }
}

/// One comparison row: a label and one cell per report.
#[derive(Debug)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<String>)>,
}

fn cell_f64(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "-".into(),
    }
}

fn class_name(c: MomentStabilityClass) -> &'static str {
    match c {
        MomentStabilityClass::NoMean => "no-mean",
        MomentStabilityClass::MeanOnly => "mean-only",
        MomentStabilityClass::MeanAndVariance => "mean-and-variance",
    }
}

/// Build the table; row labels follow the first report, later reports fill
/// matching labels and `-` elsewhere, so all columns share one row set.
pub fn compare(reports: &[Report]) -> Result<ComparisonTable> {
    let first = reports.first().context("need at least one report")?;
    for r in reports {
        if r.schema_version != first.schema_version {
            bail!(
                "schema version mismatch: {} has v{}, expected v{}",
                r.market_id,
                r.schema_version,
                first.schema_version
            );
        }
    }

    let mut labels: Vec<String> = Vec::new();
    for r in reports {
        for b in &r.series {
            if !labels.contains(&b.label) {
                labels.push(b.label.clone());
            }
        }
    }

    let columns: Vec<String> = reports.iter().map(|r| r.market_id.clone()).collect();
    let mut rows: Vec<(String, Vec<String>)> = Vec::new();
    let block = |r: &Report, label: &str| -> Option<SeriesBlock> {
        r.series.iter().find(|b| b.label == label).cloned()
    };

    for label in &labels {
        let mut push = |name: &str, f: &dyn Fn(&SeriesBlock) -> String| {
            let cells = reports
                .iter()
                .map(|r| block(r, label).map(|b| f(&b)).unwrap_or_else(|| "-".into()))
                .collect();
            rows.push((format!("{label}: {name}"), cells));
        };
        push("samples", &|b| b.samples.to_string());
        push("alpha_mean", &|b| {
            format!("{:.3} +/- {:.3}", b.dfa.alpha_mean, b.dfa.alpha_mean_err)
        });
        push("alpha_max", &|b| {
            format!("{:.3} +/- {:.3}", b.dfa.alpha_max, b.dfa.alpha_max_err)
        });
        push("beta", &|b| {
            format!(
                "{:.3} +/- {:.3}",
                b.spectral.beta.beta, b.spectral.beta.beta_err
            )
        });
        push("alpha_theor", &|b| {
            format!(
                "{:.3} (spread {})",
                b.spectral.beta.alpha_theor,
                cell_f64(b.spectral.alpha_theor_spread)
            )
        });
        for (i, period) in first
            .series
            .first()
            .map(|b| {
                b.spectral
                    .cycles
                    .entries
                    .iter()
                    .map(|e| e.period_hours)
                    .collect::<Vec<_>>()
            })
            .unwrap_or_default()
            .into_iter()
            .enumerate()
        {
            push(&format!("cycle_{period}h_significance"), &|b| {
                b.spectral
                    .cycles
                    .entries
                    .get(i)
                    .map(|e| format!("{:.1}", e.significance))
                    .unwrap_or_else(|| "-".into())
            });
        }
        push("gamma_lower", &|b| {
            cell_f64(b.pareto.lower.as_ref().map(|e| e.gamma))
        });
        push("gamma_lower_class", &|b| {
            b.pareto
                .lower_class
                .map(|c| class_name(c).to_string())
                .unwrap_or_else(|| "-".into())
        });
        push("gamma_upper", &|b| {
            cell_f64(b.pareto.upper.as_ref().map(|e| e.gamma))
        });
        push("gamma_upper_class", &|b| {
            b.pareto
                .upper_class
                .map(|c| class_name(c).to_string())
                .unwrap_or_else(|| "-".into())
        });
        let scale_set: Vec<usize> = first
            .series
            .first()
            .map(|b| b.increments.iter().map(|s| s.scale_n).collect())
            .unwrap_or_default();
        for n in scale_set {
            push(&format!("q4_slope_n{n}"), &|b| {
                cell_f64(
                    b.increments
                        .iter()
                        .find(|s| s.scale_n == n)
                        .and_then(|s| s.q4_slope.as_ref().map(|q| q.slope)),
                )
            });
            push(&format!("scenario_iv_share_n{n}"), &|b| {
                b.increments
                    .iter()
                    .find(|s| s.scale_n == n)
                    .map(|s| {
                        let c = s.scenarios.classified();
                        if c == 0 {
                            "-".into()
                        } else {
                            format!("{:.4}", s.scenarios.scenario_iv as f64 / c as f64)
                        }
                    })
                    .unwrap_or_else(|| "-".into())
            });
        }
    }

    Ok(ComparisonTable { columns, rows })
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            let _ = write!(out, "\"{label}\"");
            for cell in cells {
                let _ = write!(out, ",\"{cell}\"");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_aligned_text(&self) -> String {
        let label_width = self
            .rows
            .iter()
            .map(|(l, _)| l.len())
            .max()
            .unwrap_or(3)
            .max(3);
        let col_widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                self.rows
                    .iter()
                    .map(|(_, cells)| cells[i].len())
                    .max()
                    .unwrap_or(0)
                    .max(c.len())
            })
            .collect();
        let mut out = format!("{:label_width$}", "row");
        for (c, w) in self.columns.iter().zip(&col_widths) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
        let total = label_width + col_widths.iter().map(|w| w + 2).sum::<usize>();
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for (label, cells) in &self.rows {
            let _ = write!(out, "{label:label_width$}");
            for (cell, w) in cells.iter().zip(&col_widths) {
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
        }
        out
    }
}
