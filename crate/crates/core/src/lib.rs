//! Statistical toolkit for quantifying the predictability of hourly price
//! series: scale-dependent detrended fluctuation analysis, spectral exponent
//! estimation, Pareto tail fitting, and multiscale increment diagrams, with
//! seeded synthetic processes serving as estimator oracles.

pub mod dfa;
pub mod error;
pub mod fit;
pub mod increments;
pub mod pareto;
pub mod spectral;
pub mod synth;
pub mod timeseries;

pub use error::CoreError;
pub use timeseries::{AggregatedSeries, GapPolicy, PeakCalendar, PriceSeries};
