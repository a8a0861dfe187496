//! Seeded synthetic stochastic processes with known exponents, used as
//! oracles for the estimator modules.
//!
//! All generators draw from a ChaCha12 stream seeded from the spec, so a
//! given spec reproduces the same path on every run and platform. Fractional
//! Gaussian noise uses circulant embedding (Davies-Harte), which is exact in
//! covariance rather than an approximate spectral synthesis.

use chrono::{NaiveDate, NaiveDateTime};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{CoreError, PriceSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessKind {
    WhiteNoise {
        sigma: f64,
    },
    RandomWalk {
        sigma: f64,
    },
    Fbm {
        hurst: f64,
        sigma: f64,
    },
    Ou {
        mu: f64,
        theta: f64,
        sigma: f64,
    },
    Mrjd {
        mu: f64,
        theta: f64,
        sigma: f64,
        jump_rate: f64,
        jump_scale: f64,
    },
    SpikeTrain {
        baseline: f64,
        height: f64,
        rate: f64,
    },
    SinusoidMix {
        components: Vec<Sinusoid>,
        noise_sigma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub period_hours: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub seed: u64,
    pub length: usize,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.length < 64 {
            return Err(CoreError::InvalidSpec(format!(
                "length {} < 64",
                self.length
            )));
        }
        match &self.kind {
            ProcessKind::Fbm { hurst, .. } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(CoreError::InvalidSpec(format!(
                        "fbm Hurst {hurst} outside (0, 1)"
                    )));
                }
            }
            ProcessKind::Ou { theta, .. } => {
                if *theta <= 0.0 {
                    return Err(CoreError::InvalidSpec("ou reversion rate must be > 0".into()));
                }
            }
            ProcessKind::Mrjd {
                theta,
                jump_rate,
                jump_scale,
                ..
            } => {
                if *theta <= 0.0 {
                    return Err(CoreError::InvalidSpec("mrjd reversion rate must be > 0".into()));
                }
                if *jump_rate < 0.0 {
                    return Err(CoreError::InvalidSpec("mrjd jump intensity must be >= 0".into()));
                }
                if *jump_rate > 0.0 && *jump_scale <= 0.0 {
                    return Err(CoreError::InvalidSpec("mrjd jump scale must be > 0".into()));
                }
            }
            ProcessKind::SpikeTrain { rate, .. } => {
                if !(*rate >= 0.0 && *rate <= 1.0) {
                    return Err(CoreError::InvalidSpec("spike rate must be in [0, 1]".into()));
                }
            }
            ProcessKind::SinusoidMix { components, .. } => {
                if components.is_empty() {
                    return Err(CoreError::InvalidSpec("sinusoid mix needs components".into()));
                }
                if components.iter().any(|c| c.period_hours <= 0.0) {
                    return Err(CoreError::InvalidSpec("sinusoid period must be > 0".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn label(&self) -> String {
        let name = match &self.kind {
            ProcessKind::WhiteNoise { .. } => "white-noise",
            ProcessKind::RandomWalk { .. } => "random-walk",
            ProcessKind::Fbm { .. } => "fbm",
            ProcessKind::Ou { .. } => "ou",
            ProcessKind::Mrjd { .. } => "mrjd",
            ProcessKind::SpikeTrain { .. } => "spike-train",
            ProcessKind::SinusoidMix { .. } => "sinusoid-mix",
        };
        format!("{name}-seed{}", self.seed)
    }
}

fn epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2002, 5, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

/// Autocovariance of fractional Gaussian noise with unit variance:
/// (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    let k = lag as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Exact fGn sample of length `n` via circulant embedding.
fn sample_fgn(hurst: f64, n: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let m = (2 * n).next_power_of_two();
    let half = m / 2;
    // first row of the circulant embedding of the covariance matrix
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= half { j } else { m - j };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    // eigenvalues are real and nonnegative for fGn; clamp FFT round-off
    let lambda: Vec<f64> = row.iter().map(|c| c.re.max(0.0)).collect();

    let mf = m as f64;
    let mut v = vec![Complex::new(0.0, 0.0); m];
    let z0: f64 = rng.sample(StandardNormal);
    v[0] = Complex::new((lambda[0] / mf).sqrt() * z0, 0.0);
    let zh: f64 = rng.sample(StandardNormal);
    v[half] = Complex::new((lambda[half] / mf).sqrt() * zh, 0.0);
    for j in 1..half {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let scale = (lambda[j] / (2.0 * mf)).sqrt();
        v[j] = Complex::new(scale * a, scale * b);
        v[m - j] = v[j].conj();
    }
    fft.process(&mut v);
    v.iter().take(n).map(|c| c.re).collect()
}

/// Generate the series described by `spec`. Deterministic for a fixed spec.
pub fn gen(spec: &GeneratorSpec) -> Result<PriceSeries, CoreError> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let n = spec.length;
    let values: Vec<f64> = match &spec.kind {
        ProcessKind::WhiteNoise { sigma } => (0..n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        ProcessKind::RandomWalk { sigma } => {
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    acc += sigma * rng.sample::<f64, _>(StandardNormal);
                    acc
                })
                .collect()
        }
        ProcessKind::Fbm { hurst, sigma } => {
            let fgn = sample_fgn(*hurst, n, &mut rng);
            let mut acc = 0.0;
            fgn.iter()
                .map(|g| {
                    acc += sigma * g;
                    acc
                })
                .collect()
        }
        ProcessKind::Ou { mu, theta, sigma } => {
            let mut x = *mu;
            (0..n)
                .map(|_| {
                    let out = x;
                    x += theta * (mu - x) + sigma * rng.sample::<f64, _>(StandardNormal);
                    out
                })
                .collect()
        }
        ProcessKind::Mrjd {
            mu,
            theta,
            sigma,
            jump_rate,
            jump_scale,
        } => {
            let mut x = *mu;
            (0..n)
                .map(|_| {
                    let out = x;
                    x += theta * (mu - x) + sigma * rng.sample::<f64, _>(StandardNormal);
                    // jump draws come after the diffusion draw so a zero
                    // intensity leaves the diffusion stream untouched
                    if *jump_rate > 0.0 {
                        let count = Poisson::new(*jump_rate).unwrap().sample(&mut rng) as usize;
                        let exp = Exp::new(1.0 / jump_scale).unwrap();
                        for _ in 0..count {
                            x += exp.sample(&mut rng);
                        }
                    }
                    out
                })
                .collect()
        }
        ProcessKind::SpikeTrain {
            baseline,
            height,
            rate,
        } => {
            // spike amplitudes spread over (0, height] so lagged-increment
            // diagrams populate a full range of jump sizes; each spike still
            // reverts exactly to the baseline one step later
            let mut values = vec![*baseline; n];
            let mut last_spike: Option<usize> = None;
            for t in 1..n - 1 {
                let u: f64 = rng.gen();
                let isolated = last_spike.map_or(true, |s| t >= s + 3);
                if u < *rate && isolated {
                    let h = height * (1.0 - rng.gen::<f64>());
                    values[t] = baseline + h;
                    last_spike = Some(t);
                }
            }
            values
        }
        ProcessKind::SinusoidMix {
            components,
            noise_sigma,
        } => (0..n)
            .map(|t| {
                let tf = t as f64;
                let mut v: f64 = components
                    .iter()
                    .map(|c| c.amplitude * (2.0 * std::f64::consts::PI * tf / c.period_hours).sin())
                    .sum();
                if *noise_sigma > 0.0 {
                    v += noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
                v
            })
            .collect(),
    };
    PriceSeries::new(spec.label(), epoch(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lag1_autocorr(x: &[f64]) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let cov: f64 = (1..n).map(|i| (x[i] - mean) * (x[i - 1] - mean)).sum();
        cov / var
    }

    #[test]
    fn autocovariance_values() {
        assert_relative_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert_relative_eq!(fgn_autocovariance(0.5, 1), 0.0);
        assert_relative_eq!(
            fgn_autocovariance(0.8, 1),
            0.5 * (2f64.powf(1.6) - 2.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn seed_determinism() {
        let spec = GeneratorSpec {
            kind: ProcessKind::RandomWalk { sigma: 1.0 },
            seed: 5,
            length: 64,
        };
        let a = gen(&spec).unwrap();
        let b = gen(&spec).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn random_walk_is_cumsum_of_white_noise() {
        let wn = gen(&GeneratorSpec {
            kind: ProcessKind::WhiteNoise { sigma: 2.0 },
            seed: 9,
            length: 64,
        })
        .unwrap();
        let rw = gen(&GeneratorSpec {
            kind: ProcessKind::RandomWalk { sigma: 2.0 },
            seed: 9,
            length: 64,
        })
        .unwrap();
        let mut acc = 0.0;
        for (w, r) in wn.values.iter().zip(&rw.values) {
            acc += w;
            assert_relative_eq!(acc, *r, max_relative = 1e-12);
        }
    }

    #[test]
    fn fbm_half_has_uncorrelated_increments() {
        let s = gen(&GeneratorSpec {
            kind: ProcessKind::Fbm {
                hurst: 0.5,
                sigma: 1.0,
            },
            seed: 1,
            length: 1 << 14,
        })
        .unwrap();
        let incs: Vec<f64> = s.values.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(lag1_autocorr(&incs).abs() < 0.05);
    }

    #[test]
    fn fbm_increment_covariance_matches_formula() {
        let h = 0.8;
        let s = gen(&GeneratorSpec {
            kind: ProcessKind::Fbm {
                hurst: h,
                sigma: 1.0,
            },
            seed: 2,
            length: 1 << 16,
        })
        .unwrap();
        let incs: Vec<f64> = s.values.windows(2).map(|w| w[1] - w[0]).collect();
        let n = incs.len();
        let mean = incs.iter().sum::<f64>() / n as f64;
        for lag in 0..=10usize {
            let cov: f64 = (lag..n)
                .map(|i| (incs[i] - mean) * (incs[i - lag] - mean))
                .sum::<f64>()
                / (n - lag) as f64;
            let expected = fgn_autocovariance(h, lag);
            assert!(
                (cov - expected).abs() < 0.03,
                "lag {lag}: sample {cov} vs {expected}"
            );
        }
    }

    #[test]
    fn ou_reverts_to_mean() {
        let s = gen(&GeneratorSpec {
            kind: ProcessKind::Ou {
                mu: 50.0,
                theta: 0.1,
                sigma: 5.0,
            },
            seed: 4,
            length: 1 << 14,
        })
        .unwrap();
        let mean = s.values.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 50.0).abs() < 2.0, "mean {mean}");
        let incs: Vec<f64> = s.values.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(lag1_autocorr(&incs) < 0.0);
    }

    #[test]
    fn mrjd_zero_intensity_is_ou() {
        let ou = gen(&GeneratorSpec {
            kind: ProcessKind::Ou {
                mu: 40.0,
                theta: 0.05,
                sigma: 3.0,
            },
            seed: 8,
            length: 256,
        })
        .unwrap();
        let mrjd = gen(&GeneratorSpec {
            kind: ProcessKind::Mrjd {
                mu: 40.0,
                theta: 0.05,
                sigma: 3.0,
                jump_rate: 0.0,
                jump_scale: 1.0,
            },
            seed: 8,
            length: 256,
        })
        .unwrap();
        assert_eq!(ou.values, mrjd.values);
    }

    #[test]
    fn mrjd_jumps_raise_the_path() {
        let base = gen(&GeneratorSpec {
            kind: ProcessKind::Mrjd {
                mu: 40.0,
                theta: 0.05,
                sigma: 1.0,
                jump_rate: 0.05,
                jump_scale: 30.0,
            },
            seed: 8,
            length: 1 << 13,
        })
        .unwrap();
        let mean = base.values.iter().sum::<f64>() / base.len() as f64;
        assert!(mean > 45.0, "jumps should lift the mean, got {mean}");
    }

    #[test]
    fn spike_train_fully_reverts() {
        let s = gen(&GeneratorSpec {
            kind: ProcessKind::SpikeTrain {
                baseline: 20.0,
                height: 100.0,
                rate: 0.02,
            },
            seed: 12,
            length: 4096,
        })
        .unwrap();
        let mut spikes = 0;
        for t in 1..s.len() - 1 {
            if s.values[t] > 20.0 {
                spikes += 1;
                // up-move and down-move are exact mirrors
                assert_eq!(s.values[t - 1], 20.0);
                assert_eq!(s.values[t + 1], 20.0);
                assert!(s.values[t] <= 120.0);
            }
        }
        assert!(spikes > 20, "expected spikes, got {spikes}");
    }

    #[test]
    fn invalid_hurst_rejected() {
        let spec = GeneratorSpec {
            kind: ProcessKind::Fbm {
                hurst: 1.2,
                sigma: 1.0,
            },
            seed: 0,
            length: 128,
        };
        assert!(gen(&spec).is_err());
    }

    #[test]
    fn short_length_rejected() {
        let spec = GeneratorSpec {
            kind: ProcessKind::WhiteNoise { sigma: 1.0 },
            seed: 0,
            length: 63,
        };
        assert!(gen(&spec).is_err());
    }
}
