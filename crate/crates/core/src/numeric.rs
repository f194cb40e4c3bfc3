//! Numeric encoders: fit on training values, apply to any finite value,
//! and invert where the map is injective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{normal_cdf, probit};
use crate::schema::{quantile_sorted, NumericStats};

/// Number of reference quantiles stored by the quantile transformer.
pub const QTTF_RESOLUTION: usize = 1000;
/// Empirical ranks are clipped to `[QTTF_EPS, 1 - QTTF_EPS]` before the probit.
pub const QTTF_EPS: f64 = 1e-7;
/// Scales the median absolute deviation to agree with σ under normality.
pub const MAD_SCALE: f64 = 1.4826;

const BOXCOX_LAMBDA_RANGE: (f64, f64) = (-2.0, 2.0);
const BOXCOX_TOL: f64 = 1e-4;
const BOXCOX_MIN_SAMPLES: usize = 8;
/// Apply-time bxcx inputs are raised to this fraction of the training minimum,
/// which keeps non-positive values finite without touching plausible inputs.
pub const BOXCOX_FLOOR_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericKind {
    Nmbr,
    Mnmx,
    Mnm3,
    Mean,
    Mxab,
    Bxcx,
    Qttf,
    Bins,
    Mad3,
}

impl NumericKind {
    pub fn code(self) -> &'static str {
        match self {
            NumericKind::Nmbr => "nmbr",
            NumericKind::Mnmx => "mnmx",
            NumericKind::Mnm3 => "mnm3",
            NumericKind::Mean => "mean",
            NumericKind::Mxab => "mxab",
            NumericKind::Bxcx => "bxcx",
            NumericKind::Qttf => "qttf",
            NumericKind::Bins => "bins",
            NumericKind::Mad3 => "mad3",
        }
    }

    pub fn width(self) -> usize {
        match self {
            NumericKind::Bins => 6,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NumericBasis {
    Nmbr {
        mean: f64,
        std: f64,
    },
    Mnmx {
        min: f64,
        max: f64,
    },
    Mnm3 {
        q01: f64,
        q99: f64,
    },
    Mean {
        mean: f64,
        min: f64,
        max: f64,
    },
    Mxab {
        absmax: f64,
    },
    Bxcx {
        lambda: f64,
        post_mean: f64,
        post_std: f64,
        /// Apply-time values below it are raised to it.
        floor: f64,
    },
    Qttf {
        reference_quantiles: Vec<f64>,
    },
    Bins {
        mean: f64,
        std: f64,
        boundaries: [f64; 4],
    },
    Mad3 {
        median: f64,
        mad: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverted {
    pub value: f64,
    /// The preimage is not unique (clipped at a cap or floor).
    pub lossy: bool,
}

impl Inverted {
    fn exact(value: f64) -> Self {
        Self { value, lossy: false }
    }
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn fit_numeric(kind: NumericKind, stats: &NumericStats, train_values: &[f64]) -> Result<NumericBasis> {
    if train_values.is_empty() || stats.count == 0 {
        return Err(Error::AllMissing("<train values>".into()));
    }
    Ok(match kind {
        NumericKind::Nmbr => NumericBasis::Nmbr {
            mean: stats.mean,
            std: stats.population_std,
        },
        NumericKind::Mnmx => NumericBasis::Mnmx {
            min: stats.min,
            max: stats.max,
        },
        NumericKind::Mnm3 => NumericBasis::Mnm3 {
            q01: stats.q01,
            q99: stats.q99,
        },
        NumericKind::Mean => NumericBasis::Mean {
            mean: stats.mean,
            min: stats.min,
            max: stats.max,
        },
        NumericKind::Mxab => NumericBasis::Mxab {
            absmax: stats.min.abs().max(stats.max.abs()),
        },
        NumericKind::Bxcx => {
            let lambda = fit_boxcox_lambda(train_values)?;
            let transformed: Vec<f64> = train_values.iter().map(|&x| boxcox(x, lambda)).collect();
            let n = transformed.len() as f64;
            let post_mean = transformed.iter().sum::<f64>() / n;
            let post_std = (transformed.iter().map(|t| (t - post_mean).powi(2)).sum::<f64>() / n).sqrt();
            NumericBasis::Bxcx {
                lambda,
                post_mean,
                post_std,
                floor: stats.min * BOXCOX_FLOOR_RATIO,
            }
        }
        NumericKind::Qttf => {
            let mut sorted = train_values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let last = (QTTF_RESOLUTION - 1) as f64;
            let reference_quantiles = (0..QTTF_RESOLUTION)
                .map(|i| quantile_sorted(&sorted, i as f64 / last))
                .collect();
            NumericBasis::Qttf { reference_quantiles }
        }
        NumericKind::Bins => {
            let (m, s) = (stats.mean, stats.population_std);
            NumericBasis::Bins {
                mean: m,
                std: s,
                boundaries: [m - 2.0 * s, m - s, m + s, m + 2.0 * s],
            }
        }
        NumericKind::Mad3 => NumericBasis::Mad3 {
            median: stats.median,
            mad: stats.mad,
        },
    })
}

impl NumericBasis {
    pub fn kind(&self) -> NumericKind {
        match self {
            NumericBasis::Nmbr { .. } => NumericKind::Nmbr,
            NumericBasis::Mnmx { .. } => NumericKind::Mnmx,
            NumericBasis::Mnm3 { .. } => NumericKind::Mnm3,
            NumericBasis::Mean { .. } => NumericKind::Mean,
            NumericBasis::Mxab { .. } => NumericKind::Mxab,
            NumericBasis::Bxcx { .. } => NumericKind::Bxcx,
            NumericBasis::Qttf { .. } => NumericKind::Qttf,
            NumericBasis::Bins { .. } => NumericKind::Bins,
            NumericBasis::Mad3 { .. } => NumericKind::Mad3,
        }
    }

    pub fn width(&self) -> usize {
        self.kind().width()
    }

    /// Zero spread: encoding collapses to a constant and cannot be inverted.
    pub fn is_degenerate(&self) -> bool {
        match self {
            NumericBasis::Nmbr { std, .. } | NumericBasis::Bins { std, .. } => *std == 0.0,
            NumericBasis::Mnmx { min, max } | NumericBasis::Mean { min, max, .. } => max == min,
            NumericBasis::Mnm3 { q01, q99 } => q99 == q01,
            NumericBasis::Mxab { absmax } => *absmax == 0.0,
            NumericBasis::Bxcx { post_std, .. } => *post_std == 0.0,
            NumericBasis::Qttf { reference_quantiles: q } => q.first() == q.last(),
            NumericBasis::Mad3 { mad, .. } => *mad == 0.0,
        }
    }

    /// First (or only) encoded component.
    pub fn encode_scalar(&self, x: f64) -> f64 {
        match self {
            NumericBasis::Nmbr { mean, std } | NumericBasis::Bins { mean, std, .. } => safe_div(x - mean, *std),
            NumericBasis::Mnmx { min, max } => safe_div(x - min, max - min),
            NumericBasis::Mnm3 { q01, q99 } => {
                if q99 == q01 {
                    0.0
                } else {
                    (x.clamp(*q01, *q99) - q01) / (q99 - q01)
                }
            }
            NumericBasis::Mean { mean, min, max } => safe_div(x - mean, max - min),
            NumericBasis::Mxab { absmax } => safe_div(x, *absmax),
            NumericBasis::Bxcx {
                lambda,
                post_mean,
                post_std,
                floor,
            } => {
                if *post_std == 0.0 {
                    0.0
                } else {
                    (boxcox(x.max(*floor), *lambda) - post_mean) / post_std
                }
            }
            NumericBasis::Qttf { reference_quantiles } => {
                let rank = empirical_rank(reference_quantiles, x);
                probit(rank.clamp(QTTF_EPS, 1.0 - QTTF_EPS))
            }
            NumericBasis::Mad3 { median, mad } => safe_div(x - median, MAD_SCALE * mad),
        }
    }

    pub fn encode_into(&self, x: f64, out: &mut Vec<f64>) {
        out.push(self.encode_scalar(x));
        if let NumericBasis::Bins { std, boundaries, .. } = self {
            let region = if *std == 0.0 {
                2
            } else {
                boundaries.iter().take_while(|&&b| x >= b).count()
            };
            out.extend((0..5).map(|i| if i == region { 1.0 } else { 0.0 }));
        }
    }

    pub fn encode(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        self.encode_into(x, &mut out);
        out
    }

    /// Recovers the pre-encoding value from this basis' encoded columns.
    pub fn invert(&self, encoded: &[f64]) -> Result<Inverted> {
        if self.is_degenerate() {
            return Err(Error::DegenerateBasis);
        }
        let e = *encoded
            .first()
            .ok_or_else(|| Error::MalformedCode("empty numeric code".into()))?;
        Ok(match self {
            NumericBasis::Nmbr { mean, std } | NumericBasis::Bins { mean, std, .. } => Inverted::exact(e * std + mean),
            NumericBasis::Mnmx { min, max } => Inverted::exact(min + e * (max - min)),
            NumericBasis::Mnm3 { q01, q99 } => Inverted {
                value: q01 + e.clamp(0.0, 1.0) * (q99 - q01),
                lossy: e <= 0.0 || e >= 1.0,
            },
            NumericBasis::Mean { mean, min, max } => Inverted::exact(e * (max - min) + mean),
            NumericBasis::Mxab { absmax } => Inverted::exact(e * absmax),
            NumericBasis::Bxcx {
                lambda,
                post_mean,
                post_std,
                floor,
            } => {
                let t = e * post_std + post_mean;
                match inverse_boxcox(t, *lambda) {
                    Some(v) if v > *floor => Inverted::exact(v),
                    _ => Inverted {
                        value: *floor,
                        lossy: true,
                    },
                }
            }
            NumericBasis::Qttf { reference_quantiles: q } => {
                let p = normal_cdf(e);
                let value = quantile_sorted(q, p);
                Inverted {
                    value,
                    lossy: p <= QTTF_EPS || p >= 1.0 - QTTF_EPS,
                }
            }
            NumericBasis::Mad3 { median, mad } => Inverted::exact(e * MAD_SCALE * mad + median),
        })
    }
}

/// Position of `x` within ascending reference quantiles, as a probability.
/// Runs of equal quantiles map to the midpoint of the run.
fn empirical_rank(q: &[f64], x: f64) -> f64 {
    let last = (q.len() - 1) as f64;
    let lower = q.partition_point(|&v| v < x);
    let upper = q.partition_point(|&v| v <= x);
    if upper > lower {
        return (lower + upper - 1) as f64 / 2.0 / last;
    }
    if lower == 0 {
        return 0.0;
    }
    if lower == q.len() {
        return 1.0;
    }
    let (a, b) = (q[lower - 1], q[lower]);
    ((lower - 1) as f64 + (x - a) / (b - a)) / last
}

pub fn boxcox(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < 1e-12 {
        x.ln()
    } else {
        (lambda * x.ln()).exp_m1() / lambda
    }
}

fn inverse_boxcox(t: f64, lambda: f64) -> Option<f64> {
    if lambda.abs() < 1e-12 {
        return Some(t.exp());
    }
    let base = lambda * t;
    if base <= -1.0 {
        return None;
    }
    let v = (base.ln_1p() / lambda).exp();
    v.is_finite().then_some(v)
}

/// Profile log-likelihood of the box-cox transform at `lambda`, constants dropped.
pub fn boxcox_log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let t: Vec<f64> = values.iter().map(|&x| boxcox(x, lambda)).collect();
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let log_sum: f64 = values.iter().map(|x| x.ln()).sum();
    (lambda - 1.0) * log_sum - 0.5 * n * var.ln()
}

/// Maximum-likelihood box-cox λ over [-2, 2] by golden-section search.
pub fn fit_boxcox_lambda(train_values: &[f64]) -> Result<f64> {
    if let Some(&bad) = train_values.iter().find(|&&x| x.is_nan() || x <= 0.0) {
        return Err(Error::NonPositive(bad));
    }
    if train_values.len() < BOXCOX_MIN_SAMPLES {
        return Err(Error::TooFewSamples(train_values.len()));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |l: f64| -boxcox_log_likelihood(train_values, l);
    let (mut a, mut b) = BOXCOX_LAMBDA_RANGE;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > BOXCOX_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok((a + b) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PowerKind {
    Bxcx,
    Mnmx,
    Mad3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEvidence {
    pub skewness: f64,
    pub min_value: f64,
    pub outlier_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerChoice {
    pub chosen: PowerKind,
    pub evidence: PowerEvidence,
}

impl PowerChoice {
    pub fn numeric_kind(&self) -> NumericKind {
        match self.chosen {
            PowerKind::Bxcx => NumericKind::Bxcx,
            PowerKind::Mnmx => NumericKind::Mnmx,
            PowerKind::Mad3 => NumericKind::Mad3,
        }
    }
}

/// Positive, clearly skewed data goes to box-cox; otherwise outlier-free data
/// gets min-max and anything with outliers gets the MAD-scaled encoding.
pub fn select_powertransform(stats: &NumericStats) -> PowerChoice {
    let evidence = PowerEvidence {
        skewness: stats.skewness,
        min_value: stats.min,
        outlier_fraction: stats.outlier_fraction,
    };
    let chosen = if stats.min > 0.0 && stats.skewness.abs() > 1.0 && stats.count >= BOXCOX_MIN_SAMPLES {
        PowerKind::Bxcx
    } else if stats.outlier_fraction == 0.0 {
        PowerKind::Mnmx
    } else {
        PowerKind::Mad3
    };
    PowerChoice { chosen, evidence }
}
