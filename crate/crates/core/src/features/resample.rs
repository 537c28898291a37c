//! Support-point resampling: a variable-length series is reduced to `k`
//! equidistant points on normalized time `t ∈ [0, 1]`.

use crate::error::{Error, Result};
use crate::numerics::{solve_spd, Matrix};
use crate::series::LabeledSeries;

pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_SUPPORT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResampleMode {
    /// Least-squares polynomial of the given degree.
    Polynomial(usize),
    Linear,
    None,
}

impl std::fmt::Display for ResampleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResampleMode::Polynomial(d) => write!(f, "polynomial:{d}"),
            ResampleMode::Linear => f.write_str("linear"),
            ResampleMode::None => f.write_str("none"),
        }
    }
}

impl std::str::FromStr for ResampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ResampleMode::Linear),
            "none" => Ok(ResampleMode::None),
            "polynomial" => Ok(ResampleMode::Polynomial(DEFAULT_DEGREE)),
            _ => {
                let degree = s
                    .strip_prefix("polynomial:")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Config(format!("unknown resample mode `{s}`")))?;
                Ok(ResampleMode::Polynomial(degree))
            }
        }
    }
}

/// Resamples every channel to `k_points` equidistant points.
///
/// A polynomial fit on fewer samples than coefficients uses degree `L − 1`
/// (exact interpolation).
pub fn resample(series: &LabeledSeries, k_points: usize, mode: ResampleMode) -> Result<LabeledSeries> {
    if mode == ResampleMode::None {
        return Ok(series.clone());
    }
    let steps = series.steps();
    if steps < 2 {
        return Err(Error::TooShort { needed: 1, got: steps });
    }
    if k_points < 2 {
        return Err(Error::Config(format!("need at least 2 support points, got {k_points}")));
    }
    let targets: Vec<f64> = (0..k_points).map(|k| k as f64 / (k_points - 1) as f64).collect();
    let mut out = Matrix::zeros(series.channels(), k_points);
    match mode {
        ResampleMode::Linear => {
            for c in 0..series.channels() {
                let ch = series.channel(c);
                for (k, &t) in targets.iter().enumerate() {
                    out[(c, k)] = interp_linear(ch, t);
                }
            }
        }
        ResampleMode::Polynomial(degree) => {
            if degree < 1 {
                return Err(Error::BadDegree(degree));
            }
            let fit = PolyFit::new(steps, degree.min(steps - 1))?;
            for c in 0..series.channels() {
                let coeffs = fit.coefficients(series.channel(c))?;
                for (k, &t) in targets.iter().enumerate() {
                    out[(c, k)] = eval_poly(&coeffs, 2.0 * t - 1.0);
                }
            }
        }
        ResampleMode::None => unreachable!(),
    }
    Ok(series.with_values(out))
}

fn interp_linear(samples: &[f64], t: f64) -> f64 {
    let last = samples.len() - 1;
    let pos = t * last as f64;
    let i = (pos.floor() as usize).min(last - 1);
    let frac = pos - i as f64;
    if frac == 0.0 {
        samples[i]
    } else if frac == 1.0 {
        samples[i + 1]
    } else {
        samples[i] + frac * (samples[i + 1] - samples[i])
    }
}

/// Least-squares polynomial fit on `x = 2t − 1 ∈ [−1, 1]` through the normal
/// equations (well conditioned at the small degrees used here).
struct PolyFit {
    vandermonde: Matrix,
    gram: Matrix,
}

impl PolyFit {
    fn new(steps: usize, degree: usize) -> Result<Self> {
        let mut v = Matrix::zeros(steps, degree + 1);
        for i in 0..steps {
            let x = 2.0 * i as f64 / (steps - 1) as f64 - 1.0;
            let mut p = 1.0;
            for j in 0..=degree {
                v[(i, j)] = p;
                p *= x;
            }
        }
        let gram = v.transpose().matmul(&v);
        Ok(PolyFit { vandermonde: v, gram })
    }

    fn coefficients(&self, y: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.vandermonde.transpose().matmul(&Matrix::from_vec(y.len(), 1, y.to_vec())?);
        Ok(solve_spd(&self.gram, &rhs)?.into_vec())
    }
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
