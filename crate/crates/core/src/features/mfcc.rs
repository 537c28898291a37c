//! Mel-frequency cepstral coefficients.
//!
//! Per frame: periodic Hann window, radix-2 FFT power spectrum, triangular HTK
//! mel filterbank with unit peaks, `ln(energy + floor)`, orthonormal DCT-II.
//! Coefficient 0 is dropped unless `keep_c0` is set; frames become time steps.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::series::LabeledSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct MfccConfig {
    pub frame_length: usize,
    pub hop_length: usize,
    pub n_mels: usize,
    pub n_coeffs: usize,
    pub fmin_hz: f64,
    /// `None` means half the sample rate.
    pub fmax_hz: Option<f64>,
    pub log_floor: f64,
    pub keep_c0: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            frame_length: 512,
            hop_length: 128,
            n_mels: 26,
            n_coeffs: 12,
            fmin_hz: 0.0,
            fmax_hz: None,
            log_floor: 1e-10,
            keep_c0: false,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.frame_length.is_power_of_two() || self.frame_length < 2 {
            return Err(Error::NonPowerOfTwoFrame(self.frame_length));
        }
        if self.hop_length == 0 {
            return Err(Error::Config("hop length must be positive".into()));
        }
        if self.n_coeffs == 0 || self.n_coeffs > self.n_mels || (!self.keep_c0 && self.n_coeffs >= self.n_mels) {
            return Err(Error::Config(format!(
                "need 1 <= n_coeffs ({}) <= n_mels ({}) with room for the dropped c0",
                self.n_coeffs, self.n_mels
            )));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::Config("log floor must be positive".into()));
        }
        Ok(())
    }

    /// `floor((n − frame) / hop) + 1`, or 0 when `n < frame`.
    pub fn frame_count(&self, n_samples: usize) -> usize {
        if n_samples < self.frame_length {
            0
        } else {
            (n_samples - self.frame_length) / self.hop_length + 1
        }
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters (`n_mels × (frame/2 + 1)`), equally spaced in mel
/// between `fmin` and `fmax`, each peaking at 1.
pub fn mel_filterbank(n_mels: usize, frame_length: usize, sample_rate: f64, fmin: f64, fmax: f64) -> Matrix {
    let bins = frame_length / 2 + 1;
    let (mlo, mhi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let mut fb = Matrix::zeros(n_mels, bins);
    for m in 0..n_mels {
        let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        for b in 0..bins {
            let f = b as f64 * sample_rate / frame_length as f64;
            let w = if f <= lo || f >= hi {
                0.0
            } else if f <= center {
                (f - lo) / (center - lo)
            } else {
                (hi - f) / (hi - center)
            };
            fb[(m, b)] = w;
        }
    }
    fb
}

/// Orthonormal DCT-II of `x`.
pub fn dct2_orthonormal(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (std::f64::consts::PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * n)).cos())
                .sum();
            let w = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            w * s
        })
        .collect()
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect()
}

/// Reusable MFCC extractor for one sample rate.
pub struct Mfcc {
    cfg: MfccConfig,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    filterbank: Matrix,
}

impl Mfcc {
    pub fn new(cfg: &MfccConfig, sample_rate: f64) -> Result<Mfcc> {
        cfg.validate()?;
        if !(sample_rate > 0.0) {
            return Err(Error::Config(format!("sample rate must be positive, got {sample_rate}")));
        }
        let fmax = cfg.fmax_hz.unwrap_or(sample_rate / 2.0);
        if !(cfg.fmin_hz >= 0.0 && fmax > cfg.fmin_hz && fmax <= sample_rate / 2.0) {
            return Err(Error::Config(format!("need 0 <= fmin < fmax <= {}", sample_rate / 2.0)));
        }
        let fft = FftPlanner::new().plan_fft_forward(cfg.frame_length);
        Ok(Mfcc {
            cfg: cfg.clone(),
            fft,
            window: hann(cfg.frame_length),
            filterbank: mel_filterbank(cfg.n_mels, cfg.frame_length, sample_rate, cfg.fmin_hz, fmax),
        })
    }

    pub fn filterbank(&self) -> &Matrix {
        &self.filterbank
    }

    /// Coefficient matrix `n_coeffs × frames`.
    pub fn compute(&self, samples: &[f64]) -> Result<Matrix> {
        let cfg = &self.cfg;
        let frames = cfg.frame_count(samples.len());
        if frames == 0 {
            return Err(Error::TooShort { needed: cfg.frame_length - 1, got: samples.len() });
        }
        let first = usize::from(!cfg.keep_c0);
        let mut out = Matrix::zeros(cfg.n_coeffs, frames);
        let mut buf = vec![Complex::new(0.0, 0.0); cfg.frame_length];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let bins = cfg.frame_length / 2 + 1;
        let mut power = vec![0.0; bins];
        for f in 0..frames {
            let start = f * cfg.hop_length;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex::new(samples[start + i] * self.window[i], 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (p, b) in power.iter_mut().zip(&buf) {
                *p = b.norm_sqr();
            }
            let log_mel: Vec<f64> = (0..cfg.n_mels)
                .map(|m| {
                    let e: f64 = self.filterbank.row(m).iter().zip(&power).map(|(w, p)| w * p).sum();
                    (e + cfg.log_floor).ln()
                })
                .collect();
            let cep = dct2_orthonormal(&log_mel);
            for k in 0..cfg.n_coeffs {
                out[(k, f)] = cep[first + k];
            }
        }
        Ok(out)
    }
}

/// MFCC features of mono audio as a series with `n_coeffs` channels.
pub fn mfcc(samples: &[f64], sample_rate: f64, cfg: &MfccConfig) -> Result<LabeledSeries> {
    let coeffs = Mfcc::new(cfg, sample_rate)?.compute(samples)?;
    Ok(LabeledSeries::new(coeffs)?.with_sample_rate(sample_rate / cfg.hop_length as f64))
}
