//! Input preprocessing: MFCC front-end, min-max normalization and
//! support-point resampling, combined into a fitted [`Preprocessor`].

mod mfcc;
mod normalize;
mod resample;
mod wav;

pub use mfcc::{dct2_orthonormal, hann, hz_to_mel, mel_filterbank, mel_to_hz, mfcc, Mfcc, MfccConfig};
pub use normalize::NormalizationParams;
pub use resample::{resample, ResampleMode, DEFAULT_DEGREE, DEFAULT_SUPPORT_POINTS};
pub use wav::{read_wav, write_wav, Audio};

pub use crate::series::LabeledSeries;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    /// Applied to raw mono audio series before anything else.
    pub mfcc: Option<MfccConfig>,
    pub normalize: bool,
    pub resample: ResampleMode,
    pub support_points: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            mfcc: None,
            normalize: true,
            resample: ResampleMode::Polynomial(DEFAULT_DEGREE),
            support_points: DEFAULT_SUPPORT_POINTS,
        }
    }
}

/// A preprocessing pipeline whose normalization has been fitted to a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct Preprocessor {
    pub config: PreprocessConfig,
    pub normalization: Option<NormalizationParams>,
    /// Channel count expected on raw input.
    pub input_channels: usize,
}

impl Preprocessor {
    pub fn fit(config: &PreprocessConfig, train: &[LabeledSeries]) -> Result<Preprocessor> {
        let first = train.first().ok_or(Error::EmptyInput)?;
        let input_channels = first.channels();
        let features = train.iter().map(|s| extract(config, s)).collect::<Result<Vec<_>>>()?;
        let normalization = if config.normalize { Some(NormalizationParams::fit(&features)?) } else { None };
        Ok(Preprocessor { config: config.clone(), normalization, input_channels })
    }

    /// Channel count after preprocessing.
    pub fn output_channels(&self) -> usize {
        match &self.config.mfcc {
            Some(cfg) => cfg.n_coeffs,
            None => self.input_channels,
        }
    }

    pub fn apply(&self, series: &LabeledSeries) -> Result<LabeledSeries> {
        series.ensure_channels(self.input_channels)?;
        let mut s = extract(&self.config, series)?;
        if let Some(norm) = &self.normalization {
            s = norm.apply(&s)?;
        }
        resample(&s, self.config.support_points, self.config.resample)
    }
}

fn extract(config: &PreprocessConfig, series: &LabeledSeries) -> Result<LabeledSeries> {
    let Some(cfg) = &config.mfcc else {
        return Ok(series.clone());
    };
    series.ensure_channels(1)?;
    let rate = series
        .sample_rate_hz
        .ok_or_else(|| Error::Config(format!("series `{}` has no sample rate for MFCC extraction", series.id)))?;
    let out = mfcc(series.channel(0), rate, cfg)?;
    Ok(LabeledSeries { label: series.label, id: series.id.clone(), ..out })
}
