//! RIFF/WAVE PCM input. Only 16-bit signed integer PCM is accepted; stereo and
//! multichannel files are downmixed by averaging.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Audio {
    /// Mono samples scaled to `[-1, 1)`.
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

pub fn read_wav(path: &Path) -> Result<Audio> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedAudio(format!(
            "{}: expected 16-bit PCM, got {}-bit {:?}",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let channels = spec.channels.max(1) as usize;
    let raw: Vec<i16> = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| wav_error(path, e))?;
    let samples = raw
        .chunks(channels)
        .map(|frame| frame.iter().map(|&s| f64::from(s) / 32768.0).sum::<f64>() / frame.len() as f64)
        .collect();
    Ok(Audio { samples, sample_rate: spec.sample_rate })
}

/// Writes mono 16-bit PCM, clamping samples to `[-1, 1]`.
pub fn write_wav(path: &Path, audio: &Audio) -> Result<()> {
    let spec = WavSpec { channels: 1, sample_rate: audio.sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let mut w = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        w.write_sample(v).map_err(|e| wav_error(path, e))?;
    }
    w.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::UnsupportedAudio(format!("{}: compressed or unsupported encoding", path.display())),
        other => Error::UnsupportedAudio(format!("{}: {other}", path.display())),
    }
}
