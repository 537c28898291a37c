use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// A multivariate time series (`channels × steps`) with optional class label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSeries {
    pub values: Matrix,
    pub label: Option<usize>,
    pub sample_rate_hz: Option<f64>,
    pub id: String,
}

impl LabeledSeries {
    pub fn new(values: Matrix) -> Result<Self> {
        values.ensure_finite()?;
        Ok(LabeledSeries { values, label: None, sample_rate_hz: None, id: String::new() })
    }

    /// Single-channel series from samples.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_vec(1, samples.len(), samples.to_vec())?)
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Self {
        self.sample_rate_hz = Some(hz);
        self
    }

    pub fn channels(&self) -> usize {
        self.values.rows()
    }

    pub fn steps(&self) -> usize {
        self.values.cols()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        self.values.row(c)
    }

    /// Same metadata, new values.
    pub fn with_values(&self, values: Matrix) -> Self {
        LabeledSeries { values, label: self.label, sample_rate_hz: self.sample_rate_hz, id: self.id.clone() }
    }

    pub fn ensure_channels(&self, expected: usize) -> Result<()> {
        if self.channels() == expected {
            Ok(())
        } else {
            Err(Error::ChannelMismatch { expected, got: self.channels() })
        }
    }
}
