use crate::error::{Error, Result};
use crate::series::LabeledSeries;

/// Degenerate channels (range below this) keep scale 1.
const MIN_RANGE: f64 = 1e-12;

/// Per-channel affine map `v' = (v + shift) · scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationParams {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl NormalizationParams {
    pub fn identity(channels: usize) -> Self {
        NormalizationParams { shift: vec![0.0; channels], scale: vec![1.0; channels] }
    }

    pub fn channels(&self) -> usize {
        self.shift.len()
    }

    /// Min-max fit over all series pooled per channel.
    pub fn fit(train: &[LabeledSeries]) -> Result<Self> {
        let first = train.first().ok_or(Error::EmptyInput)?;
        let d = first.channels();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for s in train {
            s.ensure_channels(d)?;
            for c in 0..d {
                for &v in s.channel(c) {
                    lo[c] = lo[c].min(v);
                    hi[c] = hi[c].max(v);
                }
            }
        }
        let mut shift = Vec::with_capacity(d);
        let mut scale = Vec::with_capacity(d);
        for c in 0..d {
            if !lo[c].is_finite() {
                // channel without samples
                shift.push(0.0);
                scale.push(1.0);
                continue;
            }
            let range = hi[c] - lo[c];
            shift.push(-lo[c]);
            scale.push(if range < MIN_RANGE { 1.0 } else { 1.0 / range });
        }
        Ok(NormalizationParams { shift, scale })
    }

    /// Applies the map; values outside the fitted range are not clipped.
    pub fn apply(&self, series: &LabeledSeries) -> Result<LabeledSeries> {
        series.ensure_channels(self.channels())?;
        let mut values = series.values.clone();
        for c in 0..self.channels() {
            let (shift, scale) = (self.shift[c], self.scale[c]);
            for v in values.row_mut(c) {
                *v = (*v + shift) * scale;
            }
        }
        Ok(series.with_values(values))
    }
}
